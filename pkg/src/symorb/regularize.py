"""Moser regularization of the bounded energy components.

The bounded component of H^{-1}(c) around a chosen primary is compactified
into a hypersurface in T*S^2 = {(xi, eta) in R^3 x R^3 : |xi| = 1,
xi.eta = 0}.  The chain of charts is

    (q, p)  --->  (x, y) = (-p, q - q_primary)  --->  (xi, eta)

where the second map is the stereographic cotangent chart with x as base
point.  Collisions with the primary sit at the north pole xi = (1, 0, 0).

Writing m for the primary's mass, the shifted Kepler-like Hamiltonian
K = (H - c)|q - q_primary| satisfies K o S + m = |eta| * B(xi, eta) with a
smooth factor B, so

    Q := 0.5 |eta|^2 B^2

is smooth on all of T*S^2 (minus the far-away singularity of the second
primary) and the regularized surface is Q^{-1}(m^2/2).  The |eta|^2 factor
absorbs the square of the 1/|eta| left over from K o S, which is what makes
the north-pole value finite without 0*inf arithmetic.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .dynamics import (
    Problem,
    ProblemKind,
    hamiltonian,
    hill_lunar_critical_energy,
    hill_region,
    lagrange_points,
)
from .errors import DomainError, NumericalError

__all__ = [
    "sphere_point",
    "project_sphere_point",
    "constraint_residuals",
    "stereographic",
    "inverse_stereographic",
    "RegularizedSurface",
    "make_surface",
    "moser_map",
    "lift_plane_point",
    "K_hamiltonian",
    "regularized_involution",
    "involution_I",
    "involution_T_rho",
    "regularized_involution_prime",
    "fixed_locus_residual",
    "FixedLocusCircle",
    "fixed_locus_circles",
    "starshape_check",
    "export_circle_csv",
]

SPHERE_TOL = 1e-10


# ----------------------------------------------------------------------
# T*S^2 points


def sphere_point(xi, eta, tol: float = SPHERE_TOL) -> np.ndarray:
    """Pack and validate a point of T*S^2 as a 6-vector (xi, eta)."""
    w = np.concatenate([np.asarray(xi, dtype=float), np.asarray(eta, dtype=float)])
    norm_err, orth_err = constraint_residuals(w)
    if norm_err > tol or orth_err > tol:
        raise DomainError(
            f"not a T*S^2 point: | |xi|^2-1 | = {norm_err:.2e}, |xi.eta| = {orth_err:.2e}"
        )
    return w


def constraint_residuals(w) -> tuple:
    xi, eta = w[:3], w[3:]
    return abs(float(xi @ xi) - 1.0), abs(float(xi @ eta))


def project_sphere_point(w) -> np.ndarray:
    """Nearest-in-practice projection back onto |xi| = 1, xi.eta = 0."""
    w = np.asarray(w, dtype=float)
    xi = w[:3] / np.linalg.norm(w[:3])
    eta = w[3:] - (xi @ w[3:]) * xi
    return np.concatenate([xi, eta])


# ----------------------------------------------------------------------
# Stereographic cotangent chart


def stereographic(w) -> tuple:
    """Chart (xi, eta) -> (x, y); the north pole xi0 = 1 is the collision."""
    xi0, xi1, xi2, eta0, eta1, eta2 = w
    if abs(1.0 - xi0) < 1e-14:
        raise DomainError("stereographic chart excludes the north pole (collision point)")
    s = 1.0 - xi0
    x = np.array([xi1 / s, xi2 / s])
    y = np.array([eta1 * s + xi1 * eta0, eta2 * s + xi2 * eta0])
    return x, y


def inverse_stereographic(x, y) -> np.ndarray:
    """Exact inverse of the chart; output satisfies the constraints exactly."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    rho2 = float(x @ x)
    denom = rho2 + 1.0
    xi = np.array([(rho2 - 1.0) / denom, 2.0 * x[0] / denom, 2.0 * x[1] / denom])
    eta0 = float(x @ y)
    s = 1.0 - xi[0]  # = 2/denom, never zero
    eta = np.array([eta0, (y[0] - xi[1] * eta0) / s, (y[1] - xi[2] * eta0) / s])
    return project_sphere_point(np.concatenate([xi, eta]))


# ----------------------------------------------------------------------
# Regularized surfaces


@dataclass(frozen=True)
class RegularizedSurface:
    """One bounded component of H^{-1}(c), compactified into T*S^2.

    The chart is centered on `primary` ("earth"/"moon" for the PCRTBP,
    "earth" for rotating Kepler, "primary" for Hill's problem).  level is
    the regularized energy value m^2/2 where m is the primary's mass.
    """

    problem: Problem
    primary: str
    c: float
    primary_mass: float
    other_mass: float
    q1_primary: float
    other_offset: float  # q1 of the other primary in the chart, if any
    level: float
    hill_terms: bool
    _cache: dict = field(default_factory=dict, repr=False, compare=False)

    # -- scalar building blocks (dtype-generic: complex-step safe) --------

    def chart_position(self, w):
        """y = q - q_primary expressed in (xi, eta); polynomial, any dtype."""
        xi0, xi1, xi2, eta0, eta1, eta2 = w
        s = 1.0 - xi0
        return eta1 * s + xi1 * eta0, eta2 * s + xi2 * eta0

    def smooth_factor(self, w):
        """The smooth B with K o S + m = |eta| B."""
        xi0, xi1, xi2, eta0, eta1, eta2 = w
        s = 1.0 - xi0
        y1, y2 = self.chart_position(w)
        b = 0.5 * (1.0 + xi0) - self.c * s - y2 * xi1 + (y1 + self.q1_primary) * xi2
        if self.other_mass != 0.0:
            d = np.sqrt((y1 - self.other_offset) ** 2 + y2 * y2)
            b = b - self.other_mass * s / d
        if self.hill_terms:
            b = b - s * (y1 * y1 - 0.5 * y2 * y2)
        return b

    def Q(self, w):
        """Regularized Hamiltonian, smooth through the north pole."""
        eta = w[3:]
        e2 = eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2]
        b = self.smooth_factor(w)
        return 0.5 * e2 * b * b

    def level_residual(self, w) -> float:
        return float(self.Q(w).real if np.iscomplexobj(w) else self.Q(w)) - self.level

    def ray_gap(self, w):
        """|eta| B - m; vanishes exactly on the regularized level set."""
        eta = w[3:]
        e = np.sqrt(eta[0] * eta[0] + eta[1] * eta[1] + eta[2] * eta[2])
        return e * self.smooth_factor(w) - self.primary_mass

    def Q_grad(self, w):
        """Analytic gradient (dQ/dxi, dQ/deta) as a 6-vector."""
        xi0, xi1, xi2, eta0, eta1, eta2 = w
        dtype = np.result_type(np.asarray(w).dtype, float)
        s = 1.0 - xi0
        y1, y2 = self.chart_position(w)
        # partials of y1, y2 w.r.t. (xi0, xi1, xi2, eta0, eta1, eta2)
        dy1 = np.array([-eta1, eta0, 0.0, xi1, s, 0.0], dtype=dtype)
        dy2 = np.array([-eta2, 0.0, eta0, xi2, 0.0, s], dtype=dtype)

        db = np.zeros(6, dtype=dtype)
        db[0] = 0.5 + self.c
        db += -dy2 * xi1 + dy1 * xi2
        db[1] -= y2
        db[2] += y1 + self.q1_primary
        if self.other_mass != 0.0:
            dd = (y1 - self.other_offset) * dy1 + y2 * dy2
            d = np.sqrt((y1 - self.other_offset) ** 2 + y2 * y2)
            dd /= d
            db[0] += self.other_mass / d
            db += self.other_mass * s * dd / (d * d)
        if self.hill_terms:
            db[0] += y1 * y1 - 0.5 * y2 * y2
            db -= s * (2.0 * y1 * dy1 - y2 * dy2)

        b = self.smooth_factor(w)
        e2 = eta0 * eta0 + eta1 * eta1 + eta2 * eta2
        grad = e2 * b * db
        grad[3] += eta0 * b * b
        grad[4] += eta1 * b * b
        grad[5] += eta2 * b * b
        return grad

    def vector_field(self, w):
        """Hamiltonian vector field of Q constrained to T*S^2.

        With omega = dxi ^ deta the unconstrained field (Q_eta, -Q_xi) is
        corrected by constraint multipliers so the flow preserves |xi| = 1
        and xi.eta = 0.
        """
        xi = np.asarray(w)[:3]
        eta = np.asarray(w)[3:]
        g = self.Q_grad(w)
        q_xi, q_eta = g[:3], g[3:]
        a = eta @ q_eta - xi @ q_xi
        b = xi @ q_eta
        dxi = q_eta - b * xi
        deta = -q_xi - a * xi + b * eta
        return np.concatenate([dxi, deta])

    def reeb_rate(self, w) -> float:
        """lambda(X_Q) = eta . Q_eta; positive on the surface."""
        g = self.Q_grad(w)
        return float(w[3:] @ g[3:])

    def time_rate(self, w) -> float:
        """dt/dtau: physical time per unit regularized flow time."""
        xi0 = w[0]
        eta = w[3:]
        return self.primary_mass * math.sqrt(float(eta @ eta)) * (1.0 - xi0)

    # -- geometry of the bounded component --------------------------------

    def hill_grid(self, n: int = 384):
        if "hill_grid" not in self._cache:
            window = 2.5 if self.problem.kind is ProblemKind.HILL_LUNAR else 1.5
            self._cache["hill_grid"] = hill_region(self.problem, self.c, n=n, window=window)
        return self._cache["hill_grid"]

    def component_radius(self) -> float:
        """Max distance from the primary within its bounded Hill component."""
        if "radius" not in self._cache:
            grid = self.hill_grid()
            label = grid.component_label_for(self.primary)
            if label is None:
                raise NumericalError(
                    f"no bounded Hill component found for {self.primary} at c={self.c}"
                )
            ii, jj = np.nonzero(grid.component_of == label)
            qp = np.array([self.q1_primary, 0.0])
            d = np.hypot(grid.q1[ii] - qp[0], grid.q2[jj] - qp[1])
            cell = grid.q1[1] - grid.q1[0]
            self._cache["radius"] = float(d.max() + 2.0 * cell)
        return self._cache["radius"]

    def position_in_component(self, q) -> bool:
        grid = self.hill_grid()
        return grid.contains(q, self.primary)

    def metadata(self) -> dict:
        return {
            "kind": self.problem.kind.value,
            "mu": self.problem.mu,
            "c": self.c,
            "primary": self.primary,
            "level": self.level,
        }


def make_surface(problem: Problem, c: float, primary: str | None = None) -> RegularizedSurface:
    """Build the regularized surface for the bounded component at energy c."""
    if problem.kind is ProblemKind.PCRTBP:
        if primary not in ("earth", "moon"):
            raise DomainError("PCRTBP needs primary 'earth' or 'moon'")
        crit = lagrange_points(problem.mu).energy("L1")
        if c >= crit:
            raise DomainError(f"need c < H(L1) = {crit:.6f}, got {c}")
        mu = problem.mu
        if primary == "moon":
            m_p, m_o = mu, 1.0 - mu
            q1p, off = mu - 1.0, 1.0
        else:
            m_p, m_o = 1.0 - mu, mu
            q1p, off = mu, -1.0
        return RegularizedSurface(problem, primary, c, m_p, m_o, q1p, off, 0.5 * m_p**2, False)
    if problem.kind is ProblemKind.ROTATING_KEPLER:
        if primary not in (None, "earth"):
            raise DomainError("rotating Kepler regularizes at the earth")
        # equality admitted: the bounded region closes up exactly at c = -3/2
        if c > -1.5:
            raise DomainError(f"need c <= -3/2 for a bounded rotating-Kepler component, got {c}")
        return RegularizedSurface(problem, "earth", c, 1.0, 0.0, 0.0, 0.0, 0.5, False)
    if primary not in (None, "primary"):
        raise DomainError("Hill's problem regularizes at its single primary")
    crit = hill_lunar_critical_energy()
    if c >= crit:
        raise DomainError(f"need c < {crit:.6f} for Hill's problem, got {c}")
    return RegularizedSurface(problem, "primary", c, 1.0, 0.0, 0.0, 0.0, 0.5, True)


# ----------------------------------------------------------------------
# Maps between the charts


def moser_map(surface: RegularizedSurface, w) -> np.ndarray:
    """(xi, eta) -> (q, p): position y + q_primary, momentum -x."""
    x, y = stereographic(w)
    return np.array([y[0] + surface.q1_primary, y[1], -x[0], -x[1]])


def lift_plane_point(surface: RegularizedSurface, z) -> np.ndarray:
    """Inverse of moser_map on the chart's domain."""
    z = np.asarray(z, dtype=float)
    y = np.array([z[0] - surface.q1_primary, z[1]])
    x = np.array([-z[2], -z[3]])
    return inverse_stereographic(x, y)


def K_hamiltonian(surface: RegularizedSurface, z) -> float:
    """K = (H - c) |q - q_primary|; its 0-level is H^{-1}(c), reparameterized."""
    z = np.asarray(z, dtype=float)
    r = math.hypot(z[0] - surface.q1_primary, z[1])
    return (hamiltonian(surface.problem, z) - surface.c) * r


# ----------------------------------------------------------------------
# Involutions on T*S^2

_RR_SIGNS = np.array([1.0, -1.0, 1.0, -1.0, 1.0, -1.0])
_I_SIGNS = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])
_TRHO_SIGNS = np.array([1.0, -1.0, 1.0, 1.0, -1.0, 1.0])
_RRPRIME_SIGNS = np.array([1.0, 1.0, -1.0, -1.0, -1.0, 1.0])


def regularized_involution(w) -> np.ndarray:
    """The anti-symplectic involution conjugate to the planar reflection."""
    return _RR_SIGNS * np.asarray(w, dtype=float)


def involution_I(w) -> np.ndarray:
    """Fiberwise sign flip (xi, eta) -> (xi, -eta)."""
    return _I_SIGNS * np.asarray(w, dtype=float)


def involution_T_rho(w) -> np.ndarray:
    """Cotangent lift of the reflection of S^2 about the great circle xi1 = 0."""
    return _TRHO_SIGNS * np.asarray(w, dtype=float)


def regularized_involution_prime(w) -> np.ndarray:
    """Second involution of Hill's problem: lift of the reflection about xi2 = 0."""
    return _RRPRIME_SIGNS * np.asarray(w, dtype=float)


def fixed_locus_residual(w, which: str = "R") -> float:
    """Scalar defect of membership in the fixed locus, given the constraints.

    On {xi1 = 0} the constraint xi.eta = 0 forces (eta0, eta2) to be a
    multiple of (-xi2, xi0); the residual is that multiple.  Analogously on
    {xi2 = 0} for the second involution.
    """
    if which == "R":
        return float(w[0] * w[5] - w[2] * w[3])
    return float(w[0] * w[4] - w[1] * w[3])


# ----------------------------------------------------------------------
# Fixed-locus circles L+ and L-


@dataclass
class FixedLocusCircle:
    """One of the two circles Fix(R) cap Sigma, sampled over the fiber angle.

    Points are ((cos t, 0, sin t), (0, f(t), 0)); f is positive on the "+"
    circle and negative on the "-" circle.  q1_projected is the footpoint of
    the Moser image on the q1-axis.
    """

    sign: int
    thetas: np.ndarray
    f: np.ndarray
    q1_projected: np.ndarray
    surface: RegularizedSurface

    def point(self, i: int) -> np.ndarray:
        t = self.thetas[i]
        return self.point_at(t, self.f[i])

    @staticmethod
    def point_at(theta: float, f: float) -> np.ndarray:
        return np.array([math.cos(theta), 0.0, math.sin(theta), 0.0, f, 0.0])

    @property
    def q1_range(self) -> tuple:
        return float(self.q1_projected.min()), float(self.q1_projected.max())


def _circle_radius(surface: RegularizedSurface, theta: float, sign: int) -> float:
    """Solve |eta| B = m along the fiber ray eta = (0, sign*u, 0), u > 0.

    At the critical energy the ray can touch the level set tangentially;
    a modulus-minimum fallback accepts such double roots.
    """

    def gap(u: float) -> float:
        w = np.array([math.cos(theta), 0.0, math.sin(theta), 0.0, sign * u, 0.0])
        return float(surface.ray_gap(w))

    hi = max(surface.primary_mass, 1e-3)
    g0 = gap(0.0)
    grow = 0
    while gap(hi) * g0 > 0.0:
        hi *= 2.0
        grow += 1
        if grow > 60:
            from scipy.optimize import minimize_scalar

            res = minimize_scalar(lambda u: abs(gap(u)), bounds=(0.0, 1e6),
                                  method="bounded", options={"xatol": 1e-13})
            if res.fun < 1e-8:
                return sign * float(res.x)
            raise NumericalError(f"no fiber crossing found at theta={theta}")
    root = brentq(gap, 0.0, hi, xtol=1e-12, rtol=8.9e-16)
    return sign * root


def fixed_locus_circles(surface: RegularizedSurface, samples: int = 256,
                        check_starshape: bool = True):
    """Sample both circles of Fix(R) cap Sigma over the fiber angle.

    Raises NumericalError when a fiber ray meets the level set more than
    once inside the bounded component (starshapedness violation).
    """
    thetas = np.linspace(0.0, 2.0 * math.pi, samples, endpoint=False)
    out = []
    for sign in (+1, -1):
        f = np.array([_circle_radius(surface, t, sign) for t in thetas])
        q1 = f * (1.0 - np.cos(thetas)) + surface.q1_primary
        circ = FixedLocusCircle(sign=sign, thetas=thetas, f=f, q1_projected=q1, surface=surface)
        if check_starshape:
            _check_single_crossing(surface, circ)
        out.append(circ)
    return out[0], out[1]


def _check_single_crossing(surface: RegularizedSurface, circ: FixedLocusCircle):
    """Scan beyond the found root for extra crossings inside the component."""
    rmax = surface.component_radius()
    for t, f in zip(circ.thetas[:: max(1, len(circ.thetas) // 16)],
                    circ.f[:: max(1, len(circ.f) // 16)]):
        s = 1.0 - math.cos(t)
        if s < 1e-9:
            continue
        u_lim = 1.5 * rmax / s
        us = np.linspace(abs(f) * 1.001, u_lim, 64)
        if len(us) < 2 or us[0] >= us[-1]:
            continue
        gaps = [
            float(surface.ray_gap(np.array([math.cos(t), 0.0, math.sin(t), 0.0, circ.sign * u, 0.0])))
            for u in us
        ]
        crossings = np.nonzero(np.diff(np.sign(gaps)) != 0)[0]
        for k in crossings:
            w = FixedLocusCircle.point_at(t, circ.sign * us[k])
            q = moser_map(surface, w)[:2]
            if surface.position_in_component(q):
                raise NumericalError(
                    f"starshapedness violation: extra fiber crossing at theta={t:.4f}"
                )


# ----------------------------------------------------------------------
# Fiberwise starshapedness check


@dataclass
class StarshapeReport:
    passed: bool
    samples: int
    bad_rays: list
    flagged_tangential: list

    def as_dict(self) -> dict:
        return {
            "passed": self.passed,
            "samples": self.samples,
            "bad_rays": self.bad_rays,
            "flagged_tangential": self.flagged_tangential,
        }


def ray_crossing_count(gap_values: np.ndarray, ts: np.ndarray, slope_tol: float = 1e-8):
    """Count transversal sign changes of a sampled ray function.

    Returns (count, flagged) where flagged marks crossings whose secant
    slope falls below slope_tol (tangential within tolerance).
    """
    sgn = np.sign(gap_values)
    idx = np.nonzero((sgn[:-1] * sgn[1:]) < 0)[0]
    flagged = []
    for k in idx:
        slope = abs(gap_values[k + 1] - gap_values[k]) / (ts[k + 1] - ts[k])
        if slope < slope_tol:
            flagged.append(float(ts[k]))
    return len(idx), flagged


def starshape_check(surface, n_base: int = 24, n_dir: int = 8, seed: int = 0,
                    grid: int = 400) -> StarshapeReport:
    """Sample fiber rays and verify each meets the surface exactly once.

    Works for RegularizedSurface, or any object with ray_gap, primary_mass,
    component_radius and (optionally) position filtering via moser_map.
    """
    rng = np.random.default_rng(seed)
    bad = []
    flagged = []
    total = 0
    is_real_surface = isinstance(surface, RegularizedSurface)
    rmax = surface.component_radius()
    for _ in range(n_base):
        xi = rng.normal(size=3)
        xi /= np.linalg.norm(xi)
        for _ in range(n_dir):
            v = rng.normal(size=3)
            v -= (xi @ v) * xi
            nv = np.linalg.norm(v)
            if nv < 1e-8:
                continue
            v /= nv
            total += 1
            s = 1.0 - xi[0]
            t_hi = 1.5 * rmax / s if s > 1e-6 else 4.0 * surface.primary_mass
            ts = np.linspace(1e-9, t_hi, grid)
            gaps = np.array([surface.ray_gap(np.concatenate([xi, t * v])) for t in ts])
            count = 0
            sgn = np.sign(gaps)
            for k in np.nonzero((sgn[:-1] * sgn[1:]) < 0)[0]:
                w = np.concatenate([xi, ts[k] * v])
                if is_real_surface:
                    q = moser_map(surface, w)[:2] if abs(1 - xi[0]) > 1e-12 else None
                    if q is not None and not surface.position_in_component(q):
                        continue
                slope = abs(gaps[k + 1] - gaps[k]) / (ts[k + 1] - ts[k])
                if slope < 1e-8:
                    flagged.append((xi.tolist(), v.tolist(), float(ts[k])))
                    continue
                count += 1
            if count != 1:
                bad.append({"xi": xi.tolist(), "dir": v.tolist(), "count": count})
    return StarshapeReport(passed=not bad, samples=total, bad_rays=bad, flagged_tangential=flagged)


def export_circle_csv(circ: FixedLocusCircle, path, json_path=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["theta", "f", "xi0", "xi2", "q1_projected"])
        for t, f, q1 in zip(circ.thetas, circ.f, circ.q1_projected):
            writer.writerow([f"{t:.12g}", f"{f:.12g}", f"{math.cos(t):.12g}",
                             f"{math.sin(t):.12g}", f"{q1:.12g}"])
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump(circ.surface.metadata() | {"circle": "+" if circ.sign > 0 else "-"}, fh, indent=2)
