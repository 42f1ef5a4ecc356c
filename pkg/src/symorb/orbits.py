"""Symmetric periodic orbits via shooting from the fixed-locus circles.

A chord x(t) of the regularized flow with both endpoints on the fixed locus
doubles to a symmetric periodic orbit through the reflected continuation
x(T + t) = R x(T - t).  The boundary value problem has one shooting
parameter (the fiber angle on L+ or L-) once the crossing count of the
section {xi1 = 0} is fixed: on the section, membership in the fixed locus
reduces to a single scalar residual.

The rotating Kepler problem (mu = 0) supplies analytic test orbits: circular
solutions and ellipses closing after k inertial periods and l frame turns.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq
from scipy.spatial import cKDTree

from .dynamics import Problem, ProblemKind
from .errors import DomainError, NumericalError
from .flow import IntegratorConfig, event_return_to_fixed_locus, integrate
from .regularize import (
    FixedLocusCircle,
    RegularizedSurface,
    fixed_locus_residual,
    lift_plane_point,
    make_surface,
    moser_map,
    regularized_involution,
    regularized_involution_prime,
)

__all__ = [
    "SymmetricOrbit",
    "ShootingOutcome",
    "circle_point",
    "shooting_residual",
    "find_symmetric_orbits",
    "solve_orbit_from_start",
    "classify",
    "double_and_iterate",
    "trace_distance",
    "hausdorff_to_curve",
    "orbit_oracle_trace_gap",
    "KeplerOrbitSpec",
    "KeplerOrbit",
    "kepler_oracle",
    "InfeasibleOrbitError",
    "doubly_symmetric_detect",
    "orbit_record",
]

DEFAULT_SCAN_CONFIG = IntegratorConfig(rtol=1e-9, atol=1e-9)
DEFAULT_REFINE_CONFIG = IntegratorConfig(rtol=1e-12, atol=1e-12)


@dataclass
class SymmetricOrbit:
    """A solved chord of the fixed-locus boundary value problem.

    T is the half period in the regularized flow time, T_phys the physical
    half period; the doubled orbit has period 2T.  circle_start/circle_end
    are +-1 for L+ and L-.
    """

    surface: RegularizedSurface
    theta0: float
    circle_start: int
    circle_end: int
    n_cross: int
    T: float
    T_phys: float
    w0: np.ndarray
    wT: np.ndarray
    residual: float
    nondegeneracy: float
    times: np.ndarray
    states: np.ndarray
    orbit_type: str = ""
    collision: bool = False
    classification: dict = field(default_factory=dict)
    trajectory: object = None  # dense chord trajectory, kept for re-evaluation

    @property
    def doubled_period(self) -> float:
        return 2.0 * self.T

    def doubled(self):
        """Sample sequence of the closed orbit x_R # x on [0, 2T]."""
        t2 = 2.0 * self.T - self.times[::-1]
        s2 = np.array([regularized_involution(w) for w in self.states[::-1]])
        times = np.concatenate([self.times, t2[1:]])
        states = np.vstack([self.states, s2[1:]])
        return times, states

    def sphere_state(self, tau: float) -> np.ndarray:
        """Point of the doubled orbit at flow time tau in [0, 2T]."""
        tau = tau % self.doubled_period
        if tau <= self.T:
            if self.trajectory is not None:
                return self.trajectory.dense(tau)[:6]
            k = int(np.searchsorted(self.times, tau))
            return self.states[min(k, len(self.states) - 1)]
        return regularized_involution(self.sphere_state(2.0 * self.T - tau))

    def plane_state(self, tau: float) -> np.ndarray:
        return moser_map(self.surface, self.sphere_state(tau))

    def min_pole_distance(self) -> float:
        return float((1.0 - self.states[:, 0]).min())


def circle_point(surface: RegularizedSurface, sign: int, theta: float) -> np.ndarray:
    """Point of L+ (sign=+1) or L- (sign=-1) at fiber angle theta."""
    from .regularize import _circle_radius

    f = _circle_radius(surface, theta, sign)
    return np.array([math.cos(theta), 0.0, math.sin(theta), 0.0, f, 0.0])


@dataclass
class ShootingOutcome:
    found: bool
    residuals: list  # residual at each section crossing seen, in order
    times: list
    phys_times: list
    states: list
    closest: dict | None = None

    def residual_at(self, n: int):
        return self.residuals[n - 1] if len(self.residuals) >= n else None


def shooting_residual(surface: RegularizedSurface, sign: int, theta0: float,
                      config: IntegratorConfig = DEFAULT_SCAN_CONFIG,
                      n_cross: int = 1) -> ShootingOutcome:
    """Integrate from the circle point and record fixed-locus defects.

    The defect at a crossing of {xi1 = 0} is xi0*eta2 - xi2*eta0; it
    vanishes exactly when the crossing lies in the fixed locus.
    """
    w0 = circle_point(surface, sign, theta0)
    res = event_return_to_fixed_locus(surface, w0, config, n_cross=n_cross)
    residuals = [fixed_locus_residual(y[:6]) for _, y in res.crossings]
    times = [t for t, _ in res.crossings]
    phys = [y[6] for _, y in res.crossings]
    states = [y[:6] for _, y in res.crossings]
    return ShootingOutcome(found=len(residuals) >= n_cross, residuals=residuals,
                           times=times, phys_times=phys, states=states, closest=res.closest)


def _suggested_t_max(surface: RegularizedSurface) -> float:
    """Flow-time budget: several Kepler-like periods at the component scale.

    Physical time t and flow time tau are related by dt = m |y| dtau, so a
    period T at radius r costs about T / (m r) in flow time.
    """
    r = 0.4 * max(surface.component_radius(), 1e-2)
    t_kep = 2.0 * math.pi * math.sqrt(r**3 / surface.primary_mass)
    return min(1e5, 20.0 * t_kep / (surface.primary_mass * r))


def _solve_orbit(surface: RegularizedSurface, sign: int, theta: float, n: int,
                 config: IntegratorConfig, residual_tol: float) -> SymmetricOrbit | None:
    w0 = circle_point(surface, sign, theta)
    res = event_return_to_fixed_locus(surface, w0, config, n_cross=n, keep_trajectory=True)
    if not res.found or len(res.crossings) < n:
        return None
    t_star, y_star = res.crossings[n - 1]
    resid = fixed_locus_residual(y_star[:6])
    if abs(resid) > residual_tol:
        return None
    ts = np.linspace(0.0, t_star, 400)
    states = np.array([res.trajectory.dense(t)[:6] for t in ts])
    res.trajectory.events = []
    orbit = SymmetricOrbit(
        surface=surface,
        theta0=theta,
        circle_start=sign,
        circle_end=1 if y_star[4] > 0 else -1,
        n_cross=n,
        T=t_star,
        T_phys=float(y_star[6]),
        w0=w0,
        wT=y_star[:6].copy(),
        residual=float(resid),
        nondegeneracy=0.0,
        times=ts,
        states=states,
    )
    orbit.trajectory = res.trajectory
    orbit.collision = orbit.min_pole_distance() < 1e-6
    orbit.orbit_type = classify(orbit)
    return orbit


def find_symmetric_orbits(surface: RegularizedSurface, scan: int = 720,
                          n_cross_values=(1, 2, 3),
                          scan_config: IntegratorConfig | None = None,
                          refine_config: IntegratorConfig | None = None,
                          residual_tol: float = 1e-9,
                          dedup_tol: float = 1e-6) -> list:
    """Scan both circles, bracket residual sign changes, refine, deduplicate.

    Returns geometrically distinct orbits (equal traces up to time shift and
    the involution are merged).  An empty list means the scan found nothing;
    diagnostics are embedded in the exception-free return.
    """
    t_max = _suggested_t_max(surface)
    if scan_config is None:
        scan_config = IntegratorConfig(rtol=DEFAULT_SCAN_CONFIG.rtol,
                                       atol=DEFAULT_SCAN_CONFIG.atol, t_max=t_max)
    if refine_config is None:
        refine_config = IntegratorConfig(rtol=DEFAULT_REFINE_CONFIG.rtol,
                                         atol=DEFAULT_REFINE_CONFIG.atol, t_max=t_max)
    n_max = max(n_cross_values)
    thetas = np.linspace(0.0, 2.0 * math.pi, scan, endpoint=False)
    orbits = []
    for sign in (+1, -1):
        table = {n: np.full(scan, np.nan) for n in n_cross_values}
        for i, th in enumerate(thetas):
            try:
                out = shooting_residual(surface, sign, th, scan_config, n_cross=n_max)
            except NumericalError:
                continue  # degenerate circle sample or drift blow-up: leave the gap
            for n in n_cross_values:
                r = out.residual_at(n)
                if r is not None:
                    table[n][i] = r
        for n in n_cross_values:
            row = table[n]
            for i in range(scan):
                j = (i + 1) % scan
                a, b = row[i], row[j]
                if not (np.isfinite(a) and np.isfinite(b)) or a * b >= 0:
                    continue
                th_a = thetas[i]
                th_b = thetas[j] if j != 0 else 2.0 * math.pi

                def fres(th):
                    out = shooting_residual(surface, sign, th, refine_config, n_cross=n)
                    r = out.residual_at(n)
                    if r is None:
                        raise NumericalError("crossing disappeared during refinement")
                    return r

                try:
                    th_star = brentq(fres, th_a, th_b, xtol=1e-10, rtol=8.9e-16)
                except (ValueError, NumericalError):
                    continue
                orbit = _solve_orbit(surface, sign, th_star, n, refine_config, residual_tol)
                if orbit is None:
                    continue
                h = 1e-6
                try:
                    slope = (fres(th_star + h) - fres(th_star - h)) / (2 * h)
                except NumericalError:
                    slope = np.nan
                orbit.nondegeneracy = float(abs(slope)) if np.isfinite(slope) else 0.0
                orbits.append(orbit)
    return _deduplicate(orbits, dedup_tol)


def _points_to_polyline(points: np.ndarray, poly: np.ndarray, tree: cKDTree) -> float:
    """max over points of the distance to the piecewise-linear curve."""
    _, idx = tree.query(points)
    worst = 0.0
    n = len(poly)
    for p, j in zip(points, idx):
        best = np.inf
        for k in range(max(0, j - 2), min(n - 1, j + 2)):
            a, b = poly[k], poly[k + 1]
            ab = b - a
            denom = float(ab @ ab)
            tpar = 0.0 if denom == 0 else np.clip(float((p - a) @ ab) / denom, 0.0, 1.0)
            best = min(best, float(np.linalg.norm(p - (a + tpar * ab))))
        worst = max(worst, best)
    return worst


def trace_distance(states_a: np.ndarray, states_b: np.ndarray) -> float:
    """Symmetric Hausdorff distance between two sampled curves.

    Points of each set are measured against the piecewise-linear
    interpolation of the other, so the result reflects the curves rather
    than the sample spacing.
    """
    ta = cKDTree(states_a)
    tb = cKDTree(states_b)
    d_ab = _points_to_polyline(states_a, states_b, tb)
    d_ba = _points_to_polyline(states_b, states_a, ta)
    return float(max(d_ab, d_ba))


def hausdorff_to_curve(points: np.ndarray, curve_fn, t_lo: float, t_hi: float,
                       n_coarse: int = 2000) -> float:
    """max over points of the true distance to a parameterized curve.

    Coarse nearest-sample bracketing followed by bounded minimization, so
    the result is not limited by sample spacing.
    """
    from scipy.optimize import minimize_scalar

    ts = np.linspace(t_lo, t_hi, n_coarse)
    samples = np.array([curve_fn(t) for t in ts])
    tree = cKDTree(samples)
    worst = 0.0
    for p in np.asarray(points, dtype=float):
        _, j = tree.query(p)
        lo = ts[max(0, j - 2)]
        hi = ts[min(n_coarse - 1, j + 2)]
        res = minimize_scalar(lambda t: float(np.linalg.norm(curve_fn(t) - p)),
                              bounds=(lo, hi), method="bounded",
                              options={"xatol": 1e-14 * max(1.0, t_hi)})
        worst = max(worst, float(res.fun))
    return worst


def orbit_oracle_trace_gap(orbit: SymmetricOrbit, oracle: "KeplerOrbit",
                           n_points: int = 400) -> float:
    """Two-sided plane-trace Hausdorff gap between a solved orbit and an oracle."""
    period = 2.0 * orbit.T
    taus = np.linspace(0.0, period, n_points, endpoint=False)
    solver_pts = np.array([orbit.plane_state(t) for t in taus])
    t_orc = np.linspace(0.0, 2.0 * oracle.half_period, n_points, endpoint=False)
    oracle_pts = np.array([oracle.rotating_state(t) for t in t_orc])
    d1 = hausdorff_to_curve(solver_pts, oracle.rotating_state, 0.0, 2.0 * oracle.half_period)
    d2 = hausdorff_to_curve(oracle_pts, orbit.plane_state, 0.0, period)
    return max(d1, d2)


def _same_trace(a: SymmetricOrbit, b: SymmetricOrbit, tol: float) -> bool:
    """Exact trace comparison: sample points of each against the other's curve."""
    for src, dst in ((a, b), (b, a)):
        taus = np.linspace(0.0, 2.0 * src.T, 200, endpoint=False)
        pts = np.array([src.sphere_state(t) for t in taus])
        gap = hausdorff_to_curve(pts, dst.sphere_state, 0.0, 2.0 * dst.T, n_coarse=1200)
        if gap >= tol:
            return False
    return True


def _deduplicate(orbits: list, tol: float) -> list:
    kept = []
    for orb in sorted(orbits, key=lambda o: o.T):
        _, states = orb.doubled()
        duplicate = False
        for other, st2 in kept:
            if trace_distance(states, st2) >= 100.0 * tol + 1e-3:
                continue  # clearly distinct, skip the expensive comparison
            if _same_trace(orb, other, tol):
                duplicate = True
                break
        if not duplicate:
            kept.append((orb, states))
    return [o for o, _ in kept]


def classify(orbit: SymmetricOrbit) -> str:
    """Type I when the chord connects the two circles, type II otherwise.

    The circle criterion compares the fiber signs at the endpoints; away
    from the north pole the plane criterion (sign of the product of the
    endpoint axis offsets from the primary) must agree and both are kept.
    """
    circle_type = "I" if orbit.circle_start != orbit.circle_end else "II"
    orbit.classification["circle"] = circle_type
    pole_margin = min(1.0 - orbit.w0[0], 1.0 - orbit.wT[0])
    if pole_margin < 1e-6 or orbit.collision:
        orbit.classification["plane"] = None
        orbit.classification["plane_skipped"] = "orbit passes the north pole"
        return circle_type
    q1_0 = moser_map(orbit.surface, orbit.w0)[0]
    q1_T = moser_map(orbit.surface, orbit.wT)[0]
    prod = (q1_0 - orbit.surface.q1_primary) * (q1_T - orbit.surface.q1_primary)
    plane_type = "I" if prod < 0 else "II"
    orbit.classification["plane"] = plane_type
    orbit.classification["plane_product"] = float(prod)
    if plane_type != circle_type:
        raise NumericalError(
            f"classification criteria disagree (circle {circle_type}, plane {plane_type})"
        )
    return circle_type


def double_and_iterate(orbit: SymmetricOrbit, m: int):
    """Sample sequence of x^m on [0, m T], reusing the chord samples.

    m = 2 is the doubled closed orbit; higher iterates tile its samples.
    """
    if m < 1:
        raise ValueError("m >= 1")
    t2, s2 = orbit.doubled()
    period = orbit.doubled_period
    times = [t2]
    states = [s2]
    full, half = divmod(m, 2)
    for k in range(1, full):
        times.append(t2[1:] + k * period)
        states.append(s2[1:])
    if m == 1:
        return orbit.times.copy(), orbit.states.copy()
    if half:
        mask = t2 <= orbit.T + 1e-12
        times.append(t2[1:][mask[1:]] + full * period)
        states.append(s2[1:][mask[1:]])
    return np.concatenate(times), np.vstack(states)


def solve_orbit_from_start(surface: RegularizedSurface, w0, n_cross: int = 1,
                           config: IntegratorConfig | None = None,
                           t_phys_target: float | None = None,
                           residual_tol: float = 1e-8) -> SymmetricOrbit:
    """Build a SymmetricOrbit by integrating from a fixed-locus point.

    When t_phys_target is given the chord ends at the section crossing whose
    physical time matches it best (the crossing count is then ignored).
    """
    if config is None:
        config = IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=_suggested_t_max(surface))
    w0 = np.asarray(w0, dtype=float)
    theta0 = math.atan2(w0[2], w0[0])
    sign = 1 if w0[4] > 0 else -1
    n_search = n_cross if t_phys_target is None else max(n_cross, 12)
    res = event_return_to_fixed_locus(surface, w0, config, n_cross=n_search,
                                      keep_trajectory=True)
    crossings = res.crossings
    if not crossings:
        raise NumericalError("no fixed-locus return found")
    if t_phys_target is not None:
        pick = min(range(len(crossings)),
                   key=lambda k: abs(crossings[k][1][6] - t_phys_target))
    else:
        if len(crossings) < n_cross:
            raise NumericalError(f"only {len(crossings)} crossings before timeout")
        pick = n_cross - 1
    t_star, y_star = crossings[pick]
    resid = fixed_locus_residual(y_star[:6])
    if abs(resid) > residual_tol:
        raise NumericalError(f"start point is not on a symmetric orbit (defect {resid:.2e})")
    ts = np.linspace(0.0, t_star, 400)
    states = np.array([res.trajectory.dense(t)[:6] for t in ts])
    orbit = SymmetricOrbit(
        surface=surface, theta0=theta0, circle_start=sign,
        circle_end=1 if y_star[4] > 0 else -1, n_cross=pick + 1,
        T=t_star, T_phys=float(y_star[6]), w0=w0, wT=y_star[:6].copy(),
        residual=float(resid), nondegeneracy=0.0, times=ts, states=states,
        trajectory=res.trajectory,
    )
    orbit.collision = orbit.min_pole_distance() < 1e-6
    orbit.orbit_type = classify(orbit)
    return orbit


# ----------------------------------------------------------------------
# Rotating Kepler oracle


class InfeasibleOrbitError(DomainError):
    """No Kepler orbit with the requested covering data at this energy."""

    def __init__(self, message: str, feasible_range=None):
        super().__init__(message)
        self.feasible_range = feasible_range


@dataclass(frozen=True)
class KeplerOrbitSpec:
    """Covering data for a rotating-frame Kepler orbit.

    For ellipses the orbit covers the inertial ellipse k times while the
    frame turns l times (k, l coprime).  kind "circular" ignores (k, l) and
    uses the orientation plus energy instead.
    """

    kind: str  # "circular" | "ellipse"
    c: float
    k: int = 1
    l: int = 1
    orientation: str = "direct"  # circular only

    def __post_init__(self):
        if self.kind not in ("circular", "ellipse"):
            raise DomainError("kind must be 'circular' or 'ellipse'")
        if self.kind == "ellipse":
            if self.k < 1 or self.l < 1:
                raise DomainError("k, l >= 1 required")
            if math.gcd(self.k, self.l) != 1:
                raise DomainError("(k, l) must be coprime for a primitive orbit")


@dataclass
class KeplerOrbit:
    """Analytic rotating-frame Kepler orbit with perpendicular axis crossings."""

    spec: KeplerOrbitSpec
    a: float
    e: float
    direct: bool
    half_period: float  # physical time between the two fixed-locus hits
    orbit_type: str

    def inertial_state(self, t: float):
        n = self.a ** -1.5
        m_anom = n * t
        ecc = _solve_kepler(m_anom, self.e)
        r = self.a * (1.0 - self.e * math.cos(ecc))
        # true anomaly from eccentric anomaly
        nu = 2.0 * math.atan2(math.sqrt(1 + self.e) * math.sin(ecc / 2.0),
                              math.sqrt(1 - self.e) * math.cos(ecc / 2.0))
        sgn = 1.0 if self.direct else -1.0
        ang = sgn * nu
        pos = r * np.array([math.cos(ang), math.sin(ang)])
        ell = sgn * math.sqrt(self.a * (1.0 - self.e**2))
        # r' = n a^2 e sin(E) / r: exact at e = 0, no vis-viva cancellation
        rdot = n * self.a * self.a * self.e * math.sin(ecc) / r
        radial = pos / r
        tangential = np.array([-radial[1], radial[0]])
        vel = rdot * radial + (ell / r) * tangential
        return pos, vel

    def rotating_state(self, t: float) -> np.ndarray:
        pos, vel = self.inertial_state(t)
        ca, sa = math.cos(-t), math.sin(-t)
        rot = np.array([[ca, -sa], [sa, ca]])
        q = rot @ pos
        p = rot @ vel
        return np.array([q[0], q[1], p[0], p[1]])

    def plane_samples(self, n: int = 400) -> np.ndarray:
        ts = np.linspace(0.0, 2.0 * self.half_period, n)
        return np.array([self.rotating_state(t) for t in ts])

    def sphere_samples(self, surface: RegularizedSurface, n: int = 400) -> np.ndarray:
        return np.array([lift_plane_point(surface, z) for z in self.plane_samples(n)])

    def start_point(self, surface: RegularizedSurface) -> np.ndarray:
        return lift_plane_point(surface, self.rotating_state(0.0))


def _solve_kepler(m_anom: float, e: float, tol: float = 1e-14) -> float:
    m_anom = math.remainder(m_anom, 2.0 * math.pi)
    ecc = m_anom if e < 0.8 else math.pi * (1 if m_anom >= 0 else -1)
    for _ in range(60):
        delta = (ecc - e * math.sin(ecc) - m_anom) / (1.0 - e * math.cos(ecc))
        ecc -= delta
        if abs(delta) < tol:
            return ecc
    raise NumericalError("Kepler equation did not converge")


def _circular_radius(c: float, direct: bool) -> float:
    # direct: c = -1/(2r) - sqrt(r) on the bounded branch r in (0, 1];
    # retrograde: c = -1/(2r) + sqrt(r), monotone on r > 0
    if direct:
        f = lambda r: -1.0 / (2.0 * r) - math.sqrt(r) - c
        if c > -1.5:
            raise InfeasibleOrbitError(
                "no bounded direct circular orbit above the critical energy",
                feasible_range=(-math.inf, -1.5),
            )
        return brentq(f, 1e-8, 1.0, xtol=1e-15)
    f = lambda r: -1.0 / (2.0 * r) + math.sqrt(r) - c
    hi = 1.0
    while f(hi) < 0:
        hi *= 2.0
    return brentq(f, 1e-8, hi, xtol=1e-15)


def kepler_oracle(spec: KeplerOrbitSpec) -> KeplerOrbit:
    """Closed-form rotating-frame symmetric orbit of the mu = 0 problem.

    The orbit starts on the positive side of the axis through the primary
    at an apsis, so both fixed-locus hits are perpendicular axis crossings
    by construction.  The type tag is evaluated geometrically from the two
    crossing positions.
    """
    if spec.kind == "circular":
        r = _circular_radius(spec.c, spec.orientation == "direct")
        n = r ** -1.5
        rel_rate = (n - 1.0) if spec.orientation == "direct" else (n + 1.0)
        half = math.pi / abs(rel_rate)
        orbit = KeplerOrbit(spec=spec, a=r, e=0.0, direct=spec.orientation == "direct",
                            half_period=half, orbit_type="I")
        return orbit
    a = (spec.l / spec.k) ** (2.0 / 3.0)
    ell_mag = math.sqrt(a)
    c_lo = -1.0 / (2.0 * a) - ell_mag
    c_hi = -1.0 / (2.0 * a) + ell_mag
    ell = -1.0 / (2.0 * a) - spec.c
    e2 = 1.0 - ell * ell / a
    if not 0.0 < e2 < 1.0:
        raise InfeasibleOrbitError(
            f"(k={spec.k}, l={spec.l}) needs energy strictly inside "
            f"({c_lo:.6f}, {c_hi:.6f}) with nonzero eccentricity",
            feasible_range=(c_lo, c_hi),
        )
    orbit = KeplerOrbit(spec=spec, a=a, e=math.sqrt(e2), direct=ell > 0,
                        half_period=math.pi * spec.l, orbit_type="")
    q1_0 = orbit.rotating_state(0.0)[0]
    q1_T = orbit.rotating_state(orbit.half_period)[0]
    orbit.orbit_type = "I" if q1_0 * q1_T < 0 else "II"
    return orbit


# ----------------------------------------------------------------------
# Doubly symmetric orbits (Hill's problem)


def doubly_symmetric_detect(orbit: SymmetricOrbit, tol: float = 1e-8) -> bool:
    """Whether the orbit trace is also invariant under the second involution."""
    if orbit.surface.problem.kind is not ProblemKind.HILL_LUNAR:
        raise DomainError("second involution requires Hill's problem")
    _, states = orbit.doubled()
    reflected = np.array([regularized_involution_prime(w) for w in states])
    return trace_distance(states, reflected) < tol


def orbit_record(orbit: SymmetricOrbit, max_samples: int = 100) -> dict:
    """JSON-ready record of one orbit."""
    step = max(1, len(orbit.times) // max_samples)
    return {
        "mu": orbit.surface.problem.mu,
        "c": orbit.surface.c,
        "primary": orbit.surface.primary,
        "circle_start": "+" if orbit.circle_start > 0 else "-",
        "circle_end": "+" if orbit.circle_end > 0 else "-",
        "theta0": orbit.theta0,
        "half_period": orbit.T,
        "half_period_physical": orbit.T_phys,
        "type": orbit.orbit_type,
        "residual": orbit.residual,
        "nondegeneracy": orbit.nondegeneracy,
        "collision": orbit.collision,
        "samples": [[float(t)] + [float(v) for v in w]
                    for t, w in zip(orbit.times[::step], orbit.states[::step])],
    }
