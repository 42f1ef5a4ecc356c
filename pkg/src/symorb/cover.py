"""The double cover in R^4, convexity checks, ellipsoid dynamics, brake maps.

Points of R^4 are written v = (z1, z2, w1, w2) with symplectic pairs
(z_i, w_i) and contact form

    alpha = 1/2 (z1 dw1 - w1 dz1 + z2 dw2 - w2 dz2),

so d(alpha) has the block matrix [[0, I], [-I, 0]] and the complex
coordinates Z_i = z_i + i w_i identify (R^4, alpha) with the standard C^2.

The covering map to the regularized T*S^2 chart squares the position-like
complex variable: with z = z1 + i z2 and w = w1 + i w2,

    Y = z^2,   X = w z / (2 |z|^2),

which pulls the canonical 1-form y.dx back to alpha (so Reeb trajectories
of (S, alpha) project onto reparameterized trajectories of the regularized
flow).  The deck transformation is -Id and the surface S = {Q o Pi = level}
is centrally symmetric.  Rather than trusting the formula, its required
properties are enforced as a runtime validation contract.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .errors import CoverContractError, DomainError, FrameError, NumericalError
from .flow import IntegratorConfig, integrate
from .indices import cz_index
from .regularize import RegularizedSurface, moser_map, stereographic

__all__ = [
    "OMEGA4",
    "alpha_form",
    "ImplicitSurface",
    "SphereSurface",
    "EllipsoidSurface",
    "BumpySurface",
    "CoverSurface",
    "levi_civita_cover",
    "ConvexityReport",
    "strict_convexity_check",
    "ReebOrbitIndex",
    "reeb_orbit_cz_index",
    "lift_orbit",
    "DynamicalConvexityReport",
    "dynamical_convexity_spot_check",
    "Ellipsoid",
    "EllipsoidCensus",
    "ellipsoid_oracle",
    "ellipsoid_orbit_rotation_path",
    "PSI_MATRIX",
    "N_TILDE_MATRIX",
    "brake_maps",
]

# d(alpha) in coordinates (z1, z2, w1, w2)
OMEGA4 = np.block([[np.zeros((2, 2)), np.eye(2)], [-np.eye(2), np.zeros((2, 2))]])


def alpha_form(v) -> np.ndarray:
    """Covector of alpha at v: alpha_v(u) = alpha_form(v) . u."""
    z1, z2, w1, w2 = v
    return 0.5 * np.array([-w1, -w2, z1, z2])


# ----------------------------------------------------------------------
# Implicit surfaces in R^4


class ImplicitSurface:
    """A hypersurface {G = 0} in R^4, starshaped about the origin.

    Subclasses provide value(v) in a dtype-generic way (complex-step safe);
    grad/hess default to complex-step and central differences of the
    gradient.  in_scope filters level-set points that belong to the modeled
    component.
    """

    ray_hint: float = 4.0  # sampling range along rays from the origin

    def value(self, v):
        raise NotImplementedError

    def grad(self, v) -> np.ndarray:
        h = 1e-100
        vc = np.asarray(v, dtype=complex)
        out = np.empty(4)
        for k in range(4):
            pert = vc.copy()
            pert[k] += 1j * h
            out[k] = self.value(pert).imag / h
        return out

    def hess(self, v, h: float = 1e-5) -> np.ndarray:
        v = np.asarray(v, dtype=float)
        out = np.empty((4, 4))
        for k in range(4):
            e = np.zeros(4)
            e[k] = h
            out[:, k] = (self.grad(v + e) - self.grad(v - e)) / (2.0 * h)
        return 0.5 * (out + out.T)

    def in_scope(self, v) -> bool:
        return True

    def ray_point(self, u, rng_bound: float | None = None) -> np.ndarray:
        """First in-scope crossing of the ray {t u : t > 0} with the surface."""
        u = np.asarray(u, dtype=float)
        u = u / np.linalg.norm(u)
        bound = rng_bound if rng_bound is not None else self.ray_hint
        ts = np.linspace(1e-6, bound, 400)
        vals = np.array([self.value(t * u) for t in ts])
        sgn = np.sign(vals)
        for k in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
            t_star = brentq(lambda t: self.value(t * u), ts[k], ts[k + 1], xtol=1e-14)
            v = t_star * u
            if self.in_scope(v):
                return v
        raise NumericalError("ray did not reach the surface")

    def reeb_raw(self, v) -> np.ndarray:
        g = self.grad(v)
        return np.array([-g[2], -g[3], g[0], g[1]])

    def reeb(self, v) -> np.ndarray:
        raw = self.reeb_raw(v)
        a = float(alpha_form(v) @ raw)
        if a == 0.0:
            raise NumericalError("alpha(Reeb) vanished; not a contact point")
        return raw / a

    def reeb_action_rate(self, v) -> float:
        return float(alpha_form(v) @ self.reeb_raw(v))


class SphereSurface(ImplicitSurface):
    """Round sphere |v|^2 = r^2."""

    def __init__(self, radius: float = 1.0):
        self.radius = radius
        self.ray_hint = 3.0 * radius

    def value(self, v):
        return v[0] * v[0] + v[1] * v[1] + v[2] * v[2] + v[3] * v[3] - self.radius**2

    def hess(self, v, h: float = 0.0) -> np.ndarray:
        return 2.0 * np.eye(4)


class EllipsoidSurface(ImplicitSurface):
    """|Z1|^2/r1 + |Z2|^2/r2 = 1 with Z_i = z_i + i w_i."""

    def __init__(self, r1: float, r2: float):
        if r1 <= 0 or r2 <= 0:
            raise DomainError("ellipsoid radii must be positive")
        self.r1, self.r2 = r1, r2
        self.ray_hint = 3.0 * math.sqrt(max(r1, r2))

    def value(self, v):
        z1, z2, w1, w2 = v
        return (z1 * z1 + w1 * w1) / self.r1 + (z2 * z2 + w2 * w2) / self.r2 - 1.0

    def hess(self, v, h: float = 0.0) -> np.ndarray:
        d = np.array([2.0 / self.r1, 2.0 / self.r2, 2.0 / self.r1, 2.0 / self.r2])
        return np.diag(d)


class BumpySurface(ImplicitSurface):
    """Starshaped radial graph r = 1 + amp * P(direction), P quartic.

    For small amp the surface is convex; past a threshold the dimples make
    the restricted Hessian indefinite while each ray still crosses once.
    """

    def __init__(self, amp: float):
        self.amp = amp
        self.ray_hint = 3.0 + 3.0 * amp

    def value(self, v):
        z1, z2, w1, w2 = v
        r2 = z1 * z1 + z2 * z2 + w1 * w1 + w2 * w2
        quart = (z1 * z1 - w1 * w1) ** 2 + (z2 * z2 - w2 * w2) ** 2
        # |v|^6 = |v|^4 + amp * quart  <=>  |v|^2 = 1 + amp * quart/|v|^4
        return r2 * r2 * r2 - r2 * r2 - self.amp * quart


# ----------------------------------------------------------------------
# The Levi-Civita style double cover


def _lift_xy(x1, x2, y1, y2):
    """Dtype-generic inverse stereographic lift of the (x, y) chart."""
    rho2 = x1 * x1 + x2 * x2
    denom = rho2 + 1.0
    xi0 = (rho2 - 1.0) / denom
    xi1 = 2.0 * x1 / denom
    xi2 = 2.0 * x2 / denom
    eta0 = x1 * y1 + x2 * y2
    s = 1.0 - xi0
    eta1 = (y1 - xi1 * eta0) / s
    eta2 = (y2 - xi2 * eta0) / s
    return xi0, xi1, xi2, eta0, eta1, eta2


class CoverSurface(ImplicitSurface):
    """S = {Q o Pi = level} in R^4, the double cover of a regularized surface."""

    def __init__(self, surface: RegularizedSurface):
        self.surface = surface
        r = surface.component_radius()
        z_max = math.sqrt(1.5 * r)
        self.ray_hint = 6.0 * max(z_max, 1.0)

    # Pi and its pieces, dtype-generic -----------------------------------

    def chart_xy(self, v):
        z1, z2, w1, w2 = v
        az2 = z1 * z1 + z2 * z2
        y1 = z1 * z1 - z2 * z2
        y2 = 2.0 * z1 * z2
        x1 = (w1 * z1 - w2 * z2) / (2.0 * az2)
        x2 = (w1 * z2 + w2 * z1) / (2.0 * az2)
        return x1, x2, y1, y2

    def project(self, v) -> np.ndarray:
        """Pi: S -> T*S^2 (6-vector).  Undefined on the plane z = 0."""
        z1, z2 = float(v[0]), float(v[1])
        if z1 * z1 + z2 * z2 < 1e-28:
            raise DomainError("Pi is singular on the z = 0 plane (collision fiber)")
        x1, x2, y1, y2 = self.chart_xy(v)
        return np.array(_lift_xy(x1, x2, y1, y2))

    def preimages(self, w6) -> tuple:
        """The two points of S over a chart point of the regularized surface."""
        x, y = stereographic(w6)
        zc = complex(y[0], y[1]) ** 0.5
        if abs(zc) < 1e-14:
            raise DomainError("preimage at the collision fiber")
        xc = complex(x[0], x[1])
        out = []
        for z in (zc, -zc):
            w = 2.0 * xc * z.conjugate()
            out.append(np.array([z.real, z.imag, w.real, w.imag]))
        return out[0], out[1]

    def value(self, v):
        x1, x2, y1, y2 = self.chart_xy(v)
        w = _lift_xy(x1, x2, y1, y2)
        return self.surface.Q(w) - self.surface.level

    def in_scope(self, v) -> bool:
        w = self.project(v)
        if 1.0 - w[0] < 1e-9:
            return True  # collision point belongs to the compactified component
        q = moser_map(self.surface, w)[:2]
        return self.surface.position_in_component(q)


N_TILDE_MATRIX = np.diag([-1.0, 1.0, 1.0, -1.0])  # (z1,z2,w1,w2) -> (-z1,z2,w1,-w2)

# Psi: (x1, x2, y1, y2) -> (x1, -y2, y1, x2) in the paper's coordinate names
PSI_MATRIX = np.array(
    [
        [1.0, 0.0, 0.0, 0.0],
        [0.0, 0.0, 0.0, -1.0],
        [0.0, 0.0, 1.0, 0.0],
        [0.0, 1.0, 0.0, 0.0],
    ]
)


def brake_maps() -> dict:
    """The linear maps tying R-symmetric orbits to brake orbits.

    N is computed as Psi o N_tilde o Psi^{-1}; its fixed locus is returned
    as an orthonormal eigenbasis for eigenvalue +1.
    """
    n_mat = PSI_MATRIX @ N_TILDE_MATRIX @ np.linalg.inv(PSI_MATRIX)
    eigval, eigvec = np.linalg.eigh(0.5 * (n_mat + n_mat.T))
    fix = eigvec[:, eigval > 0.5]
    return {"Psi": PSI_MATRIX, "N_tilde": N_TILDE_MATRIX, "N": n_mat, "Fix_N": fix}


def levi_civita_cover(surface: RegularizedSurface, validate: bool = True,
                      seed: int = 0, n_samples: int = 200) -> CoverSurface:
    """Build the double cover of a regularized surface and validate it.

    The validation contract checks (i) Pi lands on the level set with both
    preimages present, (ii) Pi conjugates the R^4 involution to the
    regularized one, (iii) Reeb trajectories push forward to flow
    trajectories, (iv) sampled rays meet S exactly once.
    """
    cover = CoverSurface(surface)
    if validate:
        validate_cover_contract(cover, seed=seed, n_samples=n_samples)
    return cover


def _sample_surface_points(surface: RegularizedSurface, rng, n: int):
    from .regularize import _circle_radius

    pts = []
    guard = 0
    while len(pts) < n and guard < 50 * n:
        guard += 1
        xi = rng.normal(size=3)
        xi /= np.linalg.norm(xi)
        nu = rng.normal(size=3)
        nu -= (xi @ nu) * xi
        nn = np.linalg.norm(nu)
        if nn < 1e-6:
            continue
        nu /= nn

        def gap(t):
            return float(surface.ray_gap(np.concatenate([xi, t * nu])))

        hi = max(surface.primary_mass, 1e-3)
        g0 = gap(1e-12)
        ok = False
        for _ in range(40):
            if gap(hi) * g0 < 0:
                ok = True
                break
            hi *= 2.0
        if not ok:
            continue
        t_star = brentq(gap, 1e-12, hi, xtol=1e-14)
        w = np.concatenate([xi, t_star * nu])
        if 1.0 - w[0] > 1e-10:
            q = moser_map(surface, w)[:2]
            if not surface.position_in_component(q):
                continue
        pts.append(w)
    if len(pts) < n:
        raise NumericalError("surface sampling starved")
    return pts


def validate_cover_contract(cover: CoverSurface, seed: int = 0, n_samples: int = 200):
    surface = cover.surface
    rng = np.random.default_rng(seed)
    pts = _sample_surface_points(surface, rng, n_samples)

    # (i) both preimages exist, lie on S, and project back
    for w in pts:
        try:
            v1, v2 = cover.preimages(w)
        except DomainError:
            continue
        for v in (v1, v2):
            if abs(cover.value(v)) > 1e-8:
                raise CoverContractError("i", f"preimage off S by {abs(cover.value(v)):.2e}")
            if np.linalg.norm(cover.project(v) - w) > 1e-8:
                raise CoverContractError("i", "Pi(preimage) != point")
        if np.linalg.norm(v1 + v2) > 1e-10:
            raise CoverContractError("i", "preimages are not antipodal")

    # (ii) Pi o N_tilde = R o Pi on S
    from .regularize import regularized_involution

    for w in pts[: n_samples // 2]:
        try:
            v, _ = cover.preimages(w)
        except DomainError:
            continue
        lhs = cover.project(N_TILDE_MATRIX @ v)
        rhs = regularized_involution(cover.project(v))
        if np.linalg.norm(lhs - rhs) > 1e-8:
            raise CoverContractError("ii", f"involution mismatch {np.linalg.norm(lhs - rhs):.2e}")

    # (iii) Reeb trajectories push forward to X_Q trajectories
    w0 = pts[0]
    v0, _ = cover.preimages(w0)
    dev = _compare_reeb_and_flow(cover, v0, w0)
    if dev > 1e-6:
        raise CoverContractError("iii", f"flow deviation {dev:.2e}")

    # (iv) starshapedness of S on sampled rays
    for _ in range(40):
        u = rng.normal(size=4)
        if np.hypot(u[0], u[1]) < 0.05 * np.linalg.norm(u):
            continue
        u /= np.linalg.norm(u)
        ts = np.linspace(1e-4, cover.ray_hint, 600)
        vals = np.array([cover.value(t * u) for t in ts])
        sgn = np.sign(vals)
        count = 0
        for k in np.nonzero(sgn[:-1] * sgn[1:] < 0)[0]:
            if cover.in_scope(ts[k] * u):
                count += 1
        if count != 1:
            raise CoverContractError("iv", f"ray met S {count} times")


def _compare_reeb_and_flow(cover: CoverSurface, v0, w0, t_span: float | None = None,
                           rtol: float = 1e-11) -> float:
    """Integrate the Reeb flow on S and the regularized flow, compare via Pi.

    The matching time change is ds/dsigma = 1/lambda(X_Q); it is integrated
    alongside the Reeb trajectory, so states are compared at equal points.
    """
    surface = cover.surface

    def rhs(t, yv):
        v = yv[:4]
        r = cover.reeb(v)
        w = cover.project(v)
        rate = surface.reeb_rate(w)
        return np.concatenate([r, [1.0 / rate]])

    # one axis-return-ish span of the regularized flow
    from .flow import event_return_to_fixed_locus

    cfg = IntegratorConfig(rtol=rtol, atol=rtol, t_max=1e5)
    # physical span: integrate Q-flow for a moderate flow time
    span = t_span
    if span is None:
        ret = event_return_to_fixed_locus(surface, _nearest_fixed_locus_start(surface, w0), cfg)
        span = ret.T if ret.found else 5.0
    traj = integrate(surface, w0, (0.0, span), cfg)

    # Reeb time needed: dsigma = lambda(X_Q) ds
    solver = RK45(rhs, 0.0, np.concatenate([v0, [0.0]]), 1e9, rtol=rtol, atol=rtol)
    dev = 0.0
    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise NumericalError("Reeb integration failed")
        v = solver.y[:4]
        s_now = solver.y[4]
        if s_now > span:
            break
        dev = max(dev, float(np.linalg.norm(cover.project(v) - traj.state(s_now)[:6])))
    return dev


def _nearest_fixed_locus_start(surface, w0):
    # any fixed-locus point works for picking a return span; use theta from w0
    from .orbits import circle_point

    th = math.atan2(w0[2], w0[0])
    try:
        return circle_point(surface, +1, th)
    except NumericalError:
        return circle_point(surface, -1, th)


# ----------------------------------------------------------------------
# Convexity checks


@dataclass
class ConvexityReport:
    passed: bool
    samples: int
    min_restricted_eigenvalue: float
    location: np.ndarray
    margin: float

    def as_dict(self) -> dict:
        return {
            "passed": bool(self.passed),
            "samples": self.samples,
            "min_restricted_eigenvalue": float(self.min_restricted_eigenvalue),
            "location": [float(x) for x in self.location],
            "margin": float(self.margin),
        }


def strict_convexity_check(surf: ImplicitSurface, n_samples: int = 150,
                           seed: int = 0) -> ConvexityReport:
    """Test positive definiteness of the Hessian of G on tangent spaces.

    Sample points come from rays through the origin.  The pass margin is
    1e-8 of the Hessian norm, so "convex within numerical resolution".
    """
    rng = np.random.default_rng(seed)
    worst = np.inf
    worst_v = None
    margin_used = 0.0
    count = 0
    guard = 0
    while count < n_samples and guard < 40 * n_samples:
        guard += 1
        u = rng.normal(size=4)
        if isinstance(surf, CoverSurface) and np.hypot(u[0], u[1]) < 0.05 * np.linalg.norm(u):
            continue
        try:
            v = surf.ray_point(u)
        except NumericalError:
            continue
        count += 1
        g = surf.grad(v)
        h = surf.hess(v)
        # orthonormal tangent basis = null space of grad
        q, _ = np.linalg.qr(np.column_stack([g / np.linalg.norm(g), np.eye(4)[:, :3]]))
        tangent = q[:, 1:]
        restricted = tangent.T @ h @ tangent
        eigs = np.linalg.eigvalsh(0.5 * (restricted + restricted.T))
        margin_used = 1e-8 * max(np.abs(np.linalg.eigvalsh(h)).max(), 1.0)
        if eigs.min() < worst:
            worst = float(eigs.min())
            worst_v = v
    if count == 0:
        raise NumericalError("convexity sampling starved: no surface points reached")
    return ConvexityReport(
        passed=bool(worst > margin_used),
        samples=count,
        min_restricted_eigenvalue=worst,
        location=worst_v,
        margin=margin_used,
    )


# ----------------------------------------------------------------------
# Reeb orbits on S and their Conley-Zehnder indices


def _contact_basis(surf: ImplicitSurface, v):
    """Global symplectic frame of ker(alpha) cap TS from the quaternionic field."""
    z1, z2, w1, w2 = v
    wvec = np.array([-z2, z1, w2, -w1])
    iwvec = np.array([-w2, w1, -z2, z1])
    g = surf.grad(v)
    reeb = surf.reeb(v)

    def proj(u):
        u1 = u - (float(g @ u) / float(g @ v)) * np.asarray(v, dtype=float)
        return u1 - float(alpha_form(v) @ u1) * reeb

    e1 = proj(wvec)
    e2 = proj(iwvec)
    s = float(e1 @ OMEGA4 @ e2)
    if s <= 0:
        raise FrameError("contact frame on S lost orientation")
    r = math.sqrt(s)
    return e1 / r, e2 / r


def _reeb_jacobian(surf: ImplicitSurface, v, h: float = 1e-6) -> np.ndarray:
    jac = np.empty((4, 4))
    for k in range(4):
        e = np.zeros(4)
        e[k] = h
        jac[:, k] = (surf.reeb(v + e) - surf.reeb(v - e)) / (2.0 * h)
    return jac


@dataclass
class ReebOrbitIndex:
    period: float
    cz: object
    monodromy_gap: float
    closed_after_doubling: bool = False


def reeb_orbit_cz_index(surf: ImplicitSurface, v0, period: float,
                        rtol: float = 1e-10, nsamples: int = 800) -> ReebOrbitIndex:
    """mu_CZ of a closed Reeb orbit on S, via the global contact frame."""

    def rhs(t, yv):
        v = yv[:4]
        out = np.empty(20)
        out[:4] = surf.reeb(v)
        jac = _reeb_jacobian(surf, v)
        out[4:] = (jac @ yv[4:].reshape(4, 4)).reshape(16)
        return out

    y0 = np.concatenate([np.asarray(v0, dtype=float), np.eye(4).reshape(16)])
    solver = RK45(rhs, 0.0, y0, period, rtol=rtol, atol=rtol, max_step=period / 50)
    segs = []
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise NumericalError(f"Reeb integration failed: {msg}")
        segs.append(solver.dense_output())

    def dense(t):
        for seg in segs:
            if t <= seg.t_max:
                return seg(t)
        return segs[-1](t)

    e0 = _contact_basis(surf, v0)

    def psi(t):
        y = dense(min(t, period))
        v = y[:4]
        mat = y[4:].reshape(4, 4)
        e1t, e2t = _contact_basis(surf, v)
        cols = []
        for e in e0:
            a = mat @ e
            cols.append((float(a @ OMEGA4 @ e2t), float(e1t @ OMEGA4 @ a)))
        m = np.array(cols).T
        det = np.linalg.det(m)
        if det <= 0 or abs(det - 1.0) > 1e-5:
            raise FrameError(f"reduced transition determinant {det} at t={t}")
        return m / math.sqrt(det)

    gap = float(np.linalg.norm(dense(period)[:4] - np.asarray(v0, dtype=float)))
    iv = cz_index(psi, period, nsamples=nsamples)
    return ReebOrbitIndex(period=period, cz=iv, monodromy_gap=gap)


def lift_orbit(cover: CoverSurface, orbit) -> tuple:
    """Continuously lift a symmetric orbit to S; returns (v0, period, doubled).

    The branch of the square root is tracked along the doubled orbit; when
    the lift closes only up to the deck transformation the period doubles.
    """
    times, states = orbit.doubled()
    zs = []
    prev = None
    for w in states:
        x, y = stereographic(w)
        root = complex(y[0], y[1]) ** 0.5
        if prev is not None and abs(root - prev) > abs(-root - prev):
            root = -root
        zs.append(root)
        prev = root
    closes = abs(zs[-1] - zs[0]) < abs(zs[-1] + zs[0])
    v0, _ = cover.preimages(states[0])
    # align v0 with the tracked branch
    if abs(complex(v0[0], v0[1]) - zs[0]) > abs(complex(v0[0], v0[1]) + zs[0]):
        v0 = -v0
    # physical period of the lift: Reeb time = alpha-action; instead return
    # the flow-time period converted along the trajectory by the caller.
    return v0, bool(closes)


def reeb_period_of_lift(cover: CoverSurface, orbit, doubled: bool,
                        rtol: float = 1e-10) -> float:
    """Reeb time after which the lifted orbit closes (integrated forward)."""
    surface = cover.surface
    v0, _ = lift_orbit(cover, orbit)
    target = np.asarray(v0, dtype=float)

    def rhs(t, v):
        return cover.reeb(v)

    # estimate: dsigma = lambda(X_Q) ds along the base orbit
    ts = np.linspace(0.0, orbit.doubled_period, 400)
    rates = [surface.reeb_rate(orbit.sphere_state(t)) for t in ts]
    sigma_est = float(np.trapezoid(rates, ts))
    if doubled:
        sigma_est *= 2.0
    solver = RK45(rhs, 0.0, target.copy(), 3.0 * sigma_est, rtol=rtol, atol=rtol)
    best = (np.inf, None)
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise NumericalError(f"Reeb integration failed: {msg}")
        if solver.t > 0.5 * sigma_est:
            gap = float(np.linalg.norm(solver.y - target))
            if gap < best[0]:
                best = (gap, solver.t)
        if solver.t > 2.0 * sigma_est and best[0] < 1e-5:
            break
    if best[1] is None or best[0] > 1e-3:
        raise NumericalError(f"lift did not close (gap {best[0]:.2e})")
    # polish the period by minimizing the return gap
    from scipy.optimize import minimize_scalar

    dense_cache = {}

    def gap_at(t):
        cfg_solver = RK45(rhs, 0.0, target.copy(), t, rtol=rtol, atol=rtol)
        while cfg_solver.status == "running":
            cfg_solver.step()
        return float(np.linalg.norm(cfg_solver.y - target))

    res = minimize_scalar(gap_at, bounds=(0.95 * best[1], 1.05 * best[1]),
                          method="bounded", options={"xatol": 1e-12})
    return float(res.x)


@dataclass
class DynamicalConvexityReport:
    indices: list
    min_cz: float
    notes: list = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "min_cz": self.min_cz,
            "indices": [
                {"period": r.period, "cz": r.cz.value, "doubled": r.closed_after_doubling}
                for r in self.indices
            ],
            "notes": self.notes,
        }


def dynamical_convexity_spot_check(cover: CoverSurface, orbits) -> DynamicalConvexityReport:
    """mu_CZ of the lifted closed orbits; a certificate over this set only."""
    out = []
    notes = []
    for orbit in orbits:
        v0, closes = lift_orbit(cover, orbit)
        if not closes:
            notes.append("lift closed only after doubling; doubled before indexing")
        period = reeb_period_of_lift(cover, orbit, doubled=not closes)
        rec = reeb_orbit_cz_index(cover, v0, period)
        rec.closed_after_doubling = not closes
        out.append(rec)
    min_cz = min((r.cz.value for r in out), default=math.nan)
    return DynamicalConvexityReport(indices=out, min_cz=min_cz, notes=notes)


# ----------------------------------------------------------------------
# Ellipsoid oracle


@dataclass(frozen=True)
class Ellipsoid:
    r1: float
    r2: float

    def __post_init__(self):
        if self.r1 <= 0 or self.r2 <= 0:
            raise DomainError("radii must be positive")
        if self.r1 > self.r2:
            raise DomainError("normalize r1 <= r2")

    def flow_point(self, a1: float, a2: float, t: float) -> np.ndarray:
        """Reeb flow through (a1, a2) at t = 0, in (z1, z2, w1, w2) coords."""
        ph1 = 2.0 * t / self.r1
        ph2 = 2.0 * t / self.r2
        zc1 = complex(a1) * complex(math.cos(ph1), math.sin(ph1))
        zc2 = complex(a2) * complex(math.cos(ph2), math.sin(ph2))
        return np.array([zc1.real, zc2.real, zc1.imag, zc2.imag])


@dataclass
class EllipsoidCensus:
    r1: float
    r2: float
    rational: bool
    p: int | None
    q: int | None
    periods: tuple
    common_period: float | None

    def as_dict(self) -> dict:
        return {
            "r1": self.r1,
            "r2": self.r2,
            "rational_ratio_within_bound": self.rational,
            "p": self.p,
            "q": self.q,
            "short_long_periods": list(self.periods),
            "common_minimal_period": self.common_period,
            "closed_orbits": "all" if self.rational else 2,
        }


def ellipsoid_oracle(e: Ellipsoid, denominator_bound: int = 10**6,
                     rational_tol: float = 1e-14) -> EllipsoidCensus:
    """Periodic-orbit census of the ellipsoid Reeb flow.

    Rationality of r1/r2 is detected by continued fractions up to the
    denominator bound ("rational within bound", never a number-theoretic
    claim); in the rational case every orbit closes with minimal common
    period lcm(p, q) T1 / p.
    """
    ratio = e.r1 / e.r2
    frac = Fraction(ratio).limit_denominator(denominator_bound)
    rational = abs(float(frac) - ratio) < rational_tol
    t1, t2 = math.pi * e.r1, math.pi * e.r2
    if rational:
        p, q = frac.numerator, frac.denominator
        common = math.lcm(p, q) * t1 / p
        return EllipsoidCensus(e.r1, e.r2, True, p, q, (t1, t2), common)
    return EllipsoidCensus(e.r1, e.r2, False, None, None, (t1, t2), None)


def ellipsoid_orbit_rotation_path(e: Ellipsoid, which: str = "short"):
    """Analytic reduced transition path of an ellipsoid orbit.

    Along the short orbit the transverse plane rotates at rate 2/r2 while
    the quaternionic frame rotates at rate 2/r1, so the reduced path is a
    rotation of angle 2t(1/r1 + 1/r2); symmetrically for the long orbit.
    Used as the brute-force oracle for the Reeb index pipeline.
    """
    if which == "short":
        rate = 2.0 * (1.0 / e.r1 + 1.0 / e.r2)
        period = math.pi * e.r1
    else:
        rate = 2.0 * (1.0 / e.r1 + 1.0 / e.r2)
        period = math.pi * e.r2

    def psi(t):
        a = rate * t
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])

    return psi, period
