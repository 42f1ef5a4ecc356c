"""Crossing-form index machinery.

Robbin-Salamon indices of Lagrangian paths are computed from crossing
forms: the index is the half-weighted endpoint signature plus the interior
signatures.  In the planar case Lagrangian lines are tracked through a
continuous angle lift and the crossing form reduces to the sign of the
angular velocity; the general (n <= 2) engine works with frame matrices and
a locally constant Lagrangian complement.  The Conley-Zehnder index of a
symplectic path is the Robbin-Salamon index of its graph against the
diagonal in (R^2n x R^2n, (-omega) + omega).

For chords of the regularized flow the relevant symplectic 2x2 path is the
linearized flow expressed in a vertical-preserving trivialization of the
contact planes; the trivialization built here sends the tangent line of the
fixed-locus circles to the first coordinate axis, which is the reference
Lagrangian of the boundary value problem.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateCrossingError, FrameError, NumericalError
from .flow import IntegratorConfig, VariationalTrajectory, integrate_with_variation
from .regularize import RegularizedSurface

__all__ = [
    "IndexValue",
    "LagrangianLinePath",
    "line_path_from_vectors",
    "line_path_from_angles",
    "rs_index_line",
    "winding_index_oracle",
    "rs_index_general",
    "cz_index",
    "OMEGA2",
    "graph_omega",
    "contact_frame",
    "frame_coordinates",
    "reflection_in_frame",
    "TransitionPath",
    "transition_path",
    "orbit_rs_index_from_path",
    "cz_index_of_iterate",
    "rs_index_of_iterate",
    "MeanIndexReport",
    "mean_indices_from_path",
    "rfh_index",
]

OMEGA2 = np.array([[0.0, 1.0], [-1.0, 0.0]])  # omega(u, v) = u^T OMEGA2 v
J2 = np.array([[0.0, -1.0], [1.0, 0.0]])


def graph_omega(n: int = 1):
    """(-omega) + omega on R^2n x R^2n, with the compatible J."""
    o = OMEGA2 if n == 1 else np.kron(np.eye(n), OMEGA2)
    z = np.zeros_like(o)
    omega = np.block([[-o, z], [z, o]])
    j = J2 if n == 1 else np.kron(np.eye(n), J2)
    jmat = np.block([[-j, z], [z, j]])
    return omega, jmat


@dataclass
class IndexValue:
    """A half-integer index with its crossing records.

    The value is stored as an exact integer numerator over 2, so equality
    of indices is exact.  crossings holds (t, signature, weight) records.
    """

    twice: int
    crossings: list = field(default_factory=list)

    @property
    def value(self) -> float:
        return self.twice / 2.0

    @property
    def is_integer(self) -> bool:
        return self.twice % 2 == 0

    def __eq__(self, other):
        if isinstance(other, IndexValue):
            return self.twice == other.twice
        return self.value == other

    def __repr__(self):
        return f"IndexValue({self.twice}/2 = {self.value})"


# ----------------------------------------------------------------------
# Lagrangian line paths in (R^2, omega0)


@dataclass
class LagrangianLinePath:
    """Sampled path of lines through a continuous angle lift.

    The line at parameter t is span(cos theta(t), sin theta(t)); the lift is
    refined so consecutive samples differ by less than pi/4, which keeps the
    mod-pi unwrapping unambiguous.
    """

    ts: np.ndarray
    thetas: np.ndarray
    vec_fn: object = None  # optional t -> 2-vector for refinement

    def angle(self, t: float) -> float:
        """Lifted angle at arbitrary t (local re-lift around the grid)."""
        k = int(np.clip(np.searchsorted(self.ts, t) - 1, 0, len(self.ts) - 2))
        base = self.thetas[k]
        if self.vec_fn is None:
            # linear interpolation on the lift
            t0, t1 = self.ts[k], self.ts[k + 1]
            lam = 0.0 if t1 == t0 else (t - t0) / (t1 - t0)
            return (1 - lam) * base + lam * self.thetas[k + 1]
        v = self.vec_fn(t)
        raw = math.atan2(v[1], v[0])
        d = raw - base
        d -= math.pi * round(d / math.pi)
        return base + d

    def angle_rate(self, t: float, h: float | None = None) -> float:
        span = self.ts[-1] - self.ts[0]
        if h is None:
            h = max(1e-7 * span, 1e-10)
        lo = max(self.ts[0], t - h)
        hi = min(self.ts[-1], t + h)
        return (self.angle(hi) - self.angle(lo)) / (hi - lo)


def _lift(raw: np.ndarray) -> np.ndarray:
    out = np.empty_like(raw)
    out[0] = raw[0]
    for k in range(1, len(raw)):
        d = raw[k] - out[k - 1]
        d -= math.pi * round(d / math.pi)
        out[k] = out[k - 1] + d
    return out


def line_path_from_vectors(vec_fn, t0: float, t1: float, n: int = 257,
                           max_jump: float = math.pi / 4) -> LagrangianLinePath:
    """Build a refined lifted path from a spanning-vector function."""
    ts = np.linspace(t0, t1, n)
    raw = np.array([math.atan2(*(vec_fn(t)[::-1])) for t in ts])
    thetas = _lift(raw)
    for _ in range(24):
        jumps = np.abs(np.diff(thetas))
        bad = np.nonzero(jumps > max_jump)[0]
        if len(bad) == 0:
            break
        new_ts = (ts[bad] + ts[bad + 1]) / 2.0
        ts = np.sort(np.concatenate([ts, new_ts]))
        raw = np.array([math.atan2(*(vec_fn(t)[::-1])) for t in ts])
        thetas = _lift(raw)
    else:
        raise NumericalError("line path refinement did not converge")
    return LagrangianLinePath(ts=ts, thetas=thetas, vec_fn=vec_fn)


def line_path_from_angles(ts, thetas) -> LagrangianLinePath:
    """Path from an already-continuous angle lift (no refinement)."""
    return LagrangianLinePath(ts=np.asarray(ts, float), thetas=np.asarray(thetas, float))


def _line_crossings(path: LagrangianLinePath, theta_v: float, cross_tol: float):
    """All parameter values where the line meets the reference, with lifts."""
    phi = path.thetas - theta_v
    ts = path.ts
    hits = []
    # endpoint checks
    span = ts[-1] - ts[0]
    for t_end, p_end in ((ts[0], phi[0]), (ts[-1], phi[-1])):
        if abs(p_end - math.pi * round(p_end / math.pi)) < cross_tol:
            hits.append(t_end)
    for k in range(len(ts) - 1):
        a, b = phi[k], phi[k + 1]
        ja = math.floor(min(a, b) / math.pi - 1e-12)
        jb = math.ceil(max(a, b) / math.pi + 1e-12)
        for j in range(ja, jb + 1):
            target = j * math.pi
            lo, hi = (a, b) if a <= b else (b, a)
            if not (lo - cross_tol <= target <= hi + cross_tol):
                continue
            tlo, thi = ts[k], ts[k + 1]
            if abs(a - target) < cross_tol or abs(b - target) < cross_tol:
                t_star = tlo if abs(a - target) < abs(b - target) else thi
            else:
                f = lambda t: (path.angle(t) - theta_v) - target
                if f(tlo) * f(thi) > 0:
                    continue
                t_star = _bisect(f, tlo, thi)
            hits.append(t_star)
    # merge duplicates
    hits.sort()
    merged = []
    for t in hits:
        if not merged or t - merged[-1] > 1e-9 * max(1.0, span):
            merged.append(t)
    return merged


def _bisect(f, lo, hi, iters: int = 80):
    flo = f(lo)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        fm = f(mid)
        if fm == 0.0:
            return mid
        if flo * fm < 0:
            hi = mid
        else:
            lo, flo = mid, fm
    return 0.5 * (lo + hi)


def rs_index_line(path: LagrangianLinePath, theta_v: float = 0.0,
                  deg_tol: float = 1e-7, cross_tol: float = 1e-9,
                  _allow_shift: bool = True) -> IndexValue:
    """Robbin-Salamon index of a line path against the line at angle theta_v.

    Regular crossings contribute sign(theta') with half weight at the
    endpoints.  A crossing with |theta'| below deg_tol is resolved by the
    reference-shift rule: the index is recomputed with theta_v shifted by
    +-eps and the two results averaged; disagreement across eps scales
    raises DegenerateCrossingError.
    """
    t0, t1 = path.ts[0], path.ts[-1]
    hits = _line_crossings(path, theta_v, cross_tol)
    twice = 0
    records = []
    degenerate = []
    for t in hits:
        rate = path.angle_rate(t)
        if abs(rate) < deg_tol:
            degenerate.append(t)
            continue
        sgn = 1 if rate > 0 else -1
        endpoint = abs(t - t0) < 1e-12 * max(1.0, abs(t1)) or abs(t - t1) < 1e-12 * max(1.0, abs(t1))
        weight = 1 if endpoint else 2
        twice += weight * sgn
        records.append((float(t), sgn, weight / 2.0))
    if degenerate:
        if not _allow_shift:
            raise DegenerateCrossingError(degenerate)
        return _shifted_average(path, theta_v, deg_tol, cross_tol, degenerate)
    return IndexValue(twice=twice, crossings=records)


def _shifted_average(path, theta_v, deg_tol, cross_tol, degenerate):
    span = path.thetas.max() - path.thetas.min() + 1.0
    results = []
    for eps in (1e-5 * span, 3e-5 * span):
        try:
            up = rs_index_line(path, theta_v + eps, deg_tol=deg_tol / 30,
                               cross_tol=cross_tol, _allow_shift=False)
            dn = rs_index_line(path, theta_v - eps, deg_tol=deg_tol / 30,
                               cross_tol=cross_tol, _allow_shift=False)
        except DegenerateCrossingError:
            continue
        results.append(up.twice + dn.twice)
    if not results or len(set(results)) != 1:
        raise DegenerateCrossingError(degenerate, "reference-shift rule did not stabilize")
    return IndexValue(twice=results[0] // 2, crossings=[(float(t), 0, 0.0) for t in degenerate])


def winding_index_oracle(path: LagrangianLinePath, theta_v: float = 0.0,
                         eps_frac: float = 2e-5) -> float:
    """Independent brute-force index: average of the two shifted crossing counts.

    Counts signed sign changes of sin(theta - theta_v -+ eps) over the sample
    grid; no crossing forms, no half weights.  Agrees with the crossing-form
    index for paths whose crossings are regular.
    """
    span = path.thetas.max() - path.thetas.min() + 1.0
    eps = eps_frac * span
    total = 0
    for shift in (theta_v + eps, theta_v - eps):
        phi = path.thetas - shift
        count = 0
        for k in range(len(phi) - 1):
            lo, hi = sorted((phi[k], phi[k + 1]))
            jlo, jhi = math.ceil(lo / math.pi), math.floor(hi / math.pi)
            if jhi >= jlo:
                count += (jhi - jlo + 1) * (1 if phi[k + 1] > phi[k] else -1)
        total += count
    return total / 2.0


# ----------------------------------------------------------------------
# General frame-based engine (n <= 2)


def _intersection_basis(f_frame: np.ndarray, v_frame: np.ndarray, tol: float = 1e-4):
    """Basis of span(F) cap span(V), as coefficient vectors in F.

    The tolerance is loose because touch crossings are located through a
    quadratic minimum of the stacked determinant, which leaves singular
    values of order sqrt(det-tolerance).
    """
    m = np.hstack([f_frame, -v_frame])
    _, s, vh = np.linalg.svd(m)
    z = int(np.sum(s < tol * max(1.0, s[0])))
    if z == 0:
        return []
    k = f_frame.shape[1]
    return [row[:k] for row in vh[-z:]]


def rs_index_general(frame_fn, v_frame, t0: float, t1: float, omega=None, jmat=None,
                     nsamples: int = 600, deg_tol: float = 1e-7,
                     fd_scale: float = 1e-6) -> IndexValue:
    """Robbin-Salamon index of a Lagrangian frame path against span(v_frame).

    frame_fn(t) returns a (2n, n) matrix of frame columns.  Crossings are
    located through the determinant of the stacked frames (sign changes) and
    through near-zero local minima of its magnitude (even-dimensional
    crossings).  The crossing form is built over a locally constant
    Lagrangian complement J*Lambda(t*) by finite differences of the graph
    representation.
    """
    v_frame = np.asarray(v_frame, dtype=float)
    twon, n = v_frame.shape
    if omega is None:
        if twon == 2:
            omega, jmat = OMEGA2, J2
        else:
            omega, jmat = graph_omega(twon // 4)

    ts = np.linspace(t0, t1, nsamples)

    def stacked_det(t):
        return np.linalg.det(np.hstack([frame_fn(t), v_frame]))

    dets = np.array([stacked_det(t) for t in ts])
    scale = max(np.abs(dets).max(), 1e-30)

    cross_times = []
    for k in range(nsamples - 1):
        if dets[k] == 0.0:
            if ts[k] not in cross_times:
                cross_times.append(ts[k])
        elif dets[k] * dets[k + 1] < 0:
            cross_times.append(_bisect(stacked_det, ts[k], ts[k + 1]))
    if dets[-1] == 0.0:
        cross_times.append(ts[-1])
    # even-dimensional crossings: |det| touches zero without a sign change;
    # refine coarse local minima and keep those that reach (numerical) zero
    absd = np.abs(dets) / scale
    from scipy.optimize import minimize_scalar

    for k in range(1, nsamples - 1):
        if dets[k - 1] * dets[k + 1] < 0:
            continue  # a sign change; the bisection pass already has it
        if absd[k] < 1e-4 and absd[k] <= absd[k - 1] and absd[k] <= absd[k + 1]:
            res = minimize_scalar(lambda t: abs(stacked_det(t)),
                                  bounds=(ts[k - 1], ts[k + 1]), method="bounded",
                                  options={"xatol": 1e-13 * max(1.0, t1 - t0)})
            if res.fun / scale < 1e-9:
                cross_times.append(float(res.x))
    cross_times = sorted(cross_times)
    merged = []
    for t in cross_times:
        if not merged or t - merged[-1] > (t1 - t0) * 1e-6:
            merged.append(t)

    h = fd_scale * (t1 - t0)
    twice = 0
    records = []
    for t_star in merged:
        f_star = frame_fn(t_star)
        coeffs = _intersection_basis(f_star, v_frame)
        if not coeffs:
            continue
        f0, _ = np.linalg.qr(f_star)
        g0 = jmat @ f0
        basis = np.hstack([f0, g0])

        def graph_coeff(t):
            x = np.linalg.solve(basis, frame_fn(t))
            c, d = x[:n], x[n:]
            return d @ np.linalg.inv(c)

        lo = max(t0, t_star - h)
        hi = min(t1, t_star + h)
        adot = (graph_coeff(hi) - graph_coeff(lo)) / (hi - lo)
        # crossing form on the intersection, in f0-coordinates
        vecs = [f_star @ a for a in coeffs]
        a0 = [np.linalg.lstsq(f0, v, rcond=None)[0] for v in vecs]
        m = np.empty((len(a0), len(a0)))
        for i, ai in enumerate(a0):
            for j, aj in enumerate(a0):
                m[i, j] = (f0 @ ai) @ omega @ (g0 @ (adot @ aj))
        m = 0.5 * (m + m.T)
        eig = np.linalg.eigvalsh(m)
        thresh = deg_tol * max(1.0, np.abs(eig).max())
        if np.any(np.abs(eig) < thresh):
            raise DegenerateCrossingError([t_star], "degenerate crossing form")
        sig = int(np.sum(eig > 0) - np.sum(eig < 0))
        endpoint = abs(t_star - t0) < 1e-12 * max(1.0, abs(t1)) or abs(t_star - t1) < 1e-12 * max(1.0, abs(t1))
        weight = 1 if endpoint else 2
        twice += weight * sig
        records.append((float(t_star), sig, weight / 2.0))
    return IndexValue(twice=twice, crossings=records)


def cz_index(psi_fn, t_end: float, nsamples: int = 800, deg_tol: float = 1e-7,
             end_tol: float = 1e-8) -> IndexValue:
    """Conley-Zehnder index of a 2x2 symplectic path starting at the identity.

    Formed as the Robbin-Salamon index of the graph path against the
    diagonal in (R^2 x R^2, (-omega) + omega).
    """
    psi_t = psi_fn(t_end)
    gap = np.linalg.det(np.eye(2) - psi_t)
    if abs(gap) < end_tol:
        raise DegenerateCrossingError([t_end], f"|det(I - Psi(T))| = {abs(gap):.2e}")
    eye = np.eye(2)

    def frame(t):
        return np.vstack([eye, psi_fn(t)])

    delta = np.vstack([eye, eye])
    omega, jmat = graph_omega(1)
    return rs_index_general(frame, delta, 0.0, t_end, omega=omega, jmat=jmat,
                            nsamples=nsamples, deg_tol=deg_tol)


# ----------------------------------------------------------------------
# Contact trivialization along the regularized flow


def contact_frame(surface: RegularizedSurface, w):
    """Symplectic basis (e1, e2) of the contact plane at w, dlambda(e1,e2)=1.

    e2 spans the vertical part of the contact plane; e1 is horizontal-based
    and restricts to the tangent of the fixed-locus circles at their points,
    so the frame maps the boundary condition of symmetric chords to the
    first coordinate axis.
    """
    w = np.asarray(w, dtype=float)
    xi, eta = w[:3], w[3:]
    g = surface.Q_grad(w)
    q_xi, q_eta = g[:3], g[3:]
    cxq = np.cross(xi, q_eta)
    n2 = np.linalg.norm(cxq)
    if n2 < 1e-12:
        raise FrameError("vertical contact direction degenerated (xi x Q_eta ~ 0)")
    rate = float(eta @ q_eta)
    if rate <= 0:
        raise FrameError("lambda(X_Q) not positive; wrong side of the zero section")
    v2 = cxq / n2
    u = -(n2 / rate) * np.cross(xi, eta)
    what = np.cross(xi, v2)
    b = float(q_xi @ u) / n2
    e1 = np.concatenate([u, b * what])
    e2 = np.concatenate([np.zeros(3), v2])
    return e1, e2


def frame_coordinates(e1, e2, vec):
    """Coordinates of a contact vector in the frame, via dlambda pairings."""
    vu, vv = vec[:3], vec[3:]
    e1u, e1v = e1[:3], e1[3:]
    v2 = e2[3:]
    alpha = -float(v2 @ vu)
    beta = float(e1v @ vu - vv @ e1u)
    return alpha, beta


def reflection_in_frame(surface: RegularizedSurface, w) -> np.ndarray:
    """Matrix of the linearized involution on the contact plane at a fixed point."""
    from .regularize import regularized_involution

    e1, e2 = contact_frame(surface, w)
    cols = []
    for e in (e1, e2):
        img = regularized_involution(e)  # linear map, acts on tangent vectors
        cols.append(frame_coordinates(e1, e2, img))
    return np.array(cols).T


# ----------------------------------------------------------------------
# Transition matrices along chords and their iterates


@dataclass
class TransitionPath:
    """2x2 symplectic path along a chord/orbit in the contact trivialization.

    Built from the 6x6 variational flow; psi(t) is the reduced matrix with
    determinant renormalized to 1 (corrections logged).  For a doubled
    symmetric orbit the path extends periodically through powers of the
    monodromy.
    """

    surface: RegularizedSurface
    vtraj: VariationalTrajectory
    period: float  # flow time of the underlying integrated span
    det_log: list = field(default_factory=list)

    def __post_init__(self):
        self._e0 = contact_frame(self.surface, self.vtraj.state(0.0))
        self._cache = {}

    def psi_raw(self, t: float) -> np.ndarray:
        key = float(t)
        if key in self._cache:
            return self._cache[key]
        w = self.vtraj.state(t)
        mat = self.vtraj.matrix(t)
        e1t, e2t = contact_frame(self.surface, w)
        cols = []
        for e in self._e0:
            push = mat @ e
            cols.append(frame_coordinates(e1t, e2t, push))
        psi = np.array(cols).T
        det = np.linalg.det(psi)
        if det <= 0:
            raise FrameError(f"transition matrix lost orientation at t={t}")
        if abs(det - 1.0) > 1e-6:
            raise FrameError(f"transition determinant drifted to {det} at t={t}")
        self.det_log.append(abs(det - 1.0))
        psi = psi / math.sqrt(det)
        self._cache[key] = psi
        return psi

    def monodromy(self) -> np.ndarray:
        return self.psi_raw(self.period)

    def psi_periodic(self, t: float) -> np.ndarray:
        """Path extended through the closed orbit: psi(t + kP) = psi(t) M^k."""
        if t <= self.period:
            return self.psi_raw(t)
        k = int(math.floor(t / self.period))
        r = t - k * self.period
        if r < 0:
            k -= 1
            r += self.period
        m = np.linalg.matrix_power(self.monodromy(), k)
        return self.psi_raw(r) @ m


def transition_path(surface: RegularizedSurface, w0, t_end: float,
                    config: IntegratorConfig = IntegratorConfig()) -> TransitionPath:
    vtraj = integrate_with_variation(surface, w0, t_end, config)
    return TransitionPath(surface=surface, vtraj=vtraj, period=t_end)


V_LINE = np.array([1.0, 0.0])


def rs_index_of_iterate(path: TransitionPath, half_period: float, m: int,
                        nsamples_per_period: int = 400) -> IndexValue:
    """mu_RS(x^m, m T): index of Psi(t) V over [0, m*half_period].

    path must hold the doubled orbit (period = 2 * half_period); iterates
    reuse the one-period transition samples through monodromy powers.
    """
    t_end = m * half_period
    vec = lambda t: path.psi_periodic(t) @ V_LINE
    n = max(129, int(nsamples_per_period * (t_end / path.period)) + 1)
    lp = line_path_from_vectors(vec, 0.0, t_end, n=n)
    return rs_index_line(lp)


def cz_index_of_iterate(path: TransitionPath, half_period: float, m2: int,
                        nsamples_per_period: int = 400) -> IndexValue:
    """mu_CZ(x^(2m), 2m T) for the doubled orbit's m2-th even iterate (m2 = 2m)."""
    if m2 % 2 != 0:
        raise ValueError("Conley-Zehnder iterates act on the doubled (periodic) orbit")
    t_end = m2 * half_period
    n = max(257, int(nsamples_per_period * (t_end / path.period)) + 1)
    return cz_index(path.psi_periodic, t_end, nsamples=n)


def orbit_rs_index_from_path(path: TransitionPath, half_period: float) -> IndexValue:
    return rs_index_of_iterate(path, half_period, 1)


@dataclass
class MeanIndexReport:
    mean_rs: float
    mean_cz_double: float
    defect: float
    rs_sequence: list
    cz_sequence: list
    rs_last_ratio: float
    skipped: list


def _slope(ms, vals):
    ms = np.asarray(ms, float)
    vals = np.asarray(vals, float)
    a = np.vstack([ms, np.ones_like(ms)]).T
    sol, *_ = np.linalg.lstsq(a, vals, rcond=None)
    return float(sol[0])


def mean_indices_from_path(path: TransitionPath, half_period: float,
                           m_max: int = 16) -> MeanIndexReport:
    """Estimate mean indices from iterates of the transition path.

    mu_RS(x^m)/m is fitted over the upper half range of m; the mean CZ index
    of the doubled orbit is fitted from mu_CZ(x^(2m)) against m.  Degenerate
    iterates are skipped and logged.
    """
    if m_max < 8:
        raise ValueError("m_max >= 8 required for a stable mean-index fit")
    rs_seq = []
    skipped = []
    for m in range(1, m_max + 1):
        try:
            rs_seq.append((m, rs_index_of_iterate(path, half_period, m).value))
        except DegenerateCrossingError:
            skipped.append(("rs", m))
    # mu_CZ(x^(2m))/m over the same m-window, so the staircase truncation
    # biases of the two fits cancel in the defect
    cz_seq = []
    for m in range(1, m_max + 1):
        try:
            cz_seq.append((m, cz_index_of_iterate(path, half_period, 2 * m).value))
        except DegenerateCrossingError:
            skipped.append(("cz", 2 * m))
    fit_rs = [(m, v) for m, v in rs_seq if m >= m_max // 2]
    fit_cz = [(m, v) for m, v in cz_seq if m >= m_max // 2]
    if len(fit_rs) < 2 or len(fit_cz) < 2:
        raise NumericalError("too many degenerate iterates for a mean-index estimate")
    mean_rs = _slope(*zip(*fit_rs))
    mean_cz = _slope(*zip(*fit_cz))
    return MeanIndexReport(
        mean_rs=mean_rs,
        mean_cz_double=mean_cz,
        defect=abs(mean_rs - 0.5 * mean_cz),
        rs_sequence=rs_seq,
        cz_sequence=cz_seq,
        rs_last_ratio=rs_seq[-1][1] / rs_seq[-1][0] if rs_seq else math.nan,
        skipped=skipped,
    )


def rfh_index(rs: IndexValue) -> IndexValue:
    """Grading shift mu_RS + 1/2 used by the Floer-side bookkeeping."""
    return IndexValue(twice=rs.twice + 1, crossings=list(rs.crossings))
