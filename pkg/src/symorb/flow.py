"""Numerical integration of the rotating-frame and regularized flows.

A thin stepping loop over scipy's embedded RK5(4) pair provides what the
orbit machinery needs and solve_ivp does not expose cleanly: constraint
projection after every accepted step, event location on the dense output
with an adjustable crossing count, and the variational (linearized) flow
integrated alongside the state with a complex-step Jacobian.

Sphere-chart states optionally carry the physical time as an auxiliary
quadrature variable, since the regularized flow runs in a rescaled time.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .dynamics import Problem, hamiltonian, hamiltonian_vector_field
from .errors import ConstraintDriftError, NumericalError
from .regularize import RegularizedSurface, constraint_residuals, fixed_locus_residual, project_sphere_point

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "VariationalTrajectory",
    "integrate_with_variation",
    "ReturnResult",
    "event_return_to_fixed_locus",
    "export_trajectory_csv",
]


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and policies for the adaptive RK5(4) stepping loop."""

    rtol: float = 1e-11
    atol: float = 1e-11
    max_step: float = np.inf
    project_constraints: bool = True
    event_tol: float = 1e-12
    constraint_tol: float | None = None  # derived from rtol when unset
    collision_radius: float = 1e-3
    t_max: float = 1e4

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0 or self.event_tol <= 0:
            raise ValueError("tolerances must be positive")

    @property
    def drift_tol(self) -> float:
        if self.constraint_tol is not None:
            return self.constraint_tol
        return max(1e-10, 50.0 * self.rtol)


@dataclass
class Trajectory:
    """Samples of one flow line, with dense output for re-evaluation."""

    chart: str
    t: np.ndarray
    states: np.ndarray
    energy_drift: np.ndarray
    dense: object
    phys_time: np.ndarray | None = None
    events: list = field(default_factory=list)

    def __call__(self, t):
        return self.dense(t)

    @property
    def t_final(self) -> float:
        return float(self.t[-1])

    def state(self, t):
        """State at flow time t (without auxiliary components)."""
        y = self.dense(t)
        return y[: self.states.shape[1]]


class _DenseChain:
    """Concatenated per-step dense interpolants, callable on [t0, t_end]."""

    def __init__(self):
        self.segments = []
        self.breaks = []

    def append(self, seg):
        self.segments.append(seg)
        self.breaks.append(seg.t_max if seg.t_max >= seg.t_min else seg.t_min)

    def __call__(self, t):
        if not self.segments:
            raise NumericalError("empty dense output")
        i = int(np.searchsorted(self.breaks, t, side="left"))
        i = min(i, len(self.segments) - 1)
        return self.segments[i](t)


def _plane_rhs(problem: Problem, guard: float):
    def rhs(t, z):
        return hamiltonian_vector_field(problem, z)

    return rhs


def _sphere_rhs(surface: RegularizedSurface, with_time: bool):
    """Scalar-unrolled constrained field; ~10x faster than the array path.

    Mirrors RegularizedSurface.Q_grad/vector_field exactly (tested against
    them); the array versions remain the complex-step-differentiable source
    of truth.
    """
    c = surface.c
    mo = surface.other_mass
    q1p = surface.q1_primary
    off = surface.other_offset
    hill = surface.hill_terms
    mp = surface.primary_mass

    def rhs(t, y):
        xi0 = float(y[0]); xi1 = float(y[1]); xi2 = float(y[2])
        e0 = float(y[3]); e1 = float(y[4]); e2 = float(y[5])
        s1 = 1.0 - xi0
        y1 = e1 * s1 + xi1 * e0
        y2 = e2 * s1 + xi2 * e0
        b = 0.5 * (1.0 + xi0) - c * s1 - y2 * xi1 + (y1 + q1p) * xi2
        db0 = 0.5 + c + e2 * xi1 - e1 * xi2
        db1 = e0 * xi2 - y2
        db2 = y1 + q1p - e0 * xi1
        db3 = 0.0
        db4 = s1 * xi2
        db5 = -s1 * xi1
        if mo != 0.0:
            dy = y1 - off
            d = math.sqrt(dy * dy + y2 * y2)
            b -= mo * s1 / d
            f = mo * s1 / (d * d * d)
            db0 += mo / d + f * (dy * -e1 + y2 * -e2)
            db1 += f * (dy * e0)
            db2 += f * (y2 * e0)
            db3 += f * (dy * xi1 + y2 * xi2)
            db4 += f * (dy * s1)
            db5 += f * (y2 * s1)
        if hill:
            quad = y1 * y1 - 0.5 * y2 * y2
            b -= s1 * quad
            db0 += quad + s1 * (2.0 * y1 * e1 - y2 * e2)
            db1 -= s1 * 2.0 * y1 * e0
            db2 += s1 * y2 * e0
            db3 -= s1 * (2.0 * y1 * xi1 - y2 * xi2)
            db4 -= s1 * s1 * 2.0 * y1
            db5 += s1 * s1 * y2
        ee = e0 * e0 + e1 * e1 + e2 * e2
        eb = ee * b
        b2 = b * b
        g0 = eb * db0
        g1 = eb * db1
        g2 = eb * db2
        g3 = eb * db3 + e0 * b2
        g4 = eb * db4 + e1 * b2
        g5 = eb * db5 + e2 * b2
        a = e0 * g3 + e1 * g4 + e2 * g5 - (xi0 * g0 + xi1 * g1 + xi2 * g2)
        bb = xi0 * g3 + xi1 * g4 + xi2 * g5
        out = np.empty(7 if with_time else 6)
        out[0] = g3 - bb * xi0
        out[1] = g4 - bb * xi1
        out[2] = g5 - bb * xi2
        out[3] = -g0 - a * xi0 + bb * e0
        out[4] = -g1 - a * xi1 + bb * e1
        out[5] = -g2 - a * xi2 + bb * e2
        if with_time:
            out[6] = mp * math.sqrt(ee) * s1
        return out

    return rhs


def _step_loop(rhs, y0, t_span, config: IntegratorConfig, *, projector=None,
               step_callback=None, guard=None):
    """Drive RK45 step by step; returns (ts, ys, dense_chain, stopped_reason)."""
    t0, t1 = t_span
    solver = RK45(rhs, t0, np.asarray(y0, dtype=float), t1,
                  rtol=config.rtol, atol=config.atol, max_step=config.max_step)
    ts = [t0]
    ys = [solver.y.copy()]
    chain = _DenseChain()
    reason = "t_end"
    while solver.status == "running":
        msg = solver.step()
        if solver.status == "failed":
            raise NumericalError(f"integrator failed: {msg}")
        seg = solver.dense_output()
        chain.append(seg)
        if projector is not None:
            solver.y = projector(solver.y)
        if guard is not None:
            guard(solver.t, solver.y)
        ts.append(solver.t)
        ys.append(solver.y.copy())
        if step_callback is not None and step_callback(seg, solver.t, solver.y):
            reason = "event"
            break
    return np.array(ts), np.array(ys), chain, reason


def _sphere_projector(surface: RegularizedSurface, config: IntegratorConfig, extra: int):
    def project(y):
        norm_err, orth_err = constraint_residuals(y[:6])
        if max(norm_err, orth_err) > 10.0 * config.drift_tol:
            raise ConstraintDriftError(
                f"constraint drift {max(norm_err, orth_err):.2e} exceeds 10x tolerance"
            )
        out = y.copy()
        out[:6] = project_sphere_point(y[:6])
        return out

    return project


def _plane_guard(problem: Problem, config: IntegratorConfig):
    primaries = problem.primaries()

    def guard(t, z):
        for name, pos in primaries.items():
            if math.hypot(z[0] - pos[0], z[1] - pos[1]) < config.collision_radius:
                raise NumericalError(
                    f"plane-chart trajectory within {config.collision_radius} of the "
                    f"{name} at t={t:.6g}; switch to the regularized chart"
                )

    return guard


def integrate(system, z0, t_span, config: IntegratorConfig = IntegratorConfig(),
              with_time: bool = True) -> Trajectory:
    """Integrate the plane flow (Problem) or the regularized flow (surface).

    Sphere-chart runs renormalize the constraints after every accepted step
    and track the physical time as the last auxiliary component.
    """
    if isinstance(system, RegularizedSurface):
        y0 = np.concatenate([np.asarray(z0, dtype=float), [0.0]]) if with_time else np.asarray(z0, dtype=float)
        rhs = _sphere_rhs(system, with_time)
        projector = _sphere_projector(system, config, 1 if with_time else 0) if config.project_constraints else None
        ts, ys, dense, _ = _step_loop(rhs, y0, t_span, config, projector=projector)
        drift = np.array([abs(system.Q(y[:6]) - system.level) for y in ys])
        return Trajectory(
            chart="sphere",
            t=ts,
            states=ys[:, :6],
            energy_drift=drift,
            dense=dense,
            phys_time=ys[:, 6] if with_time else None,
        )
    problem = system
    h0 = hamiltonian(problem, z0)
    rhs = _plane_rhs(problem, config.collision_radius)
    guard = _plane_guard(problem, config)
    ts, ys, dense, _ = _step_loop(rhs, np.asarray(z0, dtype=float), t_span, config, guard=guard)
    drift = np.array([abs(hamiltonian(problem, y) - h0) for y in ys])
    return Trajectory(chart="plane", t=ts, states=ys, energy_drift=drift, dense=dense)


# ----------------------------------------------------------------------
# Variational flow


def field_jacobian(surface: RegularizedSurface, w) -> np.ndarray:
    """6x6 Jacobian of the constrained field, exact via complex step."""
    h = 1e-100
    jac = np.empty((6, 6))
    wc = np.asarray(w, dtype=complex)
    for k in range(6):
        pert = wc.copy()
        pert[k] += 1j * h
        jac[:, k] = surface.vector_field(pert).imag / h
    return jac


@dataclass
class VariationalTrajectory:
    """State plus 6x6 linearized flow along it, with dense output.

    The combined vector is (w, vec(W), t_phys) of length 43; W(t) solves
    W' = DX(w) W from the identity.
    """

    surface: RegularizedSurface
    t: np.ndarray
    states: np.ndarray
    dense: object
    phys_time: np.ndarray

    def state(self, t) -> np.ndarray:
        return self.dense(t)[:6]

    def matrix(self, t) -> np.ndarray:
        return self.dense(t)[6:42].reshape(6, 6)

    def physical_time(self, t) -> float:
        return float(self.dense(t)[42])

    @property
    def t_final(self) -> float:
        return float(self.t[-1])


def integrate_with_variation(surface: RegularizedSurface, w0, t_end: float,
                             config: IntegratorConfig = IntegratorConfig()) -> VariationalTrajectory:
    def rhs(t, y):
        w = y[:6]
        out = np.empty(43)
        out[:6] = surface.vector_field(w)
        jac = field_jacobian(surface, w)
        out[6:42] = (jac @ y[6:42].reshape(6, 6)).reshape(36)
        out[42] = surface.time_rate(w)
        return out

    y0 = np.concatenate([np.asarray(w0, dtype=float), np.eye(6).reshape(36), [0.0]])

    def projector(y):
        norm_err, orth_err = constraint_residuals(y[:6])
        if max(norm_err, orth_err) > 10.0 * config.drift_tol:
            raise ConstraintDriftError(
                f"constraint drift {max(norm_err, orth_err):.2e} exceeds 10x tolerance"
            )
        out = y.copy()
        out[:6] = project_sphere_point(y[:6])
        return out

    ts, ys, dense, _ = _step_loop(rhs, y0, (0.0, t_end), config,
                                  projector=projector if config.project_constraints else None)
    return VariationalTrajectory(surface=surface, t=ts, states=ys[:, :6], dense=dense,
                                 phys_time=ys[:, 42])


# ----------------------------------------------------------------------
# Return events to the fixed locus


@dataclass
class ReturnResult:
    """Outcome of a fixed-locus return search; found=False is a timeout."""

    found: bool
    T: float | None
    state: np.ndarray | None
    residual: float | None
    phys_time: float | None
    crossings: list
    closest: dict | None
    trajectory: Trajectory | None = None


def _locate_zero(fun, lo, hi, tol):
    return brentq(fun, lo, hi, xtol=tol, rtol=8.9e-16)


def event_return_to_fixed_locus(system, z0, config: IntegratorConfig = IntegratorConfig(),
                                n_cross: int = 1, t_min: float = 1e-8,
                                which: str = "R", keep_trajectory: bool = False) -> ReturnResult:
    """Flow until the n-th crossing of the section containing the fixed locus.

    Sphere chart: section {xi1 = 0} (or {xi2 = 0} for the second involution
    of Hill's problem), residual xi0*eta2 - xi2*eta0 (resp. the analogue).
    Plane chart: section {q2 = 0}, residual p1.  The start point must lie in
    the fixed locus; the trivial t = 0 event is excluded by t_min.
    """
    sphere = isinstance(system, RegularizedSurface)
    if sphere:
        sec_idx = 1 if which == "R" else 2
        section = lambda y: y[sec_idx]
        residual_of = lambda y: fixed_locus_residual(y[:6], which)
        rhs = _sphere_rhs(system, True)
        y0 = np.concatenate([np.asarray(z0, dtype=float), [0.0]])
        projector = _sphere_projector(system, config, 1) if config.project_constraints else None
        guard = None
    else:
        section = lambda y: y[1]
        residual_of = lambda y: float(y[2])
        rhs = _plane_rhs(system, config.collision_radius)
        y0 = np.asarray(z0, dtype=float)
        projector = None
        guard = _plane_guard(system, config)

    crossings = []
    closest = {"abs_section": np.inf, "t": None}
    hit = {}

    def on_step(seg, t_now, y_now):
        # search the dense segment for section crossings
        sub = np.linspace(seg.t_min, seg.t_max, 9)
        vals = np.array([section(seg(t)) for t in sub])
        amin = np.abs(vals).min()
        if amin < closest["abs_section"]:
            closest["abs_section"] = float(amin)
            closest["t"] = float(sub[np.abs(vals).argmin()])
        for a, b in zip(range(8), range(1, 9)):
            va, vb = vals[a], vals[b]
            if va == 0.0 and sub[a] <= t_min:
                continue
            if va * vb < 0.0:
                t_star = _locate_zero(lambda t: section(seg(t)), sub[a], sub[b], config.event_tol)
                if t_star <= t_min:
                    continue
                y_star = seg(t_star)
                crossings.append((t_star, y_star))
                if len(crossings) >= n_cross:
                    hit["t"] = t_star
                    hit["y"] = y_star
                    return True
        return False

    ts, ys, dense, reason = _step_loop(rhs, y0, (0.0, config.t_max), config,
                                       projector=projector, step_callback=on_step, guard=guard)
    traj = None
    if keep_trajectory:
        if sphere:
            drift = np.array([abs(system.Q(y[:6]) - system.level) for y in ys])
            traj = Trajectory("sphere", ts, ys[:, :6], drift, dense, phys_time=ys[:, 6])
        else:
            h0 = hamiltonian(system, y0)
            drift = np.array([abs(hamiltonian(system, y) - h0) for y in ys])
            traj = Trajectory("plane", ts, ys, drift, dense)

    if reason != "event":
        return ReturnResult(False, None, None, None, None,
                            [(t, y.copy()) for t, y in crossings], closest, traj)
    y_star = hit["y"]
    state = project_sphere_point(y_star[:6]) if sphere else y_star
    return ReturnResult(
        found=True,
        T=float(hit["t"]),
        state=state,
        residual=float(residual_of(y_star)),
        phys_time=float(y_star[6]) if sphere else float(hit["t"]),
        crossings=[(t, y.copy()) for t, y in crossings],
        closest=closest,
        trajectory=traj,
    )


def export_trajectory_csv(traj: Trajectory, path, json_path=None):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        dim = traj.states.shape[1]
        header = ["t"] + [f"s{i}" for i in range(dim)] + ["energy_drift"]
        writer.writerow(header)
        for k in range(len(traj.t)):
            row = [f"{traj.t[k]:.15g}"] + [f"{v:.15g}" for v in traj.states[k]]
            row.append(f"{traj.energy_drift[k]:.6g}")
            writer.writerow(row)
    if json_path is not None:
        with open(json_path, "w") as fh:
            json.dump({"chart": traj.chart, "samples": len(traj.t)}, fh, indent=2)
