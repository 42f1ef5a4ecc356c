import math

import numpy as np
import pytest

from symorb.dynamics import Problem, hamiltonian, lagrange_points
from symorb.errors import NumericalError
from symorb.flow import (
    IntegratorConfig,
    event_return_to_fixed_locus,
    export_trajectory_csv,
    field_jacobian,
    integrate,
    integrate_with_variation,
)
from symorb.regularize import (
    constraint_residuals,
    lift_plane_point,
    make_surface,
    moser_map,
    project_sphere_point,
    regularized_involution,
)

TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=3e3)

CIRC_RETRO = np.array([0.25, 0.0, 0.0, -2.0])  # rotating-Kepler circular, c = -1.5


@pytest.fixture(scope="module")
def kepler_surface():
    return make_surface(Problem.rotating_kepler(), -1.5)


def test_plane_circular_half_period():
    rk = Problem.rotating_kepler()
    res = event_return_to_fixed_locus(rk, CIRC_RETRO, TIGHT)
    assert res.found
    assert res.T == pytest.approx(math.pi / 9, abs=1e-10)
    assert abs(res.residual) < 1e-8
    # at the crossing q2 and p1 vanish: perpendicular axis crossing
    assert abs(res.state[1]) < 1e-10 and abs(res.state[2]) < 1e-8


def test_sphere_circular_half_period(kepler_surface):
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    res = event_return_to_fixed_locus(kepler_surface, w0, TIGHT)
    assert res.found
    assert res.phys_time == pytest.approx(math.pi / 9, abs=1e-10)
    assert abs(res.residual) < 1e-10


def test_equilibrium_is_constant():
    # a Lagrange point with the rotating-frame momentum is a fixed point
    lp = lagrange_points(0.2)
    x, y = lp["L4"]
    z0 = np.array([x, y, -y, x])
    traj = integrate(Problem.pcrtbp(0.2), z0, (0.0, 3.0), TIGHT)
    assert np.abs(traj.states - z0).max() < 1e-9


def test_energy_drift_over_many_returns(kepler_surface):
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    # 100 axis returns = 50 doubled periods of the circular orbit
    res = event_return_to_fixed_locus(kepler_surface, w0, TIGHT)
    traj = integrate(kepler_surface, w0, (0.0, 100.0 * res.T), TIGHT)
    assert traj.energy_drift.max() <= 1e-8


def test_constraints_projected(kepler_surface):
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    traj = integrate(kepler_surface, w0, (0.0, 40.0), TIGHT)
    for w in traj.states[:: len(traj.states) // 20]:
        norm_err, orth_err = constraint_residuals(w)
        assert max(norm_err, orth_err) <= 1e-10


def test_time_reversal_symmetry(kepler_surface):
    # from a fixed-locus point, R(flow(t)) retraces the backward flow
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    fwd = integrate(kepler_surface, w0, (0.0, 1.2), TIGHT, with_time=False)
    back = integrate(kepler_surface, w0, (0.0, -1.2), TIGHT, with_time=False)
    for t in np.linspace(0.05, 1.15, 12):
        lhs = regularized_involution(fwd.dense(t)[:6])
        rhs = back.dense(-t)[:6]
        assert np.abs(lhs - rhs).max() < 1e-8


def test_flow_conjugation_along_trajectory(kepler_surface):
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    res = event_return_to_fixed_locus(kepler_surface, w0, TIGHT)
    traj_s = integrate(kepler_surface, w0, (0.0, res.T), TIGHT)
    traj_p = integrate(Problem.rotating_kepler(), CIRC_RETRO, (0.0, res.phys_time), TIGHT)
    dev = 0.0
    for tau in np.linspace(0.0, res.T, 40):
        y = traj_s.dense(tau)
        tp = min(y[6], traj_p.t_final)
        dev = max(dev, np.abs(moser_map(kepler_surface, y[:6]) - traj_p.state(tp)).max())
    assert dev < 1e-6


def test_near_collision_guard():
    rk = Problem.rotating_kepler()
    # radial drop: zero angular momentum, falls into the primary
    z0 = np.array([0.3, 0.0, 0.0, 0.3])  # p = (0, q1): zero rotating velocity
    with pytest.raises(NumericalError, match="regularized"):
        integrate(rk, z0, (0.0, 3.0), IntegratorConfig(rtol=1e-10, atol=1e-10))


def test_variational_identity_and_fd(kepler_surface):
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    vt = integrate_with_variation(kepler_surface, w0, 1.0, TIGHT)
    assert np.allclose(vt.matrix(0.0), np.eye(6), atol=1e-12)
    t1 = 0.8
    mat = vt.matrix(t1)
    h = 1e-7
    for k in (1, 4):
        dw = np.zeros(6)
        dw[k] = h
        wp = project_sphere_point(w0 + dw)
        wm = project_sphere_point(w0 - dw)
        tp = integrate(kepler_surface, wp, (0.0, t1), TIGHT, with_time=False)
        tm = integrate(kepler_surface, wm, (0.0, t1), TIGHT, with_time=False)
        fd = (tp.dense(t1)[:6] - tm.dense(t1)[:6]) / np.linalg.norm(wp - wm)
        pred = mat @ ((wp - wm) / np.linalg.norm(wp - wm))
        assert np.abs(pred - fd).max() < 1e-6


def test_field_jacobian_matches_fd(kepler_surface):
    rng = np.random.default_rng(3)
    for _ in range(10):
        xi = rng.normal(size=3)
        xi /= np.linalg.norm(xi)
        eta = rng.normal(size=3)
        eta -= (xi @ eta) * xi
        w = np.concatenate([xi, eta])
        jac = field_jacobian(kepler_surface, w)
        h = 1e-6
        for k in range(6):
            e = np.zeros(6)
            e[k] = h
            fd = (kepler_surface.vector_field(w + e) - kepler_surface.vector_field(w - e)) / (2 * h)
            assert np.abs(jac[:, k] - fd).max() < 1e-5 * max(1.0, np.abs(fd).max())


def test_event_residual_continuity(kepler_surface):
    # the return residual varies smoothly with the start perturbation
    from symorb.orbits import circle_point

    base = 2.2
    def resid(theta):
        res = event_return_to_fixed_locus(kepler_surface, circle_point(kepler_surface, 1, theta), TIGHT)
        return res.residual

    h = 1e-4
    slope_fd = (resid(base + h) - resid(base - h)) / (2 * h)
    slope_secant = (resid(base + 2 * h) - resid(base - 2 * h)) / (4 * h)
    assert slope_fd == pytest.approx(slope_secant, rel=0.1)


def test_timeout_returns_result(kepler_surface):
    from symorb.orbits import circle_point

    w0 = circle_point(kepler_surface, 1, 2.2)
    res = event_return_to_fixed_locus(kepler_surface, w0, IntegratorConfig(rtol=1e-9, atol=1e-9, t_max=0.05))
    assert not res.found
    assert res.closest is not None


def test_trajectory_export(tmp_path, kepler_surface):
    w0 = lift_plane_point(kepler_surface, CIRC_RETRO)
    traj = integrate(kepler_surface, w0, (0.0, 0.5), TIGHT)
    path = tmp_path / "traj.csv"
    export_trajectory_csv(traj, path, tmp_path / "traj.json")
    lines = path.read_text().splitlines()
    assert lines[0].startswith("t,s0")
    assert len(lines) == len(traj.t) + 1
