import math

import numpy as np
import pytest

from symorb.dynamics import Problem, hamiltonian, hill_lunar_critical_energy, lagrange_points
from symorb.flow import IntegratorConfig
from symorb.orbits import (
    InfeasibleOrbitError,
    KeplerOrbitSpec,
    SymmetricOrbit,
    circle_point,
    classify,
    double_and_iterate,
    find_symmetric_orbits,
    kepler_oracle,
    orbit_oracle_trace_gap,
    orbit_record,
    doubly_symmetric_detect,
    shooting_residual,
    solve_orbit_from_start,
    trace_distance,
)
from symorb.regularize import lift_plane_point, make_surface, regularized_involution, regularized_involution_prime

RNG = np.random.default_rng(5)


@pytest.fixture(scope="module")
def kepler25():
    return make_surface(Problem.rotating_kepler(), -2.5)


@pytest.fixture(scope="module")
def found25(kepler25):
    return find_symmetric_orbits(kepler25, scan=44, n_cross_values=(1,))


# -------------------------------------------------------------- oracle


def test_circular_oracle_values():
    direct = kepler_oracle(KeplerOrbitSpec("circular", -2.5, orientation="direct"))
    assert direct.a == pytest.approx(0.25, abs=1e-12)
    assert direct.half_period == pytest.approx(math.pi / 7, abs=1e-12)
    retro = kepler_oracle(KeplerOrbitSpec("circular", -1.5, orientation="retrograde"))
    assert retro.a == pytest.approx(0.25, abs=1e-12)
    assert retro.half_period == pytest.approx(math.pi / 9, abs=1e-12)
    # circles around the primary meet the axis on both sides
    assert direct.orbit_type == "I" and retro.orbit_type == "I"


def test_oracle_curves_on_shell_and_perpendicular():
    rk = Problem.rotating_kepler()
    for spec in (
        KeplerOrbitSpec("circular", -2.0, orientation="retrograde"),
        KeplerOrbitSpec("ellipse", -1.55, k=1, l=2),
        KeplerOrbitSpec("ellipse", -1.2, k=1, l=1),
    ):
        orb = kepler_oracle(spec)
        for t in np.linspace(0.0, 2 * orb.half_period, 9):
            assert hamiltonian(rk, orb.rotating_state(t)) == pytest.approx(spec.c, abs=1e-9)
        z0 = orb.rotating_state(0.0)
        zT = orb.rotating_state(orb.half_period)
        assert abs(z0[1]) < 1e-12 and abs(z0[2]) < 1e-12
        assert abs(zT[1]) < 1e-9 and abs(zT[2]) < 1e-9
        # closure of the doubled curve
        assert np.abs(orb.rotating_state(2 * orb.half_period) - z0).max() < 1e-9


def test_oracle_parity_geometry():
    # the endpoint-side product forces: both odd -> one-sided (type II),
    # k+l odd -> two-sided (type I)
    cases = {(1, 1, -1.2): "II", (1, 3, -1.62): "II", (3, 5, -1.5): "II",
             (1, 2, -1.55): "I", (2, 1, -0.9): "I", (2, 3, -0.77): "I"}
    for (k, l, c), expected in cases.items():
        orb = kepler_oracle(KeplerOrbitSpec("ellipse", c, k=k, l=l))
        assert orb.orbit_type == expected, (k, l, orb.orbit_type)


def test_oracle_infeasible_energy():
    with pytest.raises(InfeasibleOrbitError) as exc:
        kepler_oracle(KeplerOrbitSpec("ellipse", -3.0, k=1, l=2))
    lo, hi = exc.value.feasible_range
    assert lo < hi and -3.0 < lo
    with pytest.raises(InfeasibleOrbitError):
        kepler_oracle(KeplerOrbitSpec("circular", -1.2, orientation="direct"))


def test_oracle_coprimality_required():
    from symorb.errors import DomainError

    with pytest.raises(DomainError):
        KeplerOrbitSpec("ellipse", -1.5, k=2, l=4)


# -------------------------------------------------------------- shooting


def test_shooting_residual_at_oracle_start(kepler25):
    oracle = kepler_oracle(KeplerOrbitSpec("circular", -2.5, orientation="direct"))
    w0 = oracle.start_point(kepler25)
    theta0 = math.atan2(w0[2], w0[0])
    sign = 1 if w0[4] > 0 else -1
    out = shooting_residual(kepler25, sign, theta0, IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=100.0))
    assert out.found
    assert abs(out.residuals[0]) < 1e-8


def test_residual_smooth_and_bracketing(kepler25):
    cfg = IntegratorConfig(rtol=1e-10, atol=1e-10, t_max=100.0)
    thetas = np.linspace(0.6, 1.2, 7)
    vals = [shooting_residual(kepler25, -1, th, cfg).residual_at(1) for th in thetas]
    assert all(v is not None for v in vals)
    diffs = np.diff(vals)
    # smooth: second differences much smaller than the range
    assert np.abs(np.diff(diffs)).max() < 0.5 * (max(vals) - min(vals))


def test_find_orbits_recovers_circulars(kepler25, found25):
    assert len(found25) >= 2
    for orientation in ("direct", "retrograde"):
        oracle = kepler_oracle(KeplerOrbitSpec("circular", -2.5, orientation=orientation))
        gap = min(orbit_oracle_trace_gap(o, oracle, n_points=120) for o in found25)
        assert gap < 1e-6
    for orb in found25:
        assert abs(orb.residual) <= 1e-9
        assert orb.orbit_type in ("I", "II")


def test_scan_resolution_stability(kepler25, found25):
    finer = find_symmetric_orbits(kepler25, scan=88, n_cross_values=(1,))
    # same orbit set: every coarse orbit matches a fine orbit
    for orb in found25:
        _, st = orb.doubled()
        best = min(trace_distance(st, f.doubled()[1]) for f in finer)
        assert best < 1e-6


def test_endpoint_duality(kepler25, found25):
    # restarting from the other endpoint reproduces the partner chord
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=100.0)
    orb = found25[0]
    partner = solve_orbit_from_start(kepler25, orb.wT, n_cross=orb.n_cross, config=cfg)
    assert partner.T == pytest.approx(orb.T, rel=1e-8)
    assert partner.orbit_type == orb.orbit_type
    _, st1 = orb.doubled()
    _, st2 = partner.doubled()
    assert trace_distance(st1, st2) < 1e-6


def test_every_found_orbit_matches_an_oracle(kepler25, found25):
    # mu = 0: all solver orbits must be Kepler objects (or flagged spurious)
    oracles = [kepler_oracle(KeplerOrbitSpec("circular", -2.5, orientation=o)) for o in ("direct", "retrograde")]
    for orb in found25:
        gap = min(orbit_oracle_trace_gap(orb, orc, n_points=100) for orc in oracles)
        assert gap < 1e-6, "unmatched orbit should be reported spurious"


# -------------------------------------------------------------- classify


def test_classify_criteria_agree(found25):
    for orb in found25:
        tag = classify(orb)
        assert tag == orb.classification["circle"]
        if orb.classification.get("plane") is not None:
            assert orb.classification["plane"] == tag


def test_classify_kl_ellipse_solver_roundtrip():
    # solve the (1,2) ellipse with the shooting machinery and classify it
    surface = make_surface(Problem.rotating_kepler(), -1.55)
    oracle = kepler_oracle(KeplerOrbitSpec("ellipse", -1.55, k=1, l=2))
    w0 = oracle.start_point(surface)
    orbit = solve_orbit_from_start(surface, w0, t_phys_target=oracle.half_period,
                                   config=IntegratorConfig(rtol=1e-11, atol=1e-11, t_max=150.0))
    assert orbit.T_phys == pytest.approx(oracle.half_period, abs=1e-7)
    assert orbit.orbit_type == "I" == oracle.orbit_type
    assert orbit.circle_start != orbit.circle_end


def test_classify_type_ii_solver_roundtrip():
    surface = make_surface(Problem.rotating_kepler(), -1.62)
    oracle = kepler_oracle(KeplerOrbitSpec("ellipse", -1.62, k=1, l=3))
    w0 = oracle.start_point(surface)
    orbit = solve_orbit_from_start(surface, w0, t_phys_target=oracle.half_period,
                                   config=IntegratorConfig(rtol=1e-11, atol=1e-11, t_max=250.0))
    assert orbit.orbit_type == "II" == oracle.orbit_type
    assert orbit.circle_start == orbit.circle_end


# -------------------------------------------------------------- doubling


def test_double_and_iterate_identities(found25):
    orb = found25[0]
    t2, s2 = double_and_iterate(orb, 2)
    assert np.abs(s2[0] - s2[-1]).max() < 1e-8  # 2T-periodic
    assert t2[-1] == pytest.approx(2 * orb.T)
    # x^2(T + t) = R x^2(T - t) at samples
    for tau in np.linspace(0.0, orb.T, 17):
        lhs = orb.sphere_state(orb.T + tau)
        rhs = regularized_involution(orb.sphere_state(orb.T - tau))
        assert np.abs(lhs - rhs).max() < 1e-8
    # x^4 = (x^2)^2 as sample sequences
    t4, s4 = double_and_iterate(orb, 4)
    n2 = len(t2)
    assert np.allclose(s4[: n2], s2)
    assert np.allclose(s4[n2:], s2[1:])
    assert t4[-1] == pytest.approx(4 * orb.T)
    # odd iterate ends on the half chord
    t3, s3 = double_and_iterate(orb, 3)
    assert t3[-1] == pytest.approx(3 * orb.T)
    assert np.abs(s3[-1] - orb.wT).max() < 1e-8


def test_orbit_record_roundtrip(found25):
    rec = orbit_record(found25[0])
    assert rec["type"] in ("I", "II")
    assert len(rec["samples"]) <= 101
    import json

    json.dumps(rec)  # serializable


# -------------------------------------------------------------- Hill doubly symmetric


@pytest.fixture(scope="module")
def hill_orbits():
    surface = make_surface(Problem.hill_lunar(), hill_lunar_critical_energy() - 0.5)
    return surface, find_symmetric_orbits(surface, scan=44, n_cross_values=(1,))


def test_doubly_symmetric_synthetic(hill_orbits):
    surface, orbits = hill_orbits
    assert len(orbits) >= 1
    # a synthetic trace invariant under both involutions: the doubled states
    # of an orbit plus their second-involution mirror
    orb = orbits[0]
    _, states = orb.doubled()
    both = np.vstack([states, np.array([regularized_involution_prime(w) for w in states])])
    fake = SymmetricOrbit(
        surface=surface, theta0=orb.theta0, circle_start=orb.circle_start,
        circle_end=orb.circle_end, n_cross=orb.n_cross, T=orb.T, T_phys=orb.T_phys,
        w0=orb.w0, wT=orb.wT, residual=orb.residual, nondegeneracy=0.0,
        times=np.linspace(0.0, orb.T, len(both)), states=both,
    )
    # fake.doubled() reflects the combined cloud again; it stays invariant
    assert doubly_symmetric_detect(fake, tol=1e-6)


def test_doubly_symmetric_low_energy_hill(hill_orbits):
    surface, orbits = hill_orbits
    flags = [doubly_symmetric_detect(o, tol=1e-6) for o in orbits]
    assert any(flags)  # the near-circular low-energy orbit is doubly symmetric


def test_not_doubly_symmetric_for_pcrtbp_orbit(kepler25, found25):
    from symorb.errors import DomainError

    with pytest.raises(DomainError):
        doubly_symmetric_detect(found25[0])
