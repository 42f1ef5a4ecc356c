import math

import numpy as np
import pytest

from symorb.dynamics import (
    Problem,
    effective_potential,
    export_hill_region_csv,
    hamiltonian,
    hamiltonian_vector_field,
    hill_lunar_critical_energy,
    hill_region,
    involution,
    lagrange_points,
)
from symorb.errors import CollisionError, DomainError, UnsupportedInvolutionError

RNG = np.random.default_rng(11)


def fd_field(problem, z, h=1e-6):
    g = np.zeros(4)
    for i in range(4):
        e = np.zeros(4)
        e[i] = h
        g[i] = (hamiltonian(problem, z + e) - hamiltonian(problem, z - e)) / (2 * h)
    return np.array([g[2], g[3], -g[0], -g[1]])


def random_point():
    return RNG.normal(size=4) * 0.7 + np.array([0.45, 0.25, 0.1, 0.0])


def test_hamiltonian_hand_values():
    # both distances sqrt(1.25) at q=(0,1) for equal masses
    p = Problem.pcrtbp(0.5)
    assert hamiltonian(p, (0.0, 1.0, 0.0, 0.0)) == pytest.approx(-2.0 / math.sqrt(5.0), abs=1e-14)
    # circular rotating-Kepler point: closed-form energy -1/(2r) + sqrt(r) at r = 1/4
    rk = Problem.rotating_kepler()
    assert hamiltonian(rk, (0.25, 0.0, 0.0, -2.0)) == pytest.approx(-1.5, abs=1e-14)


def test_hamiltonian_reflection_invariance():
    for problem in (Problem.pcrtbp(0.3), Problem.rotating_kepler(), Problem.hill_lunar()):
        for _ in range(50):
            z = random_point()
            h = hamiltonian(problem, z)
            assert hamiltonian(problem, involution(problem, "R", z)) == pytest.approx(h, rel=1e-14, abs=1e-14)


def test_hill_second_involution():
    hill = Problem.hill_lunar()
    for _ in range(50):
        z = random_point()
        h = hamiltonian(hill, z)
        assert hamiltonian(hill, involution(hill, "Rprime", z)) == pytest.approx(h, rel=1e-14, abs=1e-14)
    with pytest.raises(UnsupportedInvolutionError):
        involution(Problem.pcrtbp(0.2), "Rprime", random_point())


def test_involution_is_involutive_and_explicit():
    p = Problem.pcrtbp(0.2)
    z = np.array([1.0, 2.0, 3.0, 4.0])
    assert np.allclose(involution(p, "R", z), [1.0, -2.0, -3.0, 4.0])
    for _ in range(10):
        z = random_point()
        assert np.allclose(involution(p, "R", involution(p, "R", z)), z)


def test_vector_field_components_and_fd():
    # dq1/dt = p1 + q2 for every kind, and zero on the fixed locus
    for problem in (Problem.pcrtbp(0.1), Problem.rotating_kepler(), Problem.hill_lunar()):
        for _ in range(30):
            z = random_point()
            f = hamiltonian_vector_field(problem, z)
            assert f[0] == pytest.approx(z[2] + z[1], abs=1e-14)
        z_fix = np.array([0.37, 0.0, 0.0, 0.8])
        assert hamiltonian_vector_field(problem, z_fix)[0] == 0.0
        for _ in range(100):
            z = random_point()
            assert np.allclose(hamiltonian_vector_field(problem, z), fd_field(problem, z), atol=2e-6)


def test_field_anticommutes_with_involution():
    # D R . X_H(z) = -X_H(R z): the reflected flow runs backward
    signs = np.array([1.0, -1.0, -1.0, 1.0])
    for problem in (Problem.pcrtbp(0.25), Problem.hill_lunar()):
        for _ in range(50):
            z = random_point()
            lhs = signs * hamiltonian_vector_field(problem, z)
            rhs = -hamiltonian_vector_field(problem, signs * z)
            assert np.allclose(lhs, rhs, atol=1e-10)


def test_collision_raises():
    p = Problem.pcrtbp(0.3)
    with pytest.raises(CollisionError) as exc:
        hamiltonian(p, (0.3, 0.0, 0.1, 0.1))
    assert exc.value.primary == "earth"
    with pytest.raises(CollisionError) as exc:
        hamiltonian_vector_field(p, (-0.7, 0.0, 0.0, 0.0))
    assert exc.value.primary == "moon"


def test_mass_ratio_domain():
    with pytest.raises(DomainError):
        Problem.pcrtbp(0.0)
    with pytest.raises(DomainError):
        Problem.pcrtbp(1.0)
    assert Problem.rotating_kepler().mu == 0.0


def test_lagrange_ordering_and_symmetries():
    for mu in (0.01, 0.1, 0.3, 0.5):
        lp = lagrange_points(mu)
        e = [lp.energy(k) for k in ("L1", "L2", "L3", "L4", "L5")]
        assert e[0] < e[1] <= e[2] < e[3]
        assert abs(e[3] - e[4]) <= 1e-12
        assert lp["L1"][1] == 0.0 and lp["L2"][1] == 0.0 and lp["L3"][1] == 0.0
        assert np.allclose(lp["L4"] * [1, -1], lp["L5"])
        # equilateral configuration
        assert np.allclose(lp["L4"], [mu - 0.5, math.sqrt(3) / 2])
        # residual of the equilibrium equation at the collinear points
        problem = Problem.pcrtbp(mu)
        for k in ("L1", "L2", "L3"):
            x = lp[k][0]
            f = hamiltonian_vector_field(problem, (x, 0.0, 0.0, x))
            assert np.abs(f).max() < 1e-9


def test_equal_masses_inner_point_at_barycenter():
    lp = lagrange_points(0.5)
    assert abs(lp["L1"][0]) < 1e-12


def test_effective_potential_examples():
    rk = Problem.rotating_kepler()
    assert effective_potential(rk, (0.5, 0.0)) == pytest.approx(-2.125, abs=1e-14)
    assert effective_potential(rk, (0.6, 0.0)) == pytest.approx(-0.18 - 1.0 / 0.6, abs=1e-14)
    # boundary radius of the bounded component at c = -2 solves r^3 - 4r + 2 = 0;
    # bisection oracle
    lo, hi = 0.4, 0.7
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        if mid**3 - 4 * mid + 2 > 0:
            lo = mid
        else:
            hi = mid
    r_star = 0.5 * (lo + hi)
    assert r_star == pytest.approx(0.5392, abs=2e-4)
    assert effective_potential(rk, (r_star, 0.0)) == pytest.approx(-2.0, abs=1e-9)


def test_hill_region_components_and_monotonicity():
    p = Problem.pcrtbp(0.1)
    c1 = lagrange_points(0.1).energy("L1") - 0.2
    grid = hill_region(p, c1, n=200)
    assert grid.bounded_component_count == 2
    kinds = set(grid.component_kinds.values())
    assert "earth" in kinds and "moon" in kinds
    # monotonicity: region at lower energy is contained in the higher one
    grid2 = hill_region(p, c1 + 0.1, n=200)
    assert np.all(grid2.inside[grid.inside])

    # above H(L1) the two-bounded-components structure is gone; count reported
    c_hi = lagrange_points(0.1).energy("L1") + 0.05
    grid3 = hill_region(p, c_hi, n=200)
    assert grid3.bounded_component_count != 2


def test_hill_region_contains_primary_cells():
    rk = Problem.rotating_kepler()
    grid = hill_region(rk, -2.0, n=160)
    assert grid.contains((0.5, 0.0), "earth")
    assert not grid.contains((0.6, 0.0), "earth")


def test_hill_lunar_critical_energy():
    # critical points at (+-3^(-1/3), 0) with energy -3^(4/3)/2
    hill = Problem.hill_lunar()
    x = 3.0 ** (-1.0 / 3.0)
    f = hamiltonian_vector_field(hill, (x, 0.0, 0.0, x))
    assert np.abs(f).max() < 1e-13
    assert hamiltonian(hill, (x, 0.0, 0.0, x)) == pytest.approx(hill_lunar_critical_energy(), abs=1e-14)


def test_hill_region_export(tmp_path):
    rk = Problem.rotating_kepler()
    grid = hill_region(rk, -2.0, n=24)
    csv_path = tmp_path / "grid.csv"
    json_path = tmp_path / "grid.json"
    export_hill_region_csv(grid, csv_path, json_path)
    lines = csv_path.read_text().splitlines()
    assert lines[0] == "q1,q2,U,inside,component"
    assert len(lines) == 1 + 24 * 24
    import json

    meta = json.loads(json_path.read_text())
    assert meta["shape"] == [24, 24]
