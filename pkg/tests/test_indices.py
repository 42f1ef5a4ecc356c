import math

import numpy as np
import pytest
from scipy.linalg import expm

from symorb.dynamics import Problem
from symorb.errors import DegenerateCrossingError
from symorb.flow import IntegratorConfig, event_return_to_fixed_locus
from symorb.indices import (
    OMEGA2,
    contact_frame,
    cz_index,
    frame_coordinates,
    line_path_from_angles,
    line_path_from_vectors,
    mean_indices_from_path,
    orbit_rs_index_from_path,
    reflection_in_frame,
    rfh_index,
    rs_index_general,
    rs_index_line,
    transition_path,
    winding_index_oracle,
)
from symorb.orbits import KeplerOrbitSpec, kepler_oracle
from symorb.regularize import lift_plane_point, make_surface

RNG = np.random.default_rng(23)
TIGHT = IntegratorConfig(rtol=1e-12, atol=1e-12, t_max=3e3)


def rot(t):
    return np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])


def angle_vec(fn):
    return lambda t: np.array([math.cos(fn(t)), math.sin(fn(t))])


# -------------------------------------------------------------- line paths


def test_line_path_examples():
    lp = line_path_from_vectors(angle_vec(lambda t: t), 0.0, math.pi)
    assert rs_index_line(lp).value == 1.0
    lp = line_path_from_vectors(angle_vec(lambda t: -t), 0.0, math.pi)
    assert rs_index_line(lp).value == -1.0
    lp = line_path_from_angles([0.0, 1.0], [0.7, 0.7])
    assert rs_index_line(lp).value == 0.0


def test_line_path_oracle_hundred():
    matched = 0
    trials = 0
    while matched < 100 and trials < 160:
        trials += 1
        a = RNG.normal(size=4)
        fn = lambda t: 1.3 * a[0] * t + a[1] * np.sin(2 * t) + 0.9 * a[2] * np.cos(3 * t + a[3]) + 0.4
        lp = line_path_from_vectors(angle_vec(fn), 0.0, 1.7, n=201)
        try:
            iv = rs_index_line(lp)
        except DegenerateCrossingError:
            continue
        assert iv.value == winding_index_oracle(lp)
        assert (2 * iv.value) == int(2 * iv.value)  # half-integer exactly
        matched += 1
    assert matched == 100


def test_line_path_refinement_invariance():
    for _ in range(20):
        a = RNG.normal(size=3)
        fn = lambda t: a[0] * t + a[1] * np.sin(3 * t + a[2]) + 0.3
        lp1 = line_path_from_vectors(angle_vec(fn), 0.0, 2.0, n=129)
        lp2 = line_path_from_vectors(angle_vec(fn), 0.0, 2.0, n=257)
        try:
            assert rs_index_line(lp1).twice == rs_index_line(lp2).twice
        except DegenerateCrossingError:
            continue


def test_degenerate_crossing_reference_shift():
    # quadratic tangency at an interior time: signature 0, index unchanged
    fn = lambda t: 0.4 * (t - 1.0) ** 2
    lp = line_path_from_vectors(angle_vec(fn), 0.0, 2.0, n=201)
    iv = rs_index_line(lp)
    assert iv.value == 0.0
    # cubic crossing: behaves like a regular +1 crossing
    fn = lambda t: 0.4 * (t - 1.0) ** 3
    lp = line_path_from_vectors(angle_vec(fn), 0.0, 2.0, n=201)
    assert rs_index_line(lp).value == 1.0


def test_catenation_of_line_paths():
    for _ in range(25):
        a = RNG.normal(size=3)
        fn = lambda t: 1.2 * a[0] * t + a[1] * np.sin(2 * t + a[2]) + 0.37
        t_mid = 0.9
        try:
            full = rs_index_line(line_path_from_vectors(angle_vec(fn), 0.0, 2.0, n=257))
            left = rs_index_line(line_path_from_vectors(angle_vec(fn), 0.0, t_mid, n=129))
            right = rs_index_line(line_path_from_vectors(angle_vec(fn), t_mid, 2.0, n=129))
        except DegenerateCrossingError:
            continue
        assert full.twice == left.twice + right.twice


# -------------------------------------------------------------- general engine


def test_general_matches_line_on_random_paths():
    agree = 0
    for _ in range(40):
        a = RNG.normal(size=4)
        fn = lambda t: 1.3 * a[0] * t + a[1] * np.sin(2 * t) + 0.9 * a[2] * np.cos(3 * t + a[3]) + 0.4
        vec = angle_vec(fn)
        frame = lambda t: vec(t).reshape(2, 1)
        v = np.array([[1.0], [0.0]])
        lp = line_path_from_vectors(vec, 0.0, 1.5, n=161)
        try:
            iv_line = rs_index_line(lp)
            iv_gen = rs_index_general(frame, v, 0.0, 1.5)
        except DegenerateCrossingError:
            continue
        assert iv_line.twice == iv_gen.twice
        agree += 1
    assert agree >= 30


def test_direct_sum_additivity():
    o4 = np.block([[OMEGA2, np.zeros((2, 2))], [np.zeros((2, 2)), OMEGA2]])
    j2 = np.array([[0.0, -1.0], [1.0, 0.0]])
    j4 = np.block([[j2, np.zeros((2, 2))], [np.zeros((2, 2)), j2]])
    done = 0
    for _ in range(20):
        a = RNG.normal(size=4)
        b = RNG.normal(size=4)
        f1 = lambda t: 1.1 * a[0] * t + a[1] * np.sin(2 * t) + 0.45 + 0.3 * a[2]
        f2 = lambda t: 1.2 * b[0] * t + b[1] * np.cos(t + b[3]) + 0.2
        v1, v2 = angle_vec(f1), angle_vec(f2)
        frame = lambda t: np.array(
            [[v1(t)[0], 0], [v1(t)[1], 0], [0, v2(t)[0]], [0, v2(t)[1]]]
        )
        vmat = np.array([[1.0, 0], [0, 0], [0, 1.0], [0, 0]])
        try:
            s_line = (
                rs_index_line(line_path_from_vectors(v1, 0.0, 1.5, n=161)).twice
                + rs_index_line(line_path_from_vectors(v2, 0.0, 1.5, n=161)).twice
            )
            s_gen = rs_index_general(frame, vmat, 0.0, 1.5, omega=o4, jmat=j4).twice
        except DegenerateCrossingError:
            continue
        assert s_line == s_gen
        done += 1
    assert done >= 14


def test_constant_transverse_path_zero():
    frame = lambda t: np.array([[math.cos(0.8)], [math.sin(0.8)]])
    v = np.array([[1.0], [0.0]])
    assert rs_index_general(frame, v, 0.0, 1.0).twice == 0


def test_naturality_under_v_fixing_conjugation():
    # conjugating by a symplectic matrix fixing V = R x (0) pointwise
    g = np.array([[1.0, 0.7], [0.0, 1.0]])  # fixes (1, 0); symplectic
    for _ in range(10):
        a = RNG.normal(size=3)
        fn = lambda t: a[0] * t + a[1] * math.sin(2 * t + a[2]) + 0.3
        vec = angle_vec(fn)
        vec_g = lambda t: g @ vec(t)
        try:
            i1 = rs_index_line(line_path_from_vectors(vec, 0.0, 1.7, n=161))
            i2 = rs_index_line(line_path_from_vectors(vec_g, 0.0, 1.7, n=161))
        except DegenerateCrossingError:
            continue
        assert i1.twice == i2.twice


def test_antisymplectic_reflection_identity():
    # mu_RS(R L(T - t), R V; V = R V) = -(-mu_RS(L(t), V)) = mu_RS(L(t), V)
    refl = np.diag([1.0, -1.0])
    for _ in range(10):
        a = RNG.normal(size=3)
        fn = lambda t: a[0] * t + 0.8 * a[1] * math.sin(2 * t + a[2]) + 0.4
        vec = angle_vec(fn)
        vec_r = lambda t: refl @ vec(1.7 - t)
        try:
            i1 = rs_index_line(line_path_from_vectors(vec, 0.0, 1.7, n=161))
            i2 = rs_index_line(line_path_from_vectors(vec_r, 0.0, 1.7, n=161))
        except DegenerateCrossingError:
            continue
        assert i1.twice == i2.twice


# -------------------------------------------------------------- CZ


def test_cz_rotation_values():
    assert cz_index(rot, 1.0).value == 1
    assert cz_index(rot, 6.0).value == 1
    assert cz_index(rot, 2 * math.pi + 0.3).value == 3
    assert cz_index(rot, 4 * math.pi + 0.2).value == 5


def test_cz_degenerate_endpoint():
    with pytest.raises(DegenerateCrossingError):
        cz_index(rot, 2 * math.pi)


def test_cz_hyperbolic_zero():
    psi = lambda t: np.array([[math.exp(t), 0.0], [0.0, math.exp(-t)]])
    assert cz_index(psi, 1.0).value == 0


def test_cz_loop_property():
    for _ in range(6):
        g = RNG.normal(size=3)

        def base(t):
            s = np.array([[g[0] * t, g[1] * t], [g[2] * t, -g[0] * t]])
            return expm(s)

        try:
            i0 = cz_index(base, 1.0)
            up = cz_index(lambda t: rot(2 * math.pi * t) @ base(t), 1.0)
            dn = cz_index(lambda t: rot(-2 * math.pi * t) @ base(t), 1.0)
        except DegenerateCrossingError:
            continue
        assert up.value == i0.value + 2
        assert dn.value == i0.value - 2


def test_cz_ellipsoid_short_orbit_path():
    # reduced path of the short ellipsoid orbit: rotation by 2t(1/r1 + 1/r2)
    r1, r2 = 1.0, math.sqrt(2.0)
    rate = 2.0 * (1.0 / r1 + 1.0 / r2)
    psi = lambda t: rot(rate * t)
    assert cz_index(psi, math.pi * r1).value == 3


# -------------------------------------------------------------- contact frame


@pytest.fixture(scope="module")
def kepler_surface():
    return make_surface(Problem.rotating_kepler(), -1.8)


@pytest.fixture(scope="module")
def retro_path(kepler_surface):
    oracle = kepler_oracle(KeplerOrbitSpec("circular", -1.8, orientation="retrograde"))
    w0 = oracle.start_point(kepler_surface)
    ret = event_return_to_fixed_locus(kepler_surface, w0, TIGHT)
    path = transition_path(kepler_surface, w0, 2.0 * ret.T, TIGHT)
    return path, ret


def test_frame_pairing_normalized(kepler_surface, retro_path):
    path, ret = retro_path
    for t in np.linspace(0.0, 2 * ret.T, 9):
        w = path.vtraj.state(t)
        e1, e2 = contact_frame(kepler_surface, w)
        pair = -(e2[3:] @ e1[:3])  # dlambda(e1, e2)
        assert pair == pytest.approx(1.0, abs=1e-10)
        # e2 vertical, e1 coordinates read back correctly
        assert np.abs(e2[:3]).max() == 0.0
        a, b = frame_coordinates(e1, e2, e1)
        assert (a, b) == pytest.approx((1.0, 0.0), abs=1e-10)
        a, b = frame_coordinates(e1, e2, e2)
        assert (a, b) == pytest.approx((0.0, 1.0), abs=1e-10)


def test_reflection_matrix_at_fixed_point(kepler_surface, retro_path):
    path, _ = retro_path
    w0 = path.vtraj.state(0.0)
    r = reflection_in_frame(kepler_surface, w0)
    # the linearized involution fixes the circle-tangent axis (the reference
    # Lagrangian) and flips the vertical one
    assert np.allclose(r, np.diag([1.0, -1.0]), atol=1e-9)


def test_circle_tangent_maps_to_first_axis(kepler_surface):
    from symorb.regularize import _circle_radius

    th = 2.1
    h = 1e-6

    def cpt(t):
        f = _circle_radius(kepler_surface, t, +1)
        return np.array([math.cos(t), 0.0, math.sin(t), 0.0, f, 0.0])

    w = cpt(th)
    tang = (cpt(th + h) - cpt(th - h)) / (2 * h)
    e1, e2 = contact_frame(kepler_surface, w)
    a, b = frame_coordinates(e1, e2, tang)
    assert abs(b) < 1e-7 * max(1.0, abs(a))


def test_transition_symplectic(retro_path):
    path, ret = retro_path
    for t in np.linspace(0.0, 2 * ret.T, 7):
        psi = path.psi_raw(t)
        assert abs(np.linalg.det(psi) - 1.0) < 1e-8
    assert np.allclose(path.psi_raw(0.0), np.eye(2), atol=1e-10)
    assert max(path.det_log) < 1e-8


def test_circular_orbit_monodromy_elliptic(retro_path):
    path, _ = retro_path
    eig = np.linalg.eigvals(path.monodromy())
    assert np.abs(np.abs(eig) - 1.0).max() < 1e-8


def test_orbit_rs_index_and_partner(kepler_surface, retro_path):
    path, ret = retro_path
    iv = orbit_rs_index_from_path(path, ret.T)
    assert 2 * iv.value == iv.twice  # half-integer bookkeeping
    # brute-force winding of the same line path agrees
    vec = lambda t: path.psi_periodic(t) @ np.array([1.0, 0.0])
    lp = line_path_from_vectors(vec, 0.0, ret.T, n=801)
    assert iv.value == winding_index_oracle(lp)
    # partner chord from the far endpoint
    wT = ret.state
    retP = event_return_to_fixed_locus(kepler_surface, wT, TIGHT)
    pathP = transition_path(kepler_surface, wT, 2.0 * retP.T, TIGHT)
    ivP = orbit_rs_index_from_path(pathP, retP.T)
    assert ivP.twice == iv.twice


def test_vertical_preserving_reframing_invariance(retro_path):
    path, ret = retro_path
    t_half = ret.T
    iv = orbit_rs_index_from_path(path, t_half)
    for trial in range(3):
        p = RNG.normal(size=2)
        afun = lambda t: math.exp(0.4 * math.sin(p[0] + 2 * math.pi * t / t_half))
        cfun = lambda t: 0.8 * math.sin(math.pi * t / t_half) * math.cos(p[1] + t)

        def g(t):
            a = afun(t)
            return np.array([[a, 0.0], [cfun(t), 1.0 / a]])

        g0inv = np.linalg.inv(g(0.0))
        vec = lambda t: (g(t) @ path.psi_raw(min(t, t_half)) @ g0inv) @ np.array([1.0, 0.0])
        lp = line_path_from_vectors(vec, 0.0, t_half, n=801)
        assert rs_index_line(lp).twice == iv.twice


def test_mean_indices_identity(retro_path):
    path, ret = retro_path
    rep = mean_indices_from_path(path, ret.T, m_max=16)
    assert rep.defect <= 0.1
    assert rep.mean_rs > 0.5
    # iterates reuse the一 period: mu_CZ(x^{2m}) = 2 mu_RS(x^m) seen termwise
    rs = dict(rep.rs_sequence)
    for m, v in rep.cz_sequence:
        if m in rs:
            assert v == pytest.approx(2 * rs[m], abs=1e-9)


def test_pure_rotation_mean_index():
    # model path rotating at constant rate rho: mean index = rho T / pi per period
    t_half = 1.3
    rho = 1.7

    class _FakePath:
        period = 2 * t_half

        def psi_periodic(self, t):
            return rot(rho * t)

        def psi_raw(self, t):
            return rot(rho * t)

        def monodromy(self):
            return rot(rho * self.period)

    from symorb.indices import rs_index_of_iterate

    vals = [rs_index_of_iterate(_FakePath(), t_half, m).value for m in range(1, 9)]
    slope = np.polyfit(range(1, 9), vals, 1)[0]
    assert slope == pytest.approx(rho * t_half / math.pi, abs=0.15)


def test_identity_path_mean_zero():
    class _IdPath:
        period = 2.0

        def psi_periodic(self, t):
            return np.eye(2)

        def psi_raw(self, t):
            return np.eye(2)

        def monodromy(self):
            return np.eye(2)

    from symorb.indices import rs_index_of_iterate

    # the constant path sits inside the reference; every crossing is
    # degenerate, and the shift rule resolves each iterate to zero
    for m in (1, 2, 5):
        assert rs_index_of_iterate(_IdPath(), 1.0, m).value == 0.0


def test_rfh_shift():
    from symorb.indices import IndexValue

    iv = IndexValue(twice=3)  # mu_RS = 3/2
    assert rfh_index(iv).value == 2.0
    assert rfh_index(iv).is_integer
    iv2 = IndexValue(twice=2)  # integer mu_RS -> half-integer mu_RFH
    assert not rfh_index(iv2).is_integer
