"""The acceptance gate: every criterion runs at its stated tolerance.

One test per criterion; a shared context caches the expensive artifacts
(the mu = 0.01 orbit scan and its transition paths) across criteria the
same way the CLI `verify` subcommand does.
"""

import pytest

from symorb.acceptance import CRITERIA, AcceptanceContext, run_criterion


@pytest.fixture(scope="module")
def ctx():
    return AcceptanceContext(seed=0)


def _run(number, ctx):
    result = run_criterion(number, ctx)
    status = "PASS" if result["passed"] else "FAIL"
    print(f"[{status}] criterion {number} ({result['title']}): "
          f"{result['elapsed']:.1f}s / {result['limit']:.0f}s")
    assert result["checks_passed"], result["details"]
    assert result["elapsed"] <= result["limit"], (
        f"criterion {number} exceeded its runtime budget: "
        f"{result['elapsed']:.1f}s > {result['limit']:.0f}s"
    )
    return result


def test_criterion_01_lagrange_ordering(ctx):
    _run(1, ctx)


def test_criterion_02_symmetry_suite(ctx):
    _run(2, ctx)


def test_criterion_03_regularization_correspondence(ctx):
    _run(3, ctx)


def test_criterion_04_rotating_kepler_recovery(ctx):
    result = _run(4, ctx)
    for row in result["details"]["rows"].values():
        assert row["trace_gap"] <= 1e-6
        assert row["half_period_error"] <= 1e-8


def test_criterion_05_two_symmetric_orbits(ctx):
    result = _run(5, ctx)
    assert result["details"]["count"] >= 2


def test_criterion_06_type_classification(ctx):
    result = _run(6, ctx)
    assert result["details"]["classifier_agreement"]


def test_criterion_07_index_oracles(ctx):
    result = _run(7, ctx)
    assert result["details"]["oracle_matches"] == 100


def test_criterion_08_partner_lemma(ctx):
    result = _run(8, ctx)
    for row in result["details"]["rows"]:
        assert row["equal"]


def test_criterion_09_mean_index_identity(ctx):
    result = _run(9, ctx)
    for row in result["details"]["rows"]:
        assert row["defect"] <= 0.1
        assert row["mean_rs"] > 0.5


def test_criterion_10_ellipsoid_census(ctx):
    result = _run(10, ctx)
    assert result["details"]["short_cz"] == 3


def test_criterion_11_homology_tables(ctx):
    result = _run(11, ctx)
    assert result["details"]["table"] == [1, 3, 4, 4, 4, 4, 4, 4]


def test_criterion_12_cover_contract(ctx):
    result = _run(12, ctx)
    assert result["details"]["psi_alpha_worst"] <= 1e-12
    assert result["details"]["central_symmetry_worst"] <= 1e-9


def test_criterion_13_convexity_checker(ctx):
    result = _run(13, ctx)
    assert result["details"]["bumpy_min_eig"] < 0


def test_all_criteria_covered():
    assert sorted(CRITERIA) == list(range(1, 14))
