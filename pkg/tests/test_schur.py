import json

import numpy as np
import pytest

from hermitlab.catalog import (
    ANTIHOL_CONSTANT,
    CONSTANT_K,
    KAHLER_ALL_PHI,
    NOT_MET,
    VIOLATION,
    build_model,
    model_spec,
)
from hermitlab.schur import (
    GridSpec,
    TheoremVerdict,
    Tolerances,
    classify,
    sample_points,
    scan,
    text_report,
    verification_report,
    verify_theorem1,
    verify_theorem2,
)


@pytest.fixture(scope="module")
def pts_cp3(cp3):
    return sample_points(cp3, 4, 2, seed=0)


def test_sample_points_stay_inside(cp3):
    pts = sample_points(cp3, 8, 8, seed=3)
    assert pts.shape == (16, 6)
    assert all(cp3.contains(p, 3 * cp3.reach) for p in pts)
    assert np.array_equal(pts, sample_points(cp3, 8, 8, seed=3))
    assert not np.array_equal(pts[8:], sample_points(cp3, 8, 8, seed=4)[8:])


def test_tolerances_from_env():
    tol = Tolerances.from_env({"HERMITLAB_TOL_FD2": "3e-4", "HERMITLAB_TOL_VERDICT": "2e-4"}, verdict=5e-4)
    assert tol.fd2 == 3e-4 and tol.verdict == 5e-4 and tol.algebraic == 1e-8
    with pytest.raises(ValueError):
        Tolerances.from_env({"HERMITLAB_TOL_FD1": "-1"})


# --- classify ------------------------------------------------------------------------


def test_classify_torus(torus):
    c = classify(torus, sample_points(torus, 3, 1))
    assert c.kahler and c.rk and c.constant_k
    assert all(c.theta_constant.values())
    for pc in c.points:
        for rep in pc.reports.values():
            assert rep.constant == 0.0 and rep.spread == 0.0


def test_classify_cp3(cp3, pts_cp3):
    c = classify(cp3, pts_cp3)
    assert c.kahler and c.rk and not c.constant_k
    assert all(c.theta_constant.values())
    for pc in c.points:
        for th, rep in pc.reports.items():
            assert rep.constant == pytest.approx(1 + 3 * np.cos(th) ** 2, abs=1e-5)


def test_classify_perturbed_torus(perturbed):
    c = classify(perturbed, sample_points(perturbed, 3, 1))
    assert not all(c.theta_constant.values())
    assert c.failing()
    assert not c.rk


def test_classification_json(cp3, pts_cp3):
    obj = classify(cp3, pts_cp3[:2]).to_json()
    text = json.dumps(obj, allow_nan=False)
    assert json.loads(text)["flags"]["kahler"] is True


# --- theorem 1 -----------------------------------------------------------------------


def test_theorem1_torus_branch(torus):
    v = verify_theorem1(torus, np.pi / 4, sample_points(torus, 3, 1))
    assert v.hypothesis_ok and v.conclusion == CONSTANT_K
    assert v.witness["constant_k"]["c"] == 0.0


def test_theorem1_cp3_branch(cp3, pts_cp3):
    v = verify_theorem1(cp3, np.pi / 4, pts_cp3)
    assert v.conclusion == KAHLER_ALL_PHI
    for row in v.witness["phi"]:
        assert row["c"] == pytest.approx(1 + 3 * np.cos(row["phi"]) ** 2, abs=1e-5)
        assert row["cross_point_spread"] < 1e-4


def test_theorem1_s6_is_constant_curvature(s6):
    v = verify_theorem1(s6, 0.6, sample_points(s6, 3, 1))
    assert v.conclusion == CONSTANT_K
    assert v.witness["constant_k"]["c"] == pytest.approx(1.0, abs=1e-6)


def test_theorem1_negative_control(product):
    v = verify_theorem1(product, np.pi / 4, sample_points(product, 3, 1))
    assert not v.hypothesis_ok and v.conclusion == NOT_MET


def test_theorem1_preconditions(cp3):
    with pytest.raises(ValueError):
        verify_theorem1(cp3, 0.0, [cp3.center])
    with pytest.raises(ValueError):
        verify_theorem1(cp3, np.pi / 2, [cp3.center])
    _, cp2 = build_model("fubini-study", m=2)
    with pytest.raises(ValueError, match="dimension"):
        verify_theorem1(cp2, 0.5, [cp2.center])


def test_violation_requires_hypothesis():
    with pytest.raises(ValueError):
        TheoremVerdict(1, False, VIOLATION)


def test_point_dependent_constants_are_reported_as_violation(torus, monkeypatch):
    # curvature nu(p) * pi1 with nu varying between points: pointwise
    # constancy holds everywhere but the constant is not global
    from hermitlab import algebra as alg
    from hermitlab import schur

    def fake_riemann(M, p):
        return (1.0 + float(np.sum(p))) * alg.pi1(M.hermitian_point(p))

    monkeypatch.setattr(schur, "riemann", fake_riemann)
    pts = sample_points(torus, 3, 0)
    v1 = verify_theorem1(torus, np.pi / 4, pts)
    assert v1.hypothesis_ok and v1.conclusion == VIOLATION
    v2 = verify_theorem2(torus, pts, n_triples=0)
    assert v2.hypothesis_ok and v2.conclusion == VIOLATION
    assert v2.witness["nu_cross_point_spread"] > 0.1


# --- theorem 2 -----------------------------------------------------------------------


def test_theorem2_cp3(cp3, pts_cp3):
    v = verify_theorem2(cp3, pts_cp3, n_triples=1)
    assert v.hypothesis_ok and v.conclusion == ANTIHOL_CONSTANT
    assert v.witness["nu_mean"] == pytest.approx(1.0, abs=1e-5)
    assert v.witness["nu_cross_point_spread"] < 1e-4
    assert v.witness["max_rk_fit_residual"] < 1e-4


def test_theorem2_s6(s6):
    v = verify_theorem2(s6, sample_points(s6, 2, 1), n_triples=1)
    assert v.conclusion == ANTIHOL_CONSTANT
    assert v.witness["nu_mean"] == pytest.approx(1.0, abs=1e-5)
    assert v.witness["max_rk_fit_residual"] < 1e-4
    assert v.witness["max_six_term_residual"] < 1e-3


def test_theorem2_torus(torus):
    v = verify_theorem2(torus, sample_points(torus, 2, 1), n_triples=1)
    assert v.conclusion == ANTIHOL_CONSTANT and v.witness["nu"] == [0.0, 0.0, 0.0]


@pytest.mark.parametrize("fixture", ["product", "perturbed"])
def test_theorem2_negative_controls(fixture, request):
    M = request.getfixturevalue(fixture)
    v = verify_theorem2(M, sample_points(M, 3, 1))
    assert not v.hypothesis_ok and v.conclusion == NOT_MET


# --- determinism and order independence ----------------------------------------------


def test_verdicts_are_order_independent(cp3, pts_cp3):
    rng = np.random.default_rng(0)
    shuffled = pts_cp3[rng.permutation(len(pts_cp3))]
    a = verify_theorem1(cp3, np.pi / 3, pts_cp3)
    b = verify_theorem1(cp3, np.pi / 3, shuffled)
    assert a.conclusion == b.conclusion
    for ra, rb in zip(a.witness["phi"], b.witness["phi"]):
        assert abs(ra["c"] - rb["c"]) < 1e-12
        assert abs(ra["cross_point_spread"] - rb["cross_point_spread"]) < 1e-12
    a2 = verify_theorem2(cp3, pts_cp3, n_triples=0)
    b2 = verify_theorem2(cp3, shuffled, n_triples=0)
    assert abs(a2.witness["nu_mean"] - b2.witness["nu_mean"]) < 1e-12
    assert sorted(a2.witness["nu"]) == pytest.approx(sorted(b2.witness["nu"]), abs=1e-15)


def test_same_seed_same_report(cp3, pts_cp3):
    spec = model_spec("fubini-study")
    tol = Tolerances()
    r1 = verification_report(spec, "verify", verify_theorem2(cp3, pts_cp3, seed=5, n_triples=1), tol, 5)
    r2 = verification_report(spec, "verify", verify_theorem2(cp3, pts_cp3, seed=5, n_triples=1), tol, 5)
    assert json.dumps(r1, sort_keys=True) == json.dumps(r2, sort_keys=True)


# --- scan ------------------------------------------------------------------------------


def test_scan_torus(torus):
    rows = scan(torus, GridSpec(n=3, axes=(0, 1, 2)))
    assert len(rows) == 27
    for r in rows:
        for k in ("c", "mu", "nu", "kahler_residual", "rk_residual", "space_form_residual", "eq2_residual"):
            assert r[k] == 0.0


def test_scan_cp3(cp3):
    rows = scan(cp3, GridSpec(n=2, axes=(0, 3)))
    assert len(rows) == 4
    for r in rows:
        assert r["mu"] == pytest.approx(4.0, abs=1e-4)
        assert r["nu"] == pytest.approx(1.0, abs=1e-4)
        assert r["c"] == pytest.approx(2.5, abs=1e-4)


def test_scan_perturbed_is_nonconstant(perturbed):
    rows = scan(perturbed, GridSpec(n=3, axes=(0, 1)))
    assert np.ptp([r["mu"] for r in rows]) > 1e-3
    assert max(r["c_spread"] for r in rows) > 1e-3


def test_text_report_rounds(cp3):
    rows = scan(cp3, GridSpec(n=1, axes=(0,)))
    rep = verification_report(model_spec("fubini-study"), "scan", rows, Tolerances(), 0)
    text = text_report(rep)
    assert "fubini-study" in text
    assert "4.00000000" not in text
