import json

import numpy as np
import pytest

from hermitlab import algebra as alg
from hermitlab.algebra import CurvatureTensor
from hermitlab.catalog import (
    build_model,
    catalog,
    complex_hyperbolic,
    complex_space_form,
    cross7,
    load_model_config,
    model_spec,
    nearly_kahler_s6,
    round_sphere_polar,
)
from hermitlab.manifold import (
    ChartManifold,
    PreconditionError,
    bianchi2_residual,
    christoffel,
    eq8_residual,
    metric_derivative,
    nabla_j,
    nabla_r,
    nabla_r_full,
    nu_field,
    nu_gradient,
    point_geometry,
    riemann,
)
from conftest import interior_points


def test_cross_product_identities():
    rng = np.random.default_rng(0)
    for _ in range(10):
        u, v = rng.standard_normal((2, 7))
        w = cross7(u, v)
        assert abs(w @ w - (u @ u) * (v @ v) + (u @ v) ** 2) < 1e-12
        assert abs(w @ u) < 1e-12 and abs(w @ v) < 1e-12
        assert np.allclose(cross7(v, u), -w)


def test_chart_rejects_bad_box():
    with pytest.raises(ValueError):
        ChartManifold(4, [0, 0, 0, 0], [1, 1, 0, 1], lambda p: np.eye(4), lambda p: alg.standard_j(2))
    with pytest.raises(ValueError):
        ChartManifold(3, 0, 1, lambda p: np.eye(3), lambda p: np.eye(3))


def test_boundary_points_rejected(torus):
    with pytest.raises(ValueError, match="boundary"):
        christoffel(torus, np.zeros(6))


# --- flat torus ------------------------------------------------------------------


def test_flat_torus_vanishes(torus):
    p = torus.center
    assert np.abs(christoffel(torus, p)).max() == 0.0
    assert riemann(torus, p).max_abs() == 0.0
    assert np.abs(nabla_j(torus, p)).max() == 0.0
    assert np.abs(nabla_r(torus, p, 0)).max() == 0.0


def test_flat_metric_by_finite_differences():
    # no analytic callbacks: the FD stack alone must give zero
    M = ChartManifold(6, 0, 1, lambda p: np.eye(6), lambda p: alg.standard_j(3))
    assert riemann(M, M.center).max_abs() < 1e-10
    assert np.abs(nabla_j(M, M.center)).max() < 1e-10


# --- Christoffel ----------------------------------------------------------------


@pytest.mark.parametrize("theta0", [0.5, 1.0, 2.0])
def test_two_sphere_christoffel(theta0):
    M = round_sphere_polar()
    p = np.array([theta0, 3.0])
    G = christoffel(M, p)
    assert G[0, 1, 1] == pytest.approx(-np.sin(theta0) * np.cos(theta0), abs=1e-9)
    assert G[1, 0, 1] == pytest.approx(np.cos(theta0) / np.sin(theta0), abs=1e-9)
    assert np.allclose(G, G.transpose(0, 2, 1))
    H = M.hermitian_point(p)
    assert (riemann(M, p) - alg.pi1(H)).max_abs() < 1e-8


def test_analytic_and_fd_paths_agree():
    A = complex_space_form(3, 4.0, analytic=True)
    F = complex_space_form(3, 4.0, analytic=False)
    for p in interior_points(A, 4, seed=1):
        assert np.abs(metric_derivative(A, p) - metric_derivative(F, p)).max() < 1e-7
        assert np.abs(christoffel(A, p) - christoffel(F, p)).max() < 1e-7
        assert (riemann(A, p) - riemann(F, p)).max_abs() < 1e-7


def test_spec_fd_scheme_still_meets_curvature_tolerances():
    # second-order stencil with 1e-4 steps
    for M, model in (
        (complex_space_form(3, 4.0, analytic=False, order=2, fd_step=1e-4, outer_step=1e-3),
         lambda H: alg.pi1(H) + alg.pi2(H)),
        (nearly_kahler_s6(order=2, fd_step=1e-4, outer_step=1e-3), alg.pi1),
    ):
        p = interior_points(M, 1, seed=2)[0]
        H = M.hermitian_point(p)
        assert (riemann(M, p) - model(H)).max_abs() < 1e-5


# --- curvature of catalog models -------------------------------------------------


def test_s6_is_round(s6):
    for p in interior_points(s6, 3, seed=3):
        H = s6.hermitian_point(p)
        R = riemann(s6, p)
        assert (R - alg.pi1(H)).max_abs() < 1e-5
        assert R.symmetry_residual() < 1e-6 and R.bianchi_residual() < 1e-6


def test_fubini_study_is_space_form(cp3):
    for p in interior_points(cp3, 3, seed=4):
        H = cp3.hermitian_point(p)
        R = riemann(cp3, p)
        assert (R - (alg.pi1(H) + alg.pi2(H))).max_abs() < 1e-5
        assert np.abs(alg.ricci(R, H).comps - 8 * H.g).max() < 1e-4


@pytest.mark.parametrize("c", [-4.0, -1.0])
def test_complex_hyperbolic_is_space_form(c):
    M = complex_hyperbolic(3, c)
    p = interior_points(M, 1, seed=5)[0]
    H = M.hermitian_point(p)
    assert (riemann(M, p) - (c / 4) * (alg.pi1(H) + alg.pi2(H))).max_abs() < 1e-5


def test_every_catalog_point_is_consistent():
    for spec in catalog():
        M = spec.build()
        for p in interior_points(M, 2, seed=6):
            H = M.hermitian_point(p)
            assert np.abs(H.J @ H.J + np.eye(M.dim)).max() < 1e-8
            assert np.abs(H.J.T @ H.g @ H.J - H.g).max() < 1e-8
            G = christoffel(M, p)
            assert np.abs(G - G.transpose(0, 2, 1)).max() == 0.0
            R = riemann(M, p)
            assert R.symmetry_residual() < 1e-6, spec.name
            assert R.bianchi_residual() < 1e-6, spec.name


# --- nabla J ------------------------------------------------------------------------


def test_nabla_j(cp3, s6):
    p = interior_points(cp3, 1, seed=7)[0]
    assert np.abs(nabla_j(cp3, p)).max() < 1e-6
    q = interior_points(s6, 1, seed=7)[0]
    DJ = nabla_j(s6, q)
    assert np.abs(DJ).max() > 0.1
    # nearly Kahler: (nabla_X J) X = 0
    for v in np.random.default_rng(0).standard_normal((3, 6)):
        assert np.abs(np.tensordot(v, DJ, axes=(0, 0)) @ v).max() < 1e-6


# --- nabla R and the Bianchi identity ---------------------------------------------------


def test_round_sphere_is_locally_symmetric(s6):
    p = interior_points(s6, 1, seed=8)[0]
    assert np.abs(nabla_r_full(s6, p)).max() < 1e-4


def test_nabla_r_direction_forms(cp3):
    p = interior_points(cp3, 1, seed=9)[0]
    e = np.zeros(6)
    e[2] = 1.0
    assert np.allclose(nabla_r(cp3, p, 2), nabla_r(cp3, p, e))


def test_nabla_r_detects_nonsymmetric_metric(perturbed):
    p = perturbed.center
    assert np.abs(nabla_r_full(perturbed, p)).max() > 1e-3


@pytest.mark.parametrize("name", ["flat-torus", "fubini-study", "nearly-kahler-s6", "scaled-product", "perturbed-torus"])
def test_second_bianchi_on_catalog(name):
    _, M = build_model(name)
    for p in interior_points(M, 2, seed=10):
        H = M.hermitian_point(p)
        DR = nabla_r_full(M, p)
        # cyclic identity in full, for every direction triple
        cyc = DR.transpose(0, 1, 2, 3, 4) + DR.transpose(1, 2, 0, 3, 4) + DR.transpose(2, 0, 1, 3, 4)
        assert np.abs(cyc).max() < 1e-4, name
        for s in alg.spawn_seeds(1, 3):
            tr = alg.sample_antiholomorphic_triple(H, s)
            assert bianchi2_residual(M, p, tr, DR=DR) < 1e-4


def test_bianchi2_on_torus_is_zero(torus):
    H = torus.hermitian_point(torus.center)
    tr = alg.sample_antiholomorphic_triple(H, 0)
    assert bianchi2_residual(torus, torus.center, tr) == 0.0


# --- six-term identity and nu gradient ---------------------------------------------


def test_eq8_vanishes_on_kahler_models(torus, cp3):
    for M in (torus, cp3):
        p = interior_points(M, 1, seed=11)[0]
        tr = alg.sample_antiholomorphic_triple(M.hermitian_point(p), 0)
        assert eq8_residual(M, p, tr) < 1e-4


def test_eq8_on_s6_and_fault_injection(s6):
    p = interior_points(s6, 1, seed=12)[0]
    tr = alg.sample_antiholomorphic_triple(s6.hermitian_point(p), 1)
    assert eq8_residual(s6, p, tr) < 1e-3
    nu = nu_field(s6)
    bad = eq8_residual(s6, p, tr, nu=lambda q: nu(q) * (1.0 + 2.0 * q[0] + q[3]))
    assert bad > 1e-1


def test_eq8_preconditions(product, perturbed):
    for M in (product, perturbed):
        p = interior_points(M, 1, seed=13)[0]
        tr = alg.sample_antiholomorphic_triple(M.hermitian_point(p), 0)
        with pytest.raises(PreconditionError):
            eq8_residual(M, p, tr)


def test_nu_gradient(cp3, s6, product):
    for M in (cp3, s6):
        p = interior_points(M, 1, seed=14)[0]
        grad = nu_gradient(M, p)
        assert grad.shape == (6,)
        assert np.abs(grad).max() < 1e-4
    with pytest.raises(PreconditionError):
        nu_gradient(product, product.center + 0.1)


def test_nu_field_is_deterministic(cp3):
    p = interior_points(cp3, 1, seed=15)[0]
    assert nu_field(cp3)(p) == nu_field(cp3)(p)
    assert nu_field(cp3)(p) == pytest.approx(1.0, abs=1e-8)


# --- point geometry dump -----------------------------------------------------------------


def test_point_geometry_json(cp3):
    geo = point_geometry(cp3, cp3.center, with_nabla_r=True)
    obj = json.loads(json.dumps(geo.to_json()))
    assert obj["riemann"]["dims"] == [6, 6, 6, 6]
    assert obj["nabla_r"]["dims"] == [6, 6, 6, 6, 6]
    R = CurvatureTensor.from_json(obj["riemann"])
    assert np.array_equal(R.comps, geo.riemann.comps)


# --- catalog ------------------------------------------------------------------------------


def test_catalog_contents():
    names = [s.name for s in catalog()]
    for required in ("flat-torus", "fubini-study", "complex-hyperbolic", "nearly-kahler-s6",
                     "scaled-product", "perturbed-torus"):
        assert required in names
    ms = {s.params.get("m") for s in catalog() if s.name == "fubini-study"}
    assert ms == {2, 3}


def test_model_flags():
    t = model_spec("flat-torus")
    assert (t.kahler, t.rk, t.constant_k, t.nu) == (True, True, True, 0.0)
    f = model_spec("fubini-study", m=3, c=4)
    assert (f.kahler, f.rk, f.constant_k, f.mu, f.nu) == (True, True, False, 4.0, 1.0)
    s = model_spec("nearly-kahler-s6")
    assert (s.kahler, s.rk, s.constant_k, s.nu) == (False, True, True, 1.0)


@pytest.mark.parametrize(
    "name, params",
    [
        ("nope", {}),
        ("fubini-study", {"c": -1.0}),
        ("complex-hyperbolic", {"c": 2.0}),
        ("scaled-product", {"c1": 2.0, "c2": 2.0}),
        ("perturbed-torus", {"eps": 3.0}),
        ("flat-torus", {"m": 2.5}),
        ("flat-torus", {"c": 1.0}),
    ],
)
def test_model_validation(name, params):
    with pytest.raises(ValueError):
        model_spec(name, **params)


def test_model_config_file(tmp_path):
    path = tmp_path / "model.json"
    path.write_text(json.dumps({"model": "fubini-study", "m": 2, "c": 2.0}))
    name, params = load_model_config(path)
    spec, M = build_model(name, **params)
    assert M.dim == 4 and spec.params["c"] == 2.0
    path.write_text("[1, 2]")
    with pytest.raises(ValueError):
        load_model_config(path)
