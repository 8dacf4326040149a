"""Model almost Hermitian charts with known curvature.

Complex coordinates ``z_a = u_a + i v_a`` are laid out as real coordinates
``(u_1, v_1, u_2, v_2, ...)`` so multiplication by ``i`` is the standard
``J`` of :func:`hermitlab.algebra.standard_j`.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Optional

import numpy as np

from .algebra import standard_j
from .manifold import ChartManifold

# Fano-plane triples (i, j, k) with e_i e_j = e_k for the imaginary octonions
_FANO = ((1, 2, 3), (1, 4, 5), (1, 7, 6), (2, 4, 6), (2, 5, 7), (3, 4, 7), (3, 6, 5))


def _cross_tensor() -> np.ndarray:
    eps = np.zeros((7, 7, 7))
    for i, j, k in _FANO:
        i, j, k = i - 1, j - 1, k - 1
        for a, b, c in ((i, j, k), (j, k, i), (k, i, j)):
            eps[a, b, c] = 1.0
            eps[b, a, c] = -1.0
    return eps


CROSS = _cross_tensor()


def cross7(u, v) -> np.ndarray:
    """Seven-dimensional cross product (imaginary part of the octonion product)."""
    return np.einsum("ijk,i,j->k", CROSS, u, v)


# ---------------------------------------------------------------------------
# Hermitian forms in real coordinates
# ---------------------------------------------------------------------------


def _realify(Hc: np.ndarray) -> np.ndarray:
    """Real symmetric matrix of ``Re(X^T H conj(X))`` for X = u + i v."""
    A, B = Hc.real, Hc.imag
    m = Hc.shape[0]
    g = np.empty((2 * m, 2 * m) + Hc.shape[2:])
    g[0::2, 0::2] = A
    g[1::2, 1::2] = A
    g[0::2, 1::2] = B
    g[1::2, 0::2] = -B
    return g


def _complex(p: np.ndarray) -> np.ndarray:
    return p[0::2] + 1j * p[1::2]


def _space_form_metric(p: np.ndarray, c: float) -> np.ndarray:
    """Potential ``(4/c) log(1 + c|z|^2/4)``: holomorphic curvature ``c``,
    ``g = I`` at the origin (``c = 0`` gives the flat metric)."""
    z = _complex(p)
    k = c / 4.0
    s = 1.0 + k * np.vdot(z, z).real
    Hc = np.eye(z.size) / s - k * np.outer(z.conj(), z) / s**2
    return _realify(Hc)


def _space_form_dmetric(p: np.ndarray, c: float) -> np.ndarray:
    z = _complex(p)
    m = z.size
    k = c / 4.0
    s = 1.0 + k * np.vdot(z, z).real
    outer = np.outer(z.conj(), z)
    out = np.empty((2 * m, 2 * m, 2 * m))
    for a in range(m):
        for part, unit in ((0, 1.0), (1, 1j)):
            ds = 2.0 * k * p[2 * a + part]
            dzbar = np.zeros(m, dtype=complex)
            dz = np.zeros(m, dtype=complex)
            dzbar[a] = np.conj(unit)
            dz[a] = unit
            d_outer = np.outer(dzbar, z) + np.outer(z.conj(), dz)
            dH = -np.eye(m) * ds / s**2 - k * d_outer / s**2 + 2.0 * k * outer * ds / s**3
            out[2 * a + part] = _realify(dH)
    return out


def _const_j(dim: int) -> Callable[[np.ndarray], np.ndarray]:
    J = standard_j(dim // 2)
    return lambda p: J


def _zero_dj(dim: int) -> Callable[[np.ndarray], np.ndarray]:
    return lambda p: np.zeros((dim, dim, dim))


# ---------------------------------------------------------------------------
# Constructors
# ---------------------------------------------------------------------------


def flat_torus(m: int = 3, **kw) -> ChartManifold:
    dim = 2 * m
    return ChartManifold(
        dim=dim,
        lower=np.zeros(dim),
        upper=np.ones(dim),
        metric_field=lambda p: np.eye(dim),
        j_field=_const_j(dim),
        dmetric=lambda p: np.zeros((dim, dim, dim)),
        dj=_zero_dj(dim),
        name="flat-torus",
        params={"m": m},
        **kw,
    )


def _space_form_box(m: int, c: float) -> float:
    if c >= 0:
        return 1.0
    # stay well inside the ball |z|^2 < 4/|c|
    return 0.8 * (2.0 / np.sqrt(-c)) / np.sqrt(2 * m)


def complex_space_form(m: int = 3, c: float = 4.0, analytic: bool = True, name: str = "", **kw) -> ChartManifold:
    """Fubini-Study (``c > 0``) or complex hyperbolic (``c < 0``) metric of
    holomorphic sectional curvature ``c`` in one affine chart."""
    dim = 2 * m
    a = _space_form_box(m, c)
    return ChartManifold(
        dim=dim,
        lower=np.full(dim, -a),
        upper=np.full(dim, a),
        metric_field=lambda p: _space_form_metric(p, c),
        j_field=_const_j(dim),
        dmetric=(lambda p: _space_form_dmetric(p, c)) if analytic else None,
        dj=_zero_dj(dim),
        name=name or ("fubini-study" if c > 0 else "complex-hyperbolic"),
        params={"m": m, "c": c},
        **kw,
    )


def fubini_study(m: int = 3, c: float = 4.0, **kw) -> ChartManifold:
    if c <= 0:
        raise ValueError("Fubini-Study needs c > 0")
    return complex_space_form(m, c, name="fubini-study", **kw)


def complex_hyperbolic(m: int = 3, c: float = -4.0, **kw) -> ChartManifold:
    if c >= 0:
        raise ValueError("complex hyperbolic space needs c < 0")
    return complex_space_form(m, c, name="complex-hyperbolic", **kw)


def _s6_embedding(x: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Point on S^6 over the coordinate disk and the chart differential
    (columns are the coordinate tangent vectors in R^7)."""
    w = np.sqrt(1.0 - x @ x)
    P = np.append(x, w)
    D = np.vstack([np.eye(6), -x / w])
    return P, D


def _s6_metric(x: np.ndarray) -> np.ndarray:
    w2 = 1.0 - x @ x
    return np.eye(6) + np.outer(x, x) / w2


def _s6_j(x: np.ndarray) -> np.ndarray:
    # J_P(V) = P x V; tangent vectors are recovered from their first six
    # ambient components because the chart is a graph
    P, D = _s6_embedding(x)
    return np.stack([cross7(P, D[:, j])[:6] for j in range(6)], axis=1)


def nearly_kahler_s6(radius: float = 1.0, **kw) -> ChartManifold:
    """Round unit six-sphere, orthographic chart over ``|x| < 1``, with the
    cross-product almost complex structure."""
    if radius != 1.0:
        raise ValueError("only the unit sphere is supported")
    a = 0.3
    return ChartManifold(
        dim=6,
        lower=np.full(6, -a),
        upper=np.full(6, a),
        metric_field=_s6_metric,
        j_field=_s6_j,
        name="nearly-kahler-s6",
        params={"radius": radius},
        **kw,
    )


def scaled_product(c1: float = 4.0, c2: float = 1.0, **kw) -> ChartManifold:
    """Kahler product CP^1(c1) x CP^2(c2); coordinates (z_1 | z_2, z_3)."""
    if c1 <= 0 or c2 <= 0:
        raise ValueError("scaled product needs positive curvatures")
    if c1 == c2:
        raise ValueError("scaled product needs c1 != c2")

    def metric(p):
        g = np.zeros((6, 6))
        g[:2, :2] = _space_form_metric(p[:2], c1)
        g[2:, 2:] = _space_form_metric(p[2:], c2)
        return g

    def dmetric(p):
        d = np.zeros((6, 6, 6))
        d[:2, :2, :2] = _space_form_dmetric(p[:2], c1)
        d[2:, 2:, 2:] = _space_form_dmetric(p[2:], c2)
        return d

    a = 1.0
    return ChartManifold(
        dim=6,
        lower=np.full(6, -a),
        upper=np.full(6, a),
        metric_field=metric,
        j_field=_const_j(6),
        dmetric=dmetric,
        dj=_zero_dj(6),
        name="scaled-product",
        params={"c1": c1, "c2": c2},
        **kw,
    )


def perturbed_torus(m: int = 3, eps: float = 0.05, **kw) -> ChartManifold:
    """``g = I + eps * b(p) * D`` with a Gaussian bump ``b`` and the
    J-invariant weight ``D = diag(1, 1, 2, 2, ...)``."""
    if not 0.0 <= eps <= 0.5:
        raise ValueError("eps must lie in [0, 0.5]")
    dim = 2 * m
    D = np.diag(np.repeat(np.arange(1, m + 1, dtype=float), 2))
    center = np.full(dim, 0.5)
    offset = np.linspace(-0.1, 0.1, dim)
    sigma = 0.25

    def bump(p):
        r = p - center - offset
        return np.exp(-(r @ r) / (2 * sigma**2))

    def metric(p):
        return np.eye(dim) + eps * bump(p) * D

    def dmetric(p):
        r = p - center - offset
        db = -bump(p) * r / sigma**2
        return eps * np.einsum("a,jk->ajk", db, D)

    return ChartManifold(
        dim=dim,
        lower=np.zeros(dim),
        upper=np.ones(dim),
        metric_field=metric,
        j_field=_const_j(dim),
        dmetric=dmetric,
        dj=_zero_dj(dim),
        name="perturbed-torus",
        params={"m": m, "eps": eps},
        **kw,
    )


def round_sphere_polar(**kw) -> ChartManifold:
    """Unit 2-sphere in (polar, azimuth) coordinates; used as a fixture."""

    def metric(p):
        return np.diag([1.0, np.sin(p[0]) ** 2])

    def jf(p):
        s = np.sin(p[0])
        return np.array([[0.0, -s], [1.0 / s, 0.0]])

    return ChartManifold(
        dim=2,
        lower=np.array([0.2, 0.0]),
        upper=np.array([np.pi - 0.2, 2 * np.pi]),
        metric_field=metric,
        j_field=jf,
        name="round-sphere-polar",
        **kw,
    )


# ---------------------------------------------------------------------------
# Model specs
# ---------------------------------------------------------------------------

# expected verdict names, shared with the theorem harness
CONSTANT_K = "constant-sectional-curvature"
KAHLER_ALL_PHI = "kahler-phi-constant-for-all-phi"
ANTIHOL_CONSTANT = "antiholomorphic-constant"
VIOLATION = "violation"
NOT_MET = "hypothesis-not-met"


@dataclass(frozen=True)
class ModelSpec:
    """A catalog entry: parameters, classification flags and the verdicts the
    two theorem checks should reach (``None`` where not applicable)."""

    name: str
    params: dict
    kahler: bool
    rk: bool
    constant_k: bool
    theta_constant: bool
    nu: Optional[float] = None
    mu: Optional[float] = None
    theorem1: Optional[str] = None
    theorem2: Optional[str] = None

    def build(self, **kw) -> ChartManifold:
        return MODELS[self.name].build(self.params, **kw)

    def to_json(self) -> dict:
        return {"name": self.name, "params": dict(self.params)}


@dataclass(frozen=True)
class _Entry:
    ctor: Callable[..., ChartManifold]
    defaults: dict
    ranges: dict  # name -> (low, high, integer?)
    describe: Callable[[dict], ModelSpec]
    summary: str
    extra: dict = field(default_factory=dict)

    def validated(self, params: dict) -> dict:
        out = dict(self.defaults)
        for k, v in params.items():
            if v is None:
                continue
            if k not in self.ranges:
                raise ValueError(f"unknown parameter {k!r}; expected one of {sorted(self.ranges)}")
            out[k] = v
        for k, (lo, hi, integer) in self.ranges.items():
            v = out[k]
            if integer:
                if int(v) != v:
                    raise ValueError(f"{k} must be an integer, got {v}")
                v = int(v)
            else:
                v = float(v)
            if not lo <= v <= hi:
                raise ValueError(f"{k}={v} outside [{lo}, {hi}]")
            out[k] = v
        return out

    def build(self, params: dict, **kw) -> ChartManifold:
        return self.ctor(**self.validated(params), **kw)


def _torus_spec(p):
    return ModelSpec("flat-torus", p, True, True, True, True, nu=0.0, mu=0.0,
                     theorem1=CONSTANT_K, theorem2=ANTIHOL_CONSTANT)


def _space_form_spec(name):
    def spec(p):
        c = p["c"]
        return ModelSpec(name, p, True, True, False, True, nu=c / 4, mu=c,
                         theorem1=KAHLER_ALL_PHI, theorem2=ANTIHOL_CONSTANT)
    return spec


def _s6_spec(p):
    return ModelSpec("nearly-kahler-s6", p, False, True, True, True, nu=1.0, mu=1.0,
                     theorem1=CONSTANT_K, theorem2=ANTIHOL_CONSTANT)


def _product_spec(p):
    return ModelSpec("scaled-product", p, True, True, False, False,
                     theorem1=NOT_MET, theorem2=NOT_MET)


def _perturbed_spec(p):
    return ModelSpec("perturbed-torus", p, False, False, False, False,
                     theorem1=NOT_MET, theorem2=NOT_MET)


MODELS: dict[str, _Entry] = {
    "flat-torus": _Entry(flat_torus, {"m": 3}, {"m": (1, 6, True)}, _torus_spec,
                         "flat complex torus, g = I, standard J"),
    "fubini-study": _Entry(fubini_study, {"m": 3, "c": 4.0},
                           {"m": (1, 6, True), "c": (1e-3, 1e3, False)},
                           _space_form_spec("fubini-study"),
                           "complex projective space, affine chart, holomorphic curvature c"),
    "complex-hyperbolic": _Entry(complex_hyperbolic, {"m": 3, "c": -4.0},
                                 {"m": (1, 6, True), "c": (-1e3, -1e-3, False)},
                                 _space_form_spec("complex-hyperbolic"),
                                 "complex hyperbolic ball, holomorphic curvature c < 0"),
    "nearly-kahler-s6": _Entry(nearly_kahler_s6, {"radius": 1.0}, {"radius": (1.0, 1.0, False)},
                               _s6_spec, "round S^6 with the cross-product almost complex structure"),
    "scaled-product": _Entry(scaled_product, {"c1": 4.0, "c2": 1.0},
                             {"c1": (1e-3, 1e3, False), "c2": (1e-3, 1e3, False)},
                             _product_spec, "Kahler product CP^1(c1) x CP^2(c2), c1 != c2"),
    "perturbed-torus": _Entry(perturbed_torus, {"m": 3, "eps": 0.05},
                              {"m": (1, 6, True), "eps": (0.0, 0.5, False)},
                              _perturbed_spec, "torus with a Hermitian bump in the metric"),
}


def model_spec(name: str, **params: Any) -> ModelSpec:
    if name not in MODELS:
        raise ValueError(f"unknown model {name!r}; known: {', '.join(MODELS)}")
    entry = MODELS[name]
    p = entry.validated(params)
    if name == "scaled-product" and p["c1"] == p["c2"]:
        raise ValueError("scaled product needs c1 != c2")
    return entry.describe(p)


def build_model(name: str, **params: Any) -> tuple[ModelSpec, ChartManifold]:
    spec = model_spec(name, **params)
    return spec, spec.build()


def catalog() -> list[ModelSpec]:
    """Default instance of every model, plus CP^2 alongside CP^3."""
    specs = [model_spec(name) for name in MODELS]
    specs.insert(2, model_spec("fubini-study", m=2))
    return specs


def load_model_config(path) -> tuple[str, dict]:
    """Read ``{"model": name, <param>: value, ...}`` from a JSON file."""
    obj = json.loads(Path(path).read_text())
    if not isinstance(obj, dict) or "model" not in obj:
        raise ValueError("model config must be a JSON object with a 'model' key")
    params = {k: v for k, v in obj.items() if k != "model"}
    return obj["model"], params
