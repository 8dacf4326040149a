"""Finite-difference geometry of an almost Hermitian chart.

A :class:`ChartManifold` is a coordinate box with two evaluable fields, the
metric ``g(p)`` and the almost complex structure ``J(p)`` (as the matrix of
``J^k_j``).  Everything else is produced at a point by central differences:
Christoffel symbols from metric derivatives, the curvature tensor from
differences of Christoffel symbols at neighbouring points, and ``nabla R``
from differences of curvature tensors.

Each nesting level has its own step.  The inner step (metric and J
derivatives, and Christoffel differences) is ``fd_step`` times the box width;
the outer step, used when differentiating curvature-level quantities
(``nabla R`` and the antiholomorphic curvature field), is ``outer_step``
times the box width.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .algebra import (
    AntiholoTriple,
    CurvatureTensor,
    HermitianPoint,
    RicciForm,
    SeedLike,
    j_adapted_eigenframe,
    rk_residual,
    ricci,
    tensor_to_json,
    theta_constancy,
)

Field = Callable[[np.ndarray], np.ndarray]

FD1_TOL = 1e-5
FD2_TOL = 1e-4

# coefficients of central differences: offsets k*h with weights w_k / h
_STENCILS = {
    2: ((1, 0.5), (-1, -0.5)),
    4: ((2, -1 / 12), (1, 8 / 12), (-1, -8 / 12), (-2, 1 / 12)),
}


class PreconditionError(ValueError):
    """A point fails the geometric hypothesis an operation relies on."""


@dataclass(frozen=True)
class ChartManifold:
    """Almost Hermitian structure on a coordinate box.

    Parameters
    ----------
    dim
        Real dimension ``2m``.
    lower, upper
        Corners of the coordinate box.
    metric_field, j_field
        ``p -> g(p)`` and ``p -> J(p)``.
    dmetric, dj
        Optional analytic derivatives, ``p -> d[a, j, k] = d_a g_jk`` (and the
        same layout for ``J``).  Finite differences are used when absent.
    fd_step, outer_step
        Relative step sizes (multiplied by each axis width).
    order
        Order of the central difference stencil, 2 or 4.
    """

    dim: int
    lower: np.ndarray
    upper: np.ndarray
    metric_field: Field
    j_field: Field
    dmetric: Optional[Field] = None
    dj: Optional[Field] = None
    fd_step: float = 1e-3
    outer_step: float = 1e-2
    order: int = 4
    name: str = ""
    params: dict = field(default_factory=dict)

    def __post_init__(self):
        lo = np.asarray(self.lower, dtype=float).reshape(-1)
        hi = np.asarray(self.upper, dtype=float).reshape(-1)
        if lo.size == 1:
            lo = np.full(self.dim, lo[0])
        if hi.size == 1:
            hi = np.full(self.dim, hi[0])
        if self.dim % 2 or self.dim <= 0:
            raise ValueError(f"dimension must be even and positive, got {self.dim}")
        if lo.shape != (self.dim,) or hi.shape != (self.dim,) or np.any(hi <= lo):
            raise ValueError("bad coordinate box")
        if self.order not in _STENCILS:
            raise ValueError(f"stencil order must be one of {sorted(_STENCILS)}")
        lo.setflags(write=False)
        hi.setflags(write=False)
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def widths(self) -> np.ndarray:
        return self.upper - self.lower

    @property
    def center(self) -> np.ndarray:
        return (self.lower + self.upper) / 2

    @property
    def inner_steps(self) -> np.ndarray:
        return self.fd_step * self.widths

    @property
    def outer_h(self) -> float:
        return self.outer_step * float(self.widths.min())

    @property
    def reach(self) -> np.ndarray:
        """Coordinate distance touched by the deepest stencil around a point."""
        k = max(abs(o) for o, _ in _STENCILS[self.order])
        return k * (2 * self.inner_steps + self.outer_h * np.sqrt(self.dim))

    def contains(self, p, margin: Optional[np.ndarray] = None) -> bool:
        p = np.asarray(p, dtype=float)
        m = 0.0 if margin is None else margin
        return bool(np.all(p - m >= self.lower) and np.all(p + m <= self.upper))

    def hermitian_point(self, p) -> HermitianPoint:
        return HermitianPoint(self.metric_field(np.asarray(p, dtype=float)), self.j_field(np.asarray(p, dtype=float)))


def _check_point(M: ChartManifold, p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (M.dim,):
        raise ValueError(f"point must have {M.dim} coordinates")
    if not M.contains(p, M.reach):
        raise ValueError(f"point {p} is too close to the chart boundary")
    return p


def _diff(f: Field, p: np.ndarray, steps, order: int) -> np.ndarray:
    """All coordinate partials of ``f`` at ``p``; result[a] = d_a f."""
    steps = np.broadcast_to(np.asarray(steps, dtype=float), p.shape)
    out = []
    for a in range(p.size):
        acc = 0.0
        for k, w in _STENCILS[order]:
            q = p.copy()
            q[a] += k * steps[a]
            acc = acc + w * f(q)
        out.append(acc / steps[a])
    return np.stack(out)


def _directional(f: Callable[[np.ndarray], float], p: np.ndarray, v: np.ndarray, h: float, order: int):
    acc = 0.0
    for k, w in _STENCILS[order]:
        acc = acc + w * f(p + k * h * v)
    return acc / h


def metric_derivative(M: ChartManifold, p) -> np.ndarray:
    if M.dmetric is not None:
        return np.asarray(M.dmetric(p), dtype=float)
    return _diff(M.metric_field, np.asarray(p, dtype=float), M.inner_steps, M.order)


def j_derivative(M: ChartManifold, p) -> np.ndarray:
    if M.dj is not None:
        return np.asarray(M.dj(p), dtype=float)
    return _diff(M.j_field, np.asarray(p, dtype=float), M.inner_steps, M.order)


def _christoffel(M: ChartManifold, p: np.ndarray) -> np.ndarray:
    g = M.metric_field(p)
    dg = metric_derivative(M, p)
    # lowered symbols Gamma_{l,ij} = (d_i g_jl + d_j g_il - d_l g_ij) / 2
    low = 0.5 * (dg.transpose(2, 0, 1) + dg.transpose(2, 1, 0) - dg)
    try:
        ginv = np.linalg.inv(g)
    except np.linalg.LinAlgError as exc:
        raise ValueError("singular metric matrix") from exc
    G = np.einsum("kl,lij->kij", ginv, low)
    return (G + G.transpose(0, 2, 1)) / 2


def christoffel(M: ChartManifold, p) -> np.ndarray:
    """``Gamma[k, i, j]`` with ``nabla_i d_j = Gamma^k_ij d_k``."""
    return _christoffel(M, _check_point(M, p))


def _riemann(M: ChartManifold, p: np.ndarray) -> np.ndarray:
    G = _christoffel(M, p)
    dG = _diff(lambda q: _christoffel(M, q), p, M.inner_steps, M.order)  # dG[a,m,j,k] = d_a G^m_jk
    # Rm[m,k,i,j] = d_i G^m_jk - d_j G^m_ik + G^m_ip G^p_jk - G^m_jp G^p_ik
    Rm = (
        dG.transpose(1, 3, 0, 2)
        - dG.transpose(1, 3, 2, 0)
        + np.einsum("mip,pjk->mkij", G, G)
        - np.einsum("mjp,pik->mkij", G, G)
    )
    g = M.metric_field(p)
    return np.einsum("lm,mkij->ijkl", g, Rm)


def riemann(M: ChartManifold, p) -> CurvatureTensor:
    """``R(x,y,z,u) = g(R(x,y)z, u)`` with ``R(x,y) = [nabla_x, nabla_y] - nabla_[x,y]``."""
    return CurvatureTensor(_riemann(M, _check_point(M, p)))


def nabla_j(M: ChartManifold, p) -> np.ndarray:
    """``D[i, k, j] = (nabla_i J)^k_j``."""
    p = _check_point(M, p)
    G = _christoffel(M, p)
    J = M.j_field(p)
    dJ = j_derivative(M, p)
    return dJ + np.einsum("kil,lj->ikj", G, J) - np.einsum("lij,kl->ikj", G, J)


def _nabla_r(M: ChartManifold, p: np.ndarray, v: np.ndarray, G=None, R=None) -> np.ndarray:
    """Covariant derivative of R along the coordinate vector ``v``."""
    if G is None:
        G = _christoffel(M, p)
    if R is None:
        R = _riemann(M, p)
    dR = _directional(lambda q: _riemann(M, q), p, v, M.outer_h, M.order)
    Gv = np.einsum("pai,a->pi", G, v)
    return (
        dR
        - np.einsum("pi,pjkl->ijkl", Gv, R)
        - np.einsum("pj,ipkl->ijkl", Gv, R)
        - np.einsum("pk,ijpl->ijkl", Gv, R)
        - np.einsum("pl,ijkp->ijkl", Gv, R)
    )


def nabla_r(M: ChartManifold, p, direction) -> np.ndarray:
    """``(nabla_d R)[i,j,k,l]``; ``direction`` is a coordinate index or a vector."""
    p = _check_point(M, p)
    if np.ndim(direction) == 0:
        v = np.zeros(M.dim)
        v[int(direction)] = 1.0
    else:
        v = np.asarray(direction, dtype=float)
    return _nabla_r(M, p, v)


def nabla_r_full(M: ChartManifold, p) -> np.ndarray:
    """``DR[a, i, j, k, l] = (nabla_a R)_ijkl``."""
    p = _check_point(M, p)
    G = _christoffel(M, p)
    R = _riemann(M, p)
    return np.stack([_nabla_r(M, p, e, G, R) for e in np.eye(M.dim)])


@dataclass(frozen=True)
class PointGeometry:
    point: np.ndarray
    hermitian: HermitianPoint
    christoffel: np.ndarray
    riemann: CurvatureTensor
    ricci: RicciForm
    nabla_j: np.ndarray
    nabla_r: Optional[np.ndarray] = None

    def to_json(self) -> dict:
        out = {
            "point": self.point.tolist(),
            "g": tensor_to_json(self.hermitian.g),
            "J": tensor_to_json(self.hermitian.J),
            "christoffel": tensor_to_json(self.christoffel),
            "riemann": tensor_to_json(self.riemann.comps),
            "ricci": tensor_to_json(self.ricci.comps),
            "nabla_j": tensor_to_json(self.nabla_j),
        }
        if self.nabla_r is not None:
            out["nabla_r"] = tensor_to_json(self.nabla_r)
        return out


def point_geometry(M: ChartManifold, p, with_nabla_r: bool = False) -> PointGeometry:
    p = _check_point(M, p)
    H = M.hermitian_point(p)
    R = riemann(M, p)
    return PointGeometry(
        point=p,
        hermitian=H,
        christoffel=christoffel(M, p),
        riemann=R,
        ricci=ricci(R, H),
        nabla_j=nabla_j(M, p),
        nabla_r=nabla_r_full(M, p) if with_nabla_r else None,
    )


def _along(D: np.ndarray, v: np.ndarray) -> np.ndarray:
    """Contract the leading derivative index of ``D`` with ``v``."""
    return np.tensordot(v, D, axes=(0, 0))


def bianchi2_residual(M: ChartManifold, p, triple: AntiholoTriple, DR: Optional[np.ndarray] = None) -> float:
    """|(nabla_x R)(y,z,z,y) + (nabla_y R)(z,x,z,y) + (nabla_z R)(x,y,z,y)|."""
    if DR is None:
        DR = nabla_r_full(M, p)
    x, y, z = triple.vectors

    def ev(T, a, b, c, d):
        return np.einsum("ijkl,i,j,k,l->", T, a, b, c, d)

    total = (
        ev(_along(DR, x), y, z, z, y)
        + ev(_along(DR, y), z, x, z, y)
        + ev(_along(DR, z), x, y, z, y)
    )
    return float(abs(total))


def antiholomorphic_curvature(
    M: ChartManifold, p, n: int = 64, seed: SeedLike = 0
):
    """Constancy report of antiholomorphic sectional curvature at ``p``."""
    p = np.asarray(p, dtype=float)
    return theta_constancy(CurvatureTensor(_riemann(M, p)), M.hermitian_point(p), np.pi / 2, n=n, seed=seed)


def nu_field(M: ChartManifold, n: int = 64, seed: int = 0) -> Callable[[np.ndarray], float]:
    """``p -> nu(p)``, the mean antiholomorphic curvature with a fixed plane
    sample, so finite differences act on a deterministic function."""

    def nu(p):
        return antiholomorphic_curvature(M, p, n=n, seed=seed).constant

    return nu


def _require_constancy(M, p, n, seed, tol) -> None:
    rep = antiholomorphic_curvature(M, p, n=n, seed=seed)
    if rep.spread >= tol:
        raise PreconditionError(
            f"antiholomorphic sectional curvature is not constant at {p} (spread {rep.spread:.3e})"
        )


def eq8_residual(
    M: ChartManifold,
    p,
    triple: AntiholoTriple,
    nu: Optional[Callable[[np.ndarray], float]] = None,
    n: int = 64,
    seed: int = 0,
    tol: float = FD2_TOL,
    check: bool = True,
) -> float:
    """Absolute value of the six-term expression obtained from the RK form of
    the curvature and the second Bianchi identity along an antiholomorphic
    triple ``x, y, z``::

        2 g(y,(nabla_x J)z) S(y,Jz) + g(z,(nabla_y J)y) S(x,Jz)
        + g(x,(nabla_y J)z) S(z,Jy) + g(x,(nabla_z J)y) S(y,Jz)
        + g(y,(nabla_z J)z) S(x,Jy) + 3 x(nu)

    ``nu`` defaults to :func:`nu_field`; pass another field to probe the
    plumbing.  With ``check`` the RK and pointwise-constancy hypotheses are
    verified at ``p`` first and :class:`PreconditionError` raised if they fail.
    """
    p = _check_point(M, p)
    H = M.hermitian_point(p)
    R = CurvatureTensor(_riemann(M, p))
    if check:
        rk = rk_residual(R, H)
        if rk >= tol:
            raise PreconditionError(f"curvature is not RK at {p} (residual {rk:.3e})")
        _require_constancy(M, p, n, seed, tol)
    if nu is None:
        nu = nu_field(M, n=n, seed=seed)
    S = ricci(R, H).comps
    g = H.g
    J = H.J
    DJ = nabla_j(M, p)
    x, y, z = triple.vectors

    def gDJ(a, d, b):  # g(a, (nabla_d J) b)
        return float(a @ g @ (_along(DJ, d) @ b))

    def SJ(a, b):  # S(a, J b)
        return float(a @ S @ (J @ b))

    dnu = _directional(nu, p, x, M.outer_h, M.order)
    total = (
        2 * gDJ(y, x, z) * SJ(y, z)
        + gDJ(z, y, y) * SJ(x, z)
        + gDJ(x, y, z) * SJ(z, y)
        + gDJ(x, z, y) * SJ(y, z)
        + gDJ(y, z, z) * SJ(x, y)
        + 3 * dnu
    )
    return float(abs(total))


def nu_gradient(
    M: ChartManifold, p, n: int = 64, seed: int = 0, tol: float = FD2_TOL
) -> np.ndarray:
    """Derivatives of ``nu`` along a J-adapted Ricci eigenframe at ``p``,
    ordered ``e_1..e_m, Je_1..Je_m``."""
    p = _check_point(M, p)
    _require_constancy(M, p, n, seed, tol)
    H = M.hermitian_point(p)
    R = CurvatureTensor(_riemann(M, p))
    frame = j_adapted_eigenframe(ricci(R, H), H, tol=tol)
    nu = nu_field(M, n=n, seed=seed)
    return np.array([_directional(nu, p, e, M.outer_h, M.order) for e in frame.basis.T])
