"""Curvature algebra on a single almost Hermitian tangent space.

Vectors are plain real arrays of length ``2m`` in whatever basis the metric
matrix ``g`` and the almost complex matrix ``J`` are written in.  Rank-4
tensors follow the convention

    R(x, y, z, u) = sum R[i, j, k, l] x^i y^j z^k u^l,

with sectional curvature ``K = R(x, y, y, x)`` so that the unit sphere has
``R = pi1`` and ``K = +1``.  ``Omega[i, j] = g(e_i, J e_j)`` is the
fundamental 2-form, which is antisymmetric for a Hermitian pair.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, field
from typing import NamedTuple, Sequence, Union

import numpy as np

SeedLike = Union[int, np.random.SeedSequence, np.random.Generator]

ALGEBRAIC_TOL = 1e-8
# Vectors shorter than this after projection are discarded and redrawn.
REJECT_NORM = 1e-10
MAX_FRAME_COND = 10.0
_MAX_REDRAWS = 100


class NonJInvariantWarning(UserWarning):
    """A Ricci-type form fails S(Jx, Jy) = S(x, y)."""


class NotRKWarning(UserWarning):
    """A curvature tensor fails R(x,y,z,u) = R(Jx,Jy,Jz,Ju)."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


def _rng(seed: SeedLike) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def spawn_seeds(seed: SeedLike, n: int) -> list[np.random.SeedSequence]:
    """Independent child streams, one per sample, so sample ``k`` never
    depends on how many samples were drawn before it."""
    if isinstance(seed, np.random.Generator):
        seed = int(seed.integers(2**63))
    if not isinstance(seed, np.random.SeedSequence):
        seed = np.random.SeedSequence(seed)
    return seed.spawn(n)


# ---------------------------------------------------------------------------
# Domain types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class HermitianPoint:
    """Metric ``g`` and almost complex structure ``J`` on one tangent space."""

    g: np.ndarray
    J: np.ndarray
    tol: float = field(default=ALGEBRAIC_TOL, compare=False)

    def __post_init__(self):
        g = _frozen(self.g)
        J = _frozen(self.J)
        object.__setattr__(self, "g", g)
        object.__setattr__(self, "J", J)
        n = g.shape[0]
        if g.shape != (n, n) or J.shape != (n, n):
            raise ValueError(f"g and J must be square of equal size, got {g.shape}, {J.shape}")
        if n == 0 or n % 2:
            raise ValueError(f"dimension must be even and positive, got {n}")
        scale = max(1.0, float(np.abs(g).max()))
        if np.abs(g - g.T).max() > self.tol * scale:
            raise ValueError("metric matrix is not symmetric")
        if np.linalg.eigvalsh(g).min() <= 0:
            raise ValueError("metric matrix is not positive definite")
        jj = np.abs(J @ J + np.eye(n)).max()
        if jj > self.tol * max(1.0, float(np.abs(J).max()) ** 2):
            raise ValueError(f"J*J != -I (residual {jj:.3e})")
        herm = np.abs(J.T @ g @ J - g).max()
        if herm > self.tol * scale * max(1.0, float(np.abs(J).max()) ** 2):
            raise ValueError(f"g is not J-Hermitian (residual {herm:.3e})")

    @classmethod
    def standard(cls, m: int) -> "HermitianPoint":
        """``g = I`` and ``J e_{2k-1} = e_{2k}``, ``J e_{2k} = -e_{2k-1}``."""
        return cls(np.eye(2 * m), standard_j(m))

    @property
    def dim(self) -> int:
        return self.g.shape[0]

    @property
    def m(self) -> int:
        return self.dim // 2

    @property
    def omega(self) -> np.ndarray:
        return self.g @ self.J

    def inner(self, x, y) -> float:
        return float(np.asarray(x) @ self.g @ np.asarray(y))

    def norm(self, x) -> float:
        return float(np.sqrt(self.inner(x, x)))

    def apply_j(self, x) -> np.ndarray:
        return self.J @ np.asarray(x, dtype=float)


def standard_j(m: int) -> np.ndarray:
    J = np.zeros((2 * m, 2 * m))
    for k in range(m):
        J[2 * k + 1, 2 * k] = 1.0
        J[2 * k, 2 * k + 1] = -1.0
    return J


def random_hermitian_point(dim: int, seed: SeedLike = None, spread: float = 0.5) -> HermitianPoint:
    """Random compatible pair obtained from the standard one by a change of basis.

    If ``P`` maps the new coordinates to standard ones then ``g = P^T P`` and
    ``J = P^{-1} J0 P``.  ``spread`` controls how far ``P`` is from identity.
    """
    rng = _rng(seed)
    P = np.eye(dim) + spread * rng.standard_normal((dim, dim)) / np.sqrt(dim)
    # redraw badly conditioned frames; they only add roundoff
    while np.linalg.cond(P) > MAX_FRAME_COND:
        P = np.eye(dim) + spread * rng.standard_normal((dim, dim)) / np.sqrt(dim)
    J0 = standard_j(dim // 2)
    g = P.T @ P
    J = np.linalg.solve(P, J0 @ P)
    return HermitianPoint((g + g.T) / 2, J)


@dataclass(frozen=True)
class CurvatureTensor:
    """Rank-4 component array ``R[i, j, k, l]``.

    The Riemann symmetries are not enforced on construction, since finite
    difference tensors only satisfy them approximately; use
    :meth:`symmetry_residual` and :meth:`bianchi_residual` to check.
    """

    comps: np.ndarray

    def __post_init__(self):
        c = _frozen(self.comps)
        if c.ndim != 4 or len(set(c.shape)) != 1:
            raise ValueError(f"expected an n x n x n x n array, got shape {c.shape}")
        object.__setattr__(self, "comps", c)

    @classmethod
    def zeros(cls, dim: int) -> "CurvatureTensor":
        return cls(np.zeros((dim,) * 4))

    @property
    def dim(self) -> int:
        return self.comps.shape[0]

    def __call__(self, x, y, z, u) -> float:
        return float(np.einsum("ijkl,i,j,k,l->", self.comps, x, y, z, u))

    def __add__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.comps + other.comps)

    def __sub__(self, other: "CurvatureTensor") -> "CurvatureTensor":
        return CurvatureTensor(self.comps - other.comps)

    def __mul__(self, s: float) -> "CurvatureTensor":
        return CurvatureTensor(float(s) * self.comps)

    __rmul__ = __mul__

    def __neg__(self) -> "CurvatureTensor":
        return CurvatureTensor(-self.comps)

    def max_abs(self) -> float:
        return float(np.abs(self.comps).max()) if self.comps.size else 0.0

    def symmetry_residual(self) -> float:
        """Max violation of R_ijkl = -R_jikl = -R_ijlk = R_klij."""
        R = self.comps
        return float(
            max(
                np.abs(R + R.transpose(1, 0, 2, 3)).max(),
                np.abs(R + R.transpose(0, 1, 3, 2)).max(),
                np.abs(R - R.transpose(2, 3, 0, 1)).max(),
            )
        )

    def bianchi_residual(self) -> float:
        """Max violation of R_ijkl + R_jkil + R_kijl = 0."""
        R = self.comps
        cyc = R + R.transpose(2, 0, 1, 3) + R.transpose(1, 2, 0, 3)
        return float(np.abs(cyc).max())

    def to_json(self) -> dict:
        return tensor_to_json(self.comps)

    @classmethod
    def from_json(cls, obj) -> "CurvatureTensor":
        return cls(tensor_from_json(obj))


@dataclass(frozen=True)
class RicciForm:
    comps: np.ndarray

    def __post_init__(self):
        c = _frozen(self.comps)
        if c.ndim != 2 or c.shape[0] != c.shape[1]:
            raise ValueError(f"expected a square matrix, got shape {c.shape}")
        object.__setattr__(self, "comps", c)

    @property
    def dim(self) -> int:
        return self.comps.shape[0]

    def __call__(self, x, y) -> float:
        return float(np.asarray(x) @ self.comps @ np.asarray(y))

    def j_invariance_residual(self, H: HermitianPoint) -> float:
        return float(np.abs(H.J.T @ self.comps @ H.J - self.comps).max())


@dataclass(frozen=True)
class TangentPlane:
    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "x", _frozen(self.x))
        object.__setattr__(self, "y", _frozen(self.y))

    def orthonormality_defect(self, H: HermitianPoint) -> float:
        return max(
            abs(H.inner(self.x, self.x) - 1.0),
            abs(H.inner(self.y, self.y) - 1.0),
            abs(H.inner(self.x, self.y)),
        )


@dataclass(frozen=True)
class AntiholoTriple:
    x: np.ndarray
    y: np.ndarray
    z: np.ndarray

    def __post_init__(self):
        for name in ("x", "y", "z"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))

    @property
    def vectors(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        return self.x, self.y, self.z

    def defect(self, H: HermitianPoint) -> float:
        """Max violation of g(a,b) = delta_ab and g(a,Jb) = 0 over the triple."""
        V = np.stack(self.vectors, axis=1)
        gram = V.T @ H.g @ V
        mixed = V.T @ H.omega @ V
        return float(max(np.abs(gram - np.eye(3)).max(), np.abs(mixed).max()))


@dataclass(frozen=True)
class ConstancyReport:
    constant: float
    spread: float
    samples: int
    theta: float
    minimum: float
    maximum: float

    def is_constant(self, tol: float) -> bool:
        return self.spread < tol

    def to_json(self) -> dict:
        return {
            "constant": self.constant,
            "spread": self.spread,
            "samples": self.samples,
            "theta": None if np.isnan(self.theta) else self.theta,
            "min": self.minimum,
            "max": self.maximum,
        }


class SpaceFormFit(NamedTuple):
    nu: float
    mu: float
    residual: float


class RKFormFit(NamedTuple):
    nu: float
    residual: float


class EigenFrame(NamedTuple):
    """Columns ``[e_1..e_m, Je_1..Je_m]`` and Ricci eigenvalues of the ``e_i``."""

    basis: np.ndarray
    eigenvalues: np.ndarray


# ---------------------------------------------------------------------------
# Serialization
# ---------------------------------------------------------------------------


def tensor_to_json(a) -> dict:
    """Row-major nested lists, shape first: ``{"dims": [...], "data": [...]}``."""
    a = np.asarray(a, dtype=float)
    return {"dims": list(a.shape), "data": a.tolist()}


def tensor_from_json(obj) -> np.ndarray:
    if isinstance(obj, str):
        obj = json.loads(obj)
    a = np.asarray(obj["data"], dtype=float)
    if list(a.shape) != list(obj["dims"]):
        raise ValueError(f"data shape {a.shape} does not match dims {obj['dims']}")
    return a


# ---------------------------------------------------------------------------
# Model tensors
# ---------------------------------------------------------------------------


def pi1(H: HermitianPoint) -> CurvatureTensor:
    """pi1(x,y,z,u) = g(x,u) g(y,z) - g(x,z) g(y,u)."""
    g = H.g
    return CurvatureTensor(np.einsum("il,jk->ijkl", g, g) - np.einsum("ik,jl->ijkl", g, g))


def pi2(H: HermitianPoint) -> CurvatureTensor:
    """pi2(x,y,z,u) = g(x,Ju) g(y,Jz) - g(x,Jz) g(y,Ju) - 2 g(x,Jy) g(z,Ju)."""
    W = H.omega
    return CurvatureTensor(
        np.einsum("il,jk->ijkl", W, W)
        - np.einsum("ik,jl->ijkl", W, W)
        - 2.0 * np.einsum("ij,kl->ijkl", W, W)
    )


def psi(H: HermitianPoint, S: RicciForm, tol: float = ALGEBRAIC_TOL) -> CurvatureTensor:
    """Six-term tensor built from a symmetric form ``S`` and the pair (g, J).

    With ``Sig(a, b) = S(a, Jb)``::

        psi(S)(x,y,z,u) = W(x,u) Sig(y,z) - W(x,z) Sig(y,u) - 2 W(x,y) Sig(z,u)
                        + W(y,z) Sig(x,u) - W(y,u) Sig(x,z) - 2 W(z,u) Sig(x,y)

    A non J-invariant ``S`` is accepted but triggers
    :class:`NonJInvariantWarning`; the result then need not have the
    curvature symmetries.
    """
    if S.dim != H.dim:
        raise ValueError(f"dimension mismatch: S is {S.dim}, H is {H.dim}")
    scale = max(1.0, float(np.abs(S.comps).max()))
    if S.j_invariance_residual(H) > tol * scale:
        warnings.warn("psi(S) called with S not J-invariant", NonJInvariantWarning, stacklevel=2)
    W = H.omega
    Sig = S.comps @ H.J
    comps = (
        np.einsum("il,jk->ijkl", W, Sig)
        - np.einsum("ik,jl->ijkl", W, Sig)
        - 2.0 * np.einsum("ij,kl->ijkl", W, Sig)
        + np.einsum("jk,il->ijkl", W, Sig)
        - np.einsum("jl,ik->ijkl", W, Sig)
        - 2.0 * np.einsum("kl,ij->ijkl", W, Sig)
    )
    return CurvatureTensor(comps)


def ricci(R: CurvatureTensor, H: HermitianPoint) -> RicciForm:
    """S(y, z) = sum_i R(e_i, y, z, e_i) over a g-orthonormal basis."""
    _check_dims(R, H)
    ginv = np.linalg.inv(H.g)
    S = np.einsum("il,ijkl->jk", ginv, R.comps)
    return RicciForm((S + S.T) / 2)


def rk_residual(R: CurvatureTensor, H: HermitianPoint) -> float:
    """Max over components of |R(x,y,z,u) - R(Jx,Jy,Jz,Ju)|."""
    _check_dims(R, H)
    J = H.J
    RJ = np.einsum("abcd,ai,bj,ck,dl->ijkl", R.comps, J, J, J, J, optimize=True)
    return float(np.abs(R.comps - RJ).max())


def _check_dims(R: CurvatureTensor, H: HermitianPoint) -> None:
    if R.dim != H.dim:
        raise ValueError(f"dimension mismatch: tensor is {R.dim}, point is {H.dim}")


# ---------------------------------------------------------------------------
# Planes
# ---------------------------------------------------------------------------


def _check_plane(H: HermitianPoint, plane: TangentPlane, tol: float) -> None:
    if plane.x.shape != (H.dim,) or plane.y.shape != (H.dim,):
        raise ValueError(f"plane vectors must have length {H.dim}")
    defect = plane.orthonormality_defect(H)
    if defect > tol:
        raise ValueError(f"plane basis is not orthonormal (defect {defect:.3e})")


def sectional_curvature(
    R: CurvatureTensor, H: HermitianPoint, plane: TangentPlane, tol: float = ALGEBRAIC_TOL
) -> float:
    _check_dims(R, H)
    _check_plane(H, plane, tol)
    return R(plane.x, plane.y, plane.y, plane.x)


def kahler_angle(H: HermitianPoint, plane: TangentPlane, tol: float = ALGEBRAIC_TOL) -> float:
    """Angle between the plane and its image under J, in [0, pi/2]."""
    _check_plane(H, plane, tol)
    c = abs(H.inner(plane.x, H.apply_j(plane.y)))
    return float(np.arccos(min(1.0, c)))


def _sectional_many(R: CurvatureTensor, X: np.ndarray, Y: np.ndarray) -> np.ndarray:
    return np.einsum("ijkl,ni,nj,nk,nl->n", R.comps, X, Y, Y, X, optimize=True)


def project_out(H: HermitianPoint, v: np.ndarray, basis: Sequence[np.ndarray]) -> np.ndarray:
    """Modified Gram-Schmidt step: remove the components of ``v`` along a
    g-orthonormal ``basis``."""
    v = np.array(v, dtype=float)
    for b in basis:
        v = v - H.inner(b, v) * b
    return v


def _draw_orthogonal_unit(
    H: HermitianPoint, rng: np.random.Generator, basis: Sequence[np.ndarray]
) -> np.ndarray:
    for _ in range(_MAX_REDRAWS):
        v = project_out(H, rng.standard_normal(H.dim), basis)
        # second pass keeps orthogonality at machine precision
        v = project_out(H, v, basis)
        n = H.norm(v)
        if n >= REJECT_NORM:
            return v / n
    raise RuntimeError("could not draw a vector outside the given subspace")


def _draw_x_y(H: HermitianPoint, rng: np.random.Generator) -> tuple[np.ndarray, np.ndarray]:
    """Unit x and unit y with g(x,y) = g(x,Jy) = 0."""
    x = _draw_orthogonal_unit(H, rng, [])
    Jx = H.apply_j(x)
    y = _draw_orthogonal_unit(H, rng, [x, Jx])
    return x, y


def sample_theta_plane(H: HermitianPoint, theta: float, seed: SeedLike = 0) -> TangentPlane:
    """The plane with basis ``{Jx, x cos(theta) + y sin(theta)}`` for random
    unit ``x`` and unit ``y`` orthogonal to both ``x`` and ``Jx``."""
    if not 0.0 <= theta <= np.pi / 2 + 1e-15:
        raise ValueError(f"theta must lie in [0, pi/2], got {theta}")
    if theta > 0 and H.dim < 4:
        raise ValueError("a theta-holomorphic plane with theta > 0 needs dim >= 4")
    rng = _rng(seed)
    if H.dim < 4:
        x = _draw_orthogonal_unit(H, rng, [])
        return TangentPlane(H.apply_j(x), x)
    x, y = _draw_x_y(H, rng)
    return TangentPlane(H.apply_j(x), np.cos(theta) * x + np.sin(theta) * y)


def sample_plane(H: HermitianPoint, seed: SeedLike = 0) -> TangentPlane:
    """A plane spanned by two random vectors, with no constraint on its angle."""
    rng = _rng(seed)
    x = _draw_orthogonal_unit(H, rng, [])
    y = _draw_orthogonal_unit(H, rng, [x])
    return TangentPlane(x, y)


def sample_antiholomorphic_triple(H: HermitianPoint, seed: SeedLike = 0) -> AntiholoTriple:
    if H.dim < 6:
        raise ValueError(f"antiholomorphic 3-planes need dim >= 6, got {H.dim}")
    rng = _rng(seed)
    basis: list[np.ndarray] = []
    triple = []
    for _ in range(3):
        v = _draw_orthogonal_unit(H, rng, basis)
        triple.append(v)
        basis += [v, H.apply_j(v)]
    return AntiholoTriple(*triple)


# ---------------------------------------------------------------------------
# Constancy and identities along the proof chain
# ---------------------------------------------------------------------------


def _report(values: np.ndarray, theta: float) -> ConstancyReport:
    mean = float(values.mean())
    return ConstancyReport(
        constant=mean,
        spread=float(np.abs(values - mean).max()),
        samples=int(values.size),
        theta=float(theta),
        minimum=float(values.min()),
        maximum=float(values.max()),
    )


def theta_constancy(
    R: CurvatureTensor,
    H: HermitianPoint,
    theta: float,
    n: int = 64,
    tol: float = ALGEBRAIC_TOL,
    seed: SeedLike = 0,
) -> ConstancyReport:
    """Sectional curvature statistics over ``n`` sampled theta-holomorphic planes.

    ``tol`` is not applied here; compare ``report.spread`` against it (or use
    :meth:`ConstancyReport.is_constant`).
    """
    if n < 2:
        raise ValueError("need at least two sample planes")
    _check_dims(R, H)
    planes = [sample_theta_plane(H, theta, s) for s in spawn_seeds(seed, n)]
    X = np.stack([p.x for p in planes])
    Y = np.stack([p.y for p in planes])
    return _report(_sectional_many(R, X, Y), theta)


def plane_constancy(R: CurvatureTensor, H: HermitianPoint, n: int = 64, seed: SeedLike = 0) -> ConstancyReport:
    """Same statistics over unconstrained random planes (constant sectional
    curvature test). ``theta`` is reported as NaN."""
    _check_dims(R, H)
    planes = [sample_plane(H, s) for s in spawn_seeds(seed, n)]
    X = np.stack([p.x for p in planes])
    Y = np.stack([p.y for p in planes])
    return _report(_sectional_many(R, X, Y), float("nan"))


def eq2_residual(R: CurvatureTensor, H: HermitianPoint, n: int = 64, seed: SeedLike = 0) -> float:
    """max |R(x, Jx, Jx, y)| over unit pairs with g(x,y) = g(x,Jy) = 0."""
    if H.dim < 4:
        raise ValueError("need dim >= 4")
    _check_dims(R, H)
    worst = 0.0
    for s in spawn_seeds(seed, n):
        x, y = _draw_x_y(H, _rng(s))
        Jx = H.apply_j(x)
        worst = max(worst, abs(R(x, Jx, Jx, y)))
    return worst


def eq3_check(mu: float, nu: float, theta: float, c: float) -> float:
    """|mu cos^2(theta) + nu sin^2(theta) - c|."""
    return abs(mu * np.cos(theta) ** 2 + nu * np.sin(theta) ** 2 - c)


def fit_space_form(R: CurvatureTensor, H: HermitianPoint, n: int = 64, seed: SeedLike = 0) -> SpaceFormFit:
    """Holomorphic and antiholomorphic means, and the distance from
    ``nu*pi1 + (mu - nu)/3 * pi2``."""
    if H.dim < 4:
        raise ValueError("need dim >= 4")
    nu = theta_constancy(R, H, np.pi / 2, n=n, seed=seed).constant
    mu = theta_constancy(R, H, 0.0, n=n, seed=seed).constant
    model = nu * pi1(H) + ((mu - nu) / 3.0) * pi2(H)
    return SpaceFormFit(nu, mu, (R - model).max_abs())


def fit_rk_form(
    R: CurvatureTensor,
    H: HermitianPoint,
    n: int = 64,
    seed: SeedLike = 0,
    tol: float = ALGEBRAIC_TOL,
) -> RKFormFit:
    """Distance of ``R`` from ``psi(S)/6 + nu*pi1 - (2m-1)/3 * nu * pi2``,
    where ``S`` is the Ricci form of ``R`` and ``nu`` its mean
    antiholomorphic sectional curvature."""
    if H.dim < 6:
        raise ValueError(f"the RK decomposition is stated for dim >= 6, got {H.dim}")
    rk = rk_residual(R, H)
    if rk > tol * max(1.0, R.max_abs()):
        warnings.warn(f"tensor is not RK (residual {rk:.3e})", NotRKWarning, stacklevel=2)
    S = ricci(R, H)
    nu = theta_constancy(R, H, np.pi / 2, n=n, seed=seed).constant
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", NonJInvariantWarning)
        P = psi(H, S)
    model = (1.0 / 6.0) * P + nu * pi1(H) - ((2 * H.m - 1) / 3.0 * nu) * pi2(H)
    return RKFormFit(nu, (R - model).max_abs())


def j_adapted_eigenframe(S: RicciForm, H: HermitianPoint, tol: float = ALGEBRAIC_TOL) -> EigenFrame:
    """g-orthonormal basis ``{e_i, Je_i}`` of eigenvectors of the Ricci
    endomorphism ``g^{-1} S``.

    Raises ``ValueError`` when ``S`` is not J-invariant, since the frame then
    need not exist.
    """
    if S.dim != H.dim:
        raise ValueError(f"dimension mismatch: S is {S.dim}, H is {H.dim}")
    scale = max(1.0, float(np.abs(S.comps).max()))
    res = S.j_invariance_residual(H)
    if res > tol * scale:
        raise ValueError(f"S is not J-invariant (residual {res:.3e}); no J-adapted eigenframe")
    # orthonormal coordinates w = L^T v with g = L L^T
    L = np.linalg.cholesky(H.g)
    Linv = np.linalg.inv(L)
    S_hat = Linv @ S.comps @ Linv.T
    S_hat = (S_hat + S_hat.T) / 2
    J_hat = L.T @ H.J @ Linv.T
    Q = np.eye(H.dim)  # orthonormal basis of the part not yet covered
    es, Jes, lams = [], [], []
    for _ in range(H.m):
        vals, vecs = np.linalg.eigh(Q.T @ S_hat @ Q)
        e = Q @ vecs[:, 0]
        Je = J_hat @ e
        Je = Je - (e @ Je) * e
        Je /= np.linalg.norm(Je)
        es.append(e)
        Jes.append(Je)
        lams.append(vals[0])
        # orthonormal complement of everything chosen so far
        used = np.stack(es + Jes, axis=1)
        full, _ = np.linalg.qr(np.hstack([used, np.eye(H.dim)]))
        Q = full[:, used.shape[1] : H.dim]
    W = np.stack(es + Jes, axis=1)
    basis = np.linalg.solve(L.T, W)
    return EigenFrame(basis, np.array(lams))
