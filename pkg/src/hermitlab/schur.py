"""Classification of chart models and the two Schur-type checks.

"Pointwise constant" means the spread over sampled planes at a point is below
``tol``; "globally constant" means the extracted constants agree across the
sampled points to within ``tol``.  Every point uses the same plane seed, so a
verdict does not depend on the order in which points are visited.
"""

from __future__ import annotations

import os
import warnings
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.stats import qmc

from . import algebra as alg
from .algebra import ConstancyReport, CurvatureTensor, HermitianPoint
from .catalog import (
    ANTIHOL_CONSTANT,
    CONSTANT_K,
    KAHLER_ALL_PHI,
    NOT_MET,
    VIOLATION,
    ModelSpec,
)
from .manifold import (
    ChartManifold,
    PreconditionError,
    bianchi2_residual,
    eq8_residual,
    nabla_j,
    nabla_r_full,
    nu_gradient,
    riemann,
)

THETA_GRID = (0.0, np.pi / 6, np.pi / 4, np.pi / 3, np.pi / 2)
PHI_GRID = tuple(k * np.pi / 12 for k in range(7))

ENV_PREFIX = "HERMITLAB_TOL_"


@dataclass(frozen=True)
class Tolerances:
    """Tolerance tiers: exact algebra, first-level FD, second-level FD.

    ``verdict`` is what the theorem checks compare against."""

    algebraic: float = 1e-8
    fd1: float = 1e-5
    fd2: float = 1e-4
    verdict: float = 1e-4

    @classmethod
    def from_env(cls, environ=None, **overrides) -> "Tolerances":
        """Read ``HERMITLAB_TOL_ALGEBRAIC`` and friends; keyword overrides win."""
        environ = os.environ if environ is None else environ
        vals = {}
        for name in ("algebraic", "fd1", "fd2", "verdict"):
            raw = environ.get(ENV_PREFIX + name.upper())
            if raw is not None:
                vals[name] = float(raw)
        vals.update({k: v for k, v in overrides.items() if v is not None})
        tol = cls(**vals)
        if min(asdict(tol).values()) <= 0:
            raise ValueError("tolerances must be positive")
        return tol

    def to_json(self) -> dict:
        return asdict(self)


# ---------------------------------------------------------------------------
# Point sampling
# ---------------------------------------------------------------------------


def sample_points(M: ChartManifold, n_grid: int = 8, n_random: int = 8, seed: int = 0) -> np.ndarray:
    """Halton points over the interior of the chart box (margin of three
    stencil reaches), followed by ``n_random`` seeded uniform points."""
    margin = 3 * M.reach
    lo, hi = M.lower + margin, M.upper - margin
    if np.any(hi <= lo):
        raise ValueError("chart box too small for the finite-difference margin")
    pts = []
    if n_grid:
        # skip the origin of the sequence, which sits on the box corner
        unit = qmc.Halton(d=M.dim, scramble=False).random(n_grid + 1)[1:]
        pts.append(qmc.scale(unit, lo, hi))
    if n_random:
        rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])
        pts.append(rng.uniform(lo, hi, size=(n_random, M.dim)))
    return np.vstack(pts) if pts else np.empty((0, M.dim))


def _cross_spread(values: Sequence[float]) -> tuple[float, float]:
    v = np.asarray(values, dtype=float)
    mean = float(v.mean())
    return mean, float(np.abs(v - mean).max())


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class PointClass:
    point: np.ndarray
    kahler_residual: float
    rk_residual: float
    reports: dict  # theta -> ConstancyReport
    generic: ConstancyReport

    def to_json(self) -> dict:
        return {
            "point": self.point.tolist(),
            "kahler_residual": self.kahler_residual,
            "rk_residual": self.rk_residual,
            "theta_constancy": [r.to_json() for r in self.reports.values()],
            "all_planes": self.generic.to_json(),
        }


@dataclass(frozen=True)
class Classification:
    kahler_residual: float
    rk_residual: float
    points: list
    tol: float
    kahler: bool
    rk: bool
    theta_constant: dict  # theta -> bool, pointwise at every sampled point
    constant_k: bool

    def failing(self) -> list[tuple[int, float]]:
        """(point index, theta) pairs where theta-constancy fails."""
        return [
            (i, th)
            for i, pc in enumerate(self.points)
            for th, rep in pc.reports.items()
            if rep.spread >= self.tol
        ]

    def to_json(self) -> dict:
        return {
            "kahler_residual": self.kahler_residual,
            "rk_residual": self.rk_residual,
            "tol": self.tol,
            "flags": {
                "kahler": self.kahler,
                "rk": self.rk,
                "constant_k": self.constant_k,
                "theta_constant": [
                    {"theta": th, "constant": ok} for th, ok in self.theta_constant.items()
                ],
            },
            "points": [pc.to_json() for pc in self.points],
        }


def _classify_point(M, p, thetas, n, seed) -> PointClass:
    H = M.hermitian_point(p)
    R = riemann(M, p)
    return PointClass(
        point=np.asarray(p, dtype=float),
        kahler_residual=float(np.abs(nabla_j(M, p)).max()),
        rk_residual=alg.rk_residual(R, H),
        reports={float(th): alg.theta_constancy(R, H, th, n=n, seed=seed) for th in thetas},
        generic=alg.plane_constancy(R, H, n=n, seed=seed),
    )


def classify(
    M: ChartManifold,
    points,
    thetas: Sequence[float] = THETA_GRID,
    n: int = 64,
    seed: int = 0,
    tol: float = 1e-4,
) -> Classification:
    pcs = [_classify_point(M, p, thetas, n, seed) for p in np.atleast_2d(points)]
    kr = max(pc.kahler_residual for pc in pcs)
    rr = max(pc.rk_residual for pc in pcs)
    theta_ok = {float(th): all(pc.reports[float(th)].spread < tol for pc in pcs) for th in thetas}
    return Classification(
        kahler_residual=kr,
        rk_residual=rr,
        points=pcs,
        tol=tol,
        kahler=kr < tol,
        rk=rr < tol,
        theta_constant=theta_ok,
        constant_k=all(pc.generic.spread < tol for pc in pcs),
    )


# ---------------------------------------------------------------------------
# Theorem checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class TheoremVerdict:
    theorem: int
    hypothesis_ok: bool
    conclusion: str
    diagnostics: dict = field(default_factory=dict)
    witness: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.conclusion == VIOLATION and not self.hypothesis_ok:
            raise ValueError("a violation needs the hypothesis to hold")

    def to_json(self) -> dict:
        return {
            "theorem": self.theorem,
            "hypothesis_ok": self.hypothesis_ok,
            "verdict": self.conclusion,
            "diagnostics": self.diagnostics,
            "witness": self.witness,
        }


def _require_dim(M: ChartManifold) -> None:
    if M.dim < 6:
        raise ValueError(f"the Schur-type checks need dimension >= 6, got {M.dim}")


def _geometry(M, points):
    out = []
    for p in np.atleast_2d(points):
        out.append((np.asarray(p, dtype=float), M.hermitian_point(p), riemann(M, p)))
    return out


def verify_theorem1(
    M: ChartManifold,
    theta: float,
    points,
    tol: float = 1e-4,
    n: int = 64,
    seed: int = 0,
    phis: Sequence[float] = PHI_GRID,
) -> TheoremVerdict:
    """Pointwise theta-constancy for one theta in (0, pi/2) should force either
    constant sectional curvature or a Kahler metric whose phi-holomorphic
    curvature is globally constant for every phi."""
    _require_dim(M)
    if not 0.0 < theta < np.pi / 2:
        raise ValueError(f"theta must lie strictly inside (0, pi/2), got {theta}")
    geo = _geometry(M, points)

    hyp = [alg.theta_constancy(R, H, theta, n=n, seed=seed) for _, H, R in geo]
    bad = [i for i, r in enumerate(hyp) if r.spread >= tol]
    diagnostics = {
        "theta": theta,
        "max_pointwise_spread": max(r.spread for r in hyp),
        "failing_points": bad,
    }
    if bad:
        return TheoremVerdict(1, False, NOT_MET, diagnostics, {"c": [r.constant for r in hyp]})

    witness: dict = {"c_theta": _cross_spread([r.constant for r in hyp])[0]}

    generic = [alg.plane_constancy(R, H, n=n, seed=seed) for _, H, R in geo]
    k_mean, k_cross = _cross_spread([r.constant for r in generic])
    k_point = max(r.spread for r in generic)
    witness["constant_k"] = {"c": k_mean, "pointwise_spread": k_point, "cross_point_spread": k_cross}
    if k_point < tol and k_cross < tol:
        witness["branch"] = CONSTANT_K
        return TheoremVerdict(1, True, CONSTANT_K, diagnostics, witness)

    kr = max(float(np.abs(nabla_j(M, p)).max()) for p, _, _ in geo)
    per_phi = []
    ok = kr < tol
    for phi in phis:
        reps = [alg.theta_constancy(R, H, phi, n=n, seed=seed) for _, H, R in geo]
        mean, cross = _cross_spread([r.constant for r in reps])
        point = max(r.spread for r in reps)
        per_phi.append({"phi": float(phi), "c": mean, "pointwise_spread": point, "cross_point_spread": cross})
        ok = ok and point < tol and cross < tol
    witness["kahler_residual"] = kr
    witness["phi"] = per_phi
    if ok:
        witness["branch"] = KAHLER_ALL_PHI
        return TheoremVerdict(1, True, KAHLER_ALL_PHI, diagnostics, witness)
    return TheoremVerdict(1, True, VIOLATION, diagnostics, witness)


def verify_theorem2(
    M: ChartManifold,
    points,
    tol: float = 1e-4,
    n: int = 64,
    seed: int = 0,
    n_triples: int = 2,
) -> TheoremVerdict:
    """An RK chart with pointwise constant antiholomorphic curvature should have
    the same antiholomorphic curvature at every sampled point.

    The RK decomposition residual, the Bianchi and six-term residuals along
    sampled antiholomorphic triples, and the frame derivatives of ``nu`` are
    recorded as supporting evidence."""
    _require_dim(M)
    geo = _geometry(M, points)
    rks = [alg.rk_residual(R, H) for _, H, R in geo]
    anti = [alg.theta_constancy(R, H, np.pi / 2, n=n, seed=seed) for _, H, R in geo]
    bad_rk = [i for i, r in enumerate(rks) if r >= tol]
    bad_const = [i for i, r in enumerate(anti) if r.spread >= tol]
    diagnostics = {
        "max_rk_residual": max(rks),
        "max_antiholomorphic_spread": max(r.spread for r in anti),
        "non_rk_points": bad_rk,
        "nonconstant_points": bad_const,
    }
    nus = [r.constant for r in anti]
    if bad_rk or bad_const:
        return TheoremVerdict(2, False, NOT_MET, diagnostics, {"nu": nus})

    nu_mean, nu_cross = _cross_spread(nus)
    rk_fit, bianchi2, six_term, grad = [], [], [], []
    for k, (p, H, R) in enumerate(geo):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", alg.NotRKWarning)
            rk_fit.append(alg.fit_rk_form(R, H, n=n, seed=seed).residual)
        DR = nabla_r_full(M, p) if n_triples else None
        for s in alg.spawn_seeds(seed, n_triples):
            tr = alg.sample_antiholomorphic_triple(H, s)
            bianchi2.append(bianchi2_residual(M, p, tr, DR=DR))
            six_term.append(eq8_residual(M, p, tr, n=n, seed=seed, tol=tol, check=False))
        try:
            grad.append(float(np.abs(nu_gradient(M, p, n=n, seed=seed, tol=tol)).max()))
        except (PreconditionError, ValueError):
            grad.append(float("inf"))
    witness = {
        "nu": nus,
        "nu_mean": nu_mean,
        "nu_cross_point_spread": nu_cross,
        "max_rk_fit_residual": max(rk_fit),
        "max_bianchi2_residual": max(bianchi2) if bianchi2 else None,
        "max_six_term_residual": max(six_term) if six_term else None,
        "max_nu_gradient": max(grad),
    }
    verdict = ANTIHOL_CONSTANT if nu_cross < tol else VIOLATION
    return TheoremVerdict(2, True, verdict, diagnostics, witness)


# ---------------------------------------------------------------------------
# Scans and reports
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class GridSpec:
    """``n`` points per axis along ``axes``; other coordinates sit at the box centre."""

    n: int = 3
    axes: tuple = (0, 1, 2)
    theta: float = np.pi / 4

    def points(self, M: ChartManifold) -> np.ndarray:
        margin = 3 * M.reach
        lo, hi = M.lower + margin, M.upper - margin
        axes = [a for a in self.axes if a < M.dim]
        lines = [np.linspace(lo[a], hi[a], self.n) for a in axes]
        mesh = np.meshgrid(*lines, indexing="ij")
        out = np.tile(M.center, (self.n ** len(axes), 1))
        for a, coords in zip(axes, mesh):
            out[:, a] = coords.ravel()
        return out


def scan(M: ChartManifold, grid: GridSpec = GridSpec(), n: int = 64, seed: int = 0) -> list[dict]:
    """One row per grid point: c(theta), mu, nu with their spreads, and the
    Kahler, RK, space-form and holomorphic-mixing residuals."""
    rows = []
    for p in grid.points(M):
        H = M.hermitian_point(p)
        R = riemann(M, p)
        c = alg.theta_constancy(R, H, grid.theta, n=n, seed=seed)
        row = {
            "point": p.tolist(),
            "c": c.constant,
            "c_spread": c.spread,
            "kahler_residual": float(np.abs(nabla_j(M, p)).max()),
            "rk_residual": alg.rk_residual(R, H),
        }
        if M.dim >= 4:
            fit = alg.fit_space_form(R, H, n=n, seed=seed)
            mu = alg.theta_constancy(R, H, 0.0, n=n, seed=seed)
            nu = alg.theta_constancy(R, H, np.pi / 2, n=n, seed=seed)
            row.update(
                mu=fit.mu,
                mu_spread=mu.spread,
                nu=fit.nu,
                nu_spread=nu.spread,
                space_form_residual=fit.residual,
                eq2_residual=alg.eq2_residual(R, H, n=n, seed=seed),
            )
        rows.append(row)
    return rows


def verification_report(
    spec: ModelSpec,
    command: str,
    result,
    tolerances: Tolerances,
    seed: int,
    points=None,
    extra: Optional[dict] = None,
) -> dict:
    """JSON-ready report shared by the CLI and library callers."""
    out = {
        "model": spec.to_json(),
        "command": command,
        "seed": seed,
        "tolerances": tolerances.to_json(),
    }
    if points is not None:
        out["points"] = np.asarray(points).tolist()
    if isinstance(result, TheoremVerdict):
        out.update(result.to_json())
        expected = spec.theorem1 if result.theorem == 1 else spec.theorem2
        out["expected_verdict"] = expected
    elif isinstance(result, Classification):
        out["classification"] = result.to_json()
    else:
        out["rows"] = result
    if extra:
        out.update(extra)
    return out


def _fmt(v) -> str:
    if isinstance(v, bool) or v is None:
        return str(v)
    if isinstance(v, (int, np.integer)):
        return str(v)
    if isinstance(v, (float, np.floating)):
        return f"{float(v):.6g}"
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_fmt(x) for x in v) + "]"
    return str(v)


def text_table(rows: list[dict], columns: Optional[Sequence[str]] = None) -> str:
    """Fixed-width table, numbers rounded to 6 significant digits."""
    if not rows:
        return "(no rows)\n"
    columns = list(columns or rows[0].keys())
    cells = [[_fmt(r.get(c)) for c in columns] for r in rows]
    widths = [max(len(c), *(len(row[i]) for row in cells)) for i, c in enumerate(columns)]
    lines = ["  ".join(c.ljust(w) for c, w in zip(columns, widths))]
    lines.append("  ".join("-" * w for w in widths))
    lines += ["  ".join(x.ljust(w) for x, w in zip(row, widths)) for row in cells]
    return "\n".join(lines) + "\n"


def text_report(report: dict) -> str:
    """Human-readable rendering of :func:`verification_report` output."""
    lines = [
        f"model: {report['model']['name']} {_fmt_params(report['model']['params'])}",
        f"command: {report['command']}  seed: {report['seed']}",
    ]
    if "verdict" in report:
        lines.append(f"theorem {report['theorem']}: {report['verdict']} (expected {report['expected_verdict']})")
        lines.append(f"hypothesis ok: {report['hypothesis_ok']}")
        for k, v in report["diagnostics"].items():
            lines.append(f"  {k}: {_fmt(v)}")
        for k, v in report["witness"].items():
            if isinstance(v, list) and v and isinstance(v[0], dict):
                lines.append(f"  {k}:")
                lines.append(_indent(text_table(v)))
            else:
                lines.append(f"  {k}: {_fmt(v)}")
    elif "classification" in report:
        c = report["classification"]
        f = c["flags"]
        lines.append(f"kahler: {f['kahler']} (residual {_fmt(c['kahler_residual'])})")
        lines.append(f"rk: {f['rk']} (residual {_fmt(c['rk_residual'])})")
        lines.append(f"constant sectional curvature: {f['constant_k']}")
        rows = []
        for i, pc in enumerate(c["points"]):
            for rep in pc["theta_constancy"]:
                rows.append({"point": i, "theta": rep["theta"], "c": rep["constant"], "spread": rep["spread"]})
        lines.append(text_table(rows))
    else:
        rows = [{k: v for k, v in r.items() if k != "point"} for r in report["rows"]]
        lines.append(text_table(rows))
    return "\n".join(lines).rstrip("\n") + "\n"


def _fmt_params(params: dict) -> str:
    return " ".join(f"{k}={_fmt(v)}" for k, v in sorted(params.items()))


def _indent(s: str) -> str:
    return "\n".join("    " + line for line in s.rstrip("\n").split("\n"))
