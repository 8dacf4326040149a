"""Command-line entry point.

Exit codes: 0 when results match the catalog's expectations, 2 on a theorem
violation or a result contradicting the model's known classification, 1 on
usage or configuration errors.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .catalog import MODELS, VIOLATION, load_model_config, model_spec
from .schur import (
    GridSpec,
    Tolerances,
    classify,
    sample_points,
    scan,
    text_report,
    text_table,
    verification_report,
    verify_theorem1,
    verify_theorem2,
)

EXIT_OK, EXIT_USAGE, EXIT_FAIL = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _model_args() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("model")
    g.add_argument("--model", choices=sorted(MODELS), help="catalog model name")
    g.add_argument("--config", type=Path, help="JSON file with 'model' and parameter keys; flags override it")
    g.add_argument("--m", type=int, help="complex dimension (torus, space forms)")
    g.add_argument("--c", type=float, help="holomorphic sectional curvature (space forms)")
    g.add_argument("--c1", type=float, help="curvature of the CP^1 factor (scaled-product)")
    g.add_argument("--c2", type=float, help="curvature of the CP^2 factor (scaled-product)")
    g.add_argument("--eps", type=float, help="bump amplitude (perturbed-torus)")
    s = p.add_argument_group("sampling")
    s.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    s.add_argument("--n-planes", type=int, default=64, help="planes sampled per constancy check (default 64)")
    s.add_argument("--n-grid", type=int, default=8, help="low-discrepancy points in the chart (default 8)")
    s.add_argument("--n-random", type=int, default=8, help="seeded random points in the chart (default 8)")
    s.add_argument("--tol", type=float, help="verdict tolerance (default 1e-4, or HERMITLAB_TOL_VERDICT)")
    o = p.add_argument_group("output")
    o.add_argument("--format", choices=("json", "text"), default="json", help="report format (default json)")
    o.add_argument("--output", "-o", type=Path, help="write the report here instead of stdout")
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="hermitlab",
        description="Curvature checks for almost Hermitian model manifolds.",
        epilog="Tolerance tiers can be overridden with HERMITLAB_TOL_ALGEBRAIC, "
        "HERMITLAB_TOL_FD1, HERMITLAB_TOL_FD2 and HERMITLAB_TOL_VERDICT.",
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("list", help="list catalog models")
    common = _model_args()
    sub.add_parser("classify", parents=[common], help="Kahler/RK residuals and theta-constancy")
    v = sub.add_parser("verify", parents=[common], help="run a theorem check")
    v.add_argument("--theorem", type=int, choices=(1, 2), required=True, help="which theorem to check")
    v.add_argument("--theta", type=float, default=np.pi / 4, help="angle for theorem 1, in (0, pi/2)")
    v.add_argument("--n-triples", type=int, default=2, help="antiholomorphic triples per point (theorem 2)")
    s = sub.add_parser("scan", parents=[common], help="per-point table of c, mu, nu and residuals")
    s.add_argument("--theta", type=float, default=np.pi / 4, help="angle for the c column")
    s.add_argument("--grid-n", type=int, default=3, help="points per scanned axis (default 3)")
    s.add_argument("--grid-axes", type=int, nargs="+", default=[0, 1, 2], help="scanned coordinate axes")
    return parser


def _resolve_model(args):
    name, params = None, {}
    if args.config is not None:
        name, params = load_model_config(args.config)
    if args.model is not None:
        name = args.model
    if name is None:
        raise ValueError("no model given (use --model or --config)")
    for key in ("m", "c", "c1", "c2", "eps"):
        val = getattr(args, key)
        if val is not None:
            params[key] = val
    return model_spec(name, **params)


def _emit(text: str, output: Optional[Path]) -> None:
    if output is None:
        sys.stdout.write(text)
        return
    output.write_text(text)


def _classification_matches(spec, c) -> bool:
    return (
        c.kahler == spec.kahler
        and c.rk == spec.rk
        and c.constant_k == spec.constant_k
        and all(c.theta_constant.values()) == spec.theta_constant
    )


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)

    if args.command == "list":
        rows = [{"model": name, "description": e.summary, "defaults": e.defaults} for name, e in MODELS.items()]
        sys.stdout.write(text_table(rows))
        return EXIT_OK

    try:
        spec = _resolve_model(args)
        tol = Tolerances.from_env(verdict=args.tol)
        if args.n_planes < 2:
            raise ValueError("--n-planes must be at least 2")
        if args.output is not None and not args.output.parent.exists():
            raise ValueError(f"output directory {args.output.parent} does not exist")
        if args.command == "verify":
            if spec.name != "nearly-kahler-s6" and 2 * spec.params.get("m", 3) < 6:
                raise ValueError("theorem checks need complex dimension m >= 3")
            if args.theorem == 1 and not 0 < args.theta < np.pi / 2:
                raise ValueError("--theta must lie strictly inside (0, pi/2)")
        M = spec.build()
    except (ValueError, OSError) as exc:
        print(f"hermitlab: error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    status = EXIT_OK
    if args.command == "scan":
        grid = GridSpec(n=args.grid_n, axes=tuple(args.grid_axes), theta=args.theta)
        rows = scan(M, grid, n=args.n_planes, seed=args.seed)
        report = verification_report(spec, "scan", rows, tol, args.seed, extra={"theta": args.theta})
    else:
        points = sample_points(M, args.n_grid, args.n_random, args.seed)
        if args.command == "classify":
            result = classify(M, points, n=args.n_planes, seed=args.seed, tol=tol.verdict)
            if not _classification_matches(spec, result):
                status = EXIT_FAIL
            report = verification_report(spec, "classify", result, tol, args.seed, points)
        else:
            if args.theorem == 1:
                result = verify_theorem1(M, args.theta, points, tol=tol.verdict, n=args.n_planes, seed=args.seed)
            else:
                result = verify_theorem2(
                    M, points, tol=tol.verdict, n=args.n_planes, seed=args.seed, n_triples=args.n_triples
                )
            expected = spec.theorem1 if args.theorem == 1 else spec.theorem2
            if result.conclusion == VIOLATION or result.conclusion != expected:
                status = EXIT_FAIL
            report = verification_report(
                spec, f"verify --theorem {args.theorem}", result, tol, args.seed, points,
                extra={"theta": args.theta} if args.theorem == 1 else None,
            )

    if args.format == "json":
        text = json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"
    else:
        text = text_report(report)
    try:
        _emit(text, args.output)
    except OSError as exc:
        print(f"hermitlab: error: cannot write report: {exc}", file=sys.stderr)
        return EXIT_USAGE
    return status


def main() -> None:
    sys.exit(run())
