"""``pcopt`` command line: solve, baseline, compare and the built-in examples.

Exit codes: 0 success, 1 input error, 2 non-convergence.
"""
from __future__ import annotations

import argparse
import csv
import os
import sys
from pathlib import Path
from typing import Optional, Sequence

from . import builtin
from .expressions import ExpressionError, ParseError
from .montecarlo import MonteCarloError
from .problem import ProblemError, load_problem
from .runs import compare, dump_document, example_runs, format_comparison, run_mc, run_pc
from .transform import MODES

EXIT_OK, EXIT_INPUT, EXIT_NONCONVERGED = 0, 1, 2


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; 2 is reserved for non-convergence here
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def _env_seed() -> int:
    raw = os.environ.get("PCOPT_SEED")
    if raw is None or raw == "":
        return 0
    try:
        return int(raw)
    except ValueError:
        raise InputError(f"PCOPT_SEED must be an integer, got {raw!r}")


def _parse_start(text: Optional[str], d: int):
    if text is None:
        return None
    try:
        vals = [float(tok) for tok in text.split(",")]
    except ValueError:
        raise InputError(f"--start must be comma-separated numbers, got {text!r}")
    if len(vals) != d:
        raise InputError(f"--start has {len(vals)} values but the problem has {d} decision variables")
    return vals


def _load(path: str):
    p = Path(path)
    if not p.is_file():
        raise InputError(f"cannot read problem file: {path}")
    try:
        return load_problem(p)
    except (ProblemError, ExpressionError, ParseError) as exc:
        raise InputError(f"{path}: {exc}")


def _emit(text: str, out: Optional[str]) -> None:
    if out:
        Path(out).write_text(text + "\n", encoding="utf-8")
    else:
        print(text)


def _add_pc_flags(p):
    p.add_argument("--order", type=int, default=2, help="total polynomial order r (default 2)")
    p.add_argument("--quad", type=int, default=None, help="Gauss nodes per dimension (default 2r+2)")
    p.add_argument("--mode", choices=MODES, default="expectation", help="constraint enforcement")
    p.add_argument("--moments", type=int, default=4, help="highest central moment reported")
    p.add_argument("--diagnostics", action="store_true", help="add the interchange-gap bound report")


def _add_mc_flags(p):
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None, help="default: $PCOPT_SEED or 0")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--csv", default=None, help="write raw per-sample optima here")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pcopt", description="Polynomial chaos optimization under uncertainty.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("solve", help="polynomial chaos solve of a problem file")
    p.add_argument("path")
    _add_pc_flags(p)
    p.add_argument("--start", default=None, help="comma-separated initial point; use --start=-3,3 for negatives")
    p.add_argument("--out", default=None, help="JSON report path (default stdout)")

    p = sub.add_parser("baseline", help="Monte Carlo baseline of a problem file")
    p.add_argument("path")
    _add_mc_flags(p)
    p.add_argument("--start", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("compare", help="polynomial chaos versus Monte Carlo table")
    p.add_argument("path")
    _add_pc_flags(p)
    _add_mc_flags(p)
    p.add_argument("--start", default=None)
    p.add_argument("--out", default=None)

    p = sub.add_parser("example", help="run a built-in example")
    p.add_argument("name", choices=builtin.EXAMPLES)
    p.add_argument("--equilibrium", type=int, default=None, help="himmelblau equilibrium 1-4 (default all)")
    p.add_argument("--method", choices=("pc", "mc", "both"), default="pc")
    p.add_argument("--order", type=int, default=None, help="override the built-in order")
    p.add_argument("--samples", type=int, default=1000)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--diagnostics", action="store_true")
    p.add_argument("--grid", default="himmelblau_grid.csv", help="himmelblau cost-surface CSV path")
    p.add_argument("--out", default=None)
    return parser


def _seed(args) -> int:
    return args.seed if args.seed is not None else _env_seed()


def _opts_check(args):
    if getattr(args, "order", None) is not None and args.order < 0:
        raise InputError("--order must be non-negative")
    if getattr(args, "quad", None) is not None and args.quad < 1:
        raise InputError("--quad must be at least 1")
    if getattr(args, "samples", 2) < 2:
        raise InputError("--samples must be at least 2")


def cmd_solve(args) -> int:
    prob = _load(args.path)
    run = run_pc(
        prob,
        args.order,
        quad=args.quad,
        mode=args.mode,
        start=_parse_start(args.start, prob.d),
        max_k=args.moments,
        diagnostics=args.diagnostics,
    )
    _emit(run.report.to_json(), args.out)
    if not run.report.converged:
        print(f"pcopt: solver did not converge: {run.result.message}", file=sys.stderr)
        return EXIT_NONCONVERGED
    return EXIT_OK


def cmd_baseline(args) -> int:
    prob = _load(args.path)
    report, _ = run_mc(
        prob,
        args.samples,
        _seed(args),
        _parse_start(args.start, prob.d),
        workers=args.workers,
        csv_path=args.csv,
    )
    _emit(report.to_json(), args.out)
    return EXIT_OK


def cmd_compare(args) -> int:
    prob = _load(args.path)
    start = _parse_start(args.start, prob.d)
    pc = run_pc(prob, args.order, quad=args.quad, mode=args.mode, start=start, max_k=args.moments).report
    mc, _ = run_mc(prob, args.samples, _seed(args), start, workers=args.workers, csv_path=args.csv)
    rows = compare(pc, mc)
    print(format_comparison(rows, title=prob.name))
    if args.out:
        _emit(dump_document([pc, mc], rows), args.out)
    return EXIT_OK


def write_grid(path, n: int = 101) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["x1", "x2", "f"])
        for x1, x2, f in builtin.himmelblau_grid(n):
            w.writerow([repr(float(x1)), repr(float(x2)), repr(float(f))])


def cmd_example(args) -> int:
    try:
        reports = example_runs(
            args.name,
            method=args.method,
            samples=args.samples,
            seed=_seed(args),
            equilibrium=args.equilibrium,
            order=args.order,
            workers=args.workers,
            diagnostics=args.diagnostics,
        )
    except ValueError as exc:
        raise InputError(str(exc))
    if args.name == "himmelblau" and args.grid:
        write_grid(args.grid)
    comparison = None
    if args.method == "both":
        half = len(reports) // 2
        comparison = []
        for pc, mc in zip(reports[:half], reports[half:]):
            rows = compare(pc, mc)
            title = f"{args.name} {pc.label}" if pc.label else args.name
            print(format_comparison(rows, title=title))
            print()
            comparison.append({"label": pc.label, "rows": rows})
    doc = dump_document(reports, comparison)
    if args.out or args.method != "both":
        _emit(doc, args.out)
    return EXIT_OK if all(r.converged for r in reports) else EXIT_NONCONVERGED


COMMANDS = {"solve": cmd_solve, "baseline": cmd_baseline, "compare": cmd_compare, "example": cmd_example}


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        _opts_check(args)
        return COMMANDS[args.command](args)
    except InputError as exc:
        print(f"pcopt: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except MonteCarloError as exc:
        print(f"pcopt: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGED


if __name__ == "__main__":
    sys.exit(main())
