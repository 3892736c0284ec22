"""Command-line experiment harness.

Subcommands: char, necessary, sweep-para, sweep-mult, verify-lemmas,
norm.  Reports go to stdout or, with --out, to CSV/JSON files with a
companion PNG figure.  Exit codes: 0 success, 1 assertion failure,
2 config error.
"""

from __future__ import annotations

import argparse
import sys

from . import experiments, reporting
from .core import DyadicGrid, IntervalId
from .operators import OperatorSpec
from .weights import SpecParseError, Weight


def _common(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--depth", type=int, default=10, help="grid depth D (default 10)")
    parser.add_argument("--seed", type=int, default=0, help="base seed (default 0)")
    parser.add_argument("--tol", type=float, default=1e-6, help="norm-estimate tolerance")
    parser.add_argument("--max-iter", type=int, default=300, help="norm-estimate iteration cap")
    parser.add_argument("--out", default=None, help="output path (stdout when omitted)")
    parser.add_argument("--format", choices=("csv", "json"), default="csv")
    parser.add_argument("--no-figure", action="store_true", help="skip the companion PNG")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="dyadlab", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("char", help="weight characteristics with witnesses")
    _common(p)
    p.add_argument("--weight", required=True, help="weight spec, e.g. cascade:depth=10,delta=0.6,seed=7")
    p.add_argument(
        "--chars",
        default="ap:p=2;rh:p=2;cs:s=2;cs:s=-1;doubling",
        help="semicolon list: ap:p=, rh:p=, cs:s=, doubling, a2",
    )

    p = sub.add_parser("necessary", help="exact identity for the maximal-coefficient multiplier")
    _common(p)
    p.add_argument("--weight", required=True)
    p.add_argument("--t", type=float, default=1.0)
    p.add_argument("--p", default="2", help="comma list of exponents p > 1")
    p.add_argument("--mn", default="1,1", help="'m,n' pair or 'a..b' grid")
    p.add_argument("--i0", default="all", help="'level,index' or 'all'")
    p.add_argument("--identity-tol", type=float, default=1e-11)

    p = sub.add_parser("sweep-para", help="paraproduct norms vs (m+n+2)^5 [w]_A2 ||b||_BMO")
    _common(p)
    p.add_argument("--weights", required=True, help="semicolon list of weight specs")
    p.add_argument("--b", default="log:cascade:delta=0.5,seed=1", help="b spec: const:/log:/haar:")
    p.add_argument("--mn", default="0..1")

    p = sub.add_parser("sweep-mult", help="t-Haar multiplier norms vs (m+n+2)^3 sqrt-characteristics")
    _common(p)
    p.add_argument("--weights", required=True)
    p.add_argument("--t", default="1", help="comma list of t values")
    p.add_argument("--mn", default="0..1")

    p = sub.add_parser("verify-lemmas", help="pinned-constant verification suite")
    _common(p)
    p.add_argument("--seeds", type=int, default=25, help="number of cascade seeds")
    p.add_argument("--delta-max", type=float, default=0.95)
    p.add_argument("--mn", default="1,1;2,1", help="(m,n) pairs for the generation-sum shapes")
    p.add_argument("--max-lift", type=int, default=4)

    p = sub.add_parser("norm", help="weighted operator norm of one operator")
    _common(p)
    p.add_argument("--op", required=True, help="operator spec: para:/shift:/tmult:")
    p.add_argument("--weight", default=None, help="space weight spec (Lebesgue when omitted)")
    p.add_argument("--symbol-weight", default=None, help="weight inside a tmult symbol")
    p.add_argument("--b", default=None, help="b spec for a paraproduct")

    return parser


def _emit(args, doc: dict, tables: dict[str, list[str]], figure=None) -> None:
    text = reporting.write_report(args.out, args.format, doc, tables)
    if args.out:
        if figure is not None and not args.no_figure:
            figure(reporting.figure_path(args.out))
    else:
        sys.stdout.write(text)


def _cmd_char(args) -> int:
    weight_id, w = experiments.load_weight(args.weight, args.depth)
    rows = experiments.characteristic_rows(w, weight_id, [t for t in args.chars.split(";") if t])
    doc = {"command": "char", "depth": w.grid.depth, "seed": args.seed, "rows": rows}
    _emit(args, doc, {"rows": experiments.CHAR_COLUMNS}, lambda p: reporting.char_figure(rows, p))
    return 0


def _cmd_necessary(args) -> int:
    weight_id, w = experiments.load_weight(args.weight, args.depth)
    try:
        p_values = [float(x) for x in args.p.split(",") if x]
    except ValueError:
        raise SpecParseError(f"bad p list {args.p!r}") from None
    if any(p <= 1.0 for p in p_values):
        raise SpecParseError("necessary-condition exponents must satisfy p > 1")
    i0 = None
    if args.i0 != "all":
        bits = args.i0.split(",")
        if len(bits) != 2:
            raise SpecParseError(f"bad --i0 {args.i0!r}")
        i0 = IntervalId(int(bits[0]), int(bits[1]))
    rows = []
    for m, n in experiments.parse_mn(args.mn):
        rows.extend(
            experiments.necessary_report(
                w, weight_id, args.t, p_values, m, n, i0=i0, identity_tol=args.identity_tol
            )
        )
    doc = {"command": "necessary", "depth": w.grid.depth, "seed": args.seed, "rows": rows}
    _emit(args, doc, {"rows": experiments.NECESSARY_COLUMNS}, lambda p: reporting.necessary_figure(rows, p))
    return 0 if all(r["identity_ok"] for r in rows) else 1


def _sweep_config(args, t_values=None, b_spec=None) -> experiments.ExperimentConfig:
    config = experiments.ExperimentConfig(
        depth=args.depth,
        weight_specs=[s for s in args.weights.split(";") if s],
        mn_pairs=experiments.parse_mn(args.mn),
        tol=args.tol,
        max_iter=args.max_iter,
        seed=args.seed,
        b_spec=b_spec,
        t_values=t_values or [1.0],
    )
    config.validate()
    return config


def _cmd_sweep_para(args) -> int:
    config = _sweep_config(args, b_spec=args.b)
    rows, slopes = experiments.paraproduct_sweep(config)
    doc = {"command": "sweep-para", "depth": config.depth, "seed": config.seed, "rows": rows, "slopes": slopes}
    _emit(
        args,
        doc,
        {"rows": experiments.SWEEP_COLUMNS, "slopes": experiments.SLOPE_COLUMNS},
        lambda p: reporting.sweep_figure(rows, slopes, p),
    )
    return 0


def _cmd_sweep_mult(args) -> int:
    try:
        t_values = [float(x) for x in args.t.split(",") if x]
    except ValueError:
        raise SpecParseError(f"bad t list {args.t!r}") from None
    config = _sweep_config(args, t_values=t_values)
    rows, slopes = experiments.multiplier_sweep(config)
    doc = {"command": "sweep-mult", "depth": config.depth, "seed": config.seed, "rows": rows, "slopes": slopes}
    _emit(
        args,
        doc,
        {"rows": experiments.SWEEP_COLUMNS, "slopes": experiments.SLOPE_COLUMNS},
        lambda p: reporting.sweep_figure(rows, slopes, p),
    )
    return 0


def _cmd_verify(args) -> int:
    report = experiments.verify_lemmas(
        depth=args.depth,
        n_seeds=args.seeds,
        delta_max=args.delta_max,
        seed=args.seed,
        mn_pairs=experiments.parse_mn(args.mn),
        max_lift=args.max_lift,
    )
    doc = {
        "command": "verify-lemmas",
        "depth": args.depth,
        "seed": args.seed,
        "passed": report.passed,
        "rows": report.rows,
    }
    _emit(args, doc, {"rows": experiments.VERIFY_COLUMNS}, lambda p: reporting.verify_figure(report.rows, p))
    if not report.passed:
        failures = [r for r in report.rows if r["status"] == "fail"]
        for r in failures:
            print(
                f"FAIL {r['check']} [{r['params']}]: measured {r['measured']} > bound {r['bound']} ({r['witness']})",
                file=sys.stderr,
            )
        return 1
    return 0


def _cmd_norm(args) -> int:
    b = experiments.parse_b_spec(args.b, args.depth) if args.b else None
    symbol = None
    if args.symbol_weight:
        _, symbol = experiments.load_weight(args.symbol_weight, args.depth)
    op = OperatorSpec.from_string(args.op, b=b, w=symbol)
    if args.weight:
        space_id, space = experiments.load_weight(args.weight, args.depth)
    else:
        if b is not None:
            grid = b.grid
        elif symbol is not None:
            grid = symbol.grid
        else:
            grid = DyadicGrid(args.depth)
        space_id, space = "lebesgue", Weight.constant(grid)
    rows = experiments.norm_report(op, args.op, space, space_id, args.tol, args.max_iter, args.seed)
    doc = {"command": "norm", "depth": args.depth, "seed": args.seed, "rows": rows}
    _emit(args, doc, {"rows": experiments.NORM_COLUMNS})
    return 0


_DISPATCH = {
    "char": _cmd_char,
    "necessary": _cmd_necessary,
    "sweep-para": _cmd_sweep_para,
    "sweep-mult": _cmd_sweep_mult,
    "verify-lemmas": _cmd_verify,
    "norm": _cmd_norm,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return _DISPATCH[args.command](args)
    except (SpecParseError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
