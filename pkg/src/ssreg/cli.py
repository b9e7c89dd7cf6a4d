"""Command-line front end: ``simulate``, ``estimate`` and ``power``.

Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import sys
import warnings

import numpy as np

from .dataset import center, load_csv
from .errors import InputError, SSRegError
from .estimators import ESTIMATORS, POINT_ONLY, VARIANCE_MODES, EstimatorConfig, get_estimator
from .harness import METRICS, ExperimentPlan, default_workers, emit, run_power, run_table
from .simgen import MODELS, PAPER_SCALE, ScenarioSpec

DEFAULT_ESTIMATORS = "ss_sr,ss_dfa,ss_dr"


class UsageError(Exception):
    pass


def parse_h_grid(text: str) -> tuple:
    """``"a:b:step"`` (inclusive of ``b`` up to round-off) or a comma list."""
    text = text.strip()
    try:
        if ":" in text:
            parts = [float(p) for p in text.split(":")]
            if len(parts) != 3:
                raise ValueError
            a, b, step = parts
            if step <= 0 or b < a:
                raise UsageError(f"h grid {text!r}: need step > 0 and end >= start")
            count = int(np.floor((b - a) / step + 1e-9)) + 1
            values = [round(a + k * step, 12) for k in range(count)]
        else:
            values = [float(p) for p in text.split(",") if p.strip()]
    except ValueError:
        raise UsageError(f"cannot parse h grid {text!r}; use 'start:stop:step' or a comma list") from None
    if not values or not all(np.isfinite(values)):
        raise UsageError(f"h grid {text!r} must contain at least one finite value")
    return tuple(values)


def parse_estimators(text: str) -> tuple:
    names = tuple(p.strip() for p in text.split(",") if p.strip())
    bad = [n for n in names if n not in ESTIMATORS]
    if not names or bad:
        raise UsageError(f"unknown estimator(s) {bad or text!r}; valid: {', '.join(ESTIMATORS)}")
    return names


def _positive(text):
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg(text):
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def _alpha(text):
    v = float(text)
    if not 0 < v < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {v}")
    return v


def _scenario_flags(p):
    p.add_argument("--model", choices=MODELS, default="M1", help="simulation design")
    p.add_argument("--n", type=_positive, default=None, help="labeled rows; None uses the model's published size")
    p.add_argument("--m", type=_nonneg, default=None, help="unlabeled rows; None uses the model's published size")
    p.add_argument("--d", type=_positive, default=None, help="number of controls; None uses the model's published size")
    p.add_argument("--s", type=_positive, default=None, help="override the sparsity of Z on W")
    p.add_argument("--reps", type=_positive, default=100, help="Monte Carlo replications")
    p.add_argument("--seed", type=int, default=0, help="base seed; replication r uses seed XOR r")
    p.add_argument("--estimators", default=DEFAULT_ESTIMATORS, help="comma-separated estimator ids")
    p.add_argument("--alpha", type=_alpha, default=0.05, help="1 - confidence level")
    p.add_argument("--workers", type=_nonneg, default=0,
                   help="parallel worker processes, 0 for all available cores (default: %(default)s)")
    p.add_argument("--format", choices=("csv", "json"), default="csv", help="output format for --out")
    p.add_argument("--out", default=None, help="output path (nothing is written when omitted)")


def build_parser() -> argparse.ArgumentParser:
    fmt = argparse.ArgumentDefaultsHelpFormatter
    parser = argparse.ArgumentParser(prog="ssreg", formatter_class=fmt,
                                     description="Semi-supervised inference for a single regression coefficient.")
    sub = parser.add_subparsers(dest="command", required=True, metavar="{simulate,estimate,power}")

    sim = sub.add_parser("simulate", formatter_class=fmt, help="Monte Carlo summary table",
                         description="Run a Monte Carlo study and report bias, RMSE, length and coverage.")
    _scenario_flags(sim)

    est = sub.add_parser("estimate", formatter_class=fmt, help="estimate from CSV files",
                         description="Estimate the coefficient on Z from labeled and unlabeled CSV files.")
    est.add_argument("--labeled", required=True, help="CSV with the Z, Y and W columns")
    est.add_argument("--unlabeled", default=None, help="CSV with the Z and W columns (omit for m = 0)")
    est.add_argument("--z", required=True, help="name of the Z column")
    est.add_argument("--y", required=True, help="name of the Y column")
    est.add_argument("--estimator", choices=tuple(ESTIMATORS), default="ss_sr", help="estimator id")
    est.add_argument("--alpha", type=_alpha, default=0.05, help="1 - confidence level")
    est.add_argument("--variance-mode", choices=VARIANCE_MODES, default="no_shift", help="variance formula")
    est.add_argument("--seed", type=int, default=0, help="sample-split and cross-validation seed")
    est.add_argument("--no-center", action="store_true", help="skip centering of the inputs")
    est.add_argument("--standardize", action="store_true", help="also scale columns to unit variance")
    est.add_argument("--out", default=None, help="write the report as JSON to this path")

    pw = sub.add_parser("power", formatter_class=fmt, help="rejection rates over a grid of alternatives",
                        description="Rejection rates of H0: theta = theta_true + h over an h grid.")
    _scenario_flags(pw)
    pw.add_argument("--h-grid", required=True, help="'start:stop:step' or a comma list")
    pw.set_defaults(estimators="ss_sr,ss_dfa")
    return parser


def _plan(args, h_grid=()) -> ExperimentPlan:
    d, n, m = PAPER_SCALE[args.model]
    try:
        spec = ScenarioSpec(args.model, args.n if args.n is not None else n, args.m if args.m is not None else m,
                            args.d if args.d is not None else d, seed=args.seed, s=args.s)
        return ExperimentPlan(spec, parse_estimators(args.estimators), args.reps, args.seed, args.alpha,
                              h_grid=h_grid)
    except InputError as exc:
        raise UsageError(str(exc)) from None


def _workers(args) -> int:
    return args.workers or default_workers()


def _table_text(table) -> str:
    head = f"{'estimator':<14}" + "".join(f"{m:>14}" for m in METRICS)
    lines = [head]
    for name, row in table.rows.items():
        cells = []
        for m in METRICS:
            v = getattr(row, m)
            cells.append(f"{v:>14d}" if isinstance(v, int) else f"{v:>14.4f}")
        lines.append(f"{name:<14}" + "".join(cells))
    return "\n".join(lines)


def cmd_simulate(args) -> int:
    plan = _plan(args)
    table = run_table(plan, workers=_workers(args))
    scale = "paper scale" if plan.scenario.paper_scale else "scaled-down analog"
    print(f"{plan.scenario.model_id} n={plan.scenario.n} m={plan.scenario.m} d={plan.scenario.d} "
          f"reps={plan.reps} ({scale}); theta = {table.theta_true:.4f}")
    print(_table_text(table))
    if args.out:
        emit(table, args.format, args.out)
    return 0


def cmd_power(args) -> int:
    names = parse_estimators(args.estimators)
    point = [n for n in names if n in POINT_ONLY]
    if point:
        raise UsageError(f"estimator(s) {point} give no interval and cannot be used for power")
    plan = _plan(args, parse_h_grid(args.h_grid))
    curve = run_power(plan, workers=_workers(args))
    if 0.0 in curve.h_grid:
        print("Type I error (h = 0):")
        for name in names:
            print(f"  {name:<12}{curve.type_one_error(name):.4f}")
    else:
        print("h grid has no 0 entry; no Type I error row")
    if args.out:
        emit(curve, args.format, args.out)
    return 0


def cmd_estimate(args) -> int:
    data = load_csv(args.labeled, args.unlabeled, args.z, args.y)
    if not args.no_center:
        data, _ = center(data, standardize=args.standardize)
    cfg = EstimatorConfig(alpha=args.alpha, variance_mode=args.variance_mode, split_seed=args.seed)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        report = get_estimator(args.estimator)(data, cfg)
    for w in caught:
        print(f"warning: {w.message}", file=sys.stderr)
    print(f"estimator  {report.estimator}")
    print(f"n={data.n} m={data.m} d={data.d}")
    print(f"theta_hat  {report.theta_hat:.4f}")
    print(f"std_error  {report.std_error:.4f}")
    print(f"{100 * (1 - report.alpha):g}% CI   [{report.ci_lower:.4f}, {report.ci_upper:.4f}]")
    for key, value in report.diagnostics.items():
        print(f"  {key}: {value}")
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8") as fh:
                json.dump(report.to_dict(), fh, indent=2)
                fh.write("\n")
        except OSError as exc:
            raise SSRegError(f"cannot write {args.out}: {exc}") from exc
    return 0


COMMANDS = {"simulate": cmd_simulate, "estimate": cmd_estimate, "power": cmd_power}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"{parser.prog} {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except SSRegError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
