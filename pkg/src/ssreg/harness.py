"""Monte Carlo driver: summary tables and power curves over replications."""

from __future__ import annotations

import csv
import json
import math
import os
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np

from .errors import InputError, SSRegError
from .estimators import ESTIMATORS, POINT_ONLY, EstimatorConfig, UnsupervisedRowsIgnored, _plain
from .rng import replication_seed
from .simgen import ScenarioSpec, generate


@dataclass(frozen=True)
class ExperimentPlan:
    scenario: ScenarioSpec
    estimators: tuple = ("ss_sr", "ss_dfa", "ss_dr")
    reps: int = 100
    base_seed: int = 0
    alpha: float = 0.05
    h_grid: tuple = ()
    config: EstimatorConfig = EstimatorConfig()

    def __post_init__(self):
        if self.reps < 1:
            raise InputError(f"reps must be >= 1, got {self.reps}")
        if not self.estimators:
            raise InputError("at least one estimator is required")
        object.__setattr__(self, "estimators", tuple(self.estimators))
        object.__setattr__(self, "h_grid", tuple(float(h) for h in self.h_grid))
        if not all(math.isfinite(h) for h in self.h_grid):
            raise InputError("h_grid values must be finite")

    def echo(self) -> dict:
        return {
            "scenario": asdict(self.scenario),
            "paper_scale": self.scenario.paper_scale,
            "estimators": list(self.estimators),
            "reps": self.reps,
            "base_seed": self.base_seed,
            "alpha": self.alpha,
            "h_grid": list(self.h_grid),
        }


@dataclass(frozen=True)
class Replicate:
    rep: int
    estimator: str
    theta_hat: float = float("nan")
    ci_lower: float = float("nan")
    ci_upper: float = float("nan")
    error: str | None = None
    diagnostics: dict = field(default_factory=dict, compare=False)

    @property
    def failed(self) -> bool:
        return self.error is not None


@dataclass(frozen=True)
class EstimatorSummary:
    bias: float
    rmse: float
    length: float
    coverage: float
    coverage_se: float
    rep_failures: int
    reps_used: int


METRICS = ("bias", "rmse", "length", "coverage", "coverage_se", "rep_failures")


@dataclass(frozen=True)
class SummaryTable:
    plan: dict
    theta_true: float
    rows: dict
    replicates: tuple = field(default=(), compare=False)

    def to_dict(self) -> dict:
        return {
            "kind": "table",
            "plan": self.plan,
            "theta_true": self.theta_true,
            "rows": {k: asdict(v) for k, v in self.rows.items()},
            "replicates": [asdict(r) for r in self.replicates],
        }


@dataclass(frozen=True)
class PowerCurve:
    plan: dict
    theta_true: float
    h_grid: tuple
    rates: dict  # estimator -> tuple of rejection rates aligned with h_grid
    rep_failures: dict
    replicates: tuple = field(default=(), compare=False)

    def type_one_error(self, estimator: str) -> float:
        if 0.0 not in self.h_grid:
            raise InputError("h_grid has no 0 entry")
        return self.rates[estimator][self.h_grid.index(0.0)]

    def to_dict(self) -> dict:
        return {
            "kind": "power",
            "plan": self.plan,
            "theta_true": self.theta_true,
            "h_grid": list(self.h_grid),
            "rates": {k: list(v) for k, v in self.rates.items()},
            "rep_failures": dict(self.rep_failures),
            "replicates": [asdict(r) for r in self.replicates],
        }


def _run_one(args):
    plan, rep, registry = args
    seed = replication_seed(plan.base_seed, rep)
    inst = generate(replace(plan.scenario, seed=seed))
    cfg = plan.config.with_(alpha=plan.alpha, split_seed=seed)
    out = []
    for name in plan.estimators:
        fn = registry[name]
        try:
            with warnings.catch_warnings():
                # supervised ids drop the unlabeled rows on purpose here
                warnings.simplefilter("ignore", UnsupervisedRowsIgnored)
                r = fn(inst.dataset, cfg)
        except (SSRegError, ArithmeticError, ValueError, np.linalg.LinAlgError) as exc:
            out.append(Replicate(rep, name, error=f"{type(exc).__name__}: {exc}"))
            continue
        out.append(Replicate(rep, name, r.theta_hat, r.ci_lower, r.ci_upper, diagnostics=_plain(r.diagnostics)))
    return inst.theta_true, out


def _replicate_all(plan: ExperimentPlan, workers: int | None, registry):
    registry = ESTIMATORS if registry is None else {**ESTIMATORS, **registry}
    unknown = [e for e in plan.estimators if e not in registry]
    if unknown:
        raise InputError(f"unknown estimator(s) {unknown}; valid: {', '.join(registry)}")
    workers = default_workers() if workers is None else max(1, int(workers))
    tasks = [(plan, rep, registry) for rep in range(plan.reps)]
    if workers == 1:
        results = [_run_one(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_one, tasks, chunksize=1))
    # pool.map preserves submission order; sort anyway so aggregation never depends on scheduling
    reps = sorted((r for _, out in results for r in out), key=lambda r: (r.rep, plan.estimators.index(r.estimator)))
    return results[0][0], tuple(reps)


def default_workers() -> int:
    try:
        return max(1, len(os.sched_getaffinity(0)))
    except AttributeError:
        return max(1, os.cpu_count() or 1)


def summarize(replicates, theta_true: float, estimator: str, reps: int) -> EstimatorSummary:
    ok = [r for r in replicates if r.estimator == estimator and not r.failed]
    failures = sum(1 for r in replicates if r.estimator == estimator and r.failed)
    if not ok:
        raise SSRegError(f"all {reps} replications failed for estimator {estimator!r}")
    err = np.array([r.theta_hat - theta_true for r in ok])
    lo = np.array([r.ci_lower for r in ok])
    hi = np.array([r.ci_upper for r in ok])
    if estimator in POINT_ONLY or np.all(np.isnan(lo)):
        length = coverage = cse = float("nan")
    else:
        length = float(np.mean(hi - lo))
        coverage = float(np.mean((lo <= theta_true) & (theta_true <= hi)))
        cse = math.sqrt(coverage * (1.0 - coverage) / len(ok))
    return EstimatorSummary(
        bias=float(err.mean()),
        rmse=float(np.sqrt(np.mean(err ** 2))),
        length=length,
        coverage=coverage,
        coverage_se=cse,
        rep_failures=failures,
        reps_used=len(ok),
    )


def run_table(plan: ExperimentPlan, workers: int | None = 1, registry: dict | None = None) -> SummaryTable:
    """Bias, RMSE, mean interval length and coverage for each estimator.

    Replication ``r`` uses seed ``base_seed ^ r`` for the instance and for
    every estimator's sample split. Failed fits are counted per estimator and
    left out of the averages. ``registry`` adds or overrides estimator ids.
    """
    theta, reps = _replicate_all(plan, workers, registry)
    rows = {name: summarize(reps, theta, name, plan.reps) for name in plan.estimators}
    return SummaryTable(plan.echo(), theta, rows, reps)


def run_power(plan: ExperimentPlan, workers: int | None = 1, registry: dict | None = None) -> PowerCurve:
    """Rejection rates of ``H0: theta = theta_true + h`` across ``plan.h_grid``.

    A replication rejects when ``theta_true + h`` lies outside its interval;
    each replication's interval is reused for every ``h``.
    """
    if not plan.h_grid:
        raise InputError("h_grid must be nonempty for a power study")
    theta, reps = _replicate_all(plan, workers, registry)
    return power_curve(plan, theta, reps)


def power_curve(plan: ExperimentPlan, theta_true: float, replicates) -> PowerCurve:
    """Rejection rates from already computed replicates (see :func:`run_power`)."""
    if not plan.h_grid:
        raise InputError("h_grid must be nonempty for a power study")
    rates, failures = {}, {}
    for name in plan.estimators:
        ok = [r for r in replicates if r.estimator == name and not r.failed]
        failures[name] = sum(1 for r in replicates if r.estimator == name and r.failed)
        if not ok:
            raise SSRegError(f"all {plan.reps} replications failed for estimator {name!r}")
        lo = np.array([r.ci_lower for r in ok])
        hi = np.array([r.ci_upper for r in ok])
        if name in POINT_ONLY or np.all(np.isnan(lo)):
            raise InputError(f"estimator {name!r} gives no interval and cannot be used for power")
        rates[name] = tuple(float(np.mean((theta_true + h < lo) | (theta_true + h > hi))) for h in plan.h_grid)
    return PowerCurve(plan.echo(), theta_true, plan.h_grid, rates, failures, tuple(replicates))


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    return format(float(x), ".17g")


def emit(result, format: str, path) -> None:
    """Write a table or power curve as CSV or JSON.

    Table CSV rows are ``estimator,metric,value``; power CSV rows are
    ``estimator,h,rejection_rate`` sorted by estimator then ``h``. JSON holds
    the plan echo, the aggregates and every replicate with its diagnostics.
    """
    if format not in ("csv", "json"):
        raise InputError(f"format must be 'csv' or 'json', got {format!r}")
    try:
        with open(path, "w", newline="", encoding="utf-8") as fh:
            if format == "json":
                json.dump(_json_safe(result.to_dict()), fh, indent=2, allow_nan=False)
                fh.write("\n")
                return
            w = csv.writer(fh, lineterminator="\n")
            if isinstance(result, SummaryTable):
                w.writerow(["estimator", "metric", "value"])
                for name, row in result.rows.items():
                    for metric in METRICS:
                        w.writerow([name, metric, _fmt(getattr(row, metric))])
            elif isinstance(result, PowerCurve):
                w.writerow(["estimator", "h", "rejection_rate"])
                for name in sorted(result.rates):
                    for h, rate in sorted(zip(result.h_grid, result.rates[name])):
                        w.writerow([name, _fmt(h), _fmt(rate)])
            else:
                raise InputError(f"cannot emit object of type {type(result).__name__}")
    except OSError as exc:
        raise SSRegError(f"cannot write {path}: {exc}") from exc


def _json_safe(obj):
    """Floats keep full precision; non-finite values become strings so the file stays strict JSON."""
    if isinstance(obj, dict):
        return {k: _json_safe(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_json_safe(v) for v in obj]
    if isinstance(obj, float) and not math.isfinite(obj):
        return str(obj)
    return _plain(obj)


def load_json(path) -> dict:
    """Read an emitted JSON file back, restoring non-finite floats."""
    with open(path, encoding="utf-8") as fh:
        return _restore(json.load(fh))


def _restore(obj):
    if isinstance(obj, dict):
        return {k: _restore(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_restore(v) for v in obj]
    if obj in ("nan", "inf", "-inf"):
        return float(obj)
    return obj
