"""Acceptance criteria, one test per criterion, each printing a PASS/FAIL line.

Criteria 1 to 3 ship two configurations: ``desk`` (d=199, proportional
sparsity, 200 reps, coverage within 5 points) and ``paper`` (published sizes,
500 reps, coverage within 3 points). Select with the environment variable
``SSREG_ACCEPTANCE_SCALE`` (default ``desk``); every line names the scale.
"""

import os
import subprocess
import sys
import time
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import pytest

from ssreg.harness import ExperimentPlan, power_curve, run_table
from ssreg.simgen import ScenarioSpec

SCALE = os.environ.get("SSREG_ACCEPTANCE_SCALE", "desk")
TESTS = Path(__file__).parent


@dataclass(frozen=True)
class Scale:
    d: int
    s_m1: int | None  # sparsity of Z on W in M1, None for the published 25
    reps: int
    coverage_tol: float


CONFIGS = {
    "desk": Scale(d=199, s_m1=10, reps=200, coverage_tol=0.05),
    "paper": Scale(d=499, s_m1=None, reps=500, coverage_tol=0.03),
}

# published Monte Carlo values for M1, n=300
M1_COVERAGE = {"ss_sr": 0.952, "ss_dfa": 0.942, "ss_dr": 0.888}
M1_RMSE = {"ss_sr": 0.0586, "ss_dfa": 0.0334}
M1_SR_RMSE_BY_M = {250: 0.0711, 500: 0.0644, 1000: 0.0586}
RMSE_RTOL = 0.25


@pytest.fixture
def say(capsys):
    """Print past pytest's capture so lines reach the log even on success."""
    def emit(line):
        with capsys.disabled():
            print(line, flush=True)
    return emit


def verdict(say, criterion, ok, detail):
    tag = SCALE if criterion in (1, 2, 3, 8) else "fixed"
    say(f"criterion {criterion} [{tag}] {'PASS' if ok else 'FAIL'}: {detail}")
    return ok


@pytest.fixture(scope="module")
def scale():
    if SCALE not in CONFIGS:
        pytest.fail(f"SSREG_ACCEPTANCE_SCALE must be one of {sorted(CONFIGS)}, got {SCALE!r}")
    return CONFIGS[SCALE]


_tables = {}


def m1_table(cfg, m, estimators):
    key = (m, estimators)
    if key not in _tables:
        spec = ScenarioSpec("M1", 300, m, cfg.d, s=cfg.s_m1)
        _tables[key] = run_table(ExperimentPlan(spec, estimators, cfg.reps))
    return _tables[key]


def median_abs_error(table, name):
    errs = [abs(r.theta_hat - table.theta_true) for r in table.replicates if r.estimator == name and not r.failed]
    return float(np.median(errs))


def run_pytest(*args):
    start = time.perf_counter()
    proc = subprocess.run([sys.executable, "-m", "pytest", "-q", "-p", "no:cacheprovider", *args],
                          cwd=TESTS.parent, capture_output=True, text=True)
    tail = proc.stdout.strip().splitlines()[-1] if proc.stdout.strip() else proc.stderr.strip()[-200:]
    return proc.returncode, time.perf_counter() - start, tail


# ---------------------------------------------------------------------------

def test_criterion_1_m1_table(scale, say):
    table = m1_table(scale, 1000, ("ss_sr", "ss_dfa", "ss_dr"))
    checks, parts = [], []
    for name, target in M1_COVERAGE.items():
        got = table.rows[name].coverage
        checks.append(abs(got - target) <= scale.coverage_tol + 1e-12)
        parts.append(f"{name} cov {got:.3f} (target {target:.3f}±{scale.coverage_tol:.2f})")
    for name, target in M1_RMSE.items():
        got = table.rows[name].rmse
        checks.append(abs(got - target) <= RMSE_RTOL * target)
        parts.append(f"{name} rmse {got:.4f} (target {target:.4f}±25%)")
    assert verdict(say, 1, all(checks), "; ".join(parts))


def test_criterion_2_m3_separation(scale, say):
    spec = ScenarioSpec("M3", 150, 1500, scale.d)
    table = run_table(ExperimentPlan(spec, ("dfa", "dr", "ss_sr"), scale.reps))
    cov = {k: table.rows[k].coverage for k in ("dfa", "dr", "ss_sr")}
    ok = cov["dfa"] < 0.30 and cov["dr"] < 0.10 and cov["ss_sr"] >= 0.90
    detail = f"dfa cov {cov['dfa']:.3f} (<0.30), dr cov {cov['dr']:.3f} (<0.10), ss_sr cov {cov['ss_sr']:.3f} (>=0.90)"
    assert verdict(say, 2, ok, detail)


def test_criterion_3_unlabeled_monotonicity(scale, say):
    rmse = {m: m1_table(scale, m, ("ss_sr",) if m != 1000 else ("ss_sr", "ss_dfa", "ss_dr")).rows["ss_sr"].rmse
            for m in (250, 500, 1000)}
    ms = sorted(rmse)
    ok = all(rmse[b] <= 1.10 * rmse[a] for a, b in zip(ms, ms[1:]))
    detail = ", ".join(f"m={m} rmse {rmse[m]:.4f} (published {M1_SR_RMSE_BY_M[m]:.4f})" for m in ms)
    assert verdict(say, 3, ok, detail + "; each step within 10% slack")


def test_criterion_4_m2_type_one_error(say):
    start = time.perf_counter()
    plan = ExperimentPlan(ScenarioSpec("M2", 300, 1000, 499), ("ss_sr", "ss_dfa"), 300, h_grid=(0.0,))
    table = run_table(plan)
    curve = power_curve(plan, table.theta_true, table.replicates)
    minutes = (time.perf_counter() - start) / 60
    rates = {k: curve.type_one_error(k) for k in plan.estimators}
    ok = all(r <= 0.09 for r in rates.values()) and minutes <= 20
    detail = ", ".join(f"{k} rejection {v:.3f} (<=0.09)" for k, v in rates.items())
    assert verdict(say, 4, ok, f"{detail}; runtime {minutes:.1f} min (<=20)")


def test_criterion_5_solver_suite(say):
    code, seconds, tail = run_pytest(
        "tests/test_solvers.py::test_lasso_kkt_certificate",
        "tests/test_solvers.py::test_dantzig_matches_vertex_enumeration",
        "tests/test_solvers.py::test_qp_direct_solve_at_zero",
        "tests/test_solvers.py::test_capped_nesting",
    )
    ok = code == 0 and seconds < 120
    assert verdict(say, 5, ok, f"{tail}; {seconds:.0f} s (<120)")


def test_criterion_6_identity_suite(say):
    code, seconds, tail = run_pytest(
        "tests/test_estimators.py",
        "-k", "supervised_degeneracy or outcome_scale_equivariance or column_permutation_invariance "
              "or plug_in_matches_partialling_out",
    )
    assert verdict(say, 6, code == 0, f"{tail}; {seconds:.0f} s")


def test_criterion_7_consistency_trend(say):
    start = time.perf_counter()
    med = {}
    for n in (100, 400, 1600):
        table = run_table(ExperimentPlan(ScenarioSpec("M1", n, 4 * n, 101), ("ss_sr",), 100))
        med[n] = median_abs_error(table, "ss_sr")
    minutes = (time.perf_counter() - start) / 60
    ns = sorted(med)
    ok = all(med[b] <= 1.20 * med[a] for a, b in zip(ns, ns[1:])) and minutes < 10
    detail = ", ".join(f"n={n} median|err| {med[n]:.4f}" for n in ns)
    assert verdict(say, 7, ok, f"{detail}; 20% slack; runtime {minutes:.1f} min (<10)")


def test_criterion_8_scale_marker(scale, say):
    ok = set(CONFIGS) == {"desk", "paper"} and CONFIGS["desk"].d == 199 and CONFIGS["desk"].reps == 200
    detail = (f"criteria 1-3 ran at the {SCALE} configuration (d={scale.d}, reps={scale.reps}, "
              f"coverage tolerance ±{scale.coverage_tol:.2f}); both configurations are defined here")
    assert verdict(say, 8, ok, detail)


def test_example_harness_dfa_type_one(scale, say):
    """M1, m=1000: SS-DFA rejects a true null at most 8% of the time (reuses the criterion 1 table)."""
    table = m1_table(scale, 1000, ("ss_sr", "ss_dfa", "ss_dr"))
    spec = ScenarioSpec("M1", 300, 1000, scale.d, s=scale.s_m1)
    plan = ExperimentPlan(spec, ("ss_dfa",), scale.reps, h_grid=(0.0,))
    rate = power_curve(plan, table.theta_true, [r for r in table.replicates if r.estimator == "ss_dfa"])
    rate = rate.type_one_error("ss_dfa")
    say(f"example [{SCALE}] SS-DFA Type I error at h=0: {rate:.3f} (<=0.08)")
    assert rate <= 0.08
