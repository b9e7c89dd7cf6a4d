import argparse
import csv
import json
import warnings
from pathlib import Path

import pytest

from ssreg.cli import build_parser, main, parse_estimators, parse_h_grid, UsageError
from ssreg.dataset import center, write_csv
from ssreg.estimators import EstimatorConfig, get_estimator
from ssreg.harness import ExperimentPlan, load_json, run_power, run_table
from ssreg.simgen import ScenarioSpec, generate

SNAPSHOTS = Path(__file__).parent / "snapshots"


def parsers():
    p = build_parser()
    sub = next(a for a in p._actions if isinstance(a, argparse._SubParsersAction))
    return {"ssreg": p, **sub.choices}


@pytest.mark.parametrize("name", ["ssreg", "simulate", "estimate", "power"])
def test_help_snapshot(name, monkeypatch):
    monkeypatch.setenv("COLUMNS", "100")
    text = parsers()[name].format_help()
    assert text == (SNAPSHOTS / f"help_{name}.txt").read_text()


@pytest.mark.parametrize("name", ["simulate", "estimate", "power"])
def test_help_lists_every_flag_with_default(name, monkeypatch):
    monkeypatch.setenv("COLUMNS", "100")
    parser = parsers()[name]
    text = parser.format_help()
    for action in parser._actions:
        if action.option_strings == ["-h", "--help"]:
            continue
        assert action.option_strings[-1] in text
        if not action.required and action.default is not argparse.SUPPRESS:
            assert "default:" in (action.help or "") or f"default: {action.default}" in text


# ------------------------------------------------------------------ parsing

def test_h_grid_range():
    assert parse_h_grid("0:0.2:0.05") == (0.0, 0.05, 0.1, 0.15, 0.2)


@pytest.mark.parametrize("text,expected", [("0", (0.0,)), ("-0.1, 0, 0.1", (-0.1, 0.0, 0.1)), ("0:0:1", (0.0,))])
def test_h_grid_lists(text, expected):
    assert parse_h_grid(text) == expected


@pytest.mark.parametrize("text", ["", "a:b:c", "0:1", "0:1:0", "1:0:0.1", "nan", "0,inf"])
def test_h_grid_bad(text):
    with pytest.raises(UsageError):
        parse_h_grid(text)


def test_parse_estimators():
    assert parse_estimators("ss_sr, dfa") == ("ss_sr", "dfa")
    with pytest.raises(UsageError, match="valid"):
        parse_estimators("ss_sr,bogus")


# --------------------------------------------------------------- exit codes

@pytest.mark.parametrize(
    "argv",
    [
        ["simulate", "--model", "M9"],
        ["simulate", "--reps", "0"],
        ["power", "--h-grid", "0", "--alpha", "1.5"],
        ["power"],
        ["estimate", "--z", "z"],
    ],
)
def test_argparse_usage_errors(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    if "M9" in argv:
        assert "M1" in capsys.readouterr().err


@pytest.mark.parametrize(
    "argv,fragment",
    [
        (["simulate", "--estimators", "nope", "--n", "10", "--m", "0", "--d", "30"], "valid"),
        (["simulate", "--n", "10", "--m", "0", "--d", "20"], "d >= 25"),
        (["power", "--h-grid", "x", "--n", "10", "--m", "0", "--d", "30"], "h grid"),
        (["power", "--estimators", "lasso_plugin", "--h-grid", "0"], "no interval"),
    ],
)
def test_usage_errors_exit_2(argv, fragment, capsys):
    assert main(argv) == 2
    assert fragment in capsys.readouterr().err


def test_runtime_failure_exits_1(tmp_path, capsys):
    assert main(["estimate", "--labeled", str(tmp_path / "missing.csv"), "--z", "z", "--y", "y"]) == 1
    assert "not found" in capsys.readouterr().err


# ----------------------------------------------------------------- estimate

@pytest.fixture
def m1_csv(tmp_path):
    inst = generate(ScenarioSpec("M1", 60, 90, 30, seed=8, s=5))
    lab, unl = tmp_path / "lab.csv", tmp_path / "unl.csv"
    write_csv(inst.dataset, lab, unl)
    return inst.dataset, lab, unl


@pytest.mark.parametrize("name", ["ss_sr", "lasso_plugin"])
def test_estimate_matches_library_bit_equal(m1_csv, tmp_path, name):
    ds, lab, unl = m1_csv
    out = tmp_path / "r.json"
    code = main(["estimate", "--labeled", str(lab), "--unlabeled", str(unl), "--z", "z", "--y", "y",
                 "--estimator", name, "--seed", "4", "--out", str(out)])
    assert code == 0
    direct = get_estimator(name)(center(ds)[0], EstimatorConfig(split_seed=4))
    got = json.loads(out.read_text())
    assert json.dumps(got, sort_keys=True) == json.dumps(direct.to_dict(), sort_keys=True)


def test_estimate_prints_four_decimals(m1_csv, capsys):
    _, lab, unl = m1_csv
    assert main(["estimate", "--labeled", str(lab), "--unlabeled", str(unl), "--z", "z", "--y", "y"]) == 0
    text = capsys.readouterr().out
    line = next(ln for ln in text.splitlines() if ln.startswith("theta_hat"))
    assert len(line.split()[1].split(".")[1]) == 4
    assert "95% CI" in text


def test_estimate_missing_z_column(m1_csv, capsys):
    _, lab, unl = m1_csv
    assert main(["estimate", "--labeled", str(lab), "--unlabeled", str(unl), "--z", "age", "--y", "y"]) == 1
    assert "'age'" in capsys.readouterr().err


def test_estimate_labeled_only_dfa(m1_csv, tmp_path):
    ds, lab, _ = m1_csv
    empty = tmp_path / "empty.csv"
    empty.write_text(",".join(["z", *ds.w_names]) + "\n")
    out = tmp_path / "r.json"
    assert main(["estimate", "--labeled", str(lab), "--unlabeled", str(empty), "--z", "z", "--y", "y",
                 "--estimator", "ss_dfa", "--out", str(out)]) == 0
    supervised = center(ds.supervised())[0]
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        direct = get_estimator("dfa")(supervised, EstimatorConfig())
    got = json.loads(out.read_text())
    assert got["theta_hat"] == direct.theta_hat and got["ci_upper"] == direct.ci_upper


def test_estimate_supervised_id_warns(m1_csv, capsys):
    _, lab, unl = m1_csv
    assert main(["estimate", "--labeled", str(lab), "--unlabeled", str(unl), "--z", "z", "--y", "y",
                 "--estimator", "sr"]) == 0
    assert "ignoring 90 unlabeled rows" in capsys.readouterr().err


# ------------------------------------------------------- simulate and power

SMALL = ["--model", "M1", "--n", "50", "--m", "60", "--d", "30", "--s", "5", "--reps", "3", "--seed", "2",
         "--workers", "1"]


def test_simulate_matches_run_table(tmp_path, capsys):
    out = tmp_path / "t.json"
    assert main(["simulate", *SMALL, "--estimators", "ss_sr,lasso", "--format", "json", "--out", str(out)]) == 0
    printed = capsys.readouterr().out
    plan = ExperimentPlan(ScenarioSpec("M1", 50, 60, 30, seed=2, s=5), ("ss_sr", "lasso"), 3, 2)
    table = run_table(plan, workers=1)
    assert json.dumps(load_json(out), sort_keys=True) == json.dumps(table.to_dict(), sort_keys=True)
    assert "scaled-down analog" in printed
    row = next(ln for ln in printed.splitlines() if ln.startswith("ss_sr"))
    assert f"{table.rows['ss_sr'].rmse:.4f}" in row


def test_power_matches_run_power(tmp_path, capsys):
    out = tmp_path / "p.csv"
    assert main(["power", *SMALL, "--estimators", "ss_sr", "--h-grid", "0:0.2:0.1", "--out", str(out)]) == 0
    plan = ExperimentPlan(ScenarioSpec("M1", 50, 60, 30, seed=2, s=5), ("ss_sr",), 3, 2, h_grid=(0.0, 0.1, 0.2))
    curve = run_power(plan, workers=1)
    rows = list(csv.reader(out.open()))[1:]
    assert [float(r[2]) for r in rows] == list(curve.rates["ss_sr"])
    assert f"{curve.type_one_error('ss_sr'):.4f}" in capsys.readouterr().out


def test_power_single_zero_is_type_one_study(capsys):
    assert main(["power", *SMALL, "--estimators", "ss_sr", "--h-grid", "0"]) == 0
    assert "Type I error" in capsys.readouterr().out


def test_power_without_zero(capsys):
    assert main(["power", *SMALL, "--estimators", "ss_sr", "--h-grid", "0.1"]) == 0
    assert "no Type I error row" in capsys.readouterr().out


# ---------------------------------------------------------- Monte Carlo

def test_m3_desk_power_type_one(capsys):
    """M3 analog d=199, n=100, m=800, 200 reps: SS-SR rejects at h=0 at most 10% of the time."""
    argv = ["power", "--model", "M3", "--n", "100", "--m", "800", "--d", "199", "--reps", "200",
            "--estimators", "ss_sr", "--h-grid", "0"]
    assert main(argv) == 0
    line = next(ln for ln in capsys.readouterr().out.splitlines() if ln.strip().startswith("ss_sr"))
    rate = float(line.split()[1])
    print(f"M3 desk SS-SR Type I error {rate:.4f}")
    assert rate <= 0.10
