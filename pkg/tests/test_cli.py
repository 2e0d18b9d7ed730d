import csv
import json

import pytest

from aoi_bandits.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out, captured.err


# ---------------------------------------------------------------------------
# inspect
# ---------------------------------------------------------------------------

def test_inspect_i1_reference_values(capsys):
    code, out, _ = run_cli(capsys, "inspect", "i1")
    assert code == 0
    assert "optimal arm: 2 (mean 0.6)" in out
    assert "C = 1" in out
    assert "competitive sub-optimal arms: 3" in out
    assert "strictly competitive arms: 3" in out
    assert "mu_min: 0.2" in out


def test_inspect_i2_reference_values(capsys):
    code, out, _ = run_cli(capsys, "inspect", "i2")
    assert code == 0
    assert "optimal arm: 4 (mean 0.6)" in out
    assert "C = 0" in out
    assert "competitive sub-optimal arms: none" in out


def test_inspect_missing_file_exits_2(capsys):
    code, out, err = run_cli(capsys, "inspect", "missing.json")
    assert code == 2
    assert "error:" in err
    assert out == ""


def test_inspect_reproducible(capsys):
    _, first, _ = run_cli(capsys, "inspect", "i1")
    _, second, _ = run_cli(capsys, "inspect", "i1")
    assert first == second


def test_inspect_custom_file(tmp_path, capsys):
    doc = {
        "name": "custom",
        "states": ["a", "b", "c"],
        "probs": [0.5, 0.25, 0.25],
        "rewards": [[1, 0, 0], [0, 1, 0]],
    }
    path = tmp_path / "inst.json"
    path.write_text(json.dumps(doc))
    code, out, _ = run_cli(capsys, "inspect", str(path))
    assert code == 0
    assert "instance custom" in out


# ---------------------------------------------------------------------------
# simulate
# ---------------------------------------------------------------------------

def simulate_args(out_dir, **kw):
    args = [
        "simulate", "--instance", kw.pop("instance", "i2"),
        "--out-dir", str(out_dir),
        "--horizon", str(kw.pop("horizon", 500)),
        "--runs", str(kw.pop("runs", 10)),
        "--seed", str(kw.pop("seed", 4)),
        "--policies", kw.pop("policies", "ucb,cucb"),
    ]
    for key, value in kw.items():
        args.extend([f"--{key.replace('_', '-')}", str(value)])
    return args


def test_simulate_writes_expected_csvs(tmp_path, capsys):
    code, out, _ = run_cli(capsys, *simulate_args(tmp_path))
    assert code == 0
    regret = tmp_path / "regret.csv"
    pulls = tmp_path / "pulls.csv"
    assert regret.exists() and pulls.exists()
    with open(regret) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["policy", "checkpoint", "mean_regret", "stderr", "n_runs", "baseline_mode"]
    assert {r[0] for r in rows[1:]} == {"ucb", "cucb"}
    assert all(r[5] == "coupled_oracle" for r in rows[1:])
    with open(pulls) as fh:
        pull_rows = list(csv.reader(fh))
    assert pull_rows[0] == ["policy", "arm", "mean_pulls", "stderr"]
    arms = sorted(int(r[1]) for r in pull_rows[1:] if r[0] == "ucb")
    assert arms == [1, 2, 3, 4]


def test_simulate_rerun_is_byte_identical(tmp_path, capsys):
    dir_a, dir_b = tmp_path / "a", tmp_path / "b"
    run_cli(capsys, *simulate_args(dir_a))
    run_cli(capsys, *simulate_args(dir_b))
    assert (dir_a / "regret.csv").read_bytes() == (dir_b / "regret.csv").read_bytes()
    assert (dir_a / "pulls.csv").read_bytes() == (dir_b / "pulls.csv").read_bytes()


def test_simulate_analytic_baseline_column(tmp_path, capsys):
    code, _, _ = run_cli(capsys, *simulate_args(tmp_path, baseline="analytic"))
    assert code == 0
    with open(tmp_path / "regret.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(r["baseline_mode"] == "analytic" for r in rows)


def test_simulate_checkpoints_flag(tmp_path, capsys):
    code, _, _ = run_cli(capsys, *simulate_args(tmp_path, checkpoints="100,500"))
    assert code == 0
    with open(tmp_path / "regret.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert sorted({int(r["checkpoint"]) for r in rows}) == [100, 500]


def test_simulate_rejects_unknown_policy(tmp_path, capsys):
    code, _, err = run_cli(capsys, *simulate_args(tmp_path, policies="ucb,egreedy"))
    assert code == 2
    assert "unknown policy" in err


def test_simulate_config_file_and_flag_override(tmp_path, capsys):
    config = {
        "instance": "i2",
        "horizon": 400,
        "runs": 8,
        "seed": 9,
        "policies": ["ucb", {"policy": "cts_beta", "aoi_aware": True}],
        "out_dir": str(tmp_path / "from_config"),
    }
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps(config))
    code, _, _ = run_cli(capsys, "simulate", "--config", str(cfg_path))
    assert code == 0
    with open(tmp_path / "from_config" / "regret.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert {r["policy"] for r in rows} == {"ucb", "aoi_cts_beta"}
    assert all(int(r["n_runs"]) == 8 for r in rows)

    # flags override the file
    code, _, _ = run_cli(
        capsys, "simulate", "--config", str(cfg_path),
        "--runs", "5", "--out-dir", str(tmp_path / "flagged"),
    )
    assert code == 0
    with open(tmp_path / "flagged" / "regret.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(int(r["n_runs"]) == 5 for r in rows)


def test_simulate_plot_renders_from_csv(tmp_path, capsys):
    pytest.importorskip("matplotlib")
    code, _, _ = run_cli(
        capsys, "simulate", "--instance", "i2", "--out-dir", str(tmp_path),
        "--horizon", "300", "--runs", "5", "--policies", "ucb", "--plot",
    )
    assert code == 0
    assert (tmp_path / "regret.png").exists()


def test_simulate_preset_benchmark_smoke(tmp_path, capsys):
    # the preset pins instances and the 12-policy set; shrink the rest
    code, _, _ = run_cli(
        capsys, "simulate", "--preset", "benchmark", "--out-dir", str(tmp_path),
        "--horizon", "60", "--runs", "3", "--checkpoints", "30,60",
        "--policies", "ucb,aoi_ts_beta",  # keep the smoke test quick
    )
    assert code == 0
    for name in ("regret_i1.csv", "pulls_i1.csv", "regret_i2.csv", "pulls_i2.csv"):
        assert (tmp_path / name).exists()


def test_simulate_preset_full_policy_set(tmp_path, capsys):
    code, _, _ = run_cli(
        capsys, "simulate", "--preset", "benchmark", "--out-dir", str(tmp_path),
        "--horizon", "40", "--runs", "2", "--checkpoints", "40",
    )
    assert code == 0
    with open(tmp_path / "regret_i1.csv") as fh:
        rows = list(csv.DictReader(fh))
    labels = {r["policy"] for r in rows}
    assert len(labels) == 12  # six policies plus their AoI-aware variants


# ---------------------------------------------------------------------------
# bounds
# ---------------------------------------------------------------------------

def test_bounds_i2_lower_is_zero(tmp_path, capsys):
    code, out, _ = run_cli(
        capsys, "bounds", "--instance", "i2", "--out-dir", str(tmp_path),
        "--horizons", "100,1000,10000",
    )
    assert code == 0
    assert "t0 = " in out
    with open(tmp_path / "bounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert rows[0].keys() == {"kind", "T", "value", "t0", "tb", "beta", "alpha", "M"}
    lower = [float(r["value"]) for r in rows if r["kind"] == "lower"]
    assert lower == [0.0, 0.0, 0.0]
    for kind in ("upper_cucb", "upper_cts"):
        values = [float(r["value"]) for r in rows if r["kind"] == kind]
        assert len(values) == 3
        assert values == sorted(values)


def test_bounds_i1_small_horizon_value(tmp_path, capsys):
    code, _, _ = run_cli(
        capsys, "bounds", "--instance", "i1", "--out-dir", str(tmp_path),
        "--horizons", "100", "--kinds", "upper_cucb",
    )
    assert code == 0
    with open(tmp_path / "bounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert float(rows[0]["value"]) == pytest.approx((1 / 0.2 - 1 / 0.6) * 100)
    assert rows[0]["t0"] == "152792"


def test_bounds_i1_lower_requires_divergence(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "bounds", "--instance", "i1", "--out-dir", str(tmp_path),
        "--horizons", "100",
    )
    assert code == 2
    assert "strictly competitive arm(s): 3" in err  # 1-based on the CLI surface


def test_bounds_i1_with_divergence(tmp_path, capsys):
    code, _, _ = run_cli(
        capsys, "bounds", "--instance", "i1", "--out-dir", str(tmp_path),
        "--horizons", "1000000", "--divergence", "3=0.05",
    )
    assert code == 0
    with open(tmp_path / "bounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    lower = [float(r["value"]) for r in rows if r["kind"] == "lower"]
    assert lower[0] == pytest.approx(18.4, abs=0.005)


def test_bounds_rejects_bad_divergence_syntax(tmp_path, capsys):
    code, _, err = run_cli(
        capsys, "bounds", "--instance", "i1", "--out-dir", str(tmp_path),
        "--divergence", "three=0.05",
    )
    assert code == 2
    assert "ARM=VALUE" in err


def test_bounds_infeasible_threshold_marker(tmp_path, capsys):
    code, _, _ = run_cli(
        capsys, "bounds", "--instance", "i2", "--out-dir", str(tmp_path),
        "--horizons", "100", "--search-cap", "100", "--kinds", "upper_cucb,upper_cts",
    )
    assert code == 0
    with open(tmp_path / "bounds.csv") as fh:
        rows = list(csv.DictReader(fh))
    assert all(r["t0"] == "infeasible" for r in rows)
    assert all(r["tb"] == "infeasible" for r in rows)
