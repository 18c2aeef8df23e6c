"""The config-driven runner: exit codes, artifacts, round-trips, presets."""

import json
from pathlib import Path

import pytest

from perfpred.cli import EXIT_ERROR, EXIT_NOT_CONVERGED, EXIT_OK, main

COIN_TOML = """
seed = 0

[map]
name = "biased_coin"
mu = 0.3
eps = 0.1

[loss]
name = "squared_affine"

[dynamic]
kind = "rrm"
theta0 = [0.0]
"""

OSCILLATING_TOML = """
seed = 0

[map]
name = "point_mass_linear"
eps = 0.5

[loss]
name = "linear"
beta = 1.0

[dynamic]
kind = "rrm"
theta0 = [0.5]
"""


def _write(tmp_path, text, name="cfg.toml"):
    path = tmp_path / name
    path.write_text(text)
    return path


def test_run_coin_produces_artifacts(tmp_path, capsys):
    cfg = _write(tmp_path, COIN_TOML)
    out = tmp_path / "out"
    code = main(["run", "--config", str(cfg), "--out", str(out)])
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["verdict"] == "converged"
    assert report["final_theta"][0] == pytest.approx(1.0 / 3.0, abs=1e-6)
    assert (out / "trajectory.csv").exists()
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["map"]["name"] == "biased_coin"
    assert manifest["seed"] == 0
    assert "version" in manifest


def test_oscillation_exit_code(tmp_path):
    cfg = _write(tmp_path, OSCILLATING_TOML)
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "o"), "--quiet"])
    assert code == EXIT_NOT_CONVERGED
    report = json.loads((tmp_path / "o" / "report.json").read_text())
    assert report["verdict"] == "oscillating"


def test_unknown_map_name_is_config_error(tmp_path, capsys):
    bad = COIN_TOML.replace("biased_coin", "mystery_map")
    code = main(["run", "--config", str(_write(tmp_path, bad)), "--out", str(tmp_path / "x")])
    assert code == EXIT_ERROR
    err = capsys.readouterr().err
    assert "map.name" in err and "mystery_map" in err


def test_missing_config_file(tmp_path, capsys):
    code = main(["run", "--config", str(tmp_path / "nope.toml"), "--quiet"])
    assert code == EXIT_ERROR
    assert "not found" in capsys.readouterr().err


def test_malformed_toml(tmp_path, capsys):
    code = main(["run", "--config", str(_write(tmp_path, "[map\nname=")), "--quiet"])
    assert code == EXIT_ERROR
    assert "invalid TOML" in capsys.readouterr().err


def test_loss_parameter_validation(tmp_path, capsys):
    bad = COIN_TOML.replace('name = "squared_affine"', 'name = "hinge_reg"')
    code = main(["run", "--config", str(_write(tmp_path, bad)), "--quiet"])
    assert code == EXIT_ERROR
    assert "loss" in capsys.readouterr().err


def test_manifest_round_trip_bit_identical(tmp_path):
    cfg = _write(tmp_path, COIN_TOML)
    out1 = tmp_path / "first"
    assert main(["run", "--config", str(cfg), "--out", str(out1), "--quiet"]) == EXIT_OK
    manifest = json.loads((out1 / "manifest.json").read_text())
    replay = tmp_path / "replay.json"
    replay.write_text(json.dumps(manifest["config"]))
    out2 = tmp_path / "second"
    assert main(["run", "--config", str(replay), "--out", str(out2), "--quiet"]) == EXIT_OK
    assert (out1 / "trajectory.csv").read_bytes() == (out2 / "trajectory.csv").read_bytes()


def test_seed_override_recorded(tmp_path):
    cfg = _write(tmp_path, COIN_TOML)
    out = tmp_path / "s"
    main(["run", "--config", str(cfg), "--out", str(out), "--seed", "99", "--quiet"])
    assert json.loads((out / "manifest.json").read_text())["seed"] == 99


def test_force_monte_carlo_runs_on_sampled_objective(tmp_path):
    cfg = _write(tmp_path, COIN_TOML)
    out = tmp_path / "mc"
    code = main(["run", "--config", str(cfg), "--out", str(out), "--force-monte-carlo", "--quiet"])
    report = json.loads((out / "report.json").read_text())
    # the sampled retraining map still contracts to a nearby fixed point
    assert code == EXIT_OK and report["verdict"] == "converged"
    assert abs(report["final_theta"][0] - 1.0 / 3.0) <= 0.05


def test_subcommand_forces_dynamic_kind(tmp_path):
    body = COIN_TOML + "\neta = 0.5\n"
    cfg = _write(tmp_path, body.replace('kind = "rrm"', 'kind = "rgd"'))
    out = tmp_path / "g"
    code = main(["run-rgd", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    assert json.loads((out / "report.json").read_text())["verdict"] == "converged"


def test_diagnostics_only_run_exits_zero(tmp_path):
    cfg = _write(
        tmp_path,
        """
seed = 0
[map]
name = "step_half"
[loss]
name = "squared_location"
[diagnostics]
brute_force = true
grid = 1001
""",
    )
    out = tmp_path / "d"
    code = main(["brute-force-pr", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["brute_force"]["theta_po"][0] == pytest.approx(0.5, abs=1e-3)
    assert report["brute_force"]["pr"] == pytest.approx(0.25, abs=1e-3)


def test_diagnose_sensitivity_subcommand(tmp_path):
    cfg = _write(
        tmp_path,
        """
seed = 0
[map]
name = "point_mass_linear"
eps = 0.5
[loss]
name = "linear"
beta = 1.0
""",
    )
    out = tmp_path / "sens"
    code = main(["diagnose-sensitivity", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    report = json.loads((out / "report.json").read_text())
    assert report["sensitivity"]["sup_ratio"] == pytest.approx(0.5, abs=1e-12)


def test_no_guarantee_warning_emitted(tmp_path, capsys):
    cfg = _write(
        tmp_path,
        """
seed = 0
[map]
name = "point_mass_affine"
eps = 1.5
[loss]
name = "squared_location"
[dynamic]
kind = "rrm"
theta0 = [0.0]
max_iters = 50
""",
    )
    code = main(["run", "--config", str(cfg), "--out", str(tmp_path / "w")])
    assert code == EXIT_NOT_CONVERGED
    assert "no RRM guarantee" in capsys.readouterr().err


def test_finite_sample_run_records_schedule(tmp_path):
    cfg = _write(
        tmp_path,
        """
seed = 3
[map]
name = "biased_coin"
mu = 0.3
eps = 0.1
[loss]
name = "squared_affine"
[dynamic]
kind = "rerm"
theta0 = [0.0]
max_iters = 10
outer_tol = 1e-15
[schedule]
kind = "constant"
n = 2000
""",
    )
    out = tmp_path / "rerm"
    code = main(["run-rerm", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == EXIT_NOT_CONVERGED  # Monte Carlo steps never reach 1e-15
    rows = (out / "trajectory.csv").read_text().splitlines()
    assert rows[1].endswith(",2000")


def test_guarantee_schedule_from_config(tmp_path):
    cfg = _write(
        tmp_path,
        """
seed = 1
[map]
name = "biased_coin"
mu = 0.3
eps = 0.1
[loss]
name = "squared_affine"
[dynamic]
kind = "regd"
eta = 0.25
theta0 = [0.0]
max_iters = 3
outer_tol = 1e-15
[schedule]
kind = "guarantee"
delta = 0.2
p = 0.1
K = 0.001
""",
    )
    out = tmp_path / "regd"
    code = main(["run-regd", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == EXIT_NOT_CONVERGED
    report = json.loads((out / "report.json").read_text())
    assert report["n_steps"] == 3


def test_strategic_sim_artifacts(tmp_path):
    cfg = _write(
        tmp_path,
        """
seed = 0
[map]
name = "strategic"
eps = 0.01
[strategic]
n = 400
m = 5
strategic_count = 2
data_seed = 7
""",
    )
    out = tmp_path / "sim"
    code = main(["strategic-sim", "--config", str(cfg), "--out", str(out), "--quiet"])
    assert code == EXIT_OK
    payload = json.loads((out / "experiment.json").read_text())
    assert payload["verdict"] == "converged"
    assert len(payload["pr_post_shift"]) == len(payload["pr_post_train"]) + 1
    assert (out / "trajectory.csv").exists()


def test_outputs_confined_to_out_dir(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    cfg = _write(tmp_path, COIN_TOML)
    out = tmp_path / "only-here"
    main(["run", "--config", str(cfg), "--out", str(out), "--quiet"])
    produced = {p.name for p in tmp_path.iterdir()}
    assert produced == {"cfg.toml", "only-here"}


@pytest.mark.parametrize(
    "preset",
    ["coin", "counterexample-a", "counterexample-b", "counterexample-c",
     "no-stable-point", "concave-pr", "regularized-linear"],
)
def test_fast_presets_pass(tmp_path, capsys, preset):
    code = main(["reproduce", preset, "--out", str(tmp_path / preset)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith(f"PASS {preset}")


@pytest.mark.parametrize("preset", ["credit-small-eps", "credit-large-eps"])
def test_credit_presets_pass(tmp_path, capsys, preset):
    code = main(["reproduce", preset, "--out", str(tmp_path / preset)])
    assert code == EXIT_OK
    assert capsys.readouterr().out.startswith(f"PASS {preset}")


def test_unknown_preset(capsys):
    assert main(["reproduce", "not-a-preset"]) == EXIT_ERROR
    assert "unknown preset" in capsys.readouterr().err
