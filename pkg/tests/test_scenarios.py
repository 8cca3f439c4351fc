"""End-to-end tests for scenario runners, manifests, and the CLI."""

import json

import numpy as np
import pytest

import cavshape
from cavshape import AliasingError, build_config, make_constant, run_scenario
from cavshape.cli import main
from cavshape.scenarios import stable_dt


def lossless_eigens_config(steps=41):
    return build_config(
        {
            "scenario": "eigens",
            "system": {"kappa_t": 0.0, "kappa_l": 0.0, "kappa_r": 0.0},
            "sweep": {"lo": -4.0, "hi": 4.0, "steps": steps},
        }
    )


def small_dynamics_config(**integration):
    integ = {"t_final": 30.0, "dt": 0.01, "snapshot_stride": 10}
    integ.update(integration)
    return build_config(
        {
            "scenario": "dynamics",
            "continuum": {"n_modes": 301, "bandwidth": 40.0},
            "integration": integ,
            "schedule": {"kind": "constant", "value": 10.0},
        }
    )


def test_stable_dt_tracks_fastest_scale():
    cfg = small_dynamics_config()
    # band edge 20 dominates at delta = eta
    assert stable_dt(cfg, make_constant(10.0)) == pytest.approx(1.0 / 20.0)
    # a huge detuning dominates instead
    d = 500.0
    expect = 1.0 / np.sqrt(d**2 + 200.0)
    assert stable_dt(cfg, make_constant(d)) == pytest.approx(expect, rel=1e-12)


def test_eigens_lossless_matches_analytic(tmp_path):
    manifest = run_scenario(lossless_eigens_config(), tmp_path)
    assert manifest["metrics"]["max_analytic_mismatch"] < 1e-9
    assert manifest["metrics"]["max_abs_dark_re"] < 1e-9
    assert manifest["metrics"]["frac_dark_min"] == pytest.approx(0.0, abs=1e-12)
    assert manifest["metrics"]["frac_dark_max"] == pytest.approx(8.0 / 9.0, rel=1e-9)
    assert (tmp_path / "eigens.csv").exists()
    header = (tmp_path / "eigens.csv").read_bytes().split(b"\r\n")[0]
    assert header.split(b",")[0] == b"delta_over_eta"


def test_eigens_lossy_has_no_analytic_metric(tmp_path):
    cfg = build_config({"scenario": "eigens", "sweep": {"steps": 11}})
    manifest = run_scenario(cfg, tmp_path)
    assert "max_analytic_mismatch" not in manifest["metrics"]
    assert manifest["metrics"]["frac_dark_max"] > 0.5


def test_ldos_metrics(tmp_path):
    cfg = build_config({"scenario": "ldos", "sweep": {"steps": 21}})
    manifest = run_scenario(cfg, tmp_path)
    m = manifest["metrics"]
    assert m["ldos_at_zero"] == 0.0
    assert m["ldos_at_eta"] == pytest.approx(1.0 / 3.0, rel=1e-12)
    # equal losses make kappa_1 = kappa_t, so the rate ratio equals the weight
    assert m["se_ratio_at_eta"] == pytest.approx(1.0 / 3.0, rel=1e-12)
    assert (tmp_path / "ldos.csv").exists()


def test_dynamics_run_and_energy_bookkeeping(tmp_path):
    manifest = run_scenario(small_dynamics_config(), tmp_path)
    m = manifest["metrics"]
    # emitted radiation reconstructed from the final spectrum carries the
    # continuum population
    assert m["final_p_cont"] > 0.01
    assert m["pulse_energy"] == pytest.approx(m["final_p_cont"], rel=2e-2)
    assert m["max_step_norm"] <= 1.0 + 1e-9
    assert m["final_norm_sq"] < 1.0
    assert manifest["derived"]["delta_constant_over_eta"] == pytest.approx(1.0)
    for name in ("populations.csv", "pulse.csv", "manifest.json"):
        assert (tmp_path / name).exists()
    assert manifest["artifacts"] == sorted(manifest["artifacts"])
    assert manifest["version"] == cavshape.__version__
    assert manifest["backend"] in ("compiled", "python")


def test_dynamics_deterministic_output(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    m1 = run_scenario(small_dynamics_config(), a)
    m2 = run_scenario(small_dynamics_config(), b)
    for name in ("populations.csv", "pulse.csv"):
        assert (a / name).read_bytes() == (b / name).read_bytes()
    assert m1["metrics"] == m2["metrics"]


def test_manifest_config_reruns_identically(tmp_path):
    m1 = run_scenario(small_dynamics_config(), tmp_path / "first")
    echoed = json.loads((tmp_path / "first" / "manifest.json").read_text())["config"]
    cfg = build_config(echoed)
    m2 = run_scenario(cfg, tmp_path / "second")
    assert m1["metrics"] == m2["metrics"]
    assert m1["derived"] == m2["derived"]


def test_failure_removes_partial_outputs(tmp_path):
    # 101 modes over bandwidth 40 recur after 2 pi/0.4 = 15.7, shorter than
    # the 20-unit run: extraction must fail and the directory stay clean
    cfg = build_config(
        {
            "scenario": "dynamics",
            "continuum": {"n_modes": 101, "bandwidth": 40.0},
            "integration": {"t_final": 20.0, "dt": 0.01},
            "schedule": {"kind": "constant", "value": 10.0},
        }
    )
    out = tmp_path / "doomed"
    with pytest.raises(AliasingError):
        run_scenario(cfg, out)
    assert list(out.iterdir()) == []


def test_shape_scenario_small(tmp_path):
    cfg = build_config(
        {
            "scenario": "shape",
            "continuum": {"n_modes": 801, "bandwidth": 40.0},
            "pulse": {"n_points": 501},
        }
    )
    # the design warning is captured into the manifest, not re-emitted
    manifest = run_scenario(cfg, tmp_path)
    m = manifest["metrics"]
    assert m["fidelity"] >= 0.99
    assert m["fit_r_squared"] >= 0.99
    assert m["fit_center"] == pytest.approx(50.0, abs=1.0)
    assert m["phase_flatness"] < 0.1
    assert m["design_adapted"] is True
    assert 0.50 < m["achieved_p_tot"] < 0.60
    assert m["adiabatic_pass"] is True
    assert any("scaled collected total" in w for w in manifest["warnings"])
    for name in ("populations.csv", "schedule.csv", "pulse.csv", "phase.csv"):
        assert (tmp_path / name).exists()
    assert manifest["derived"]["design"]["adapted"] is True


def test_adiabaticity_scenario(tmp_path):
    cfg = build_config(
        {
            "scenario": "adiabaticity",
            "schedule": {"kind": "linear_ramp", "rate": 0.04},
            "integration": {"t_final": 100.0},
        }
    )
    manifest = run_scenario(cfg, tmp_path)
    m = manifest["metrics"]
    assert m["beta_max"] == pytest.approx(0.04)
    assert m["passed"] is True
    assert (tmp_path / "schedule.csv").exists()


def test_cli_success(tmp_path, capsys):
    out = tmp_path / "run"
    code = main(["ldos", "--out", str(out), "--set", "sweep.steps=11"])
    assert code == 0
    captured = capsys.readouterr()
    assert "ldos_at_eta" in captured.out
    assert "artifacts in" in captured.out
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["sweep"]["steps"] == 11


def test_cli_config_error(tmp_path, capsys):
    code = main(["ldos", "--out", str(tmp_path), "--set", "system.eta=-1"])
    assert code == 2
    assert "configuration error" in capsys.readouterr().err


def test_cli_runtime_error(tmp_path, capsys):
    code = main(
        [
            "shape",
            "--out",
            str(tmp_path / "x"),
            "--set",
            "design.auto_feasible=false",
            "--set",
            "continuum.n_modes=301",
        ]
    )
    assert code == 1
    assert "run failed" in capsys.readouterr().err


def test_cli_config_file(tmp_path, capsys):
    cfg_path = tmp_path / "cfg.json"
    cfg_path.write_text(json.dumps({"sweep": {"steps": 7}}))
    out = tmp_path / "out"
    code = main(["eigens", "--config", str(cfg_path), "--out", str(out)])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text())
    assert manifest["config"]["sweep"]["steps"] == 7
    assert manifest["config"]["scenario"] == "eigens"

    code = main(["eigens", "--config", str(tmp_path / "missing.json"), "--out", str(out)])
    assert code == 2
