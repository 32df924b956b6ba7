import json
import math

import numpy as np
import pytest

from abflow.cli import main


def run_cli(capsys, *argv):
    code = main(list(argv))
    captured = capsys.readouterr()
    return code, captured.out


def run_json(capsys, *argv):
    code, out = run_cli(capsys, *argv)
    assert code == 0, out
    return json.loads(out)


class TestEval:
    def test_current_at_point(self, capsys):
        doc = run_json(capsys, "eval", "--k", "1", "--delta", "0.5", "--at", "1,1")
        assert doc["current"] == [-0.75, -0.25]
        assert doc["units"]["hbar"] == 1.0

    def test_uniform_flow(self, capsys):
        doc = run_json(capsys, "eval", "--k", "1", "--delta", "0", "--at", "7,3")
        assert doc["current"] == [-1.0, 0.0]

    def test_singular_point_exit_code(self, capsys):
        code, _ = run_cli(capsys, "eval", "--at", "0,0", "--delta", "0.5")
        assert code == 3

    def test_missing_point_is_usage_error(self, capsys):
        code, _ = run_cli(capsys, "eval")
        assert code == 2

    def test_bad_flag_is_usage_error(self, capsys):
        assert main(["eval", "--at", "banana"]) == 2
        assert main(["nonsense"]) == 2

    def test_flux_sets_delta(self, capsys):
        doc = run_json(capsys, "eval", "--flux", str(math.pi), "--at", "1,1")
        assert doc["params"]["delta"] == pytest.approx(0.5, rel=1e-15)

    def test_relaxed_delta_flag(self, capsys):
        code, _ = run_cli(capsys, "eval", "--delta", "0.8", "--at", "1,1")
        assert code == 2
        doc = run_json(capsys, "eval", "--delta", "0.8", "--allow-any-delta",
                       "--at", "1,1")
        assert doc["params"]["delta"] == 0.8


class TestConfigPrecedence:
    def test_config_then_flag(self, capsys, tmp_path):
        cfg = tmp_path / "flow.cfg"
        cfg.write_text("delta = 0.25\nk = 2.0  # comment\n")
        doc = run_json(capsys, "eval", "--config", str(cfg), "--at", "1,1")
        assert doc["params"]["delta"] == 0.25
        assert doc["params"]["k"] == 2.0
        doc = run_json(capsys, "eval", "--config", str(cfg), "--delta", "0.1",
                       "--at", "1,1")
        assert doc["params"]["delta"] == 0.1  # flag wins
        assert doc["params"]["k"] == 2.0

    def test_missing_config_is_usage_error(self, capsys):
        code, _ = run_cli(capsys, "eval", "--config", "/nonexistent.cfg", "--at", "1,1")
        assert code == 2


class TestPortrait:
    def test_uniform_topology_and_files(self, capsys, tmp_path):
        out = tmp_path / "fig1"
        doc = run_json(
            capsys, "portrait", "--delta", "0", "--bbox", "-4,4,-3,3",
            "--grid", "200x150", "--out", str(out), "--format", "all",
        )
        assert doc["closed_polylines"] == 0
        for name in doc["files"]:
            assert (out / name).exists()
        csvs = [f for f in doc["files"] if f.endswith(".csv")]
        assert csvs
        rows = np.loadtxt(out / csvs[0], delimiter=",", skiprows=1)
        assert np.ptp(rows[:, 1]) <= 1e-9  # constant y

    def test_vortex_topology(self, capsys, tmp_path):
        out = tmp_path / "fig4"
        doc = run_json(
            capsys, "portrait", "--delta", "0.5", "--separatrix",
            "--grid", "200x150", "--out", str(out), "--format", "all",
        )
        assert doc["closed_polylines"] >= 1
        assert doc["separatrix_level"] == pytest.approx(0.5 * (math.log(0.5) - 1))
        assert doc["separatrix_level"] in doc["levels"]
        svg = (out / "portrait.svg").read_text()
        assert 'class="sep"' in svg  # dashed separatrix
        assert 'class="saddle"' in svg
        assert 'class="vortex"' in svg

    def test_explicit_levels(self, capsys):
        doc = run_json(capsys, "portrait", "--levels", "-0.8465735902799727",
                       "--no-separatrix", "--grid", "150x120")
        assert doc["levels"] == [-0.8465735902799727]


class TestSubcommands:
    def test_circulation(self, capsys):
        doc = run_json(capsys, "circulation", "--delta", "0.5", "--radius", "1",
                       "--samples", "512")
        assert doc["circulation"] == pytest.approx(-math.pi, rel=1e-12)

    def test_stagnation(self, capsys):
        doc = run_json(capsys, "stagnation")
        assert doc["stagnation_point"]["location"] == [0.0, 0.5]
        doc = run_json(capsys, "stagnation", "--delta", "0")
        assert doc["stagnation_point"] is None

    def test_separatrix(self, capsys, tmp_path):
        out = tmp_path / "sep"
        doc = run_json(capsys, "separatrix", "--out", str(out), "--format", "csv")
        assert doc["loop_max_radius"] == pytest.approx(0.5, abs=1e-3)
        assert doc["lower_axis_crossing"] == pytest.approx(-0.139232, abs=1e-4)
        assert (out / "separatrix_loop.csv").exists()

    def test_trajectory(self, capsys, tmp_path):
        out = tmp_path / "traj"
        doc = run_json(capsys, "trajectory", "--start", "0,0.25",
                       "--detect-closure", "--out", str(out))
        assert doc["status"] == "closed_orbit_detected"
        assert doc["period"] > 0
        assert doc["max_h_drift"] <= 1e-8
        rows = np.loadtxt(out / "trajectory.csv", delimiter=",", skiprows=1)
        assert rows.shape[1] == 4

    def test_trajectory_singular_start(self, capsys):
        code, _ = run_cli(capsys, "trajectory", "--start", "0,0")
        assert code == 3

    def test_verify_exit_codes(self, capsys, tmp_path):
        code, out = run_cli(capsys, "verify", "--k", "1", "--delta", "0.5",
                            "--seed", "42")
        assert code == 0
        assert "suite: PASS" in out

    def test_verify_writes_report(self, capsys, tmp_path):
        out = tmp_path / "rep"
        code, _ = run_cli(capsys, "verify", "--seed", "42", "--out", str(out),
                          "--format", "all")
        assert code == 0
        assert (out / "verify_report.txt").exists()
        json.loads((out / "verify_report.json").read_text())

    def test_sweep(self, capsys, tmp_path):
        out = tmp_path / "sweep"
        doc = run_json(capsys, "sweep", "--deltas", "0.5,0.4,0.3",
                       "--out", str(out))
        areas = [row["loop_area"] for row in doc["rows"]]
        assert areas == sorted(areas, reverse=True)
        assert doc["strictly_decreasing_area"] is True
        assert (out / "sweep.csv").exists()

    def test_sweep_requires_deltas(self, capsys):
        code, _ = run_cli(capsys, "sweep")
        assert code == 2


class TestWorkerDeterminism:
    def test_portrait_and_verify_identical_across_workers(
        self, capsys, tmp_path, monkeypatch
    ):
        outputs = {}
        files = {}
        for workers in ("1", "2", "8"):
            monkeypatch.setenv("ABFLOW_WORKERS", workers)
            out = tmp_path / f"w{workers}"
            code, text = run_cli(
                capsys, "portrait", "--grid", "150x120", "--separatrix",
                "--out", str(out), "--format", "all",
            )
            assert code == 0
            code2, vtext = run_cli(capsys, "verify", "--seed", "42")
            assert code2 == 0
            outputs[workers] = (text, vtext)
            files[workers] = {
                f.name: f.read_bytes() for f in sorted(out.iterdir())
            }
        assert outputs["1"] == outputs["2"] == outputs["8"]
        assert files["1"] == files["2"] == files["8"]
