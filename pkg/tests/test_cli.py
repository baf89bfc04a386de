import json
import subprocess
import sys

import numpy as np
import pytest

from autoqec.cli import main
from autoqec.lindblad import baseline_three_qubit


def run_cli(args):
    return main(list(args))


def read_csv(path):
    return np.genfromtxt(path, delimiter=",", names=True)


class TestSimulate:
    def test_zero_feedback_matches_three_flip_oracle(self, tmp_path):
        out = tmp_path / "run.csv"
        code = run_cli([
            "simulate", "--omega", "0", "--gamma", "0.1", "--tmax", "10",
            "--samples", "40", "--out", str(out),
        ])
        assert code == 0
        data = read_csv(out)
        assert np.max(np.abs(data["fidelity"] - baseline_three_qubit(0.1, data["t"]))) < 1e-6
        meta = json.loads(out.with_suffix(".json").read_text())
        assert meta["status"] == "ok"
        assert meta["config"]["gamma_flip"] == 0.1

    def test_error_free_codeword_stays_put(self, tmp_path):
        out = tmp_path / "run.csv"
        code = run_cli([
            "simulate", "--omega", "90", "--gamma", "0", "--tmax", "0.1",
            "--samples", "10", "--out", str(out),
        ])
        assert code == 0
        data = read_csv(out)
        assert np.max(np.abs(data["fidelity"] - 1.0)) < 1e-8

    def test_zero_horizon_single_row(self, tmp_path):
        out = tmp_path / "run.csv"
        code = run_cli(["simulate", "--omega", "0", "--tmax", "0", "--out", str(out)])
        assert code == 0
        data = read_csv(out)
        assert data["t"].shape == ()
        assert float(data["fidelity"]) == pytest.approx(1.0, abs=1e-12)

    def test_determinism_byte_identical(self, tmp_path):
        args = ["simulate", "--omega", "30", "--tmax", "0.5", "--samples", "20"]
        out1, out2 = tmp_path / "a.csv", tmp_path / "b.csv"
        assert run_cli(args + ["--out", str(out1)]) == 0
        assert run_cli(args + ["--out", str(out2)]) == 0
        assert out1.read_bytes() == out2.read_bytes()

    def test_header_format(self, tmp_path):
        out = tmp_path / "run.csv"
        run_cli(["simulate", "--omega", "0", "--tmax", "1", "--samples", "5",
                 "--out", str(out)])
        first = out.read_text().splitlines()[0]
        assert first == "t,fidelity,trace_error,min_eig"

    def test_missing_out_is_config_error(self):
        assert run_cli(["simulate", "--omega", "0"]) == 2

    def test_omega_list_rejected(self, tmp_path):
        code = run_cli(["simulate", "--omega", "0,30", "--out", str(tmp_path / "x.csv")])
        assert code == 2

    def test_config_file_with_flag_override(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"omega": [0.0], "t_max": 1.0, "n_samples": 5,
                                   "gamma_flip": 0.3}))
        out = tmp_path / "run.csv"
        code = run_cli(["simulate", "--config", str(cfg), "--gamma", "0.1",
                        "--out", str(out)])
        assert code == 0
        meta = json.loads(out.with_suffix(".json").read_text())
        assert meta["config"]["gamma_flip"] == 0.1  # flag wins

    def test_unknown_config_key(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"omega": [0.0], "bogus": 1}))
        assert run_cli(["simulate", "--config", str(cfg),
                        "--out", str(tmp_path / "x.csv")]) == 2

    def test_integration_failure_exit_code(self, tmp_path):
        # fixed-step method with a grossly unstable step trips the guard
        out = tmp_path / "run.csv"
        code = run_cli([
            "simulate", "--omega", "210", "--method", "fixed", "--dt", "0.1",
            "--tmax", "1", "--out", str(out),
        ])
        assert code == 3
        meta = json.loads(out.with_suffix(".json").read_text())
        assert meta["status"] == "failed"

    def test_basis_initial_state(self, tmp_path):
        out = tmp_path / "run.csv"
        code = run_cli(["simulate", "--omega", "0", "--gamma", "0.1", "--tmax", "2",
                        "--samples", "10", "--initial", "ghg", "--out", str(out)])
        assert code == 0
        data = read_csv(out)
        # basis states have nonvanishing triple-flip overlap handled by
        # the general closed form
        from autoqec.network import register_basis_state

        expected = baseline_three_qubit(0.1, data["t"], psi0=register_basis_state("ghg"))
        assert np.max(np.abs(data["fidelity"] - expected)) < 1e-6


class TestSweep:
    def test_four_points_with_manifest(self, tmp_path):
        outdir = tmp_path / "sweep"
        code = run_cli([
            "sweep", "--omega", "0,1,2,3", "--gamma", "0.1", "--tmax", "0.5",
            "--samples", "10", "--workers", "2", "--out", str(outdir),
        ])
        assert code == 0
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert [p["omega"] for p in manifest["points"]] == [0.0, 1.0, 2.0, 3.0]
        assert all(p["status"] == "ok" for p in manifest["points"])
        for p in manifest["points"]:
            data = read_csv(outdir / p["csv"])
            assert len(data["t"]) == 11
            assert p["alpha"] == pytest.approx(p["omega"] / 8)

    def test_duplicates_deduplicated_with_warning(self, tmp_path, capsys):
        outdir = tmp_path / "sweep"
        code = run_cli([
            "sweep", "--omega", "0,0,1", "--tmax", "0.2", "--samples", "4",
            "--workers", "1", "--out", str(outdir),
        ])
        assert code == 0
        captured = capsys.readouterr()
        assert "duplicate omega" in captured.err
        manifest = json.loads((outdir / "manifest.json").read_text())
        assert [p["omega"] for p in manifest["points"]] == [0.0, 1.0]

    def test_empty_list_is_config_error(self, tmp_path):
        assert run_cli(["sweep", "--omega", "", "--out", str(tmp_path / "s")]) == 2

    def test_failed_point_marked_without_aborting_siblings(self, tmp_path):
        outdir = tmp_path / "sweep"
        code = run_cli([
            "sweep", "--omega", "0,210", "--method", "fixed", "--dt", "0.05",
            "--tmax", "0.5", "--samples", "5", "--workers", "1", "--out", str(outdir),
        ])
        assert code == 3
        manifest = json.loads((outdir / "manifest.json").read_text())
        status = {p["omega"]: p["status"] for p in manifest["points"]}
        assert status[0.0] == "ok"
        assert status[210.0] == "failed"


class TestStarkTableCommand:
    def test_prints_eight_rows(self, capsys):
        assert run_cli(["stark-table", "--omega", "2"]) == 0
        lines = [l for l in capsys.readouterr().out.splitlines() if "|" in l and "SS" not in l]
        assert len(lines) == 8
        assert any("-4" in l for l in lines)  # -2 omega with omega=2


class TestVerifyCommand:
    def test_fresh_build_passes(self, capsys):
        assert run_cli(["verify"]) == 0
        out = capsys.readouterr().out
        assert "checks passed" in out
        assert "FAIL" not in out

    def test_corruption_hook_trips_unitarity(self):
        from autoqec.verify import run_checks

        results = {r.name: r for r in run_checks(corrupt="relay-s-sign")}
        assert not results["catalog-unitarity"].passed


class TestEntryPoint:
    def test_module_invocation(self, tmp_path):
        out = tmp_path / "run.csv"
        proc = subprocess.run(
            [sys.executable, "-m", "autoqec.cli", "simulate", "--omega", "0",
             "--tmax", "0", "--out", str(out)],
            capture_output=True, text=True,
        )
        assert proc.returncode == 0
        assert out.exists()

    def test_unknown_flag_exits_two(self):
        proc = subprocess.run(
            [sys.executable, "-m", "autoqec.cli", "simulate", "--bogus"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
