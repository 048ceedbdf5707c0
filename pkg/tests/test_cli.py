import json

import numpy as np
import pytest

from weyl_lab.cli import main

INTERVAL_CFG = {
    "schema_version": 1,
    "symbol": {"kind": "power", "d": 1, "s": 1.0},
    "domain": {"shape": "box", "lo": [0.0], "hi": [1.0]},
    "grid": {"n": 256, "pad": 0.5},
    "solver": {"count": 5, "tol": 1e-8},
    "analysis": {"lambda_grid": {"rule": "auto", "points": 32}},
    "seed": 0,
}


def write_cfg(tmp_path, cfg, name="config.json"):
    path = tmp_path / name
    path.write_text(json.dumps(cfg))
    return str(path)


def run(*args):
    return main([str(a) for a in args])


class TestSpectrumCommand:
    def test_interval_run(self, tmp_path):
        cfg = write_cfg(tmp_path, INTERVAL_CFG)
        out = tmp_path / "out"
        assert run("spectrum", "--config", cfg, "--out", out) == 0
        rows = (out / "spectrum.csv").read_text().splitlines()
        assert rows[0] == "k,lambda,residual,trusted"
        first = rows[1].split(",")
        assert first[0] == "1"
        assert float(first[1]) == pytest.approx(np.pi**2, rel=0.02)
        meta = json.loads((out / "spectrum.json").read_text())
        assert meta["status"] == "ok"
        assert meta["sigma"] == pytest.approx(-1.0)
        assert (out / "staircase.svg").exists()

    def test_byte_identical_rerun(self, tmp_path):
        cfg = write_cfg(tmp_path, INTERVAL_CFG)
        out1, out2 = tmp_path / "a", tmp_path / "b"
        assert run("spectrum", "--config", cfg, "--out", out1) == 0
        assert run("spectrum", "--config", cfg, "--out", out2) == 0
        assert (out1 / "spectrum.csv").read_bytes() == (out2 / "spectrum.csv").read_bytes()
        assert (out1 / "spectrum.json").read_bytes() == (out2 / "spectrum.json").read_bytes()
        assert (out1 / "staircase.svg").read_bytes() == (out2 / "staircase.svg").read_bytes()

    def test_rejects_bad_resolution(self, tmp_path, capsys):
        cfg = dict(INTERVAL_CFG, grid={"n": 300, "pad": 0.5})
        path = write_cfg(tmp_path, cfg)
        out = tmp_path / "out"
        assert run("spectrum", "--config", path, "--out", out) == 2
        assert "power of two" in capsys.readouterr().err
        assert not out.exists() or not any(out.iterdir())

    def test_rejects_dimension_mismatch(self, tmp_path):
        cfg = dict(INTERVAL_CFG, symbol={"kind": "power", "d": 2, "s": 1.0})
        assert run("spectrum", "--config", write_cfg(tmp_path, cfg),
                   "--out", tmp_path / "out") == 2

    def test_rejects_user_symbol(self, tmp_path):
        cfg = dict(INTERVAL_CFG, symbol={"kind": "user", "d": 1, "alpha": 2.0})
        assert run("spectrum", "--config", write_cfg(tmp_path, cfg),
                   "--out", tmp_path / "out") == 2

    def test_missing_config(self, tmp_path):
        assert run("spectrum", "--config", tmp_path / "nope.json",
                   "--out", tmp_path / "out") == 2

    def test_solver_failure_exit_code(self, tmp_path):
        cfg = dict(INTERVAL_CFG, solver={"count": 3, "tol": 1e-30})
        out = tmp_path / "out"
        assert run("spectrum", "--config", write_cfg(tmp_path, cfg), "--out", out) == 3
        meta = json.loads((out / "spectrum.json").read_text())
        assert meta["status"] == "failed"
        assert (out / "spectrum.csv").exists()  # partial results

    def test_seed_override(self, tmp_path):
        cfg = write_cfg(tmp_path, INTERVAL_CFG)
        out = tmp_path / "out"
        assert run("spectrum", "--config", cfg, "--out", out, "--seed", 42) == 0
        meta = json.loads((out / "spectrum.json").read_text())
        assert meta["seed"] == 42


class TestVerifyCommand:
    def test_oracle_mode_passes(self, tmp_path):
        cfg = dict(INTERVAL_CFG,
                   solver={"count": 260, "tol": 1e-8},
                   analysis={"lambda_grid": {"rule": "log", "min": (30 * np.pi) ** 2,
                                             "max": (200 * np.pi) ** 2, "points": 100}})
        out = tmp_path / "out"
        assert run("verify", "--config", write_cfg(tmp_path, cfg), "--out", out,
                   "--oracle", "dirichlet-interval") == 0
        bounds = json.loads((out / "bounds.json").read_text())
        assert bounds["passed"] == {"berezin": True, "liyau": True, "duality": True}
        assert bounds["slack"] == 0.0
        fit = json.loads((out / "weyl_fit.json").read_text())
        assert abs(fit["slope"] - 0.5) <= 0.005
        assert abs(fit["ratio_at_max"] - 1.0) <= 0.01
        assert (out / "berezin.svg").exists() and (out / "weyl_ratio.svg").exists()

    def test_computed_interval_passes(self, tmp_path):
        cfg = dict(INTERVAL_CFG, solver={"count": 30, "tol": 1e-8},
                   analysis={"lambda_grid": {"rule": "auto", "points": 40}})
        out = tmp_path / "out"
        assert run("verify", "--config", write_cfg(tmp_path, cfg), "--out", out) == 0
        bounds = json.loads((out / "bounds.json").read_text())
        assert all(bounds["passed"].values())
        assert bounds["slack"] == 0.02

    def test_short_spectrum_distinct_failure(self, tmp_path, capsys):
        out = tmp_path / "out"
        code = run("verify", "--config", write_cfg(tmp_path, INTERVAL_CFG),
                   "--out", out, "--oracle", "dirichlet-interval")
        assert code == 4
        assert "fit unavailable" in capsys.readouterr().err
        assert (out / "bounds.json").exists()

    def test_verify_from_saved_csv(self, tmp_path):
        cfg_path = write_cfg(tmp_path, dict(INTERVAL_CFG, solver={"count": 30, "tol": 1e-8}))
        run_dir = tmp_path / "runout"
        assert run("spectrum", "--config", cfg_path, "--out", run_dir) == 0
        cfg2 = dict(INTERVAL_CFG, solver={"count": 30, "tol": 1e-8},
                    spectrum_csv=str(run_dir / "spectrum.csv"),
                    analysis={"lambda_grid": {"rule": "auto", "points": 40}})
        out = tmp_path / "verifyout"
        assert run("verify", "--config", write_cfg(tmp_path, cfg2, "v.json"),
                   "--out", out) == 0

    def test_oracle_requires_interval(self, tmp_path):
        cfg = dict(INTERVAL_CFG,
                   symbol={"kind": "directional", "d": 2, "s": 0.5},
                   domain={"shape": "box", "lo": [0.0, 0.0], "hi": [1.0, 1.0]})
        assert run("verify", "--config", write_cfg(tmp_path, cfg),
                   "--out", tmp_path / "out", "--oracle", "dirichlet-interval") == 2


class TestSymbolAuditCommand:
    def test_directional_audit(self, tmp_path):
        cfg = {"schema_version": 1, "symbol": {"kind": "directional", "d": 2, "s": 0.5},
               "seed": 0}
        out = tmp_path / "out"
        assert run("symbol-audit", "--config", write_cfg(tmp_path, cfg), "--out", out) == 0
        report = json.loads((out / "certificates.json").read_text())
        assert report["passed"] is True
        assert report["assumption_two"]["N"] == 1
        assert report["assumption_two"]["C0"] <= 2.0
        assert report["phase_volume_check"]["passed"] is True
        assert report["phase_volume_check"]["closed_form"] == pytest.approx(2.0)

    def test_quadratic_audit_constants(self, tmp_path):
        cfg = {"schema_version": 1, "symbol": {"kind": "power", "d": 2, "s": 1.0}}
        out = tmp_path / "out"
        assert run("symbol-audit", "--config", write_cfg(tmp_path, cfg), "--out", out) == 0
        report = json.loads((out / "certificates.json").read_text())
        assert report["assumption_two"]["N"] == 2
        assert report["assumption_one"]["worst_case"] == 0.0

    def test_mixed_audit(self, tmp_path):
        cfg = {"schema_version": 1,
               "symbol": {"kind": "mixed", "d": 1, "alpha": 3.0, "beta": 1.0, "sign": "-"}}
        out = tmp_path / "out"
        assert run("symbol-audit", "--config", write_cfg(tmp_path, cfg), "--out", out) == 0
        report = json.loads((out / "certificates.json").read_text())
        assert report["assumption_one"]["passed"] is True
