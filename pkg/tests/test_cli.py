"""
Command-line interface tests
"""

import json
import re

import pandas as pd
import pytest

from main import EXIT_CONFIG, EXIT_NUMERICAL, EXIT_OK, EXIT_USAGE, main


def write_config(tmp_path, **overrides):
    data = {
        "name": "cli",
        "grid": {"n": 9},
        "time": {"dt": 0.1, "t_end": 1.0},
        "params": {"mu": 0.0009, "nu": 0.0025},
        "coefficients": {"K": "2.1+cos(pi*x)*cos(pi*y)", "r": "1.2", "u0": "1.8", "v0": "1.8"},
        "output": {"dir": str(tmp_path / "out")},
    }
    for section, values in overrides.items():
        data[section].update(values)
    path = tmp_path / "run.json"
    path.write_text(json.dumps(data), encoding="utf-8")
    return path


class TestUsage:

    def test_no_command(self, capsys):
        assert main([]) == EXIT_USAGE

    def test_bad_number(self, capsys):
        assert main(["regime", "--mu", "abc", "--nu", "1"]) == EXIT_USAGE
        assert "invalid float value" in capsys.readouterr().err

    def test_missing_required_option(self):
        assert main(["eig"]) == EXIT_USAGE

    def test_bad_sweep_list(self, tmp_path):
        assert main(["sweep", "--config", str(write_config(tmp_path)), "--mu", ",", "--nu", "1"]) == EXIT_USAGE

    def test_help(self):
        assert main(["--help"]) == EXIT_OK


class TestRegime:

    def test_both_over_harvested(self, capsys):
        assert main(["regime", "--mu", "1.5", "--nu", "1.5"]) == EXIT_OK
        assert "predicted: BothExtinct" in capsys.readouterr().out.splitlines()

    def test_one_sided(self, capsys):
        assert main(["regime", "--mu", "1.5", "--nu", "0.08"]) == EXIT_OK
        assert "predicted: UExtinct_VSurvives" in capsys.readouterr().out

    def test_negative_harvesting(self, capsys):
        assert main(["regime", "--mu", "-1", "--nu", "0.5"]) == EXIT_USAGE

    def test_thresholds_from_config(self, tmp_path, capsys):
        path = write_config(
            tmp_path, coefficients={"K": "2", "r": "1"}
        )
        assert main(["regime", "--mu", "0.3", "--nu", "0.5", "--config", str(path)]) == EXIT_OK
        out = capsys.readouterr().out
        assert "predicted: CoexistConditional" in out
        nu1 = float(re.search(r"nu1: (\S+)", out).group(1))
        assert nu1 == pytest.approx(0.3, abs=1e-8)


class TestRun:

    def test_writes_outputs(self, tmp_path, capsys):
        assert main(["run", "--config", str(write_config(tmp_path))]) == EXIT_OK
        assert (tmp_path / "out" / "energy.csv").exists()
        assert (tmp_path / "out" / "config.json").exists()
        assert capsys.readouterr().out.startswith("t=1 ")

    def test_missing_config(self, tmp_path):
        assert main(["run", "--config", str(tmp_path / "missing.json")]) == EXIT_CONFIG

    def test_invalid_expression(self, tmp_path):
        path = write_config(tmp_path, coefficients={"K": "2*tan(x)"})
        assert main(["run", "--config", str(path)]) == EXIT_CONFIG

    def test_non_finite_horizon(self, tmp_path):
        path = write_config(tmp_path, time={"t_end": float("inf")})
        assert main(["run", "--config", str(path)]) == EXIT_CONFIG

    def test_negative_capacity(self, tmp_path):
        path = write_config(tmp_path, coefficients={"K": "x-0.5"})
        assert main(["run", "--config", str(path)]) == EXIT_CONFIG

    def test_dt_guard_failure(self, tmp_path, capsys):
        path = write_config(
            tmp_path,
            time={"dt": 1.0, "t_end": 2.0},
            params={"mu": 0.0, "nu": 0.0},
            coefficients={"u0": "0", "v0": "0"},
        )
        assert main(["run", "--config", str(path)]) == EXIT_NUMERICAL
        assert "maximal admissible dt" in capsys.readouterr().err


class TestEig:

    def test_trivial_state(self, tmp_path, capsys):
        assert main(["eig", "--config", str(write_config(tmp_path))]) == EXIT_OK
        out = capsys.readouterr().out
        gamma1 = float(re.search(r"u@trivial lambda=(\S+)", out).group(1))
        assert gamma1 == pytest.approx(1.19892, abs=1e-8)
        assert "v@trivial" in out

    def test_time_dependent_coefficients(self, tmp_path):
        path = write_config(tmp_path, coefficients={"K": "2+cos(t)"})
        assert main(["eig", "--config", str(path)]) == EXIT_NUMERICAL


class TestPreset:

    def test_list(self, capsys):
        assert main(["preset", "--list"]) == EXIT_OK
        out = capsys.readouterr().out
        assert all(f"exp{k}" in out for k in range(1, 6))

    def test_emit(self, tmp_path):
        target = tmp_path / "exp1.json"
        assert main(["preset", "--name", "exp1", "--variant", "1.5,1.5", "--emit", str(target)]) == EXIT_OK
        data = json.loads(target.read_text())
        assert data["params"]["mu"] == 1.5 and data["params"]["nu"] == 1.5
        assert data["coefficients"]["K"] == "2.1+cos(pi*x)*cos(pi*y)"

    def test_unknown_preset(self):
        assert main(["preset", "--name", "exp9"]) == EXIT_CONFIG

    def test_unknown_variant(self):
        assert main(["preset", "--name", "exp2", "--variant", "0.5,0.5"]) == EXIT_CONFIG

    def test_name_required(self):
        assert main(["preset"]) == EXIT_USAGE


def test_sweep(tmp_path, capsys):
    path = write_config(tmp_path)
    code = main(["sweep", "--config", str(path), "--mu", "1.5", "--nu", "1.5,0.08", "--no-thresholds"])
    assert code == EXIT_OK
    summary = pd.read_csv(tmp_path / "out" / "sweep_summary.csv")
    assert summary["predicted"].tolist() == ["BothExtinct", "UExtinct_VSurvives"]
    assert (tmp_path / "out" / "mu1.5_nu0.08" / "energy.csv").exists()


def test_sweep_keeps_close_pairs_apart(tmp_path):
    path = write_config(tmp_path)
    code = main(["sweep", "--config", str(path), "--mu", "1.5", "--nu", "0.1234567,0.1234568", "--no-thresholds"])
    assert code == EXIT_OK
    assert (tmp_path / "out" / "mu1.5_nu0.1234567" / "energy.csv").exists()
    assert (tmp_path / "out" / "mu1.5_nu0.1234568" / "energy.csv").exists()
