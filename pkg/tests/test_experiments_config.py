"""
Experiment catalogue tests
"""

import math
from dataclasses import replace

import pytest

from core.coeff_dsl import evaluate
from core.simulation import simulate
from experiments_config import ALL_PRESETS, get_preset, list_presets


def strings(cfg):
    return cfg.coefficients.to_strings()


class TestPresetValues:
    """Coefficients, harvesting pairs and horizons as the experiments state them"""

    def test_exp1(self):
        cfg = get_preset("exp1", "1.5,0.08")
        assert strings(cfg) == {"K": "2.1+cos(pi*x)*cos(pi*y)", "r": "1.2", "u0": "1.8", "v0": "1.8"}
        assert (cfg.params.mu, cfg.params.nu) == (1.5, 0.08)
        assert (cfg.params.d1, cfg.params.d2) == (1.0, 1.0)
        assert (cfg.n, cfg.dt, cfg.t_end) == (33, 0.1, 200.0)
        assert cfg.snapshot_times == (1.6,)

    @pytest.mark.parametrize("variant, mu, nu", [
        ("0.08,1.5", 0.08, 1.5),
        ("1.5,1.5", 1.5, 1.5),
    ])
    def test_exp1_short_runs(self, variant, mu, nu):
        cfg = get_preset("exp1", variant)
        assert (cfg.params.mu, cfg.params.nu, cfg.t_end) == (mu, nu, 200.0)

    @pytest.mark.parametrize("variant, mu, nu", [
        ("0.0006,0", 0.0006, 0.0),
        ("0,0.0006", 0.0, 0.0006),
        ("0.0009,0.0005", 0.0009, 0.0005),
        ("0.0009,0.001", 0.0009, 0.001),
        ("0.0009,0.0012", 0.0009, 0.0012),
        ("0.0009,0.0015", 0.0009, 0.0015),
        ("0.0009,0.002", 0.0009, 0.002),
        ("0.0009,0.0025", 0.0009, 0.0025),
    ])
    def test_exp1_long_runs(self, variant, mu, nu):
        cfg = get_preset("exp1", variant)
        assert (cfg.params.mu, cfg.params.nu, cfg.t_end) == (mu, nu, 2000.0)
        assert cfg.record_every == 2

    def test_exp1_initial_data_variant(self):
        cfg = get_preset("exp1", "init-0.5")
        assert (strings(cfg)["u0"], strings(cfg)["v0"]) == ("0.5", "0.5")
        assert (cfg.params.mu, cfg.params.nu) == (1.5, 0.08)

    @pytest.mark.parametrize("variant, nu", [("0.0009,0.0009", 0.0009), ("0.0009,0.001", 0.001)])
    def test_exp2(self, variant, nu):
        cfg = get_preset("exp2", variant)
        assert strings(cfg) == {"K": "2.5+sin(x)*sin(y)", "r": "1.5+cos(x)*cos(y)", "u0": "1.2", "v0": "1.2"}
        assert (cfg.params.mu, cfg.params.nu, cfg.t_end) == (0.0009, nu, 3000.0)

    def test_exp3(self):
        cfg = get_preset("exp3")
        assert strings(cfg) == {
            "K": "(2.1+cos(pi*x)*cos(pi*y))*(1.1+cos(t))", "r": "1.0", "u0": "0.5", "v0": "1.5",
        }
        assert (cfg.params.mu, cfg.params.nu, cfg.t_end) == (0.0009, 0.0025, 200.0)
        assert list(cfg.snapshot_times) == pytest.approx([13.74 + k * math.pi / 2 for k in range(5)])

    def test_exp4(self):
        cfg = get_preset("exp4")
        assert (cfg.params.mu, cfg.params.nu) == (0.0009, 0.0025)
        assert (strings(cfg)["u0"], strings(cfg)["v0"]) == ("1.6", "1.6")
        assert strings(cfg)["r"] == "1"
        assert evaluate(cfg.coefficients.K, 0.0, 0.5, 0.5) == pytest.approx((1.2 + 2.5 * math.pi ** 2) * 1.3)
        assert evaluate(cfg.coefficients.K, math.pi, 0.5, 0.5) == pytest.approx((1.2 + 2.5 * math.pi ** 2) * 0.7)
        assert (cfg.t_end, cfg.snapshot_times) == (1600.0, (80.0, 1600.0))

    @pytest.mark.parametrize("variant, nu", [("equal", 0.0009), ("unequal", 0.001)])
    def test_exp5(self, variant, nu):
        cfg = get_preset("exp5", variant)
        assert strings(cfg) == {
            "K": "(2.5+cos(x)*cos(y))*(1.2+cos(t))",
            "r": "(1.5+sin(x)*sin(y))*(1.2+sin(t))",
            "u0": "1.2",
            "v0": "1.2",
        }
        assert (cfg.params.mu, cfg.params.nu) == (0.0009, nu)

    def test_only_exp1_states_dt(self):
        for name in ALL_PRESETS:
            notes = get_preset(name).provenance
            stated = any(note == "dt=0.1 stated" for note in notes)
            assert stated == (name == "exp1"), name

    def test_listing_names_every_preset(self):
        listing = list_presets()
        assert [line.split(":")[0] for line in listing] == ["exp1", "exp2", "exp3", "exp4", "exp5"]


def test_exp1_snapshot_shows_both_species(tmp_path):
    cfg = get_preset("exp1", "1.5,0.08", output_dir=str(tmp_path))
    traj = simulate(replace(cfg, t_end=1.6))
    snapshot = traj.snapshots[0]
    assert snapshot.step == 16
    assert snapshot.u.min() > 0.0
    assert snapshot.v.min() > 0.0
