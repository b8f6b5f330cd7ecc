"""
End-to-end reproductions of the harvesting experiments on the default 33×33 rig
"""

import math
from dataclasses import replace
from functools import lru_cache

import numpy as np
import pytest

from core.analysis import (
    Regime,
    check_K_inequality,
    detect_outcome,
    invasion_eigenvalue,
    mass_log_slope,
    nu1_estimate,
    oscillation_period,
    steady_state_single,
)
from core.simulation import simulate
from experiments_config import get_preset

pytestmark = pytest.mark.slow


@lru_cache(maxsize=None)
def run_preset(name, variant=None, t_end=None):
    cfg = get_preset(name, variant)
    if t_end is not None:
        cfg = replace(cfg, t_end=t_end)
    return simulate(cfg)


def relative_sup_distance(field, reference):
    return (field - reference).max_norm() / reference.max_norm()


class TestOverHarvesting:
    """One or both species harvested beyond their growth rate"""

    def test_u_dies_v_settles(self):
        traj = run_preset("exp1", "1.5,0.08")
        cfg = traj.config
        v_star = steady_state_single("v", cfg.coefficients, cfg.params, cfg.grid)
        assert traj.records[-1].energy_u < 1e-6
        assert relative_sup_distance(traj.final_state.v, v_star.field) < 1e-3
        assert detect_outcome(traj) == Regime.U_EXTINCT_V_SURVIVES

    def test_v_dies_u_settles(self):
        traj = run_preset("exp1", "0.08,1.5")
        cfg = traj.config
        u_star = steady_state_single("u", cfg.coefficients, cfg.params, cfg.grid)
        assert traj.records[-1].energy_v < 1e-6
        assert relative_sup_distance(traj.final_state.u, u_star.field) < 1e-3
        assert detect_outcome(traj) == Regime.V_EXTINCT_U_SURVIVES

    def test_both_die(self):
        traj = run_preset("exp1", "1.5,1.5", t_end=100.0)
        final = traj.records[-1]
        assert final.energy_u < 1e-6 and final.energy_v < 1e-6
        assert detect_outcome(traj) == Regime.BOTH_EXTINCT

    def test_mass_decay_rate(self):
        traj = run_preset("exp1", "1.5,0.08")
        assert np.all(np.diff(traj.masses("u")[:51]) < 0.0)
        assert mass_log_slope(traj, "u", steps=50) <= -0.9 * abs((1.0 - 1.5) * 1.2)


class TestSmallHarvesting:
    """Long runs with harvesting well below the growth rate"""

    def test_less_harvested_v_dominates(self):
        final = run_preset("exp1", "0.0009,0.0005").records[-1]
        assert final.energy_v > final.energy_u > 1e-3

    @pytest.mark.parametrize("nu", [0.001, 0.0012, 0.0015, 0.002, 0.0025])
    def test_less_harvested_u_dominates(self, nu):
        final = run_preset("exp1", f"0.0009,{nu}").records[-1]
        assert final.energy_u > final.energy_v

    @pytest.mark.parametrize("variant, harvested", [("0.0006,0", "u"), ("0,0.0006", "v")])
    def test_harvested_species_drifts_away(self, variant, harvested):
        traj = run_preset("exp1", variant)
        other = "v" if harvested == "u" else "u"
        final = traj.records[-1]
        assert final.energy(harvested) < final.energy(other)

        late = traj.times() >= traj.config.t_end - 500.0
        gap = traj.energies(other)[late] - traj.energies(harvested)[late]
        assert np.all(np.diff(gap) > 0.0)


class TestThresholdConsistency:
    """Invasion eigenvalues and ν₁ at μ = 0.0009, ν = 0.001"""

    def test_invasion_signs_and_threshold(self):
        cfg = get_preset("exp1", "0.0009,0.001")
        coeffs, params, grid = cfg.coefficients, cfg.params, cfg.grid
        u_star = steady_state_single("u", coeffs, params, grid)
        v_star = steady_state_single("v", coeffs, params, grid)

        # With d1 = d2, u* is a null vector of d·L + r(1 - μ - u*/K), so the
        # invasion eigenvalues are ∓r(ν - μ) and ν₁ collapses onto μ
        shift = (params.nu - params.mu) * 1.2
        assert invasion_eigenvalue("u-star", u_star, coeffs, params).lam == pytest.approx(-shift, abs=1e-7)
        assert invasion_eigenvalue("v-star", v_star, coeffs, params).lam == pytest.approx(shift, abs=1e-7)

        nu1 = nu1_estimate(u_star, coeffs, params)
        assert 0.0 < nu1 < 1.0
        assert nu1 == pytest.approx(params.mu, abs=grid.h ** 2)

    def test_coexistence_observed_over_the_run(self):
        traj = run_preset("exp1", "0.0009,0.001")
        assert detect_outcome(traj) == Regime.COEXIST


class TestIntegralInequality:

    @pytest.mark.parametrize("name", ["exp1", "exp2"])
    @pytest.mark.parametrize("species", ["u", "v"])
    def test_capacity_exceeds_steady_state(self, name, species):
        cfg = get_preset(name)
        params = replace(cfg.params, mu=0.0009, nu=0.0009)
        ss = steady_state_single(species, cfg.coefficients, params, cfg.grid)
        check = check_K_inequality(ss, cfg.coefficients, params)
        assert check.holds and check.gap > 0.0, f"{name}/{species}: lhs {check.lhs} rhs {check.rhs}"


class TestPeriodicForcing:
    """Time-dependent carrying capacity"""

    def test_period_follows_forcing(self):
        traj = run_preset("exp3")
        period, _ = oscillation_period(traj, "u", 100.0, 200.0)
        spacing = traj.config.dt * traj.config.record_every
        assert abs(period - 2.0 * math.pi) <= 2 * spacing, f"period {period:.4f}"

        window = traj.times() >= 100.0
        assert traj.energies("u")[window].min() > 1e-3
        assert traj.energies("v")[window].min() > 1e-3

    def test_peak_density_at_centre(self):
        traj = run_preset("exp4")
        centre = traj.config.grid.nearest_vertex(0.5, 0.5)
        assert [s.t for s in traj.snapshots] == pytest.approx([80.0, 1600.0])
        for snapshot in traj.snapshots:
            for species in ("u", "v"):
                values = snapshot.field(species).as_array()
                j, i = np.unravel_index(np.argmax(values), values.shape)
                assert (i, j) == centre, f"{species} peak at {(i, j)} at t = {snapshot.t}"
