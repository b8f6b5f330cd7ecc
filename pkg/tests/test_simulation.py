"""
Simulation driver tests
"""

import numpy as np
import pytest

from core.analysis import mass_log_slope
from core.coeff_dsl import CoefficientSet
from core.errors import CoefficientError, DtGuardError, StepError
from core.sim_config import SimConfig
from core.simulation import RECORD_COLUMNS, simulate
from core.stepper import ModelParams


def make_config(coeffs, t_end=1.0, dt=0.1, n=9, **kwargs):
    params = kwargs.pop("params", ModelParams(mu=0.0009, nu=0.0025))
    return SimConfig(n=n, dt=dt, t_end=t_end, params=params, coefficients=coeffs, **kwargs)


class TestRecords:

    def test_record_schedule(self, exp1_coeffs):
        traj = simulate(make_config(exp1_coeffs, record_every=3))
        np.testing.assert_allclose(traj.times(), [0.0, 0.3, 0.6, 0.9, 1.0], atol=1e-12)

    def test_initial_record(self, exp1_coeffs):
        first = simulate(make_config(exp1_coeffs, t_end=0.2)).records[0]
        assert first.t == 0.0
        assert first.energy_u == pytest.approx(1.62)
        assert first.mass_v == pytest.approx(1.8)

    def test_times_are_multiples_of_dt(self, exp1_coeffs):
        traj = simulate(make_config(exp1_coeffs, t_end=3.0))
        assert traj.records[-1].t == 30 * 0.1
        assert traj.final_state.t == traj.records[-1].t

    def test_frame_columns(self, exp1_coeffs):
        frame = simulate(make_config(exp1_coeffs, t_end=0.5)).to_frame()
        assert list(frame.columns) == RECORD_COLUMNS
        assert len(frame) == 6


class TestSnapshots:

    def test_nearest_step(self, exp1_coeffs):
        traj = simulate(make_config(exp1_coeffs, snapshot_times=(0.0, 0.44, 1.0)))
        assert [s.step for s in traj.snapshots] == [0, 4, 10]
        assert traj.snapshots[1].t == pytest.approx(0.4)

    def test_snapshot_fields_match_state(self, exp1_coeffs):
        traj = simulate(make_config(exp1_coeffs, snapshot_times=(1.0,)))
        np.testing.assert_array_equal(traj.snapshots[0].u.values, traj.final_state.u.values)


class TestFailures:

    def test_step_failure_is_tagged(self):
        coeffs = CoefficientSet.from_strings(K="2", r="1.2", u0="0", v0="0")
        cfg = make_config(coeffs, dt=1.0, t_end=3.0, params=ModelParams())
        with pytest.raises(StepError) as info:
            simulate(cfg)
        assert info.value.step == 1
        assert isinstance(info.value.cause, DtGuardError)

    def test_invalid_capacity_before_stepping(self):
        coeffs = CoefficientSet.from_strings(K="x-0.5", r="1", u0="1", v0="1")
        with pytest.raises(CoefficientError):
            simulate(make_config(coeffs))

    def test_capacity_turning_negative_later(self):
        coeffs = CoefficientSet.from_strings(K="1-t", r="1", u0="1", v0="1")
        with pytest.raises(StepError) as info:
            simulate(make_config(coeffs, t_end=2.0))
        assert info.value.step == 10
        assert isinstance(info.value.cause, CoefficientError)


def test_over_harvested_mass_decays(exp1_coeffs):
    cfg = make_config(exp1_coeffs, t_end=5.0, params=ModelParams(mu=1.5, nu=0.08))
    traj = simulate(cfg)
    masses = traj.masses("u")
    assert np.all(np.diff(masses) < 0.0)
    assert mass_log_slope(traj, "u", steps=50) <= -0.54
