"""
Simulation Module
Runs the stepper from t = 0 to T and collects energy records and snapshots
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, List, Optional

import numpy as np
import pandas as pd

from core.errors import SimulationError, StepError
from core.grid import ScalarField, energy, total_mass
from core.sim_config import SimConfig
from core.stepper import State, step

logger = logging.getLogger(__name__)

RECORD_COLUMNS = ["t", "energy_u", "energy_v", "mass_u", "mass_v"]


@dataclass(frozen=True)
class Record:
    """Energies ½∫u², ½∫v² and masses ∫u, ∫v at one time level"""
    t: float
    energy_u: float
    energy_v: float
    mass_u: float
    mass_v: float

    @classmethod
    def of(cls, state: State) -> "Record":
        return cls(
            t=state.t,
            energy_u=energy(state.u),
            energy_v=energy(state.v),
            mass_u=total_mass(state.u),
            mass_v=total_mass(state.v),
        )

    def energy(self, species: str) -> float:
        return self.energy_u if species == "u" else self.energy_v

    def mass(self, species: str) -> float:
        return self.mass_u if species == "u" else self.mass_v


@dataclass(frozen=True)
class Snapshot:
    t: float
    step: int
    u: ScalarField
    v: ScalarField

    def field(self, species: str) -> ScalarField:
        return self.u if species == "u" else self.v


@dataclass
class Trajectory:
    """Ordered records and snapshots of one run"""
    records: List[Record] = field(default_factory=list)
    snapshots: List[Snapshot] = field(default_factory=list)
    final_state: Optional[State] = None
    config: Optional[SimConfig] = None

    def times(self) -> np.ndarray:
        return np.array([rec.t for rec in self.records])

    def energies(self, species: str) -> np.ndarray:
        return np.array([rec.energy(species) for rec in self.records])

    def masses(self, species: str) -> np.ndarray:
        return np.array([rec.mass(species) for rec in self.records])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(
            [[rec.t, rec.energy_u, rec.energy_v, rec.mass_u, rec.mass_v] for rec in self.records],
            columns=RECORD_COLUMNS,
        )


def initial_state(sim_config: SimConfig) -> State:
    """Sample u0, v0 after checking K > 0 and r >= 0 at t = 0"""
    grid = sim_config.grid
    sim_config.coefficients.check(grid, 0.0)
    u0, v0 = sim_config.coefficients.sample_initial(grid)
    return State(u=u0, v=v0, t=0.0)


def _snapshot_steps(sim_config: SimConfig) -> Dict[int, List[float]]:
    """Map each requested snapshot time to the nearest completed step"""
    steps: Dict[int, List[float]] = {}
    n_steps = sim_config.n_steps
    for requested in sim_config.snapshot_times:
        k = int(np.clip(round(requested / sim_config.dt), 0, n_steps))
        steps.setdefault(k, []).append(requested)
    return steps


def simulate(sim_config: SimConfig) -> Trajectory:
    """
    Run one simulation

    Time levels are tₖ = k·Δt for k = 0..M with M = round(T/Δt). A record is
    taken at t = 0, every record_every steps and at the final step.

    Args:
        sim_config: Run description

    Returns:
        Trajectory with records, snapshots and the final state

    Raises:
        CoefficientError: invalid K, r or initial data at t = 0
        StepError: a step failed; carries the step index, time and cause
    """
    dt = sim_config.dt
    n_steps = sim_config.n_steps
    snapshot_steps = _snapshot_steps(sim_config)
    progress_every = max(1, n_steps // 10)

    logger.info(
        f"Simulating '{sim_config.name or 'run'}': n = {sim_config.n}, dt = {dt}, T = {sim_config.t_end}, "
        f"mu = {sim_config.params.mu}, nu = {sim_config.params.nu}"
    )

    state = initial_state(sim_config)
    trajectory = Trajectory(config=sim_config)
    trajectory.records.append(Record.of(state))
    if 0 in snapshot_steps:
        trajectory.snapshots.append(Snapshot(t=0.0, step=0, u=state.u, v=state.v))

    for k in range(1, n_steps + 1):
        try:
            state = step(state, sim_config.coefficients, sim_config.params, dt, sim_config.solver)
        except SimulationError as e:
            logger.error(f"Step {k} at t = {k * dt:.6g} failed: {e}")
            raise StepError(k, k * dt, e) from e

        # Restamp to avoid drift from repeated addition
        state = replace(state, t=k * dt)

        if k % sim_config.record_every == 0 or k == n_steps:
            trajectory.records.append(Record.of(state))
        if k in snapshot_steps:
            trajectory.snapshots.append(Snapshot(t=state.t, step=k, u=state.u, v=state.v))
        if k % progress_every == 0:
            last = trajectory.records[-1]
            logger.debug(f"Step {k}/{n_steps}: E_u = {last.energy_u:.6g}, E_v = {last.energy_v:.6g}")

    trajectory.final_state = state
    final = trajectory.records[-1]
    logger.info(
        f"✅ Simulation finished at t = {state.t:.6g}: E_u = {final.energy_u:.6g}, E_v = {final.energy_v:.6g}"
    )
    return trajectory
