"""
Simulation Orchestrator
Coordinates runs, parameter sweeps, regime reports and eigenvalue reports
"""

import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import pandas as pd

from config import AnalysisDefaults, config
from core.analysis import (
    EigenPair,
    RegimeReport,
    SteadyState,
    classify_regime,
    detect_outcome,
    estimate_thresholds,
    invasion_eigenvalue,
    principal_eigenvalue,
    steady_state_single,
    trivial_state_potential,
)
from core.coeff_dsl import CoefficientSet
from core.errors import ConfigError
from core.output_manager import OutputManager
from core.sim_config import SimConfig
from core.simulation import Trajectory, simulate
from core.stepper import ModelParams

logger = logging.getLogger(__name__)

EIGEN_STATES = ("trivial", "u-star", "v-star")


@dataclass
class HarvestVariant:
    """One (μ, ν) setting of an experiment"""
    mu: float
    nu: float
    t_end: float
    t_end_stated: bool = False
    snapshot_times: Tuple[float, ...] = ()
    notes: Tuple[str, ...] = ()


@dataclass
class ExperimentPreset:
    """Configuration for one reproduced experiment"""
    name: str
    description: str
    K: str
    r: str
    u0: str
    v0: str
    variants: Dict[str, HarvestVariant]
    default_variant: str
    dt_stated: bool = False
    init_variants: bool = False

    def variant_names(self) -> List[str]:
        names = list(self.variants)
        if self.init_variants:
            names.append("init-<value>")
        return names

    def resolve_variant(self, selector: Optional[str]) -> Tuple[str, HarvestVariant, Optional[str]]:
        """
        Find a variant by key, by "mu,nu" value, or as init-<value>

        Returns:
            (key, variant, initial density override)
        """
        if selector is None:
            return self.default_variant, self.variants[self.default_variant], None
        selector = selector.strip()
        if selector in self.variants:
            return selector, self.variants[selector], None

        if self.init_variants and selector.startswith("init-"):
            try:
                value = float(selector[len("init-"):])
            except ValueError:
                raise ConfigError(f"Preset {self.name}: bad initial density in variant '{selector}'")
            if value < 0:
                raise ConfigError(f"Preset {self.name}: initial density must be >= 0, got {value}")
            base = self.variants[self.default_variant]
            note = (
                f"harvesting pair ({base.mu}, {base.nu}) inferred for initial-density variant {selector}",
            )
            return selector, replace(base, notes=base.notes + note), repr(value)

        try:
            mu, nu = (float(part) for part in selector.split(","))
        except ValueError:
            mu = nu = None
        for key, variant in self.variants.items():
            if (variant.mu, variant.nu) == (mu, nu):
                return key, variant, None

        raise ConfigError(
            f"Unknown variant '{selector}' for preset {self.name}; choose from: {', '.join(self.variant_names())}"
        )

    def build(
        self,
        selector: Optional[str] = None,
        n: Optional[int] = None,
        dt: Optional[float] = None,
        output_dir: Optional[str] = None,
    ) -> SimConfig:
        """
        Build the SimConfig of one variant

        Values not given by the experiment description are taken from the
        defaults and listed as inferred in the provenance.
        """
        key, variant, initial = self.resolve_variant(selector)
        n = n or config.grid.n
        dt = dt or config.time.dt
        n_steps = int(round(variant.t_end / dt))
        record_every = config.time.record_every_for(n_steps)

        provenance = [
            f"preset {self.name} variant {key}: {self.description}",
            f"grid n={n} inferred (mesh not stated)",
            f"dt={dt} stated" if self.dt_stated and dt == 0.1 else f"dt={dt} inferred (stated only for exp1)",
            f"t_end={variant.t_end} stated" if variant.t_end_stated else f"t_end={variant.t_end} inferred",
            f"record_every={record_every} chosen to keep at most {config.time.max_rows} records",
        ]
        provenance.extend(variant.notes)

        return SimConfig(
            n=n,
            dt=dt,
            t_end=variant.t_end,
            params=ModelParams(d1=1.0, d2=1.0, mu=variant.mu, nu=variant.nu),
            coefficients=CoefficientSet.from_strings(
                K=self.K, r=self.r, u0=initial or self.u0, v0=initial or self.v0
            ),
            record_every=record_every,
            snapshot_times=tuple(variant.snapshot_times),
            output_dir=output_dir or str(Path(config.output.dir) / f"{self.name}_{_slug(key)}"),
            solver=config.solver.to_settings(),
            name=f"{self.name}:{key}",
            provenance=tuple(provenance),
        )


def _slug(text: str) -> str:
    return "".join(c if c.isalnum() or c in "-." else "_" for c in text)


def _run_summary(sim_config: SimConfig, traj: Trajectory, analysis: AnalysisDefaults, thresholds: bool) -> Dict[str, Any]:
    """Sweep row of one finished run"""
    estimates = None
    if thresholds and sim_config.coefficients.is_stationary:
        estimates = estimate_thresholds(
            sim_config.coefficients, sim_config.params, sim_config.grid, **analysis.eigen_kwargs()
        )
    window = min(analysis.window, len(traj.records))
    final = traj.records[-1]
    return {
        "mu": sim_config.params.mu,
        "nu": sim_config.params.nu,
        "predicted": str(classify_regime(sim_config.params, estimates)),
        "observed": str(detect_outcome(traj, analysis.extinct_tol, window)),
        "energy_u": final.energy_u,
        "energy_v": final.energy_v,
        "nu1": estimates.nu1 if estimates else None,
        "mu1": estimates.mu1 if estimates else None,
    }


def _sweep_point(task: Tuple[SimConfig, AnalysisDefaults, bool]) -> Dict[str, Any]:
    """Run one sweep point; module level so worker processes can unpickle it"""
    sim_config, analysis, thresholds = task
    traj = simulate(sim_config)
    OutputManager(sim_config.output_dir).write_run(traj, sim_config)
    return _run_summary(sim_config, traj, analysis, thresholds)


class SimulationOrchestrator:
    """Runs the simulator workflows behind the CLI"""

    def __init__(self):
        """Initialize orchestrator with the global configuration"""
        self.config = config

    def run(self, sim_config: SimConfig, write_outputs: bool = True) -> Trajectory:
        """
        Simulate one configuration and write its outputs

        Args:
            sim_config: Run description
            write_outputs: Write energy CSV, snapshots and config.json

        Returns:
            Trajectory
        """
        logger.info("=" * 60)
        logger.info(f"Running simulation {sim_config.name or ''}".rstrip())
        logger.info("=" * 60)
        for note in sim_config.provenance:
            logger.info(f"provenance: {note}")

        start = time.time()
        traj = simulate(sim_config)
        elapsed = time.time() - start

        if write_outputs:
            OutputManager(sim_config.output_dir).write_run(traj, sim_config)
        logger.info(f"✅ Run finished in {elapsed:.2f} seconds ({len(traj.records)} records)")
        return traj

    def steady_state(self, species: str, sim_config: SimConfig) -> SteadyState:
        analysis = self.config.analysis
        return steady_state_single(
            species, sim_config.coefficients, sim_config.params, sim_config.grid, **analysis.steady_kwargs()
        )

    def regime_report(self, params: ModelParams, sim_config: Optional[SimConfig] = None) -> RegimeReport:
        """
        Predicted regime, with thresholds when a stationary config is given

        Args:
            params: Harvesting coefficients to classify
            sim_config: Optional config supplying coefficients and grid
        """
        logger.info("=" * 60)
        logger.info(f"Regime report for mu = {params.mu}, nu = {params.nu}")
        logger.info("=" * 60)

        thresholds = None
        if sim_config is not None:
            if sim_config.coefficients.is_stationary:
                thresholds = estimate_thresholds(
                    sim_config.coefficients, params, sim_config.grid, **self.config.analysis.eigen_kwargs()
                )
            else:
                logger.warning("Coefficients depend on t; thresholds are not computed")

        report = RegimeReport(predicted=classify_regime(params, thresholds), thresholds=thresholds)
        logger.info(f"✅ Predicted regime: {report.predicted}")
        return report

    def eigen_report(self, sim_config: SimConfig, state: str) -> List[Tuple[str, EigenPair]]:
        """
        Principal eigenvalues of the linearization at a steady state

        Args:
            sim_config: Stationary config
            state: 'trivial', 'u-star' or 'v-star'

        Returns:
            List of (label, EigenPair); the label names the perturbed species
            and the state
        """
        if state not in EIGEN_STATES:
            raise ValueError(f"state must be one of {', '.join(EIGEN_STATES)}, got {state!r}")
        logger.info("=" * 60)
        logger.info(f"Principal eigenvalues at the {state} state")
        logger.info("=" * 60)

        coeffs, params, grid = sim_config.coefficients, sim_config.params, sim_config.grid
        eigen_kwargs = self.config.analysis.eigen_kwargs()
        pairs = []
        if state == "trivial":
            for species in ("u", "v"):
                q = trivial_state_potential(species, coeffs, params, grid)
                pairs.append((f"{species}@trivial", principal_eigenvalue(params.diffusion(species), q, **eigen_kwargs)))
        else:
            resident = state[0]
            invader = "v" if resident == "u" else "u"
            ss = self.steady_state(resident, sim_config)
            pairs.append((f"{invader}@{state}", invasion_eigenvalue(state, ss, coeffs, params, **eigen_kwargs)))

        for label, pair in pairs:
            logger.info(f"✅ {label}: lambda = {pair.lam:.12g} after {pair.iterations} iterations")
        return pairs

    def sweep(
        self,
        sim_config: SimConfig,
        mus: Sequence[float],
        nus: Sequence[float],
        workers: int = 1,
        thresholds: bool = True,
    ) -> pd.DataFrame:
        """
        Run every (μ, ν) pair and summarize the outcomes

        Each run writes into its own subdirectory of the config's output
        directory; the summary CSV is written once all runs are done.

        Returns:
            DataFrame with one row per pair in input order
        """
        logger.info("=" * 60)
        logger.info(f"Sweeping {len(mus)} x {len(nus)} harvesting pairs with {workers} worker(s)")
        logger.info("=" * 60)

        base_dir = Path(sim_config.output_dir)
        tasks = [
            (
                sim_config.with_harvesting(mu, nu, output_dir=str(base_dir / f"mu{mu!r}_nu{nu!r}")),
                self.config.analysis,
                thresholds,
            )
            for mu in mus
            for nu in nus
        ]

        start = time.time()
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as executor:
                rows = list(executor.map(_sweep_point, tasks))
        else:
            rows = [_sweep_point(task) for task in tasks]

        summary = pd.DataFrame(rows, columns=["mu", "nu", "predicted", "observed", "energy_u", "energy_v", "nu1", "mu1"])
        OutputManager(base_dir).write_sweep_summary(summary, self.config.output.sweep_summary)
        logger.info(f"✅ Sweep finished in {time.time() - start:.2f} seconds")
        return summary
