"""
Core Configuration Module for the Harvested Competition-Diffusion Simulator
Centralizes defaults for the grid, time stepping, solver, analysis and outputs
"""

import logging
from typing import Dict, Any, Optional
from dataclasses import dataclass, fields

from core.defaults_loader import DefaultsLoader, get_defaults_loader
from core.stepper import SolverSettings

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='[%(asctime)s] %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)


def _apply_overrides(target, overrides: Dict[str, Any], section: str):
    """Copy known keys of a defaults.yaml section onto a dataclass"""
    known = {f.name for f in fields(target)}
    for key, value in overrides.items():
        if key in known:
            setattr(target, key, value)
        else:
            logger.warning(f"Unknown key '{section}.{key}' in defaults; ignoring it")


@dataclass
class GridDefaults:
    """Spatial discretization"""
    n: int = 33


@dataclass
class TimeDefaults:
    """Time stepping and recording"""
    dt: float = 0.1
    record_every: int = 1
    max_rows: int = 10000

    def record_every_for(self, n_steps: int) -> int:
        """Smallest stride keeping a run at or below max_rows records"""
        return max(self.record_every, -(-n_steps // self.max_rows))


@dataclass
class SolverDefaults:
    """Inner linear solver"""
    rel_tol: float = 1e-10
    max_iters: Optional[int] = None
    dt_guard: bool = True

    def to_settings(self) -> SolverSettings:
        return SolverSettings(rel_tol=self.rel_tol, max_iters=self.max_iters, dt_guard=self.dt_guard)


@dataclass
class AnalysisDefaults:
    """Steady states, eigenvalues and outcome detection"""
    extinct_tol: float = 1e-8
    window: int = 50
    steady_tol: float = 1e-9
    steady_dt: float = 0.5
    steady_max_steps: int = 20000
    eig_tol: float = 1e-10
    eig_residual_tol: float = 1e-9
    eig_max_iters: int = 400000

    def eigen_kwargs(self) -> Dict[str, Any]:
        return {"tol": self.eig_tol, "residual_tol": self.eig_residual_tol, "max_iters": self.eig_max_iters}

    def steady_kwargs(self) -> Dict[str, Any]:
        return {"tol": self.steady_tol, "dt": self.steady_dt, "max_steps": self.steady_max_steps}


@dataclass
class OutputDefaults:
    dir: str = "output"
    sweep_summary: str = "sweep_summary.csv"


class Config:
    """Main Configuration Class - Singleton Pattern"""

    _instance: Optional['Config'] = None

    def __new__(cls, loader: Optional[DefaultsLoader] = None):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __init__(self, loader: Optional[DefaultsLoader] = None):
        """Initialize all configuration components"""
        if not hasattr(self, 'initialized'):
            self.loader = loader or get_defaults_loader()

            self.grid = GridDefaults()
            self.time = TimeDefaults()
            self.solver = SolverDefaults()
            self.analysis = AnalysisDefaults()
            self.output = OutputDefaults()

            for section in ("grid", "time", "solver", "analysis", "output"):
                _apply_overrides(getattr(self, section), self.loader.get_section(section), section)

            self.initialized = True
            logger.debug("Configuration initialized successfully")

    def sim_defaults(self) -> Dict[str, Any]:
        """Fallbacks for optional fields of a run config"""
        return {
            "n": self.grid.n,
            "dt": self.time.dt,
            "record_every": self.time.record_every,
            "rel_tol": self.solver.rel_tol,
            "max_iters": self.solver.max_iters,
            "dt_guard": self.solver.dt_guard,
            "output_dir": self.output.dir,
        }

    def get_summary(self) -> Dict[str, Any]:
        """Get configuration summary"""
        return {
            "defaults_file": str(self.loader.config_path),
            "grid_n": self.grid.n,
            "dt": self.time.dt,
            "cg_rel_tol": self.solver.rel_tol,
            "dt_guard": self.solver.dt_guard,
            "extinct_tol": self.analysis.extinct_tol,
            "outcome_window": self.analysis.window,
            "output_dir": self.output.dir,
        }

    def print_summary(self):
        """Print configuration summary"""
        summary = self.get_summary()
        logger.info("=" * 60)
        logger.info("Configuration Summary")
        logger.info("=" * 60)
        for key, value in summary.items():
            logger.info(f"{key:20s}: {value}")
        logger.info("=" * 60)


# Global configuration instance
config = Config()


if __name__ == "__main__":
    config.print_summary()
