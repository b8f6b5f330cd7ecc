"""
Output Management Module
Writes energy records, field snapshots, run configs and sweep summaries
"""

import json
import logging
from pathlib import Path
from typing import List, Optional, Union

import numpy as np
import pandas as pd

from core.sim_config import SimConfig
from core.simulation import RECORD_COLUMNS, Trajectory

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]

ENERGY_FILE = "energy.csv"
CONFIG_FILE = "config.json"
FLOAT_FORMAT = "%.17g"


def write_energy_csv(traj: Trajectory, path: PathLike) -> Path:
    """One row per record: t,energy_u,energy_v,mass_u,mass_v with 17 significant digits"""
    path = Path(path)
    try:
        traj.to_frame()[RECORD_COLUMNS].to_csv(path, index=False, float_format=FLOAT_FORMAT)
    except OSError as e:
        logger.error(f"Failed to write energy records to {path}: {e}")
        raise
    logger.info(f"Wrote {len(traj.records)} energy records to {path}")
    return path


def write_snapshot(traj: Trajectory, index: int, path: PathLike, species: str = "u") -> Path:
    """
    Write one field of a snapshot as an n×n table

    Row j holds y = j·h and column i holds x = i·h, preceded by the comment
    line "# t=<time> n=<n> field=<u|v>".
    """
    if species not in ("u", "v"):
        raise ValueError(f"species must be 'u' or 'v', got {species!r}")
    path = Path(path)
    snapshot = traj.snapshots[index]
    field = snapshot.field(species)
    header = f"t={snapshot.t:.12g} n={field.grid.n} field={species}"
    try:
        np.savetxt(path, field.as_array(), fmt=FLOAT_FORMAT, delimiter=",", header=header, comments="# ")
    except OSError as e:
        logger.error(f"Failed to write snapshot to {path}: {e}")
        raise
    return path


class OutputManager:
    """Owns the output directory of one run"""

    def __init__(self, output_dir: PathLike):
        """
        Initialize Output Manager

        Args:
            output_dir: Directory receiving every file of the run
        """
        self.output_dir = Path(output_dir)

    def ensure_directory(self) -> Path:
        try:
            self.output_dir.mkdir(parents=True, exist_ok=True)
        except OSError as e:
            logger.error(f"Cannot create output directory {self.output_dir}: {e}")
            raise
        return self.output_dir

    def snapshot_path(self, snapshot_index: int, t: float, species: str) -> Path:
        return self.output_dir / f"snapshot_{snapshot_index:03d}_t{t:.4f}_{species}.csv"

    def write_energy_csv(self, traj: Trajectory) -> Path:
        self.ensure_directory()
        return write_energy_csv(traj, self.output_dir / ENERGY_FILE)

    def write_snapshots(self, traj: Trajectory) -> List[Path]:
        self.ensure_directory()
        paths = []
        for index, snapshot in enumerate(traj.snapshots):
            for species in ("u", "v"):
                paths.append(write_snapshot(traj, index, self.snapshot_path(index, snapshot.t, species), species))
        if paths:
            logger.info(f"Wrote {len(paths)} snapshot files to {self.output_dir}")
        return paths

    def write_config(self, sim_config: SimConfig) -> Path:
        """Copy of the run config, provenance notes included"""
        self.ensure_directory()
        path = self.output_dir / CONFIG_FILE
        try:
            with open(path, "w", encoding="utf-8") as f:
                json.dump(sim_config.to_dict(), f, indent=2)
        except OSError as e:
            logger.error(f"Failed to write config to {path}: {e}")
            raise
        return path

    def write_run(self, traj: Trajectory, sim_config: Optional[SimConfig] = None) -> List[Path]:
        """Energy records, snapshots and config of a finished run"""
        sim_config = sim_config or traj.config
        paths = [self.write_energy_csv(traj)]
        paths.extend(self.write_snapshots(traj))
        if sim_config is not None:
            paths.append(self.write_config(sim_config))
        return paths

    def write_sweep_summary(self, summary: pd.DataFrame, filename: str = "sweep_summary.csv") -> Path:
        self.ensure_directory()
        path = self.output_dir / filename
        try:
            summary.to_csv(path, index=False, float_format=FLOAT_FORMAT)
        except OSError as e:
            logger.error(f"Failed to write sweep summary to {path}: {e}")
            raise
        logger.info(f"Wrote sweep summary ({len(summary)} runs) to {path}")
        return path
