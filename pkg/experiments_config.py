"""
Experiment Configurations
Defines the reproduced experiments: coefficients, harvesting variants,
horizons and snapshot times
"""

import math
from typing import Dict, List, Optional

from core.errors import ConfigError
from core.sim_config import SimConfig
from orchestrator import ExperimentPreset, HarvestVariant

# Experiment 1: stationary K, constant growth rate
EXP1_VARIANTS = {
    "1.5,0.08": HarvestVariant(
        mu=1.5, nu=0.08, t_end=200.0, snapshot_times=(1.6,),
        notes=("snapshot t=1.6 stated",),
    ),
    "0.08,1.5": HarvestVariant(mu=0.08, nu=1.5, t_end=200.0),
    "1.5,1.5": HarvestVariant(mu=1.5, nu=1.5, t_end=200.0),
    "0.0006,0": HarvestVariant(mu=0.0006, nu=0.0, t_end=2000.0),
    "0,0.0006": HarvestVariant(mu=0.0, nu=0.0006, t_end=2000.0),
}
EXP1_VARIANTS.update({
    f"0.0009,{nu}": HarvestVariant(mu=0.0009, nu=nu, t_end=2000.0, t_end_stated=True)
    for nu in (0.0005, 0.001, 0.0012, 0.0015, 0.002, 0.0025)
})

EXP1 = ExperimentPreset(
    name="exp1",
    description="stationary carrying capacity, constant growth rate",
    K="2.1+cos(pi*x)*cos(pi*y)",
    r="1.2",
    u0="1.8",
    v0="1.8",
    variants=EXP1_VARIANTS,
    default_variant="1.5,0.08",
    dt_stated=True,
    init_variants=True,
)

# Experiment 2: space-dependent growth rate
EXP2 = ExperimentPreset(
    name="exp2",
    description="stationary carrying capacity, space-dependent growth rate",
    K="2.5+sin(x)*sin(y)",
    r="1.5+cos(x)*cos(y)",
    u0="1.2",
    v0="1.2",
    variants={
        "0.0009,0.0009": HarvestVariant(mu=0.0009, nu=0.0009, t_end=3000.0, t_end_stated=True),
        "0.0009,0.001": HarvestVariant(mu=0.0009, nu=0.001, t_end=3000.0, t_end_stated=True),
    },
    default_variant="0.0009,0.001",
)

# Experiment 3: carrying capacity oscillating in time with period 2π
EXP3 = ExperimentPreset(
    name="exp3",
    description="time-periodic carrying capacity",
    K="(2.1+cos(pi*x)*cos(pi*y))*(1.1+cos(t))",
    r="1.0",
    u0="0.5",
    v0="1.5",
    variants={
        "default": HarvestVariant(
            mu=0.0009, nu=0.0025, t_end=200.0,
            snapshot_times=tuple(13.74 + k * math.pi / 2 for k in range(5)),
            notes=("snapshot times 13.74 + k*pi/2 stated",),
        ),
    },
    default_variant="default",
)

# Experiment 4: peaked carrying capacity centred at (0.5, 0.5)
EXP4 = ExperimentPreset(
    name="exp4",
    description="peaked time-periodic carrying capacity",
    K="(1.2+2.5*pi^2*exp(-(x-0.5)^2-(y-0.5)^2))*(1.0+0.3*cos(t))",
    r="1",
    u0="1.6",
    v0="1.6",
    variants={
        "default": HarvestVariant(
            mu=0.0009, nu=0.0025, t_end=1600.0, snapshot_times=(80.0, 1600.0),
            notes=("snapshot times 80 and 1600 stated; t_end set to the last snapshot",),
        ),
    },
    default_variant="default",
)

# Experiment 5: carrying capacity and growth rate both vary in space and time
EXP5 = ExperimentPreset(
    name="exp5",
    description="space- and time-dependent carrying capacity and growth rate",
    K="(2.5+cos(x)*cos(y))*(1.2+cos(t))",
    r="(1.5+sin(x)*sin(y))*(1.2+sin(t))",
    u0="1.2",
    v0="1.2",
    variants={
        "equal": HarvestVariant(mu=0.0009, nu=0.0009, t_end=2000.0),
        "unequal": HarvestVariant(mu=0.0009, nu=0.001, t_end=2000.0),
    },
    default_variant="equal",
)

ALL_PRESETS: Dict[str, ExperimentPreset] = {p.name: p for p in (EXP1, EXP2, EXP3, EXP4, EXP5)}


def list_presets() -> List[str]:
    return [f"{name}: {p.description} (variants: {', '.join(p.variant_names())})" for name, p in ALL_PRESETS.items()]


def get_preset(
    name: str,
    variant: Optional[str] = None,
    n: Optional[int] = None,
    dt: Optional[float] = None,
    output_dir: Optional[str] = None,
) -> SimConfig:
    """
    Build the SimConfig of a preset

    Args:
        name: exp1 ... exp5
        variant: Variant key, "mu,nu" pair or (exp1) init-<value>
        n: Grid points per side (default from config)
        dt: Time step (default from config)
        output_dir: Output directory (default output/<name>_<variant>)

    Raises:
        ConfigError: unknown preset or variant
    """
    preset = ALL_PRESETS.get(name)
    if preset is None:
        raise ConfigError(f"Unknown preset '{name}'; choose from: {', '.join(ALL_PRESETS)}")
    return preset.build(variant, n=n, dt=dt, output_dir=output_dir)
