"""
Simulation Configuration Module
SimConfig: the complete description of one run, and its JSON loader
"""

import json
import logging
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Dict, List, Optional, Tuple, Union

from core.coeff_dsl import CoefficientSet, parse
from core.errors import ConfigError, ExpressionError
from core.grid import Grid
from core.stepper import ModelParams, SolverSettings

logger = logging.getLogger(__name__)

# Fallbacks for fields a config may omit
DEFAULT_FIELDS: Dict[str, Any] = {
    "n": 33,
    "dt": 0.1,
    "record_every": 1,
    "d1": 1.0,
    "d2": 1.0,
    "rel_tol": 1e-10,
    "max_iters": None,
    "dt_guard": True,
    "output_dir": "output",
}

COEFFICIENT_NAMES = ("K", "r", "u0", "v0")


@dataclass(frozen=True)
class SimConfig:
    """Full run description"""
    n: int
    dt: float
    t_end: float
    params: ModelParams
    coefficients: CoefficientSet
    record_every: int = 1
    snapshot_times: Tuple[float, ...] = ()
    output_dir: str = "output"
    solver: SolverSettings = field(default_factory=SolverSettings)
    name: str = ""
    provenance: Tuple[str, ...] = ()

    @property
    def grid(self) -> Grid:
        return Grid(self.n)

    @property
    def n_steps(self) -> int:
        """M = T/Δt steps starting from n = 0"""
        return int(round(self.t_end / self.dt))

    def with_harvesting(self, mu: float, nu: float, output_dir: Optional[str] = None) -> "SimConfig":
        """Copy with a different (μ, ν) pair"""
        params = replace(self.params, mu=mu, nu=nu)
        return replace(self, params=params, output_dir=output_dir or self.output_dir)

    def to_dict(self) -> Dict[str, Any]:
        data = {
            "name": self.name,
            "grid": {"n": self.n},
            "time": {
                "dt": self.dt,
                "t_end": self.t_end,
                "record_every": self.record_every,
                "snapshot_times": list(self.snapshot_times),
            },
            "params": {"d1": self.params.d1, "d2": self.params.d2, "mu": self.params.mu, "nu": self.params.nu},
            "coefficients": self.coefficients.to_strings(),
            "output": {"dir": self.output_dir},
            "solver": {
                "rel_tol": self.solver.rel_tol,
                "max_iters": self.solver.max_iters,
                "dt_guard": self.solver.dt_guard,
            },
        }
        if self.provenance:
            data["provenance"] = list(self.provenance)
        return data

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)


def _is_finite_number(value: Any) -> bool:
    # json accepts NaN and Infinity
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        return False
    return not isinstance(value, float) or math.isfinite(value)


def _number(section: Dict[str, Any], key: str, where: str, problems: List[str], default: Any = None, required=False):
    value = section.get(key, default)
    if value is None:
        if required:
            problems.append(f"{where}.{key}: required field is missing")
        return None
    if not _is_finite_number(value):
        problems.append(f"{where}.{key}: expected a finite number, got {value!r}")
        return None
    return value


def _section(data: Dict[str, Any], key: str, problems: List[str]) -> Dict[str, Any]:
    value = data.get(key, {})
    if not isinstance(value, dict):
        problems.append(f"{key}: expected an object, got {type(value).__name__}")
        return {}
    return value


def config_from_dict(data: Dict[str, Any], defaults: Optional[Dict[str, Any]] = None) -> SimConfig:
    """
    Build and validate a SimConfig

    Args:
        data: Parsed JSON document
        defaults: Values for omitted optional fields (see DEFAULT_FIELDS)

    Returns:
        SimConfig

    Raises:
        ConfigError: listing every problem found
    """
    fallback = dict(DEFAULT_FIELDS)
    fallback.update(defaults or {})
    problems: List[str] = []

    if not isinstance(data, dict):
        raise ConfigError("Config must be a JSON object")

    grid = _section(data, "grid", problems)
    time = _section(data, "time", problems)
    params_section = _section(data, "params", problems)
    coeff_section = _section(data, "coefficients", problems)
    output = _section(data, "output", problems)
    solver_section = _section(data, "solver", problems)

    n = _number(grid, "n", "grid", problems, fallback["n"])
    if n is not None and (int(n) != n or n < 3):
        problems.append(f"grid.n: must be an integer >= 3, got {n}")

    dt = _number(time, "dt", "time", problems, fallback["dt"])
    if dt is not None and not dt > 0:
        problems.append(f"time.dt: must be > 0, got {dt}")
    t_end = _number(time, "t_end", "time", problems, required=True)
    if t_end is not None and dt is not None and dt > 0 and t_end < dt:
        problems.append(f"time.t_end: must be >= dt ({dt}), got {t_end}")
    record_every = _number(time, "record_every", "time", problems, fallback["record_every"])
    if record_every is not None and (int(record_every) != record_every or record_every < 1):
        problems.append(f"time.record_every: must be an integer >= 1, got {record_every}")

    snapshot_times: Tuple[float, ...] = ()
    raw_snapshots = time.get("snapshot_times", [])
    if not isinstance(raw_snapshots, list) or not all(_is_finite_number(s) for s in raw_snapshots):
        problems.append(f"time.snapshot_times: expected a list of finite numbers, got {raw_snapshots!r}")
    else:
        snapshot_times = tuple(float(s) for s in raw_snapshots)
        if t_end is not None:
            outside = [s for s in snapshot_times if s < 0 or s > t_end]
            if outside:
                problems.append(f"time.snapshot_times: {outside} outside [0, {t_end}]")

    values = {}
    for key, lower, strict in (("d1", 0.0, True), ("d2", 0.0, True), ("mu", 0.0, False), ("nu", 0.0, False)):
        value = _number(params_section, key, "params", problems, fallback.get(key), required=key in ("mu", "nu"))
        if value is not None and ((strict and not value > lower) or (not strict and not value >= lower)):
            problems.append(f"params.{key}: must be {'>' if strict else '>='} {lower}, got {value}")
        values[key] = value

    expressions = {}
    for key in COEFFICIENT_NAMES:
        src = coeff_section.get(key)
        if not isinstance(src, str):
            problems.append(f"coefficients.{key}: expected an expression string, got {src!r}")
            continue
        try:
            expressions[key] = parse(src)
        except ExpressionError as e:
            problems.append(f"coefficients.{key}: {e}")

    rel_tol = _number(solver_section, "rel_tol", "solver", problems, fallback["rel_tol"])
    if rel_tol is not None and not 0 < rel_tol < 1:
        problems.append(f"solver.rel_tol: must lie in (0, 1), got {rel_tol}")
    max_iters = _number(solver_section, "max_iters", "solver", problems, fallback["max_iters"])
    if max_iters is not None and (int(max_iters) != max_iters or max_iters < 1):
        problems.append(f"solver.max_iters: must be an integer >= 1, got {max_iters}")
    dt_guard = solver_section.get("dt_guard", fallback["dt_guard"])
    if not isinstance(dt_guard, bool):
        problems.append(f"solver.dt_guard: expected true or false, got {dt_guard!r}")

    output_dir = output.get("dir", fallback["output_dir"])
    if not isinstance(output_dir, str) or not output_dir:
        problems.append(f"output.dir: expected a path string, got {output_dir!r}")

    provenance = data.get("provenance", [])
    if not isinstance(provenance, list) or not all(isinstance(p, str) for p in provenance):
        problems.append("provenance: expected a list of strings")
        provenance = []

    if problems:
        raise ConfigError("Invalid simulation config", problems)

    return SimConfig(
        n=int(n),
        dt=float(dt),
        t_end=float(t_end),
        params=ModelParams(
            d1=float(values["d1"]), d2=float(values["d2"]), mu=float(values["mu"]), nu=float(values["nu"])
        ),
        coefficients=CoefficientSet(**expressions),
        record_every=int(record_every),
        snapshot_times=snapshot_times,
        output_dir=output_dir,
        solver=SolverSettings(
            rel_tol=float(rel_tol), max_iters=None if max_iters is None else int(max_iters), dt_guard=dt_guard
        ),
        name=str(data.get("name", "")),
        provenance=tuple(provenance),
    )


def load_config(path: Union[str, Path], defaults: Optional[Dict[str, Any]] = None) -> SimConfig:
    """
    Load a JSON run configuration

    Args:
        path: Config file path
        defaults: Values for omitted optional fields

    Returns:
        Validated SimConfig

    Raises:
        ConfigError: missing file, JSON syntax error (with line and column), or
            validation problems
    """
    path = Path(path)
    try:
        with open(path, "r", encoding="utf-8") as f:
            data = json.load(f)
    except FileNotFoundError:
        logger.error(f"Config file not found: {path}")
        raise ConfigError(f"Config file not found: {path}")
    except json.JSONDecodeError as e:
        logger.error(f"Config file {path} is not valid JSON: {e}")
        raise ConfigError(f"Config file {path} is not valid JSON: line {e.lineno}, column {e.colno}: {e.msg}")
    except OSError as e:
        logger.error(f"Cannot read config file {path}: {e}")
        raise ConfigError(f"Cannot read config file {path}: {e}")

    sim_config = config_from_dict(data, defaults)
    logger.info(f"Loaded simulation config from {path}")
    return sim_config
