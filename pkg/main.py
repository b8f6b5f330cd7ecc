"""
Main Entry Script
Command-line interface for running, analysing and sweeping the harvested
competition-diffusion simulator
"""

import argparse
import logging
import sys
from typing import List, Optional

from config import config
from core.errors import (
    AnalysisError,
    CoefficientError,
    ConfigError,
    ExpressionError,
    NumericalError,
)
from core.sim_config import SimConfig, load_config
from core.stepper import ModelParams
from experiments_config import get_preset, list_presets
from orchestrator import EIGEN_STATES, SimulationOrchestrator

# Configure logging
logging.basicConfig(
    level=logging.INFO,
    format='[%(asctime)s] %(name)s - %(levelname)s - %(message)s',
    datefmt='%Y-%m-%d %H:%M:%S'
)
logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3


class UsageError(Exception):
    """Bad command line"""


class CliArgumentParser(argparse.ArgumentParser):
    """ArgumentParser that raises instead of exiting with status 2"""

    def error(self, message):
        raise UsageError(f"{self.prog}: error: {message}")


def _float_list(text: str) -> List[float]:
    try:
        values = [float(part) for part in text.split(",") if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got '{text}'")
    if not values:
        raise argparse.ArgumentTypeError("expected at least one number")
    return values


def _load(path: str) -> SimConfig:
    return load_config(path, config.sim_defaults())


def run_command(args) -> int:
    sim_config = _load(args.config)
    traj = SimulationOrchestrator().run(sim_config)
    final = traj.records[-1]
    print(f"t={final.t:.12g} energy_u={final.energy_u:.12g} energy_v={final.energy_v:.12g}")
    print(f"outputs: {sim_config.output_dir}")
    return EXIT_OK


def preset_command(args) -> int:
    if args.list:
        for line in list_presets():
            print(line)
        return EXIT_OK
    if not args.name:
        raise UsageError("preset: --name is required unless --list is given")

    sim_config = get_preset(args.name, args.variant, n=args.n, output_dir=args.output_dir)
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as f:
            f.write(sim_config.to_json() + "\n")
        logger.info(f"✅ Wrote preset {sim_config.name} to {args.emit}")
        return EXIT_OK

    traj = SimulationOrchestrator().run(sim_config)
    final = traj.records[-1]
    print(f"t={final.t:.12g} energy_u={final.energy_u:.12g} energy_v={final.energy_v:.12g}")
    print(f"outputs: {sim_config.output_dir}")
    return EXIT_OK


def regime_command(args) -> int:
    sim_config = _load(args.config) if args.config else None
    base = sim_config.params if sim_config else ModelParams()
    params = ModelParams(d1=base.d1, d2=base.d2, mu=args.mu, nu=args.nu)
    report = SimulationOrchestrator().regime_report(params, sim_config)
    for line in report.lines():
        print(line)
    return EXIT_OK


def eig_command(args) -> int:
    sim_config = _load(args.config)
    for label, pair in SimulationOrchestrator().eigen_report(sim_config, args.state):
        print(f"{label} lambda={pair.lam:.12g} residual={pair.residual:.3e}")
    return EXIT_OK


def sweep_command(args) -> int:
    sim_config = _load(args.config)
    summary = SimulationOrchestrator().sweep(
        sim_config, args.mu, args.nu, workers=args.workers, thresholds=not args.no_thresholds
    )
    print(summary.to_string(index=False))
    return EXIT_OK


def config_command(args) -> int:
    config.print_summary()
    for key, value in config.get_summary().items():
        print(f"{key}: {value}")
    return EXIT_OK


def build_parser() -> CliArgumentParser:
    parser = CliArgumentParser(
        prog="main.py",
        description="Harvested competition-diffusion simulator"
    )
    parser.add_argument('-v', '--verbose', action='store_true', help='Log at DEBUG level')

    subparsers = parser.add_subparsers(dest='command', help='Available commands')

    # Run command
    run_parser = subparsers.add_parser('run', help='Simulate a JSON config and write outputs')
    run_parser.add_argument('--config', required=True, help='Path to the run config')
    run_parser.set_defaults(handler=run_command)

    # Preset command
    preset_parser = subparsers.add_parser('preset', help='Run or emit a reproduced experiment')
    preset_parser.add_argument('--name', help='Preset name (exp1 ... exp5)')
    preset_parser.add_argument('--variant', help='Variant key, "mu,nu" pair or init-<value> (exp1)')
    preset_parser.add_argument('--emit', help='Write the preset config to this path instead of running it')
    preset_parser.add_argument('--n', type=int, help=f'Grid points per side (default: {config.grid.n})')
    preset_parser.add_argument('--output-dir', help='Output directory for the run')
    preset_parser.add_argument('--list', action='store_true', help='List presets and variants')
    preset_parser.set_defaults(handler=preset_command)

    # Regime command
    regime_parser = subparsers.add_parser('regime', help='Predict the long-time regime for (mu, nu)')
    regime_parser.add_argument('--mu', type=float, required=True, help='Harvesting coefficient of u')
    regime_parser.add_argument('--nu', type=float, required=True, help='Harvesting coefficient of v')
    regime_parser.add_argument('--config', help='Stationary config used to compute nu1/mu1')
    regime_parser.set_defaults(handler=regime_command)

    # Eigenvalue command
    eig_parser = subparsers.add_parser('eig', help='Principal eigenvalue at a steady state')
    eig_parser.add_argument('--config', required=True, help='Path to a stationary run config')
    eig_parser.add_argument('--state', choices=EIGEN_STATES, default='trivial', help='Steady state to linearize at')
    eig_parser.set_defaults(handler=eig_command)

    # Sweep command
    sweep_parser = subparsers.add_parser('sweep', help='Run a grid of (mu, nu) pairs')
    sweep_parser.add_argument('--config', required=True, help='Base run config')
    sweep_parser.add_argument('--mu', type=_float_list, required=True, help='Comma-separated mu values')
    sweep_parser.add_argument('--nu', type=_float_list, required=True, help='Comma-separated nu values')
    sweep_parser.add_argument('--workers', type=int, default=1, help='Worker processes (default: 1)')
    sweep_parser.add_argument('--no-thresholds', action='store_true', help='Skip nu1/mu1 estimation')
    sweep_parser.set_defaults(handler=sweep_command)

    # Config command
    config_parser = subparsers.add_parser('config', help='Show configuration')
    config_parser.set_defaults(handler=config_command)

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """Main entry point; returns the process exit code"""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if args.command is None:
            parser.print_help()
            return EXIT_USAGE
        if getattr(args, 'workers', 1) < 1:
            raise UsageError("sweep: --workers must be >= 1")
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except SystemExit as e:
        # --help
        return e.code if isinstance(e.code, int) else EXIT_OK

    if args.verbose:
        logging.getLogger().setLevel(logging.DEBUG)

    try:
        return args.handler(args)
    except UsageError as e:
        print(e, file=sys.stderr)
        return EXIT_USAGE
    except (ConfigError, ExpressionError, CoefficientError) as e:
        logger.error(f"Configuration error: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except (NumericalError, AnalysisError) as e:
        logger.error(f"Numerical failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as e:
        logger.error(f"I/O failure: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as e:
        logger.error(f"Invalid argument: {e}")
        print(f"error: {e}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
