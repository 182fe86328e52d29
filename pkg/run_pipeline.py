#!/usr/bin/env python3
"""
Unfitted ROM Pipeline
=====================
Offline/online reduced-order modelling of the shipped scenarios.

Usage:
    python run_pipeline.py <command> [--scenario NAME] [options]

Commands:
    offline      full-order sweep over the training sample -> snapshot store
    pod          POD basis (+ supremizers for Stokes) from the snapshot store
    online       reduced solve at --mu, or the test-set error report
    benchmark    FOM vs ROM timing table
    convergence  full-order refinement and conditioning tables

Examples:
    python run_pipeline.py offline --scenario heat --n-train 400
    python run_pipeline.py pod --scenario heat --modes 10,20,50,100
    python run_pipeline.py online --scenario heat --mu=-0.015
    python run_pipeline.py online --scenario stokes2p --mu=-1.25,0.05
    python run_pipeline.py pod --scenario ellipse --extension zero --transport false
    python run_pipeline.py benchmark --scenario stokes1p --supremizers true

Exit codes: 0 ok, 2 configuration / input error, 3 numerical failure.
"""

import argparse
import logging
import os
import sys

from dotenv import load_dotenv

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

from src.pipeline.commands import cmd_benchmark, cmd_convergence, cmd_offline, cmd_online, cmd_pod
from src.scenarios.catalog import SCENARIOS
from src.scenarios.config import load_config
from src.utils.errors import (
    ConfigError,
    GeometryDegenerateError,
    InvalidArgumentError,
    ProjectionFailureError,
    RankDeficientError,
    SolverFailureError,
)
from src.utils.runtime import resolve_threads

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3

COMMANDS = ('offline', 'pod', 'online', 'benchmark', 'convergence')


def _bool(text: str) -> bool:
    value = text.strip().lower()
    if value in ('1', 'true', 'yes', 'on'):
        return True
    if value in ('0', 'false', 'no', 'off'):
        return False
    raise argparse.ArgumentTypeError(f"expected true/false, got {text!r}")


def _ints(text: str):
    try:
        return [int(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def _floats(text: str):
    try:
        return [float(v) for v in text.split(',') if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        description="Unfitted FEM + POD-Galerkin reduced-order pipeline",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    parser.add_argument('command', choices=COMMANDS)
    parser.add_argument('--scenario', choices=sorted(SCENARIOS), help="scenario id (default: heat)")
    parser.add_argument('--config', help="JSON file with ScenarioConfig keys")
    parser.add_argument('--modes', type=_ints, help="mode counts, e.g. 10,20,50")
    parser.add_argument('--seed', type=int, help="training sampler seed (test set uses seed + 1)")
    parser.add_argument('--extension', choices=('zero', 'smooth'))
    parser.add_argument('--transport', type=_bool, help="true/false")
    parser.add_argument('--supremizers', type=_bool, help="true/false (Stokes only)")
    parser.add_argument('--inner', choices=('euclidean', 'mass'), help="POD inner product")
    parser.add_argument('--n-train', type=int, dest='n_train')
    parser.add_argument('--n-test', type=int, dest='n_test')
    parser.add_argument('--nx', type=int)
    parser.add_argument('--ny', type=int)
    parser.add_argument('--out', help="output directory (default output/<scenario>)")
    parser.add_argument('--threads', type=int, help="worker cap (fallback: URM_THREADS, then 1)")
    parser.add_argument('--mu', type=_floats, help="online: single parameter, e.g. -0.015 or 1,1,0,0")
    parser.add_argument('--levels', type=_ints, help="convergence: mesh levels, e.g. 32,64")
    parser.add_argument('--verbose', '-v', action='store_true')
    return parser


def run(args: argparse.Namespace) -> int:
    overrides = {
        'scenario': args.scenario,
        'modes': args.modes,
        'seed': args.seed,
        'extension': args.extension,
        'transport': args.transport,
        'supremizers': args.supremizers,
        'inner': args.inner,
        'n_train': args.n_train,
        'n_test': args.n_test,
        'nx': args.nx,
        'ny': args.ny,
        'out': args.out,
        'threads': args.threads,
    }
    config = load_config(args.config, **overrides)
    threads = resolve_threads(config.threads)

    if args.command == 'offline':
        cmd_offline(config, threads)
    elif args.command == 'pod':
        cmd_pod(config)
    elif args.command == 'online':
        cmd_online(config, args.mu, threads)
    elif args.command == 'benchmark':
        cmd_benchmark(config)
    else:
        cmd_convergence(config, args.levels)
    return EXIT_OK


def main(argv=None) -> int:
    load_dotenv()
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
    )
    try:
        return run(args)
    except (ConfigError, InvalidArgumentError, FileNotFoundError) as e:
        print(f"❌ {e}")
        return EXIT_CONFIG
    except (SolverFailureError, RankDeficientError, ProjectionFailureError, GeometryDegenerateError) as e:
        print(f"❌ {type(e).__name__}: {e}")
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
