"""Command-line entry point.

Exit codes: 0 success, 1 invalid configuration or usage, 2 some jobs failed.
"""
from __future__ import annotations

import argparse
import json
import os
import sys

from .config import ConfigError, SweepConfig, TauGrid
from .emit import emit
from .recipes import RECIPES, figure_recipe
from .sweep import run_sweep

WORKERS_ENV = "TROTTER_CHAOS_WORKERS"


def _default_workers() -> int:
    try:
        return max(1, int(os.environ.get(WORKERS_ENV, "1")))
    except ValueError:
        return 1


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--out", default=None, help="output directory (default: the config's out_dir)")
    common.add_argument("--workers", type=int, default=None,
                        help=f"parallel worker processes (default: ${WORKERS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=None, help="seed for random initial states")
    common.add_argument("--format", choices=("csv", "json", "both"), default="csv")
    common.add_argument("--no-cache", action="store_true", help="recompute every job")

    parser = argparse.ArgumentParser(prog="trotter-chaos",
                                     description="Trotterised dynamics, chaos signatures and error sweeps.")
    sub = parser.add_subparsers(dest="command", required=True)

    sim = sub.add_parser("simulate", parents=[common], help="time series for one model and step size")
    sim.add_argument("config", nargs="?", help="JSON config; overrides the flags below")
    sim.add_argument("--model", default="a2a_ising")
    sim.add_argument("--size", type=float, default=64)
    sim.add_argument("--tau", type=float, nargs="+", default=[0.5])
    sim.add_argument("--t-max", type=float, default=200.0)
    sim.add_argument("--signatures", nargs="+", default=["observable", "participation_ratio"])

    sweep = sub.add_parser("sweep", parents=[common], help="run a JSON sweep config")
    sweep.add_argument("config")

    rec = sub.add_parser("recipe", parents=[common], help="run a named experiment")
    rec.add_argument("name", nargs="?")
    rec.add_argument("--list", action="store_true", help="list recipe names and exit")
    rec.add_argument("--print", action="store_true", help="print the config as JSON instead of running it")
    return parser


def _config(args) -> SweepConfig:
    if args.command == "recipe":
        return figure_recipe(args.name)
    if args.command == "sweep" or args.config:
        cfg = SweepConfig.from_json(args.config)
    else:
        cfg = SweepConfig(model=args.model, sizes=[args.size], taus=TauGrid(values=args.tau),
                          signatures=args.signatures, windows=[args.t_max], name="simulate").validate()
    if args.command == "simulate":
        cfg.mode = "series"
    return cfg


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "recipe" and (args.list or not args.name):
        print("\n".join(sorted(RECIPES)))
        return 0 if args.list else 1
    try:
        cfg = _config(args)
        if args.seed is not None:
            cfg.seed = args.seed
        if args.out is not None:
            cfg.out_dir = args.out
        cfg.workers = args.workers if args.workers is not None else (
            cfg.workers if cfg.workers > 1 else _default_workers())
        cfg.validate()
    except KeyError as exc:
        print(exc.args[0], file=sys.stderr)
        return 1
    except ConfigError as exc:
        print(exc, file=sys.stderr)
        return 1
    if args.command == "recipe" and args.print:
        print(json.dumps(cfg.to_dict(), indent=1))
        return 0
    result = run_sweep(cfg, use_cache=not args.no_cache)
    written = emit(result.rows, cfg.out_dir, cfg.name, args.format, cfg.to_dict(), result.failures)
    print(f"{len(result.rows)} rows ({result.computed} jobs computed, {result.cached} cached, "
          f"{len(result.failures)} failed)")
    for path in written:
        print(path)
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
