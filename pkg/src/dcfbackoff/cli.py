"""Command line entry point: ``simulate``, ``sweep``, ``analytic`` and ``presets``."""
from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import asdict

from .analytic import EquilibriumNotConverged, analyze
from .backoff import BackoffParams, ContractViolation, StrategyKind
from .phy import PhyParams
from .sim import SimConfig, TrafficModel, arrival_rate_for_load, run
from .sweep import PRESETS, ConfigError, SweepError, emit, load_config, preset, run_sweep

EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _strategy(value):
    try:
        return StrategyKind.parse(value)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _add_backoff_args(p):
    p.add_argument("--strategy", type=_strategy, default=StrategyKind.BEB)
    p.add_argument("--n", type=int, default=50, help="number of stations")
    p.add_argument("--cw-min", type=int, default=8)
    p.add_argument("--cw-max", type=int, default=1024)
    p.add_argument("--m", type=int, default=6, help="maximum backoff stage")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="dcfbackoff", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    sim = sub.add_parser("simulate", help="one run, JSON metrics on stdout")
    _add_backoff_args(sim)
    load = sim.add_mutually_exclusive_group()
    load.add_argument("--load", type=float, help="normalized offered load (default 0.5)")
    load.add_argument("--arrival-rate", type=float, help="packets/s per station; 'inf' saturates")
    sim.add_argument("--queue-capacity", type=int, default=1)
    sim.add_argument("--sim-time", type=float, default=100.0, help="simulated seconds")
    sim.add_argument("--warmup", type=float, default=5.0, help="seconds discarded at start")
    sim.add_argument("--seed", type=int, default=0)

    sw = sub.add_parser("sweep", help="run a grid of experiments")
    sw.add_argument("--config", help="flat TOML file with SweepSpec fields")
    sw.add_argument("--preset", choices=sorted(PRESETS))
    sw.add_argument("--out", default="-", help="output path ('-' for stdout)")
    sw.add_argument("--format", choices=["csv", "json"], default="csv")
    sw.add_argument("--workers", type=int, default=1)

    an = sub.add_parser("analytic", help="reconstructed equilibrium estimate")
    _add_backoff_args(an)

    sub.add_parser("presets", help="list experiment presets")
    return parser


def _simulate(args) -> dict:
    if args.arrival_rate is not None:
        rate = args.arrival_rate
    else:
        rate = arrival_rate_for_load(0.5 if args.load is None else args.load, args.n, PhyParams())
    config = SimConfig(
        n_stations=args.n,
        strategy=args.strategy,
        backoff=BackoffParams.default(args.cw_min, args.cw_max, args.m),
        traffic=TrafficModel(rate, args.queue_capacity),
        sim_time_us=int(round(args.sim_time * 1e6)),
        warmup_us=int(round(args.warmup * 1e6)),
        seed=args.seed,
    )
    out = asdict(run(config))
    out.update(strategy=config.strategy.value, n=args.n, cw_min=args.cw_min,
               cw_max=args.cw_max, m=args.m, seed=args.seed, arrival_rate_pps=rate)
    return out


def _jsonable(obj):
    if isinstance(obj, float) and (math.isnan(obj) or math.isinf(obj)):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, list):
        return [_jsonable(v) for v in obj]
    return obj


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "presets":
            for name, (desc, _) in PRESETS.items():
                print(f"{name}\t{desc}")
        elif args.command == "analytic":
            params = BackoffParams.default(args.cw_min, args.cw_max, args.m)
            print(json.dumps(analyze(args.strategy, args.n, params), indent=2))
        elif args.command == "simulate":
            print(json.dumps(_jsonable(_simulate(args)), indent=2))
        elif args.command == "sweep":
            if args.config is None and args.preset is None:
                raise ConfigError("sweep needs --config and/or --preset")
            if args.config is not None:
                spec = load_config(args.config, args.preset)
            else:
                spec = preset(args.preset)
            emit(run_sweep(spec, workers=args.workers), args.format, args.out)
    except (ConfigError, ContractViolation, FileNotFoundError, ValueError) as exc:
        print(f"dcfbackoff: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (SweepError, EquilibriumNotConverged, OSError, RuntimeError) as exc:
        print(f"dcfbackoff: runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
