"""Command-line entry point: ``surfmatch <subcommand> ...``."""

from __future__ import annotations

import argparse
import json
import sys

from . import analytics
from .circuit import NoiseModel, build_cycle_circuit
from .harness import ConfigError, TrialConfig, default_workers, run, sweep, to_csv
from .layout import build_layout
from .tracer import build_detector_graphs, export_graph, perfect_sources, trace_all_single_faults


def _floats(text: str) -> list[float]:
    return [float(t) for t in text.split(",") if t.strip()]


def _ints(text: str) -> list[int]:
    return [int(t) for t in text.split(",") if t.strip()]


def _add_cell_args(sp: argparse.ArgumentParser) -> None:
    sp.add_argument("--mode", choices=("perfect2d", "fault_tolerant3d"), default="perfect2d")
    sp.add_argument("--decoder", choices=("independent", "correlated"), default="independent")
    sp.add_argument("--rounds", type=int, default=None, help="FT mode only; defaults to d")
    sp.add_argument("--trials", type=int, required=True)
    sp.add_argument("--seed", type=int, required=True, help="master seed (mandatory)")
    sp.add_argument("--workers", type=int, default=None,
                    help="worker processes (default: $SURFMATCH_WORKERS or 1)")
    sp.add_argument("--target-failures", type=int, default=None,
                    help="stop once this many logical X failures are seen")
    sp.add_argument("--min-trials", type=int, default=0)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="surfmatch", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("layout", help="emit the code layout as JSON")
    sp.add_argument("--d", type=int, required=True)

    sp = sub.add_parser("trace", help="emit a detector graph as JSON")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    sp.add_argument("--mode", choices=("perfect2d", "fault_tolerant3d"), default="perfect2d")
    sp.add_argument("--rounds", type=int, default=None)
    sp.add_argument("--basis", choices=("X", "Z"), default="X")

    sp = sub.add_parser("simulate", help="run one (d, p) cell")
    sp.add_argument("--d", type=int, required=True)
    sp.add_argument("--p", type=float, required=True)
    _add_cell_args(sp)
    sp.add_argument("--format", choices=("json", "csv"), default="json")

    sp = sub.add_parser("sweep", help="run a (d, p) grid and write CSV")
    sp.add_argument("--d", type=_ints, required=True, help="comma-separated distances")
    sp.add_argument("--p", type=_floats, required=True, help="comma-separated error rates")
    _add_cell_args(sp)
    sp.add_argument("--output", default="-", help="CSV path, '-' for stdout")

    sp = sub.add_parser("analytic", help="closed-form logical error estimates")
    sp.add_argument("--d", type=int, required=True, help="even code distance")
    sp.add_argument("--p", type=float, required=True)

    sp = sub.add_parser("census", help="count X/Y strings with no odd Y chain")
    sp.add_argument("--n", type=int, default=20)
    sp.add_argument("--k", type=int, default=None, help="defaults to ceil(n/2)")

    sub.add_parser("paths", help="path counts for the two-event distance-9 example")
    return ap


def _config(args, d: int, p: float) -> TrialConfig:
    workers = args.workers if args.workers is not None else default_workers()
    return TrialConfig(mode=args.mode, decoder=args.decoder, d=d, p=p, trials=args.trials,
                       seed=args.seed, rounds=args.rounds, workers=workers,
                       target_failures=args.target_failures, min_trials=args.min_trials)


def _emit(obj) -> None:
    print(json.dumps(obj))


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "layout":
            print(build_layout(args.d).to_json())
        elif args.command == "trace":
            layout = build_layout(args.d)
            if args.mode == "perfect2d":
                sources = perfect_sources(layout, args.p)
            else:
                rounds = args.d if args.rounds is None else args.rounds
                sources = trace_all_single_faults(build_cycle_circuit(layout, rounds),
                                                  NoiseModel(args.p), layout)
            gx, gz = build_detector_graphs(sources)
            print(export_graph(gx if args.basis == "X" else gz))
        elif args.command == "simulate":
            stats = run(_config(args, args.d, args.p))
            if args.format == "csv":
                sys.stdout.write(to_csv([stats]))
            else:
                _emit(stats.to_dict())
        elif args.command == "sweep":
            cfg = _config(args, args.d[0], args.p[0])
            common = {k: getattr(cfg, k) for k in ("mode", "decoder", "trials", "seed", "workers",
                                                   "target_failures", "min_trials")}
            common["rounds"] = args.rounds
            text = to_csv(sweep(args.d, args.p, **common))
            if args.output == "-":
                sys.stdout.write(text)
            else:
                with open(args.output, "w") as fh:
                    fh.write(text)
        elif args.command == "analytic":
            out = {"d": args.d, "p": args.p,
                   "pl_basic": analytics.pl_basic(args.d, args.p),
                   "pl_ideal": analytics.pl_ideal(args.d, args.p),
                   "split_count_ratio": str(analytics.split_count_ratio(args.d)),
                   "split_count_ratio_float": float(analytics.split_count_ratio(args.d))}
            _emit(out)
        elif args.command == "census":
            k = (args.n + 1) // 2 if args.k is None else args.k
            res = analytics.census_no_odd_y_chain(args.n, k)
            _emit({"n": args.n, "k": k, **res._asdict()})
        elif args.command == "paths":
            c = analytics.count_two_event_paths()
            _emit({"pair_length": c.pair_length, "pair_paths": c.pair_paths,
                   "boundary_length": c.boundary_length, "boundary_min": c.boundary_min,
                   "boundary_next": c.boundary_next, "crossover": str(c.crossover)})
    except (ConfigError, ValueError) as exc:
        print(f"surfmatch: error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
