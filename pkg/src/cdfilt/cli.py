"""Command-line entry points.

Four subcommands:

``simulate``
    Generate one stochastic truth trajectory plus noisy measurements and
    write ``truth.csv``.

``estimate``
    Run the requested filters against a previously saved ``truth.csv``
    and write per-filter estimate files, the combined record, and the
    accuracy/run-time summary.

``bench``
    Simulate and estimate in one go, optionally across several seeds.

``check``
    Run the built-in invariant suite and exit nonzero on any failure.
"""

import argparse
import dataclasses
import pathlib
import sys

from . import bench
from .checks import run_checks
from .config import FILTER_NAMES, BenchConfig, ConfigError, parse_config

__all__ = ["main", "build_parser"]


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cdfilt",
        description="State estimation benchmarks for continuous-discrete stochastic systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, *, filters=True):
        p.add_argument("--config", type=pathlib.Path, default=None,
                       help="key=value config file (defaults used when omitted)")
        p.add_argument("--seed", type=int, default=None, help="override the config seed")
        p.add_argument("--out", type=pathlib.Path, default=pathlib.Path("out"),
                       help="output directory (created if missing)")
        if filters:
            p.add_argument("--filters", type=str, default=None,
                           help="comma-separated subset of: " + ",".join(FILTER_NAMES))

    p_sim = sub.add_parser("simulate", help="generate a truth trajectory and measurements")
    add_common(p_sim, filters=False)

    p_est = sub.add_parser("estimate", help="run filters against a saved truth.csv")
    add_common(p_est)
    p_est.add_argument("--truth", type=pathlib.Path, required=True,
                       help="truth.csv produced by `cdfilt simulate`")
    p_est.add_argument("--dump-particles", action="store_true",
                       help="also write EnKF member / PF particle clouds per sample")

    p_bench = sub.add_parser("bench", help="simulate and estimate in one run")
    add_common(p_bench)
    p_bench.add_argument("--seeds", type=int, default=1,
                         help="number of consecutive seeds starting at the config seed")
    p_bench.add_argument("--dump-particles", action="store_true",
                         help="also write EnKF member / PF particle clouds per sample")

    sub.add_parser("check", help="run the built-in invariant suite")
    return parser


def _load_config(args):
    cfg = parse_config(args.config) if args.config is not None else BenchConfig()
    overrides = {}
    if args.seed is not None:
        overrides["seed"] = args.seed
    if getattr(args, "filters", None):
        overrides["filters"] = tuple(
            name.strip() for name in args.filters.split(",") if name.strip()
        )
    if overrides:
        cfg = dataclasses.replace(cfg, **overrides)
    return cfg


def _cmd_simulate(args):
    cfg = _load_config(args)
    truth = bench.simulate_truth(cfg)
    args.out.mkdir(parents=True, exist_ok=True)
    path = args.out / "truth.csv"
    bench.write_truth_csv(truth, path)
    print(f"wrote {path} ({truth.n_samples} samples, seed {cfg.seed})")
    return 0


def _cmd_estimate(args):
    cfg = _load_config(args)
    truth = bench.read_truth_csv(args.truth)
    if truth.n_samples != cfg.n_samples:
        print(f"error: truth file holds {truth.n_samples} samples, config expects "
              f"{cfg.n_samples}", file=sys.stderr)
        return 2
    record, summary = bench.run_filters(cfg, truth, dump_particles=args.dump_particles)
    bench.write_outputs(args.out, truth, record, summary)
    print(summary.text_table())
    failed = [t.name for t in record.traces if t.error is not None]
    if failed:
        print("filters aborted: " + ", ".join(failed), file=sys.stderr)
        return 1
    return 0


def _cmd_bench(args):
    cfg = _load_config(args)
    if args.seeds < 1:
        print("error: --seeds must be >= 1", file=sys.stderr)
        return 2
    if args.seeds == 1:
        record, summary = bench.run_benchmark(cfg, out_dir=args.out,
                                              dump_particles=args.dump_particles)
        print(summary.text_table())
        failed = [t.name for t in record.traces if t.error is not None]
        if failed:
            print("filters aborted: " + ", ".join(failed), file=sys.stderr)
            return 1
        return 0
    seeds = [cfg.seed + i for i in range(args.seeds)]
    summaries = bench.run_many(cfg, seeds, args.out, dump_particles=args.dump_particles)
    print(bench.aggregate_text_table(summaries))
    return 0


def _cmd_check(args):
    return 0 if run_checks() else 1


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    handler = {
        "simulate": _cmd_simulate,
        "estimate": _cmd_estimate,
        "bench": _cmd_bench,
        "check": _cmd_check,
    }[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
