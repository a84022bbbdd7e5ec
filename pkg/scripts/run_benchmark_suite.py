#!/usr/bin/env python3
"""Run the full-size four-filter benchmark across seeds and aggregate.

Defaults reproduce the headline accuracy/run-time experiment: the standard
configuration (120 samples over 30 minutes, internal steps 1000/100, EnKF
250 members, PF 1000 particles) across seeds 1..10.  Writes one artifact
directory per seed plus the cross-seed summary files, and prints the
aggregate table.

    python scripts/run_benchmark_suite.py --out results/benchmark
    python scripts/run_benchmark_suite.py --seeds 3 --start 7 --config my.cfg
"""

import argparse
import pathlib
import sys
import time

from cdfilt.bench import aggregate_text_table, run_many
from cdfilt.config import BenchConfig, parse_config


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--config", type=pathlib.Path, default=None,
                        help="key=value config file (defaults used when omitted)")
    parser.add_argument("--seeds", type=int, default=10,
                        help="number of consecutive seeds")
    parser.add_argument("--start", type=int, default=1, help="first seed")
    parser.add_argument("--out", type=pathlib.Path,
                        default=pathlib.Path("results/benchmark"))
    parser.add_argument("--dump-particles", action="store_true",
                        help="also write EnKF member / PF particle clouds")
    args = parser.parse_args(argv)

    cfg = parse_config(args.config) if args.config is not None else BenchConfig()
    seeds = range(args.start, args.start + args.seeds)
    t0 = time.perf_counter()
    results = run_many(cfg, seeds, out_root=args.out,
                       dump_particles=args.dump_particles)
    wall = time.perf_counter() - t0
    print(aggregate_text_table(results))
    print(f"{len(results)} runs in {wall / 60.0:.1f} min -> {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
