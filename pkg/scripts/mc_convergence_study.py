#!/usr/bin/env python3
"""Monte Carlo convergence of the EnKF and PF one-step posterior mean.

Scalar problem with a closed-form answer: prior N(0, 1), measurement
y = x + v with unit noise variance, observed y = 0.8, so the optimal
posterior mean is 0.4.  For each ensemble / particle count the script
repeats the measurement update over fresh draws, reports the RMSE of the
posterior mean against the exact value, and fits the log-log slope
(theory: -1/2).

    python scripts/mc_convergence_study.py
    python scripts/mc_convergence_study.py --sizes 100,1000 --replicates 500,500
"""

import argparse
import sys

import numpy as np

from cdfilt.enkf import enkf_init, enkf_measurement_update, ensemble_mean_cov
from cdfilt.models import GaussianBelief, Model, NoiseSpec
from cdfilt.pf import pf_estimate, pf_init, pf_likelihood_weights, systematic_resample
from cdfilt.rng import RngStream

EXACT_MEAN = 0.4  # K = P/(P+R) = 1/2 applied to y = 0.8


def scalar_measurement_model():
    return Model(
        n_x=1, n_u=0, n_d=0, n_w=0, n_y=1,
        theta=np.zeros(0),
        drift=lambda t, x, u, d, th: np.zeros(1),
        diffusion=lambda t, x, u, d, th: np.zeros((1, 0)),
        measurement=lambda t, x, th: x.copy(),
        measurement_jacobian=lambda t, x, th: np.eye(1),
        constant_diffusion=True,
    )


def _int_list(raw):
    return [int(v) for v in raw.split(",")]


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=_int_list, default=[100, 1000, 10_000, 100_000],
                        help="comma-separated ensemble/particle counts")
    parser.add_argument("--replicates", type=_int_list, default=[400, 400, 100, 30],
                        help="replicates per size (same length as --sizes)")
    parser.add_argument("--seed", type=int, default=77)
    parser.add_argument("--out", type=str, default=None, help="optional CSV path")
    args = parser.parse_args(argv)
    if len(args.sizes) != len(args.replicates):
        parser.error("--sizes and --replicates must have the same length")

    model = scalar_measurement_model()
    belief = GaussianBelief(np.zeros(1), np.eye(1))
    noise = NoiseSpec(np.eye(1))
    y = np.array([0.8])

    rmse = {"enkf": [], "pf": []}
    for kind, seed in (("enkf", args.seed), ("pf", args.seed + 1)):
        rng = RngStream(seed)
        for n, m in zip(args.sizes, args.replicates):
            errs = np.empty(m)
            for j in range(m):
                if kind == "enkf":
                    members = enkf_init(belief, n, rng)
                    members = enkf_measurement_update(members, model, 0.0, y, noise, rng)
                    errs[j] = ensemble_mean_cov(members)[0][0] - EXACT_MEAN
                else:
                    particles = pf_init(belief, n, rng)
                    w = pf_likelihood_weights(particles, model, 0.0, y, noise)
                    particles = systematic_resample(particles, w, rng.uniform())
                    errs[j] = pf_estimate(particles).mean[0] - EXACT_MEAN
            rmse[kind].append(float(np.sqrt(np.mean(errs ** 2))))

    print(f"{'N':>10}{'replicates':>12}{'EnKF RMSE':>12}{'PF RMSE':>12}")
    for i, (n, m) in enumerate(zip(args.sizes, args.replicates)):
        print(f"{n:>10}{m:>12}{rmse['enkf'][i]:>12.3e}{rmse['pf'][i]:>12.3e}")
    logn = np.log10(args.sizes)
    for kind in ("enkf", "pf"):
        slope = np.polyfit(logn, np.log10(rmse[kind]), 1)[0]
        print(f"{kind} log-log slope: {slope:+.3f} (theory -0.5)")

    if args.out:
        rows = ["n,replicates,enkf_rmse,pf_rmse"] + [
            f"{n},{m},{rmse['enkf'][i]:.17g},{rmse['pf'][i]:.17g}"
            for i, (n, m) in enumerate(zip(args.sizes, args.replicates))
        ]
        with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
            fh.write("\n".join(rows) + "\n")
        print(f"wrote {args.out}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
