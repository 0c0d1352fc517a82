"""Desk-scale look at the cube-root convergence rate.

Runs the Gaussian shift scenario over a doubling grid of sample sizes and
fits log-log slopes of the mean errors. Slopes near -1/3 and roughly flat
scaled errors indicate the expected rate. The default grid is small so the
script finishes in well under a minute; widen it for sharper slopes.
"""

import argparse
from dataclasses import replace

from monodist.sim.harness import SCENARIOS, run_study, standard_rate_summaries


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--n-grid", default="256,512,1024,2048")
    parser.add_argument("--reps", type=int, default=5)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    config = replace(SCENARIOS["gaussian_shift"], reps=args.reps, seed=args.seed)
    grid = [int(v) for v in args.n_grid.split(",")]
    results = run_study(config, grid)
    for s in standard_rate_summaries(config, results):
        scaled = " ".join(f"{v:.3f}" for v in s.scaled_errors)
        print(f"{s.which:24s} slope={s.slope:+.3f} scaled errors: {scaled}")


if __name__ == "__main__":
    main()
