#!/usr/bin/env python3
"""Sweep the Gaussian width and show how it shapes the consistency reward.

For each sigma, draws rating errors from a normal distribution and prints
the mean consistency reward plus the reward earned at fixed 1/2/3-point
errors.  Useful for picking a sigma whose gradient actually discriminates
across the error spread a policy produces.

Usage:
    python scripts/sigma_sweep.py --error-std 1.5 --samples 5000
"""

import argparse
import math
import random

from reviewkit.rewards import rating_consistency_reward


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sigmas", type=float, nargs="+", default=[0.5, 1.0, 1.5, 2.0, 3.0])
    parser.add_argument("--error-std", type=float, default=1.5)
    parser.add_argument("--samples", type=int, default=5000)
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args()

    rng = random.Random(args.seed)
    errors = [rng.gauss(0.0, args.error_std) for _ in range(args.samples)]

    header = f"{'sigma':>6}  {'mean reward':>11}  {'@1pt':>6}  {'@2pt':>6}  {'@3pt':>6}"
    print(header)
    print("-" * len(header))
    for sigma in args.sigmas:
        mean = math.fsum(
            rating_consistency_reward(5.0, 5.0 + error, sigma) for error in errors
        ) / len(errors)
        fixed = [rating_consistency_reward(5.0, 5.0 + gap, sigma) for gap in (1, 2, 3)]
        print(
            f"{sigma:>6.2f}  {mean:>11.4f}  {fixed[0]:>6.3f}  {fixed[1]:>6.3f}  {fixed[2]:>6.3f}"
        )


if __name__ == "__main__":
    main()
