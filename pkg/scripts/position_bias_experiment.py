#!/usr/bin/env python3
"""Measure how order randomization neutralizes judge position bias.

Runs the pairwise comparison against an in-process judge stub with a
configurable preference for slot 1, across many seeds, and reports the raw
slot-1 preference versus the candidate win rate after order back-mapping.
A bias strength of 1.0 reproduces the worst case (a judge that always picks
the first review shown); the debiased win rate should sit near 0.5
regardless of the bias.

Usage:
    python scripts/position_bias_experiment.py --trials 1000 --bias 1.0
"""

import argparse
import random

from reviewkit.judge import EndpointConfig, compare_reviews

CANDIDATE = "## Summary\ncandidate review\n## Strengths\n- a\n## Weaknesses\n- b"
REFERENCE = "## Summary\nreference review\n## Strengths\n- c\n## Weaknesses\n- d"


def make_biased_transport(bias: float, rng: random.Random):
    """Judge stub preferring slot 1 with probability ``bias``."""
    slot1_picks = {"n": 0}

    def transport(endpoint, messages):
        pick_first = rng.random() < bias
        slot1_picks["n"] += int(pick_first)
        return "REVIEW_1_BETTER" if pick_first else "REVIEW_2_BETTER"

    return transport, slot1_picks


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--trials", type=int, default=1000)
    parser.add_argument("--bias", type=float, default=1.0, help="P(judge picks slot 1)")
    parser.add_argument("--stub-seed", type=int, default=0)
    args = parser.parse_args()

    endpoint = EndpointConfig(
        base_url="http://stub.invalid/v1", model_name="biased-stub", backoff_seconds=0.0
    )
    transport, slot1_picks = make_biased_transport(args.bias, random.Random(args.stub_seed))

    candidate_wins = 0
    for seed in range(args.trials):
        _, r_judge = compare_reviews(
            "paper context", CANDIDATE, REFERENCE, endpoint, rng_seed=seed, transport=transport
        )
        candidate_wins += r_judge

    print(f"trials                  : {args.trials}")
    print(f"judge slot-1 preference : {slot1_picks['n'] / args.trials:.3f} (configured {args.bias})")
    print(f"candidate win rate      : {candidate_wins / args.trials:.3f} (unbiased target 0.5)")


if __name__ == "__main__":
    main()
