"""Composite reward for generated paper reviews.

Components:
  rating consistency  exp(-(s - s_hat)^2 / (2 sigma^2)), peaking at 1 when
                      the predicted rating matches the human mean
  format penalty      minus the count of missing structural sections
  rule reward         clip(alpha * consistency + beta * format, 0, 1)
  final reward        gamma * rule + (1 - gamma) * judge, or the rule
                      reward alone when the judge is disabled

All functions are pure; batch scoring can be parallelized freely and stays
bitwise reproducible.
"""

from __future__ import annotations

import math

from .errors import InvalidConfigError, InvalidInputError
from .parsing import missing_sections, parse_review
from .types import REVIEW_SECTIONS, ReviewExample, RewardBreakdown, RewardConfig


def rating_consistency_reward(s: float, s_hat: float, sigma: float) -> float:
    """Gaussian-kernel agreement between ground-truth and predicted rating."""
    if not (isinstance(sigma, (int, float)) and math.isfinite(sigma)) or sigma <= 0:
        raise InvalidConfigError(f"sigma must be a finite positive number, got {sigma!r}")
    if not (math.isfinite(s) and math.isfinite(s_hat)):
        raise InvalidInputError(f"ratings must be finite, got s={s!r}, s_hat={s_hat!r}")
    exponent = -((s - s_hat) ** 2) / (2.0 * sigma * sigma)
    # exp underflows to 0.0 below about -745, but the kernel is strictly
    # positive; floor at the subnormal boundary to keep the (0, 1] contract.
    return math.exp(max(exponent, -745.0))


def format_reward(missing: set[str]) -> int:
    """Negative count of missing structural sections (0 down to -4)."""
    unknown = set(missing) - set(REVIEW_SECTIONS)
    if unknown:
        raise InvalidInputError(f"unknown section labels: {sorted(unknown)}")
    return -len(set(missing))


def rule_reward(r_rc: float, r_f: int, alpha: float, beta: float) -> float:
    """Clipped weighted sum of consistency and format components."""
    if alpha < 0 or beta < 0:
        raise InvalidConfigError(f"alpha and beta must be >= 0, got {alpha}, {beta}")
    return min(1.0, max(0.0, alpha * r_rc + beta * r_f))


def final_reward(r_rule: float, r_judge: int | None, gamma: float) -> float:
    """Blend rule and judge rewards; judge absent means rule-only mode."""
    if not 0.0 <= gamma <= 1.0:
        raise InvalidConfigError(f"gamma must lie in [0, 1], got {gamma}")
    if r_judge is None:
        return r_rule
    if r_judge not in (0, 1):
        raise InvalidInputError(f"r_judge must be 0 or 1, got {r_judge!r}")
    return gamma * r_rule + (1.0 - gamma) * r_judge


def score_generated_review(
    ground_truth_rating: float,
    generated: str,
    judge_outcome: int | None,
    config: RewardConfig,
) -> RewardBreakdown:
    """Score one generated review against a known mean rating.

    An unparseable predicted rating contributes a consistency reward of 0
    (maximum penalty; omission must never beat a bad guess) and adds nothing
    extra to the format penalty.
    """
    parsed = parse_review(generated)
    missing = missing_sections(parsed)
    r_f = format_reward(missing)
    if parsed.rating is None:
        r_rc = 0.0
    else:
        r_rc = rating_consistency_reward(ground_truth_rating, parsed.rating, config.sigma)
    r_rule = rule_reward(r_rc, r_f, config.alpha, config.beta)
    r_final = final_reward(r_rule, judge_outcome, config.gamma)
    return RewardBreakdown(
        r_rc=r_rc, r_f=r_f, r_rule=r_rule, r_judge=judge_outcome, r_final=r_final
    )


def compute_reward(
    example: ReviewExample,
    generated: str,
    judge_outcome: int | None,
    config: RewardConfig,
) -> RewardBreakdown:
    """Score a generated review for one training example."""
    return score_generated_review(
        example.truth.mean_rating, generated, judge_outcome, config
    )
