"""Rule-based evaluation metrics for predicted paper ratings.

Rating-level: MSE and Spearman rank correlation.  Pair-level: the
relation / absolute / confidence triad plus the concordance index as a
global ranking measure.  Floating-point reductions use ``math.fsum`` so
results are independent of any parallel schedule.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass

from .errors import InvalidInputError, UndefinedCorrelationError, UndefinedMetricError

REPORT_SCHEMA_VERSION = "1"


def mse(predicted: list[float], truth: list[float]) -> float:
    """Mean squared error between two equal-length rating vectors."""
    if len(predicted) != len(truth):
        raise InvalidInputError(
            f"length mismatch: {len(predicted)} predictions vs {len(truth)} truths"
        )
    if not predicted:
        raise InvalidInputError("vectors must be non-empty")
    return math.fsum((p - t) ** 2 for p, t in zip(predicted, truth)) / len(predicted)


def fractional_ranks(values: list[float]) -> list[float]:
    """1-based ranks with ties assigned the average of their positions."""
    order = sorted(range(len(values)), key=lambda i: values[i])
    ranks = [0.0] * len(values)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        avg = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = avg
        i = j + 1
    return ranks


def _pearson(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mean_x = math.fsum(xs) / n
    mean_y = math.fsum(ys) / n
    dx = [x - mean_x for x in xs]
    dy = [y - mean_y for y in ys]
    var_x = math.fsum(d * d for d in dx)
    var_y = math.fsum(d * d for d in dy)
    if var_x == 0.0 or var_y == 0.0:
        raise UndefinedCorrelationError("correlation undefined for a constant vector")
    cov = math.fsum(a * b for a, b in zip(dx, dy))
    return cov / math.sqrt(var_x * var_y)


def spearman(predicted: list[float], truth: list[float]) -> float:
    """Spearman rank correlation (Pearson on average-tie fractional ranks)."""
    if len(predicted) != len(truth):
        raise InvalidInputError(
            f"length mismatch: {len(predicted)} predictions vs {len(truth)} truths"
        )
    if len(predicted) < 2:
        raise InvalidInputError("need at least 2 records")
    return _pearson(fractional_ranks(predicted), fractional_ranks(truth))


def _sgn(x: float) -> int:
    return (x > 0) - (x < 0)


def pair_relation(s1: float, s2: float, t1: float, t2: float) -> float:
    """1.0 when the predicted pair is ordered the same way as the truth pair."""
    return 1.0 if _sgn(s1 - s2) == _sgn(t1 - t2) else 0.0


def pair_absolute(s1: float, s2: float, t1: float, t2: float) -> float:
    """Graded closeness of the predicted pair to the truth pair.

    Total deviation |s1-t1| + |s2-t2| of zero earns 1.0, at most 2 earns
    0.6, anything larger earns 0.
    """
    deviation = abs(s1 - t1) + abs(s2 - t2)
    if deviation == 0:
        return 1.0
    if deviation <= 2:
        return 0.6
    return 0.0


def pair_confidence(s1: float, s2: float, t1: float, t2: float) -> float:
    """1.0 when the predicted gap is at least as wide as the truth gap."""
    return 1.0 if abs(s1 - s2) >= abs(t1 - t2) else 0.0


def concordance_index(predicted: list[float], truth: list[float]) -> float:
    """Fraction of truth-distinguishable pairs ordered correctly.

    Pairs with tied truth values are skipped; a predicted tie earns half
    credit.
    """
    if len(predicted) != len(truth):
        raise InvalidInputError(
            f"length mismatch: {len(predicted)} predictions vs {len(truth)} truths"
        )
    if len(predicted) < 2:
        raise InvalidInputError("need at least 2 records")
    credit = 0.0
    comparable = 0
    for i in range(len(truth)):
        for j in range(i + 1, len(truth)):
            if truth[i] == truth[j]:
                continue
            comparable += 1
            if predicted[i] == predicted[j]:
                credit += 0.5
            elif (predicted[i] - predicted[j]) * (truth[i] - truth[j]) > 0:
                credit += 1.0
    if comparable == 0:
        raise UndefinedMetricError("no truth-distinguishable pairs")
    return credit / comparable


@dataclass(frozen=True)
class PairPolicy:
    """How evaluation pairs are enumerated.

    ``all_pairs`` walks every unordered pair; ``sampled`` draws ``n``
    distinct pairs with the seeded generator.  The resolved policy is
    recorded in every report, since the choice changes the pair-level
    numbers.
    """

    kind: str = "auto"  # "auto" | "all_pairs" | "sampled"
    n: int | None = None
    seed: int = 0

    def __post_init__(self):
        if self.kind not in ("auto", "all_pairs", "sampled"):
            raise InvalidInputError(f"unknown pair policy {self.kind!r}")
        if self.kind == "sampled" and (self.n is None or self.n < 1):
            raise InvalidInputError("sampled policy needs n >= 1")

    def resolve(self, n_records: int) -> "PairPolicy":
        """Fix 'auto' to a concrete policy for the given record count."""
        if self.kind != "auto":
            return self
        if n_records <= 1000:
            return PairPolicy("all_pairs")
        return PairPolicy("sampled", n=100 * n_records, seed=self.seed)

    def to_dict(self) -> dict:
        if self.kind == "sampled":
            return {"kind": "sampled", "n": self.n, "seed": self.seed}
        return {"kind": self.kind}

    @classmethod
    def from_dict(cls, data: dict) -> "PairPolicy":
        kind = data.get("kind", "auto")
        if kind == "sampled":
            return cls("sampled", n=data.get("n"), seed=data.get("seed", 0))
        return cls(kind)


def _pair_indices(n_records: int, policy: PairPolicy) -> list[tuple[int, int]]:
    total = n_records * (n_records - 1) // 2
    if policy.kind == "all_pairs" or (policy.n is not None and policy.n >= total):
        return [(i, j) for i in range(n_records) for j in range(i + 1, n_records)]
    rng = random.Random(policy.seed)
    chosen: set[tuple[int, int]] = set()
    while len(chosen) < policy.n:
        i = rng.randrange(n_records)
        j = rng.randrange(n_records)
        if i == j:
            continue
        chosen.add((min(i, j), max(i, j)))
    return sorted(chosen)


def evaluate_run(
    records: list[tuple[float | None, float]],
    pair_policy: PairPolicy = PairPolicy(),
) -> dict:
    """Compute the full rule-based metric report for one evaluation run.

    ``records`` are (predicted, truth) pairs; a None prediction marks an
    unparseable model rating, and those records are excluded (and counted)
    rather than imputed.  Degenerate metrics (constant vectors, no
    comparable pairs) are reported as null with a structured error entry
    instead of failing the whole run.
    """
    usable = [(p, t) for p, t in records if p is not None]
    excluded = len(records) - len(usable)
    if len(usable) < 2:
        raise InvalidInputError(
            f"need at least 2 usable records, got {len(usable)} "
            f"({excluded} excluded as unparseable)"
        )
    predicted = [float(p) for p, _ in usable]
    truth = [float(t) for _, t in usable]

    policy = pair_policy.resolve(len(usable))
    pairs = _pair_indices(len(usable), policy)

    report: dict = {
        "schema_version": REPORT_SCHEMA_VERSION,
        "n_records": len(records),
        "n_excluded": excluded,
        "n_used": len(usable),
        "pair_policy": policy.to_dict(),
        "n_pairs": len(pairs),
        "errors": {},
    }

    report["mse"] = mse(predicted, truth)
    try:
        report["spearman"] = spearman(predicted, truth)
    except UndefinedCorrelationError as exc:
        report["spearman"] = None
        report["errors"]["spearman"] = str(exc)
    for name, fn in (
        ("pair_relation", pair_relation),
        ("pair_absolute", pair_absolute),
        ("pair_confidence", pair_confidence),
    ):
        report[name] = math.fsum(
            fn(predicted[i], predicted[j], truth[i], truth[j]) for i, j in pairs
        ) / len(pairs)
    try:
        report["concordance"] = concordance_index(predicted, truth)
    except UndefinedMetricError as exc:
        report["concordance"] = None
        report["errors"]["concordance"] = str(exc)
    return report


def render_report_table(report: dict) -> str:
    """Aligned plain-text rendering of an evaluate_run report."""
    policy = report["pair_policy"]
    policy_text = policy["kind"]
    if policy["kind"] == "sampled":
        policy_text = f"sampled(n={policy['n']}, seed={policy['seed']})"
    rows = [
        ("records", str(report["n_records"])),
        ("excluded (unparseable)", str(report["n_excluded"])),
        ("pair policy", policy_text),
        ("pairs", str(report["n_pairs"])),
        ("MSE", _fmt(report["mse"])),
        ("Spearman", _fmt(report["spearman"])),
        ("Pair-Relation", _fmt(report["pair_relation"])),
        ("Pair-Absolute", _fmt(report["pair_absolute"])),
        ("Pair-Confidence", _fmt(report["pair_confidence"])),
        ("Concordance", _fmt(report["concordance"])),
    ]
    width = max(len(name) for name, _ in rows)
    lines = [f"{name.ljust(width)}  {value}" for name, value in rows]
    for metric, message in report.get("errors", {}).items():
        lines.append(f"{('! ' + metric).ljust(width)}  {message}")
    return "\n".join(lines) + "\n"


def _fmt(value: float | None) -> str:
    return "n/a" if value is None else f"{value:.6f}"
