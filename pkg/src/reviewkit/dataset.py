"""Dataset construction: normalization, balancing, sampling, ingestion.

Every sampling operation is a pure function of (input, parameters, seed),
so runs are reproducible from their logged manifests.  Venue rating scales
live in a JSON registry (``data/venue_scales.json``), not in code.
"""

from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Callable, TypeVar

from . import prompts
from .errors import IngestionFailedError, InvalidInputError, SynthesisFailedError
from .judge import EndpointConfig, Message, complete
from .parsing import missing_sections, parse_review
from .types import ReviewExample

logger = logging.getLogger(__name__)

T = TypeVar("T")

MID_RATING_BINS = (5, 6)
LOW_EXTREME_MAX = 3
HIGH_EXTREME_MIN = 8


def load_venue_scales(path: str | Path | None = None) -> dict[str, tuple[float, float]]:
    """Load the venue→(min, max) rating-scale registry.

    Without a path, the registry shipped with the package is used.
    """
    if path is None:
        text = resources.files("reviewkit").joinpath("data/venue_scales.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    raw = json.loads(text)
    return {venue: (float(lo), float(hi)) for venue, (lo, hi) in raw.items()}


def normalize_rating(score: float, scale: tuple[float, float]) -> float:
    """Affine map of a venue-scale score onto the common 1-10 scale."""
    lo, hi = scale
    if not hi > lo:
        raise InvalidInputError(f"scale max must exceed min, got ({lo}, {hi})")
    if not lo <= score <= hi:
        raise InvalidInputError(f"score {score} outside scale [{lo}, {hi}]")
    return 1.0 + 9.0 * (score - lo) / (hi - lo)


def aggregate_ground_truth(scores: list[float]) -> float:
    """Unweighted mean of normalized reviewer scores."""
    if not scores:
        raise InvalidInputError("scores must be non-empty")
    return math.fsum(scores) / len(scores)


def round_half_up(value: float) -> int:
    return int(math.floor(value + 0.5))


def balance_dataset(
    examples: list[ReviewExample],
    mid_cap_fraction: float,
    extreme_boost: float,
    seed: int,
) -> list[ReviewExample]:
    """Flatten the rating histogram for RL training.

    Examples are binned by round-half-up of the mean rating.  Mid-range
    bins (5, 6) are downsampled without replacement to
    ceil(mid_cap_fraction * bin size); extreme bins (<= 3 and >= 8) keep
    all originals and add with-replacement draws up to
    round(extreme_boost * bin size); bins 4 and 7 pass through.  Output
    membership is drawn entirely from the input multiset and the order is
    shuffled with the same seed.
    """
    if not examples:
        raise InvalidInputError("examples must be non-empty")
    if not 0 < mid_cap_fraction <= 1:
        raise InvalidInputError(f"mid_cap_fraction must lie in (0, 1], got {mid_cap_fraction}")
    if extreme_boost < 1:
        raise InvalidInputError(f"extreme_boost must be >= 1, got {extreme_boost}")

    rng = random.Random(seed)
    bins: dict[int, list[ReviewExample]] = {}
    for example in examples:
        bins.setdefault(round_half_up(example.truth.mean_rating), []).append(example)

    output: list[ReviewExample] = []
    for rating_bin in sorted(bins):
        members = bins[rating_bin]
        if rating_bin in MID_RATING_BINS:
            keep = math.ceil(mid_cap_fraction * len(members))
            output.extend(rng.sample(members, keep))
        elif rating_bin <= LOW_EXTREME_MAX or rating_bin >= HIGH_EXTREME_MIN:
            target = round_half_up(extreme_boost * len(members))
            output.extend(members)
            output.extend(rng.choices(members, k=target - len(members)))
        else:
            output.extend(members)
    rng.shuffle(output)
    return output


def sample_uniform_eval_set(
    pool: list[tuple[T, float]],
    n: int,
    bins: int,
    seed: int,
) -> list[tuple[T, float]]:
    """Draw an evaluation set approximately uniform over the rating scale.

    [1, 10] is split into ``bins`` equal-width bins with per-bin quotas of
    floor(n / bins), the remainder going to the lowest bins.  Short bins
    surrender their deficit round-robin to bins that still have unused
    members.  Selection is without replacement and fully seeded.
    """
    if bins < 2:
        raise InvalidInputError(f"bins must be >= 2, got {bins}")
    if n > len(pool):
        raise InvalidInputError(f"cannot draw {n} items from a pool of {len(pool)}")

    binned: list[list[tuple[T, float]]] = [[] for _ in range(bins)]
    for item, rating in pool:
        if not 1.0 <= rating <= 10.0:
            raise InvalidInputError(f"rating {rating} outside [1, 10]")
        index = min(bins - 1, int((rating - 1.0) / 9.0 * bins))
        binned[index].append((item, rating))

    base, remainder = divmod(n, bins)
    quotas = [base + (1 if i < remainder else 0) for i in range(bins)]

    counts = [min(quotas[i], len(binned[i])) for i in range(bins)]
    deficit = n - sum(counts)
    while deficit > 0:
        progressed = False
        for i in range(bins):
            if deficit == 0:
                break
            if counts[i] < len(binned[i]):
                counts[i] += 1
                deficit -= 1
                progressed = True
        assert progressed, "pool exhausted despite size check"

    rng = random.Random(seed)
    selection: list[tuple[T, float]] = []
    for i in range(bins):
        if counts[i]:
            selection.extend(rng.sample(binned[i], counts[i]))
    return selection


def synthesize_reference_review(
    human_reviews: list[str],
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
) -> str:
    """Merge several human reviews into one structured reference review.

    The output must parse with summary, strengths and weaknesses present
    (a thinking trace is not required of references); failures are re-asked
    up to ``max_retries`` times.
    """
    if not human_reviews:
        raise InvalidInputError("need at least one human review")
    joined = "\n\n---\n\n".join(
        f"Review {n}:\n{review}" for n, review in enumerate(human_reviews, start=1)
    )
    prompt = prompts.render(prompts.REFERENCE_SYNTHESIS, reviews=joined)
    messages = [{"role": "user", "content": prompt}]
    merged = ""
    for _ in range(endpoint.max_retries + 1):
        merged = complete(messages, endpoint, transport)
        if merged.strip() and missing_sections(parse_review(merged)) <= {"thinking"}:
            return merged
    raise SynthesisFailedError(
        f"synthesized review still missing required sections after "
        f"{endpoint.max_retries + 1} asks"
    )


@dataclass
class IngestResult:
    """Outcome of reading a JSONL dataset: kept examples plus a reject log."""

    examples: list[ReviewExample] = field(default_factory=list)
    rejects: list[tuple[int, str]] = field(default_factory=list)  # (line number, reason)

    def __len__(self) -> int:
        return len(self.examples)


def ingest_jsonl(path: str | Path) -> IngestResult:
    """Read ReviewExample records from a JSONL file, one object per line.

    Malformed lines and duplicate paper ids are rejected individually with
    their line numbers; only a file yielding zero valid records fails.
    """
    path = Path(path)
    result = IngestResult()
    seen_ids: set[str] = set()
    with path.open("r", encoding="utf-8") as handle:
        for line_no, line in enumerate(handle, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
                example = ReviewExample.from_json_record(record)
            except Exception as exc:
                result.rejects.append((line_no, str(exc)))
                continue
            if example.paper.id in seen_ids:
                result.rejects.append((line_no, f"duplicate paper_id {example.paper.id!r}"))
                continue
            seen_ids.add(example.paper.id)
            result.examples.append(example)
    if not result.examples:
        raise IngestionFailedError(
            f"{path}: no valid records ({len(result.rejects)} rejected lines)"
        )
    for line_no, reason in result.rejects:
        logger.warning("%s:%d rejected: %s", path, line_no, reason)
    return result


def write_jsonl(path: str | Path, examples: list[ReviewExample]) -> None:
    with Path(path).open("w", encoding="utf-8") as handle:
        for example in examples:
            handle.write(example.to_json_line() + "\n")
