"""Core domain types.

All types are frozen dataclasses: immutable after construction and safe to
share across threads.  Each one round-trips through ``to_dict``/``from_dict``
(and JSON) without loss.  Collection-valued fields are stored as tuples so
instances stay hashable and genuinely immutable.
"""

from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass

from .errors import InvalidConfigError, InvalidInputError

KNOWN_VENUES = ("ICLR", "NeurIPS", "ARR", "COLING", "CONLL", "ACL", "other")

# Required structural elements of a generated review; rating extraction is
# tracked separately and does not participate in the format penalty.
REVIEW_SECTIONS = ("thinking", "summary", "strengths", "weaknesses")


def canonical_venue(label: str) -> str:
    """Map a venue label onto the known set, falling back to ``other``."""
    for venue in KNOWN_VENUES:
        if label.strip().lower() == venue.lower():
            return venue
    return "other"


def _require_finite(name: str, value: float) -> float:
    value = float(value)
    if not math.isfinite(value):
        raise InvalidInputError(f"{name} must be finite, got {value!r}")
    return value


@dataclass(frozen=True)
class PaperDocument:
    """The paper under review, as plain text or markdown."""

    id: str
    title: str
    body: str
    venue: str = "other"
    year: int = 0

    def __post_init__(self):
        if not self.id:
            raise InvalidInputError("paper id must be non-empty")
        if not self.body:
            raise InvalidInputError("paper body must be non-empty")
        object.__setattr__(self, "venue", canonical_venue(self.venue))
        object.__setattr__(self, "year", int(self.year))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "title": self.title,
            "body": self.body,
            "venue": self.venue,
            "year": self.year,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "PaperDocument":
        return cls(
            id=data["id"],
            title=data.get("title", ""),
            body=data["body"],
            venue=data.get("venue", "other"),
            year=data.get("year", 0),
        )


@dataclass(frozen=True)
class QuerySet:
    """Exactly three natural-language questions probing the paper."""

    queries: tuple[str, str, str]

    def __post_init__(self):
        queries = tuple(self.queries)
        if len(queries) != 3:
            raise InvalidInputError(f"expected exactly 3 queries, got {len(queries)}")
        if any(not q.strip() for q in queries):
            raise InvalidInputError("queries must be non-blank")
        object.__setattr__(self, "queries", queries)

    def to_dict(self) -> dict:
        return {"queries": list(self.queries)}

    @classmethod
    def from_dict(cls, data: dict) -> "QuerySet":
        return cls(queries=tuple(data["queries"]))


# New-style (NNNN.NNNNN) and legacy (archive/NNNNNNN) identifiers, with an
# optional version suffix.
_ARXIV_ID_PATTERN = r"(\d{4}\.\d{4,5}|[a-z][a-z\-]*(\.[A-Z]{2})?/\d{7})(v\d+)?"


def is_arxiv_id(candidate: str) -> bool:
    return re.fullmatch(_ARXIV_ID_PATTERN, candidate) is not None


@dataclass(frozen=True)
class BibEntry:
    """Bibliographic record of one retrieved paper.

    ``excerpts`` are ordered most-relevant first; the initial excerpt is the
    abstract unless a richer extractor supplied passages.
    """

    arxiv_id: str
    title: str
    authors: tuple[str, ...] = ()
    abstract: str = ""
    url: str = ""
    excerpts: tuple[str, ...] = ()

    def __post_init__(self):
        if not is_arxiv_id(self.arxiv_id):
            raise InvalidInputError(f"not a valid arXiv identifier: {self.arxiv_id!r}")
        object.__setattr__(self, "authors", tuple(self.authors))
        object.__setattr__(self, "excerpts", tuple(self.excerpts))

    def to_dict(self) -> dict:
        return {
            "arxiv_id": self.arxiv_id,
            "title": self.title,
            "authors": list(self.authors),
            "abstract": self.abstract,
            "url": self.url,
            "excerpts": list(self.excerpts),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "BibEntry":
        return cls(
            arxiv_id=data["arxiv_id"],
            title=data.get("title", ""),
            authors=tuple(data.get("authors", ())),
            abstract=data.get("abstract", ""),
            url=data.get("url", ""),
            excerpts=tuple(data.get("excerpts", ())),
        )


@dataclass(frozen=True)
class QueryAnswer:
    """One consolidated (query, answer, sources) block."""

    query: str
    answer: str
    sources: tuple[BibEntry, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "sources", tuple(self.sources))

    def to_dict(self) -> dict:
        return {
            "query": self.query,
            "answer": self.answer,
            "sources": [s.to_dict() for s in self.sources],
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QueryAnswer":
        return cls(
            query=data["query"],
            answer=data["answer"],
            sources=tuple(BibEntry.from_dict(s) for s in data.get("sources", ())),
        )


@dataclass(frozen=True)
class RetrievedContext:
    """Retrieval output for one paper: ordered query/answer/source blocks."""

    query_answers: tuple[QueryAnswer, ...]

    def __post_init__(self):
        object.__setattr__(self, "query_answers", tuple(self.query_answers))

    def to_dict(self) -> dict:
        return {"query_answers": [qa.to_dict() for qa in self.query_answers]}

    @classmethod
    def from_dict(cls, data: dict) -> "RetrievedContext":
        return cls(
            query_answers=tuple(
                QueryAnswer.from_dict(qa) for qa in data.get("query_answers", ())
            )
        )


@dataclass(frozen=True)
class ParsedReview:
    """Structured decomposition of a generated review.

    A field is None exactly when its section marker was not found (or the
    section body was empty, under the parser's default policy).  ``raw``
    always preserves the input verbatim.
    """

    raw: str
    thinking: str | None = None
    summary: str | None = None
    strengths: tuple[str, ...] | None = None
    weaknesses: tuple[str, ...] | None = None
    rating: float | None = None

    def __post_init__(self):
        if self.strengths is not None:
            object.__setattr__(self, "strengths", tuple(self.strengths))
        if self.weaknesses is not None:
            object.__setattr__(self, "weaknesses", tuple(self.weaknesses))
        if self.rating is not None:
            rating = _require_finite("rating", self.rating)
            if not 1.0 <= rating <= 10.0:
                raise InvalidInputError(f"rating must lie in [1, 10], got {rating}")
            object.__setattr__(self, "rating", rating)

    def to_dict(self) -> dict:
        return {
            "raw": self.raw,
            "thinking": self.thinking,
            "summary": self.summary,
            "strengths": list(self.strengths) if self.strengths is not None else None,
            "weaknesses": list(self.weaknesses) if self.weaknesses is not None else None,
            "rating": self.rating,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ParsedReview":
        strengths = data.get("strengths")
        weaknesses = data.get("weaknesses")
        return cls(
            raw=data["raw"],
            thinking=data.get("thinking"),
            summary=data.get("summary"),
            strengths=tuple(strengths) if strengths is not None else None,
            weaknesses=tuple(weaknesses) if weaknesses is not None else None,
            rating=data.get("rating"),
        )


@dataclass(frozen=True)
class GroundTruth:
    """Human assessment of a paper.

    ``reviewer_scores`` are stored already normalized to the common 1-10
    scale (use :func:`GroundTruth.from_venue_scores` to convert raw venue
    scores), so the mean invariant is self-checking.
    """

    reviewer_scores: tuple[float, ...]
    mean_rating: float
    reference_review: str

    def __post_init__(self):
        scores = tuple(float(s) for s in self.reviewer_scores)
        if not scores:
            raise InvalidInputError("reviewer_scores must be non-empty")
        object.__setattr__(self, "reviewer_scores", scores)
        mean = _require_finite("mean_rating", self.mean_rating)
        if not 1.0 <= mean <= 10.0:
            raise InvalidInputError(f"mean_rating must lie in [1, 10], got {mean}")
        expected = math.fsum(scores) / len(scores)
        if abs(mean - expected) > 1e-9:
            raise InvalidInputError(
                f"mean_rating {mean} does not match the reviewer-score mean {expected}"
            )
        object.__setattr__(self, "mean_rating", mean)

    @classmethod
    def from_venue_scores(
        cls, scores: list[float], scale: tuple[float, float], reference_review: str
    ) -> "GroundTruth":
        """Normalize raw venue-scale scores to 1-10 and aggregate."""
        from .dataset import normalize_rating

        normalized = tuple(normalize_rating(s, scale) for s in scores)
        mean = math.fsum(normalized) / len(normalized)
        return cls(normalized, mean, reference_review)

    def to_dict(self) -> dict:
        return {
            "reviewer_scores": list(self.reviewer_scores),
            "mean_rating": self.mean_rating,
            "reference_review": self.reference_review,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GroundTruth":
        return cls(
            reviewer_scores=tuple(data["reviewer_scores"]),
            mean_rating=data["mean_rating"],
            reference_review=data.get("reference_review", ""),
        )


@dataclass(frozen=True)
class ReviewExample:
    """One training/evaluation datum: paper, retrieved context, ground truth."""

    paper: PaperDocument
    context: RetrievedContext
    truth: GroundTruth

    def to_dict(self) -> dict:
        return {
            "paper": self.paper.to_dict(),
            "context": self.context.to_dict(),
            "truth": self.truth.to_dict(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReviewExample":
        return cls(
            paper=PaperDocument.from_dict(data["paper"]),
            context=RetrievedContext.from_dict(data["context"]),
            truth=GroundTruth.from_dict(data["truth"]),
        )

    def to_json_record(self) -> dict:
        """Canonical flat JSONL record (one object per dataset line)."""
        return {
            "paper_id": self.paper.id,
            "title": self.paper.title,
            "body": self.paper.body,
            "venue": self.paper.venue,
            "year": self.paper.year,
            "context": self.context.to_dict(),
            "reviewer_scores": list(self.truth.reviewer_scores),
            "mean_rating": self.truth.mean_rating,
            "reference_review": self.truth.reference_review,
        }

    @classmethod
    def from_json_record(cls, record: dict) -> "ReviewExample":
        return cls(
            paper=PaperDocument(
                id=record["paper_id"],
                title=record.get("title", ""),
                body=record["body"],
                venue=record.get("venue", "other"),
                year=record.get("year", 0),
            ),
            context=RetrievedContext.from_dict(record.get("context", {})),
            truth=GroundTruth(
                reviewer_scores=tuple(record["reviewer_scores"]),
                mean_rating=record["mean_rating"],
                reference_review=record.get("reference_review", ""),
            ),
        )

    def to_json_line(self) -> str:
        return json.dumps(self.to_json_record(), ensure_ascii=False)


@dataclass(frozen=True)
class RewardConfig:
    """Hyperparameters of the composite reward.

    sigma  width of the rating-consistency Gaussian
    alpha  weight of the rating-consistency term
    beta   weight of the format penalty
    gamma  rule-vs-judge balance in the final reward
    """

    sigma: float = 1.0
    alpha: float = 1.0
    beta: float = 0.25
    gamma: float = 0.5

    def __post_init__(self):
        for name in ("sigma", "alpha", "beta", "gamma"):
            value = float(getattr(self, name))
            if not math.isfinite(value):
                raise InvalidConfigError(f"{name} must be finite, got {value!r}")
            object.__setattr__(self, name, value)
        if self.sigma <= 0:
            raise InvalidConfigError(f"sigma must be > 0, got {self.sigma}")
        if self.alpha < 0:
            raise InvalidConfigError(f"alpha must be >= 0, got {self.alpha}")
        if self.beta < 0:
            raise InvalidConfigError(f"beta must be >= 0, got {self.beta}")
        if not 0.0 <= self.gamma <= 1.0:
            raise InvalidConfigError(f"gamma must lie in [0, 1], got {self.gamma}")

    def to_dict(self) -> dict:
        return {
            "sigma": self.sigma,
            "alpha": self.alpha,
            "beta": self.beta,
            "gamma": self.gamma,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RewardConfig":
        return cls(**{k: data[k] for k in ("sigma", "alpha", "beta", "gamma") if k in data})

    def merged(self, overrides: dict | None) -> "RewardConfig":
        """Return a copy with the given partial overrides applied."""
        if not overrides:
            return self
        unknown = set(overrides) - {"sigma", "alpha", "beta", "gamma"}
        if unknown:
            raise InvalidConfigError(f"unknown reward config fields: {sorted(unknown)}")
        merged = self.to_dict()
        merged.update(overrides)
        return RewardConfig(**merged)


@dataclass(frozen=True)
class RewardBreakdown:
    """Per-sample reward components.

    ``r_rc`` is 0 only under the missing-rating convention (an unparseable
    predicted rating earns no consistency credit); the Gaussian itself is
    strictly positive.  ``r_judge`` is None when the judge is disabled.
    """

    r_rc: float
    r_f: int
    r_rule: float
    r_final: float
    r_judge: int | None = None

    def __post_init__(self):
        r_rc = _require_finite("r_rc", self.r_rc)
        if not 0.0 <= r_rc <= 1.0:
            raise InvalidInputError(f"r_rc must lie in [0, 1], got {r_rc}")
        object.__setattr__(self, "r_rc", r_rc)
        if not isinstance(self.r_f, int) or not -4 <= self.r_f <= 0:
            raise InvalidInputError(f"r_f must be an integer in [-4, 0], got {self.r_f!r}")
        r_rule = _require_finite("r_rule", self.r_rule)
        if not 0.0 <= r_rule <= 1.0:
            raise InvalidInputError(f"r_rule must lie in [0, 1], got {r_rule}")
        object.__setattr__(self, "r_rule", r_rule)
        if self.r_judge is not None and self.r_judge not in (0, 1):
            raise InvalidInputError(f"r_judge must be 0, 1 or None, got {self.r_judge!r}")
        r_final = _require_finite("r_final", self.r_final)
        if not 0.0 <= r_final <= 1.0:
            raise InvalidInputError(f"r_final must lie in [0, 1], got {r_final}")
        object.__setattr__(self, "r_final", r_final)

    def to_dict(self) -> dict:
        return {
            "r_rc": self.r_rc,
            "r_f": self.r_f,
            "r_rule": self.r_rule,
            "r_judge": self.r_judge,
            "r_final": self.r_final,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RewardBreakdown":
        return cls(
            r_rc=data["r_rc"],
            r_f=data["r_f"],
            r_rule=data["r_rule"],
            r_final=data["r_final"],
            r_judge=data.get("r_judge"),
        )
