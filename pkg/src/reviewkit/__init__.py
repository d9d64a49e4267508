"""reviewkit: rewards, metrics, retrieval contexts, and datasets for
automated scientific-review generation."""

__version__ = "0.1.0"

from .errors import ReviewKitError
from .metrics import PairPolicy, evaluate_run
from .parsing import extract_rating, missing_sections, parse_review
from .rewards import (
    compute_reward,
    final_reward,
    format_reward,
    rating_consistency_reward,
    rule_reward,
    score_generated_review,
)
from .types import (
    BibEntry,
    GroundTruth,
    PaperDocument,
    ParsedReview,
    QueryAnswer,
    QuerySet,
    RetrievedContext,
    ReviewExample,
    RewardBreakdown,
    RewardConfig,
)

__all__ = [
    "__version__",
    "ReviewKitError",
    "PairPolicy",
    "evaluate_run",
    "extract_rating",
    "missing_sections",
    "parse_review",
    "compute_reward",
    "final_reward",
    "format_reward",
    "rating_consistency_reward",
    "rule_reward",
    "score_generated_review",
    "BibEntry",
    "GroundTruth",
    "PaperDocument",
    "ParsedReview",
    "QueryAnswer",
    "QuerySet",
    "RetrievedContext",
    "ReviewExample",
    "RewardBreakdown",
    "RewardConfig",
]
