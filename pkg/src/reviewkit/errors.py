"""Exception hierarchy shared across the toolkit.

Everything raised on purpose derives from ReviewKitError so callers can
catch toolkit failures without swallowing programming errors.
"""

from __future__ import annotations


class ReviewKitError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfigError(ReviewKitError, ValueError):
    """A configuration value is out of its legal range."""


class InvalidInputError(ReviewKitError, ValueError):
    """An input value violates a documented precondition."""


class TransportFailure(ReviewKitError):
    """One HTTP attempt failed in a retryable way (network error or 5xx)."""

    def __init__(self, message: str, status: int | None = None):
        super().__init__(message)
        self.status = status


class EndpointUnavailableError(ReviewKitError):
    """A chat endpoint could not be reached after all retries."""


class CredentialsError(ReviewKitError):
    """The endpoint rejected our credentials (401/403); not retried."""


class JudgeUnparseableError(ReviewKitError):
    """The judge reply did not contain a usable verdict after all re-asks."""


class DimensionScoreMissingError(JudgeUnparseableError):
    """One scoring dimension never produced a valid 1-5 integer.

    ``partial_scores`` holds the dimensions that did succeed before the
    failure, so callers can report gaps instead of dropping everything.
    """

    def __init__(self, dimension: str, partial_scores: dict[str, int]):
        super().__init__(f"no valid score for dimension {dimension!r}")
        self.dimension = dimension
        self.partial_scores = dict(partial_scores)


class QueryGenerationError(ReviewKitError):
    """The query-generation model never produced exactly three queries."""


class RetrievalUnavailableError(ReviewKitError):
    """The arXiv API could not be reached after all retries."""


class FeedParseError(ReviewKitError):
    """The arXiv response was not a parseable Atom feed."""


class SynthesisFailedError(ReviewKitError):
    """Reference-review synthesis never produced a structurally valid review."""


class IngestionFailedError(ReviewKitError):
    """A dataset file yielded zero valid records."""


class UndefinedMetricError(ReviewKitError):
    """A metric has an empty denominator (e.g. no comparable pairs)."""


class UndefinedCorrelationError(UndefinedMetricError):
    """Rank correlation is undefined because one vector is constant."""
