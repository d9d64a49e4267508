"""Chat-endpoint client and the three LLM-judge protocols.

* pairwise review comparison (binary win/loss against a reference review)
* seven-dimension review quality scoring on a 1-5 scale
* retrieval A/B verdicts (single-character 0/1 replies)

The wire format is the OpenAI-compatible chat-completions API.  Every
operation accepts an injectable ``transport`` so tests run against stubs;
the default transport does real HTTP with bounded retries and a per-config
concurrency cap.
"""

from __future__ import annotations

import logging
import os
import random
import re
import threading
import time
from dataclasses import dataclass
from typing import Callable

import requests

from . import prompts
from .errors import (
    CredentialsError,
    DimensionScoreMissingError,
    EndpointUnavailableError,
    InvalidConfigError,
    InvalidInputError,
    JudgeUnparseableError,
    TransportFailure,
)

logger = logging.getLogger(__name__)

Message = dict[str, str]

TOKEN_FIRST_BETTER = "REVIEW_1_BETTER"
TOKEN_SECOND_BETTER = "REVIEW_2_BETTER"


@dataclass(frozen=True)
class EndpointConfig:
    """Where and how to reach one chat-completion endpoint.

    The API key is never stored here: ``api_key_source`` names the
    environment variable to read at call time.
    """

    base_url: str
    model_name: str
    api_key_source: str = "REVIEWKIT_API_KEY"
    temperature: float = 0.0
    max_retries: int = 3
    timeout: float = 60.0
    max_in_flight: int = 4
    backoff_seconds: float = 0.5

    def __post_init__(self):
        if not self.base_url:
            raise InvalidConfigError("base_url must be non-empty")
        if self.temperature < 0:
            raise InvalidConfigError(f"temperature must be >= 0, got {self.temperature}")
        if self.max_retries < 0:
            raise InvalidConfigError(f"max_retries must be >= 0, got {self.max_retries}")
        if self.max_in_flight < 1:
            raise InvalidConfigError(f"max_in_flight must be >= 1, got {self.max_in_flight}")
        if self.backoff_seconds < 0:
            raise InvalidConfigError("backoff_seconds must be >= 0")


@dataclass(frozen=True)
class JudgeVerdict:
    """Outcome of one pairwise comparison, traceable to the raw reply."""

    winner: str  # "candidate" | "reference"
    presented_order: str  # "candidate_first" | "reference_first"
    raw_reply: str

    def __post_init__(self):
        if self.winner not in ("candidate", "reference"):
            raise InvalidInputError(f"unknown winner {self.winner!r}")
        if self.presented_order not in ("candidate_first", "reference_first"):
            raise InvalidInputError(f"unknown order {self.presented_order!r}")


# One semaphore per endpoint config value, so equal configs share one
# concurrency budget no matter how many call sites hold copies.
_SEMAPHORES: dict[EndpointConfig, threading.BoundedSemaphore] = {}
_SEMAPHORES_LOCK = threading.Lock()


def _semaphore(endpoint: EndpointConfig) -> threading.BoundedSemaphore:
    with _SEMAPHORES_LOCK:
        sem = _SEMAPHORES.get(endpoint)
        if sem is None:
            sem = threading.BoundedSemaphore(endpoint.max_in_flight)
            _SEMAPHORES[endpoint] = sem
        return sem


def http_transport(endpoint: EndpointConfig, messages: list[Message]) -> str:
    """One POST to the chat-completions endpoint; raises on failure."""
    url = endpoint.base_url.rstrip("/") + "/chat/completions"
    headers = {"Content-Type": "application/json"}
    api_key = os.environ.get(endpoint.api_key_source, "")
    if api_key:
        headers["Authorization"] = f"Bearer {api_key}"
    payload = {
        "model": endpoint.model_name,
        "messages": messages,
        "temperature": endpoint.temperature,
    }
    try:
        response = requests.post(
            url, json=payload, headers=headers, timeout=endpoint.timeout
        )
    except requests.RequestException as exc:
        raise TransportFailure(f"request failed: {exc}") from exc
    if response.status_code in (401, 403):
        raise CredentialsError(
            f"endpoint rejected credentials from ${endpoint.api_key_source} "
            f"(HTTP {response.status_code})"
        )
    if response.status_code >= 500:
        raise TransportFailure(f"server error HTTP {response.status_code}", status=response.status_code)
    if response.status_code >= 400:
        raise EndpointUnavailableError(
            f"endpoint returned HTTP {response.status_code}: {response.text[:200]}"
        )
    try:
        return response.json()["choices"][0]["message"]["content"]
    except (ValueError, KeyError, IndexError, TypeError) as exc:
        raise TransportFailure(f"malformed completion body: {exc}") from exc


def complete(
    messages: list[Message],
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
) -> str:
    """Run one chat completion with bounded retries and backoff.

    Transport-level failures (network errors, 5xx) are retried up to
    ``max_retries`` times with exponential backoff; credential rejections
    are raised immediately.
    """
    send = transport or http_transport
    sem = _semaphore(endpoint)
    last: TransportFailure | None = None
    for attempt in range(endpoint.max_retries + 1):
        try:
            with sem:
                return send(endpoint, messages)
        except TransportFailure as exc:
            last = exc
            logger.warning(
                "completion attempt %d/%d failed: %s",
                attempt + 1,
                endpoint.max_retries + 1,
                exc,
            )
            if attempt < endpoint.max_retries and endpoint.backoff_seconds:
                time.sleep(endpoint.backoff_seconds * (2**attempt))
    raise EndpointUnavailableError(
        f"endpoint {endpoint.base_url} unavailable after "
        f"{endpoint.max_retries + 1} attempts: {last}"
    ) from last


def compare_reviews(
    paper_context: str,
    candidate: str,
    reference: str,
    endpoint: EndpointConfig,
    rng_seed: int,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
    max_context_tokens: int = 8000,
) -> tuple[JudgeVerdict, int]:
    """Pairwise judge: is the candidate review better than the reference?

    The presentation order of the two reviews is chosen uniformly from the
    seed and mapped back afterwards, so position bias cannot systematically
    favor the candidate.  Returns the verdict plus the binary reward
    (1 when the candidate wins).  A tie is not an allowed reply; replies
    carrying neither or both decision tokens are re-asked up to
    ``max_retries`` times before giving up.
    """
    if not candidate.strip() or not reference.strip():
        raise InvalidInputError("both reviews must be non-empty")
    candidate_first = random.Random(rng_seed).random() < 0.5
    first, second = (candidate, reference) if candidate_first else (reference, candidate)
    prompt = prompts.render(
        prompts.GENRM_PAIRWISE,
        paper_context=prompts.truncate_tokens(paper_context, max_context_tokens),
        review1=first,
        review2=second,
    )
    messages = [{"role": "user", "content": prompt}]

    reply = ""
    for _ in range(endpoint.max_retries + 1):
        reply = complete(messages, endpoint, transport)
        has_first = TOKEN_FIRST_BETTER in reply
        has_second = TOKEN_SECOND_BETTER in reply
        if has_first == has_second:  # neither or both: no usable verdict
            continue
        first_won = has_first
        candidate_won = first_won == candidate_first
        verdict = JudgeVerdict(
            winner="candidate" if candidate_won else "reference",
            presented_order="candidate_first" if candidate_first else "reference_first",
            raw_reply=reply,
        )
        return verdict, int(candidate_won)
    raise JudgeUnparseableError(
        f"no unambiguous verdict after {endpoint.max_retries + 1} asks; "
        f"last reply: {reply[:200]!r}"
    )


_INT_TOKEN = re.compile(r"-?\d+")


def score_review_dimensions(
    paper: str,
    review: str,
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
    max_context_tokens: int = 8000,
) -> dict[str, int]:
    """Score a review on the seven quality dimensions, each 1-5.

    One judge call per dimension.  A dimension whose replies never parse to
    an in-range integer raises :class:`DimensionScoreMissingError` carrying
    the scores collected so far.
    """
    if not review.strip():
        raise InvalidInputError("review must be non-empty")
    paper = prompts.truncate_tokens(paper, max_context_tokens)
    scores: dict[str, int] = {}
    for name, description in prompts.DIMENSIONS.items():
        prompt = prompts.render(
            prompts.DIMENSION_SCORING,
            dimension_name=name,
            dimension_description=description,
            paper=paper,
            review=review,
        )
        messages = [{"role": "user", "content": prompt}]
        score: int | None = None
        for _ in range(endpoint.max_retries + 1):
            reply = complete(messages, endpoint, transport)
            match = _INT_TOKEN.search(reply)
            if match and 1 <= int(match.group(0)) <= 5:
                score = int(match.group(0))
                break
        if score is None:
            raise DimensionScoreMissingError(name, scores)
        scores[name] = score
    return scores


def judge_retrieval_pair(
    answer_with_retrieval: str,
    answer_without: str,
    criterion: str,
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
) -> int:
    """A/B retrieval verdict: 0 means the retrieval answer won.

    The reply must be exactly "0" or "1" after trimming whitespace; anything
    else is re-asked, then rejected.
    """
    if criterion not in prompts.RETRIEVAL_JUDGE:
        raise InvalidInputError(
            f"unknown criterion {criterion!r}; expected one of {prompts.RETRIEVAL_CRITERIA}"
        )
    if not answer_with_retrieval.strip() or not answer_without.strip():
        raise InvalidInputError("both answers must be non-empty")
    prompt = prompts.render(
        prompts.RETRIEVAL_JUDGE[criterion],
        answer_a=answer_with_retrieval,
        answer_b=answer_without,
    )
    messages = [{"role": "user", "content": prompt}]
    reply = ""
    for _ in range(endpoint.max_retries + 1):
        reply = complete(messages, endpoint, transport).strip()
        if reply in ("0", "1"):
            return int(reply)
    raise JudgeUnparseableError(
        f"expected a bare 0 or 1 after {endpoint.max_retries + 1} asks; "
        f"last reply: {reply[:200]!r}"
    )
