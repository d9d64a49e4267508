"""Retrieval-augmented context building for papers under review.

Pipeline: generate three probing questions about the paper, search arXiv
for each, answer each question against its sources, then consolidate the
(query, answer, sources) triples into one deterministic context block ready
for prompt injection.  Also hosts the retrieval-benefit A/B evaluation.
"""

from __future__ import annotations

import logging
import re
from typing import Callable

from . import prompts
from .arxiv import search_arxiv
from .errors import (
    InvalidInputError,
    JudgeUnparseableError,
    QueryGenerationError,
    UndefinedMetricError,
)
from .judge import EndpointConfig, Message, complete, judge_retrieval_pair
from .types import BibEntry, PaperDocument, QueryAnswer, QuerySet, RetrievedContext

logger = logging.getLogger(__name__)

# Tool-invocation markup that must never survive consolidation.  Covers the
# common chat-template and function-calling delimiters emitted by agent
# frameworks.
TOOL_MARKUP_BLOCKLIST = (
    "<tool_call>",
    "</tool_call>",
    "<tool_response>",
    "</tool_response>",
    "<function_call>",
    "</function_call>",
    "[TOOL_CALLS]",
    "[TOOL_RESULTS]",
    "✿FUNCTION✿",
    "✿ARGS✿",
    "✿RESULT✿",
    "✿RETURN✿",
    "<|im_start|>",
    "<|im_end|>",
)

_QUERY_LINE = re.compile(r"^\s*([1-3])\s*[.)]\s*(.+?)\s*$", re.MULTILINE)

RETRIEVAL_CRITERIA = prompts.RETRIEVAL_CRITERIA


def generate_queries(
    paper: PaperDocument,
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
    max_paper_tokens: int = 16000,
) -> QuerySet:
    """Ask the endpoint for the three probing questions about a paper.

    The reply must contain exactly one line for each of the "1."/"2."/"3."
    prefixes; anything else is re-asked up to ``max_retries`` times.
    """
    paper_text = f"{paper.title}\n\n{paper.body}" if paper.title else paper.body
    prompt = prompts.render(
        prompts.QUERY_GENERATION,
        paper=prompts.truncate_tokens(paper_text, max_paper_tokens),
    )
    messages = [{"role": "user", "content": prompt}]
    reply = ""
    for _ in range(endpoint.max_retries + 1):
        reply = complete(messages, endpoint, transport)
        numbered = {}
        duplicate = False
        for label, text in _QUERY_LINE.findall(reply):
            if label in numbered:
                duplicate = True
            numbered[label] = text.strip()
        if not duplicate and set(numbered) == {"1", "2", "3"}:
            return QuerySet((numbered["1"], numbered["2"], numbered["3"]))
    raise QueryGenerationError(
        f"reply did not contain exactly three numbered questions after "
        f"{endpoint.max_retries + 1} asks; last reply: {reply[:200]!r}"
    )


def _source_digest(sources: list[BibEntry]) -> str:
    blocks = []
    for n, entry in enumerate(sources, start=1):
        lines = [f"[{n}] {entry.title} (arXiv:{entry.arxiv_id})"]
        if entry.authors:
            lines.append("Authors: " + ", ".join(entry.authors))
        for excerpt in entry.excerpts:
            lines.append(excerpt)
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks)


def answer_query(
    query: str,
    sources: list[BibEntry],
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
) -> str:
    """Answer one query, grounding in the source digest when sources exist.

    With no sources this degrades to a vanilla (retrieval-free) answer,
    which is exactly the baseline arm of the A/B evaluation.
    """
    system = prompts.load_template(prompts.RETRIEVAL_SYSTEM).strip()
    if sources:
        user = (
            f"Question: {query}\n\nRetrieved arXiv papers:\n\n{_source_digest(sources)}\n\n"
            "Answer the question using the retrieved papers where relevant, "
            "citing them as [n]."
        )
    else:
        user = f"Question: {query}"
    messages = [
        {"role": "system", "content": system},
        {"role": "user", "content": user},
    ]
    return complete(messages, endpoint, transport)


def strip_tool_markup(text: str, blocklist: tuple[str, ...] = TOOL_MARKUP_BLOCKLIST) -> str:
    """Remove blocklisted delimiter substrings until none remain.

    Runs to a fixpoint so overlapping fragments cannot reassemble a
    blocklisted marker.
    """
    while True:
        cleaned = text
        for marker in blocklist:
            cleaned = cleaned.replace(marker, "")
        if cleaned == text:
            return cleaned
        text = cleaned


def consolidate_context(
    pairs: list[tuple[str, str, list[BibEntry]]],
    blocklist: tuple[str, ...] = TOOL_MARKUP_BLOCKLIST,
) -> RetrievedContext:
    """Assemble (query, answer, sources) triples into a RetrievedContext.

    Answers are scrubbed of tool-invocation artifacts; order is preserved.
    """
    if not 1 <= len(pairs) <= 3:
        raise InvalidInputError(f"expected 1-3 query/answer pairs, got {len(pairs)}")
    return RetrievedContext(
        query_answers=tuple(
            QueryAnswer(
                query=query,
                answer=strip_tool_markup(answer, blocklist),
                sources=tuple(sources),
            )
            for query, answer, sources in pairs
        )
    )


def render_context_block(context: RetrievedContext) -> str:
    """Deterministic UTF-8 text block for prompt injection.

    Three-part structure per query: the question, the consolidated answer,
    and the bibliography with relevance-ranked excerpts.
    """
    blocks = []
    for qa in context.query_answers:
        lines = ["### Query", qa.query, "", "### Answer", qa.answer, "", "### Sources"]
        if qa.sources:
            for entry in qa.sources:
                lines.append(f"- arXiv:{entry.arxiv_id} — {entry.title}")
                if entry.authors:
                    lines.append(f"  Authors: {', '.join(entry.authors)}")
                for rank, excerpt in enumerate(entry.excerpts, start=1):
                    excerpt_text = " ".join(excerpt.split())
                    lines.append(f"  [{rank}] {excerpt_text}")
        else:
            lines.append("(none)")
        blocks.append("\n".join(lines))
    return "\n\n".join(blocks) + "\n"


def build_context(
    paper: PaperDocument,
    endpoint: EndpointConfig,
    transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
    searcher: Callable[[str, int], list[BibEntry]] | None = None,
    max_results: int = 5,
) -> tuple[QuerySet, RetrievedContext]:
    """Run the full retrieval pipeline for one paper."""
    search = searcher or (lambda q, n: search_arxiv(q, n))
    queries = generate_queries(paper, endpoint, transport)
    pairs = []
    for query in queries.queries:
        sources = search(query, max_results)
        answer = answer_query(query, sources, endpoint, transport)
        pairs.append((query, answer, sources))
    return queries, consolidate_context(pairs)


def evaluate_retrieval_benefit(
    queries: list[str],
    endpoint_answerer: EndpointConfig,
    endpoint_judge: EndpointConfig,
    judges_per_pair: int = 3,
    transport_answerer: Callable[[EndpointConfig, list[Message]], str] | None = None,
    transport_judge: Callable[[EndpointConfig, list[Message]], str] | None = None,
    searcher: Callable[[str, int], list[BibEntry]] | None = None,
    max_results: int = 5,
) -> dict:
    """A/B test: do retrieval-grounded answers beat vanilla answers?

    For each query the answerer produces both arms; ``judges_per_pair``
    independent verdicts per criterion are majority-voted.  A pair whose
    votes tie, or whose verdicts never parse, is excluded from that
    criterion's denominator and counted.
    """
    if judges_per_pair < 1:
        raise InvalidInputError("judges_per_pair must be >= 1")
    search = searcher or (lambda q, n: search_arxiv(q, n))

    arms = []
    for query in queries:
        sources = search(query, max_results)
        with_retrieval = answer_query(query, sources, endpoint_answerer, transport_answerer)
        without = answer_query(query, [], endpoint_answerer, transport_answerer)
        arms.append((query, with_retrieval, without))

    results: dict = {}
    for criterion in RETRIEVAL_CRITERIA:
        wins = 0
        usable = 0
        excluded = 0
        for _, with_retrieval, without in arms:
            votes_for_retrieval = 0
            failed = False
            for _ in range(judges_per_pair):
                try:
                    verdict = judge_retrieval_pair(
                        with_retrieval, without, criterion, endpoint_judge, transport_judge
                    )
                except JudgeUnparseableError:
                    failed = True
                    break
                if verdict == 0:
                    votes_for_retrieval += 1
            if failed or 2 * votes_for_retrieval == judges_per_pair:
                excluded += 1
                continue
            usable += 1
            if 2 * votes_for_retrieval > judges_per_pair:
                wins += 1
        if usable == 0:
            raise UndefinedMetricError(
                f"no usable verdict pairs for criterion {criterion!r}"
            )
        results[criterion] = {
            "win_rate": wins / usable,
            "wins": wins,
            "usable_pairs": usable,
            "excluded_pairs": excluded,
        }
    return results
