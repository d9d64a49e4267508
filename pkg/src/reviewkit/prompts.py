"""Prompt templates shipped as data files under ``templates/``.

Templates are plain text with ``str.format`` placeholders.  They are data,
not code: edit the files, not this module.
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

GENRM_PAIRWISE = "genrm_pairwise"
QUERY_GENERATION = "query_generation"
RETRIEVAL_SYSTEM = "retrieval_system"
REVIEW_GENERATION = "review_generation"
DIMENSION_SCORING = "dimension_scoring"
REFERENCE_SYNTHESIS = "reference_synthesis"
RETRIEVAL_JUDGE = {
    "factual_accuracy": "retrieval_judge_factual_accuracy",
    "evidence_quality": "retrieval_judge_evidence_quality",
    "clarity_coherence": "retrieval_judge_clarity_coherence",
}

# The seven review-quality dimensions with their judging rubrics.
DIMENSIONS: dict[str, str] = {
    "Topic Coverage": (
        "Does the AI-generated review comprehensively address the main topics "
        "and arguments of the paper? Does it cover aspects typically emphasized "
        "by human reviewers?"
    ),
    "Semantic Similarity": (
        "Does the review capture the core critique and suggestions of a "
        "plausible human review, even if phrased differently?"
    ),
    "Correctness of Claims": (
        "Are the statements in the review factually accurate with respect to "
        "the paper's content? Does the review avoid misinterpretations or "
        "incorrect representations of the methodology, results, or conclusions?"
    ),
    "Absence of Hallucinations": (
        "Does the review refrain from introducing information or claims not "
        "supported by the paper?"
    ),
    "Analytical Depth": (
        "Does the review demonstrate deep engagement with the research? This "
        "includes evaluating methodological rigor, identifying logical gaps, "
        "interpreting results, and contextualizing contributions within "
        "related work."
    ),
    "Actionable Insights": (
        "Does the review provide specific, constructive suggestions for "
        "improving the paper? Are the recommendations practical and clearly "
        "articulated?"
    ),
    "Adherence to Guidelines": (
        "Does the review follow standard academic review criteria such as "
        "originality, significance, methodological soundness, clarity, and "
        "ethical compliance (if applicable)?"
    ),
}

RETRIEVAL_CRITERIA = tuple(RETRIEVAL_JUDGE)


@lru_cache(maxsize=None)
def load_template(name: str) -> str:
    """Load a template file by bare name (without the .txt suffix)."""
    return (
        resources.files("reviewkit").joinpath(f"templates/{name}.txt").read_text("utf-8")
    )


def render(name: str, **fields: str) -> str:
    return load_template(name).format(**fields)


def truncate_tokens(text: str, max_tokens: int) -> str:
    """Keep at most ``max_tokens`` whitespace-delimited tokens of ``text``."""
    tokens = text.split()
    if len(tokens) <= max_tokens:
        return text
    return " ".join(tokens[:max_tokens])
