"""Template assets: the judging rubrics ship as data files, pinned here."""

from importlib import resources

from reviewkit import prompts


def template_bytes(name: str) -> str:
    return (
        resources.files("reviewkit").joinpath(f"templates/{name}.txt").read_text("utf-8")
    )


class TestTemplateAssets:
    def test_all_templates_exist(self):
        names = [
            prompts.GENRM_PAIRWISE,
            prompts.QUERY_GENERATION,
            prompts.RETRIEVAL_SYSTEM,
            prompts.REVIEW_GENERATION,
            prompts.DIMENSION_SCORING,
            prompts.REFERENCE_SYNTHESIS,
            *prompts.RETRIEVAL_JUDGE.values(),
        ]
        for name in names:
            assert prompts.load_template(name)

    def test_pairwise_rubric_verbatim_fragments(self):
        text = template_bytes(prompts.GENRM_PAIRWISE)
        for fragment in (
            "You are an expert academic peer reviewer.",
            "1. Factual Accuracy & Soundness:",
            "2. Completeness & Coverage:",
            "3. Level of Detail & Specificity:",
            "4. Comparison with Existing Work:",
            "5. Constructiveness:",
            "6. Clarity & Organization:",
            "Paper Context (Abstract/Content): {paper_context}",
            "Review 1: {review1}",
            "Review 2: {review2}",
            "- REVIEW_1_BETTER",
            "- REVIEW_2_BETTER",
            "YOU MUST CHOOSE A BETTER REVIEW. A TIE IS NOT ALLOWED.",
        ):
            assert fragment in text, fragment

    def test_query_generation_fragments(self):
        text = template_bytes(prompts.QUERY_GENERATION)
        for fragment in (
            "please provide three different questions",
            "1.xxx\n2.xxx\n3.xxx",
            "Do not include any additional content.",
            "Here is a research paper:\n{paper}",
        ):
            assert fragment in text, fragment

    def test_retrieval_judge_fragments(self):
        factual = template_bytes(prompts.RETRIEVAL_JUDGE["factual_accuracy"])
        assert "You are an extremely meticulous domain expert." in factual
        assert "a single character 0 or 1" in factual
        evidence = template_bytes(prompts.RETRIEVAL_JUDGE["evidence_quality"])
        assert "quality and usefulness of their evidence or citations" in evidence
        assert "Return only the single digit 0 or 1." in evidence
        clarity = template_bytes(prompts.RETRIEVAL_JUDGE["clarity_coherence"])
        assert "better clarity and coherence" in clarity
        assert "exactly one character: 0 or 1" in clarity
        for name in prompts.RETRIEVAL_JUDGE.values():
            text = template_bytes(name)
            assert "{answer_a}" in text and "{answer_b}" in text

    def test_review_generation_structure(self):
        text = template_bytes(prompts.REVIEW_GENERATION)
        for fragment in (
            "<think> </think>",
            "## Summary",
            "## Strengths",
            "## Weaknesses",
            "## Rating",
            "One integer from: [1, 3, 5, 6, 8, 10]",
        ):
            assert fragment in text, fragment

    def test_seven_dimensions(self):
        assert list(prompts.DIMENSIONS) == [
            "Topic Coverage",
            "Semantic Similarity",
            "Correctness of Claims",
            "Absence of Hallucinations",
            "Analytical Depth",
            "Actionable Insights",
            "Adherence to Guidelines",
        ]
        scoring = template_bytes(prompts.DIMENSION_SCORING)
        for placeholder in ("{dimension_name}", "{dimension_description}", "{paper}", "{review}"):
            assert placeholder in scoring

    def test_truncate_tokens(self):
        assert prompts.truncate_tokens("a b c d", 2) == "a b"
        assert prompts.truncate_tokens("a b", 10) == "a b"
