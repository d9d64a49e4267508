"""Reward/evaluation service behavior via the ASGI test client."""

import pytest
from fastapi.testclient import TestClient

from conftest import ScriptedTransport, fast_endpoint
from reviewkit.errors import TransportFailure
from reviewkit.metrics import PairPolicy, evaluate_run
from reviewkit.rewards import score_generated_review
from reviewkit.service import MAX_BATCH_SIZE, create_app, item_seed
from reviewkit.types import RewardConfig

REVIEW_TEMPLATE = """<think>t</think>
## Summary
s
## Strengths
- a
## Weaknesses
- b
## Rating
{rating}
"""


def make_item(i, rating="6", truth=6.0):
    return {
        "example_id": f"ex-{i}",
        "ground_truth_rating": truth,
        "reference_review": "## Summary\nref\n## Strengths\n- r\n## Weaknesses\n- r",
        "paper_context": "paper text",
        "generated_review": REVIEW_TEMPLATE.format(rating=rating),
    }


@pytest.fixture
def client():
    return TestClient(create_app(RewardConfig()))


@pytest.fixture
def judged_client():
    transport = ScriptedTransport(["REVIEW_1_BETTER"])
    app = create_app(
        RewardConfig(),
        judge_endpoint=fast_endpoint(),
        server_seed=123,
        judge_transport=transport,
    )
    return TestClient(app), transport


class TestHealth:
    def test_healthz(self, client):
        response = client.get("/healthz")
        assert response.status_code == 200
        body = response.json()
        assert body["status"] == "ok"
        assert body["schema_version"] == "1"
        assert body["judge_enabled"] is False


class TestRewardEndpoint:
    def test_judge_disabled_mode(self, client):
        response = client.post("/v1/reward", json={"items": [make_item(0, rating="8", truth=6.0)]})
        assert response.status_code == 200
        result = response.json()["results"][0]
        assert result["r_judge"] is None
        assert result["r_final"] == result["r_rule"]
        assert result["missing_sections"] == []
        assert result["predicted_rating"] == 8.0

    def test_matches_library_bitwise(self, client):
        items = [make_item(i, rating=str(1 + (i % 10)), truth=5.5) for i in range(64)]
        items = [dict(item, ground_truth_rating=5.5) for item in items]
        response = client.post("/v1/reward", json={"items": items})
        results = response.json()["results"]
        assert [r["example_id"] for r in results] == [item["example_id"] for item in items]
        for item, result in zip(items, results):
            expected = score_generated_review(
                item["ground_truth_rating"], item["generated_review"], None, RewardConfig()
            )
            assert result["r_rc"] == expected.r_rc
            assert result["r_rule"] == expected.r_rule
            assert result["r_final"] == expected.r_final

    def test_overrides_applied(self, client):
        item = make_item(0, rating="8", truth=6.0)
        response = client.post(
            "/v1/reward", json={"items": [item], "overrides": {"sigma": 2.0}}
        )
        expected = score_generated_review(
            6.0, item["generated_review"], None, RewardConfig(sigma=2.0)
        )
        assert response.json()["results"][0]["r_rc"] == expected.r_rc

    def test_bad_overrides_rejected(self, client):
        response = client.post(
            "/v1/reward", json={"items": [make_item(0)], "overrides": {"sigma": -1}}
        )
        assert response.status_code == 400
        assert "invalid-config" in response.json()["error"]

    def test_empty_batch(self, client):
        assert client.post("/v1/reward", json={"items": []}).status_code == 400

    def test_oversize_batch(self, client):
        items = [make_item(i) for i in range(MAX_BATCH_SIZE + 1)]
        assert client.post("/v1/reward", json={"items": items}).status_code == 413

    def test_poisoned_item_isolated(self, client):
        items = [make_item(0), {"example_id": "bad", "nope": 1}, make_item(2)]
        response = client.post("/v1/reward", json={"items": items})
        assert response.status_code == 200
        results = response.json()["results"]
        assert "error" in results[1] and results[1]["example_id"] == "bad"
        assert "r_final" in results[0] and "r_final" in results[2]

    def test_judge_path_and_seeded_order(self, judged_client):
        client, transport = judged_client
        response = client.post("/v1/reward", json={"items": [make_item(0)]})
        result = response.json()["results"][0]
        assert result["r_judge"] in (0, 1)
        assert result["judge_degraded"] is False
        # the slot-1 stub wins; r_judge reflects whether the candidate sat in slot 1
        import random

        seed = item_seed(123, "ex-0")
        candidate_first = random.Random(seed).random() < 0.5
        assert result["r_judge"] == int(candidate_first)

    def test_judge_outage_degrades_per_item(self):
        def always_down(endpoint, messages):
            raise TransportFailure("down", status=500)

        app = create_app(
            RewardConfig(),
            judge_endpoint=fast_endpoint(max_retries=0),
            judge_transport=always_down,
        )
        client = TestClient(app)
        response = client.post("/v1/reward", json={"items": [make_item(0, rating="6")]})
        result = response.json()["results"][0]
        assert result["judge_degraded"] is True
        assert result["r_judge"] is None
        assert result["r_final"] == result["r_rule"]  # judge-disabled fallback

    def test_identical_batches_identical_responses(self, client):
        items = [make_item(i) for i in range(8)]
        a = client.post("/v1/reward", json={"items": items}).json()
        b = client.post("/v1/reward", json={"items": items}).json()
        assert a == b

    def test_concurrent_identical_batches(self, client):
        from concurrent.futures import ThreadPoolExecutor

        items = [make_item(i) for i in range(16)]

        def post(_):
            return client.post("/v1/reward", json={"items": items}).json()

        with ThreadPoolExecutor(max_workers=6) as pool:
            responses = list(pool.map(post, range(12)))
        assert all(response == responses[0] for response in responses)

    def test_repeated_scoring_same_judge_seed(self, judged_client):
        client, transport = judged_client
        a = client.post("/v1/reward", json={"items": [make_item(7)]}).json()
        b = client.post("/v1/reward", json={"items": [make_item(7)]}).json()
        assert a == b


class TestEvaluateEndpoint:
    def test_minimal(self, client):
        response = client.post(
            "/v1/evaluate",
            json={"records": [{"predicted": 6, "truth": 6}, {"predicted": 7, "truth": 8}]},
        )
        report = response.json()
        assert report["n_pairs"] == 1
        assert report["schema_version"] == "1"

    def test_matches_library(self, client):
        records = [{"predicted": float(i % 7 + 1), "truth": float(i % 5 + 2)} for i in range(30)]
        response = client.post(
            "/v1/evaluate",
            json={"records": records, "pair_policy": {"kind": "sampled", "n": 50, "seed": 3}},
        )
        expected = evaluate_run(
            [(r["predicted"], r["truth"]) for r in records],
            PairPolicy("sampled", n=50, seed=3),
        )
        assert response.json() == expected

    def test_constant_predictions_structured_error(self, client):
        records = [{"predicted": 5, "truth": t} for t in (1, 2, 3)]
        response = client.post("/v1/evaluate", json={"records": records})
        report = response.json()
        assert response.status_code == 200
        assert report["spearman"] is None
        assert "spearman" in report["errors"]

    def test_too_few_records(self, client):
        response = client.post("/v1/evaluate", json={"records": [{"predicted": 5, "truth": 5}]})
        assert response.status_code == 400
