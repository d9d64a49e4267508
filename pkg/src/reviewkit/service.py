"""HTTP reward and evaluation API for external RL trainers.

Endpoints (JSON over HTTP/1.1, all payloads versioned):
  GET  /healthz      liveness, build version
  POST /v1/reward    batch composite-reward scoring
  POST /v1/evaluate  rule-based metric report

Request handling is stateless and order-preserving; per-item failures are
isolated so one malformed rollout never poisons a batch.  Judge outages
degrade that item to rule-only reward with an explicit flag, because a
trainer must never stall on a judge hiccup.
"""

from __future__ import annotations

import hashlib
import logging
from typing import Any, Callable

from fastapi import FastAPI
from fastapi.responses import JSONResponse

from . import __version__
from .errors import InvalidConfigError, InvalidInputError, ReviewKitError
from .judge import EndpointConfig, Message, compare_reviews
from .metrics import PairPolicy, evaluate_run
from .parsing import missing_sections, parse_review
from .rewards import score_generated_review
from .types import RewardConfig

logger = logging.getLogger(__name__)

SCHEMA_VERSION = "1"
MAX_BATCH_SIZE = 512

_ITEM_FIELDS = (
    "example_id",
    "ground_truth_rating",
    "reference_review",
    "paper_context",
    "generated_review",
)


def item_seed(server_seed: int, example_id: str) -> int:
    """Stable per-item judge seed: repeated scoring of a rollout is reproducible."""
    digest = hashlib.sha256(f"{server_seed}:{example_id}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _validate_item(item: Any) -> dict:
    if not isinstance(item, dict):
        raise InvalidInputError(f"item must be an object, got {type(item).__name__}")
    missing = [name for name in _ITEM_FIELDS if name not in item]
    if missing:
        raise InvalidInputError(f"item missing fields: {missing}")
    if not isinstance(item["generated_review"], str) or not item["generated_review"]:
        raise InvalidInputError("generated_review must be a non-empty string")
    if not isinstance(item["reference_review"], str):
        raise InvalidInputError("reference_review must be a string")
    if not isinstance(item["paper_context"], str):
        raise InvalidInputError("paper_context must be a string")
    try:
        rating = float(item["ground_truth_rating"])
    except (TypeError, ValueError):
        raise InvalidInputError("ground_truth_rating must be a number") from None
    validated = dict(item)
    validated["ground_truth_rating"] = rating
    return validated


def score_item(
    item: dict,
    config: RewardConfig,
    judge_endpoint: EndpointConfig | None,
    server_seed: int,
    judge_transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
) -> dict:
    """Score one batch item; returns the response entry for it."""
    validated = _validate_item(item)
    parsed = parse_review(validated["generated_review"])

    judge_outcome: int | None = None
    judge_degraded = False
    if judge_endpoint is not None:
        try:
            _, judge_outcome = compare_reviews(
                paper_context=validated["paper_context"],
                candidate=validated["generated_review"],
                reference=validated["reference_review"],
                endpoint=judge_endpoint,
                rng_seed=item_seed(server_seed, str(validated["example_id"])),
                transport=judge_transport,
            )
        except ReviewKitError as exc:
            logger.warning("judge unavailable for %s: %s", validated["example_id"], exc)
            judge_outcome = None
            judge_degraded = True

    breakdown = score_generated_review(
        validated["ground_truth_rating"],
        validated["generated_review"],
        judge_outcome,
        config,
    )
    entry = {"example_id": validated["example_id"], **breakdown.to_dict()}
    entry["predicted_rating"] = parsed.rating
    entry["missing_sections"] = sorted(missing_sections(parsed))
    if judge_endpoint is not None:
        entry["judge_degraded"] = judge_degraded
    return entry


def create_app(
    config: RewardConfig | None = None,
    judge_endpoint: EndpointConfig | None = None,
    server_seed: int = 0,
    judge_transport: Callable[[EndpointConfig, list[Message]], str] | None = None,
) -> FastAPI:
    """Build the service app; ``judge_transport`` is injectable for tests."""
    config = config or RewardConfig()
    app = FastAPI(title="reviewkit reward service", version=__version__)

    @app.get("/healthz")
    def healthz():
        return {
            "status": "ok",
            "version": __version__,
            "schema_version": SCHEMA_VERSION,
            "judge_enabled": judge_endpoint is not None,
        }

    @app.post("/v1/reward")
    def reward(payload: dict):
        items = payload.get("items")
        if not isinstance(items, list) or not items:
            return JSONResponse(
                status_code=400,
                content={"error": "invalid-request: 'items' must be a non-empty list"},
            )
        if len(items) > MAX_BATCH_SIZE:
            return JSONResponse(
                status_code=413,
                content={"error": f"batch size {len(items)} exceeds {MAX_BATCH_SIZE}"},
            )
        try:
            effective = config.merged(payload.get("overrides"))
        except InvalidConfigError as exc:
            return JSONResponse(status_code=400, content={"error": f"invalid-config: {exc}"})

        results = []
        for item in items:
            try:
                results.append(
                    score_item(item, effective, judge_endpoint, server_seed, judge_transport)
                )
            except InvalidInputError as exc:
                example_id = item.get("example_id") if isinstance(item, dict) else None
                results.append({"example_id": example_id, "error": str(exc)})
        return {"schema_version": SCHEMA_VERSION, "results": results}

    @app.post("/v1/evaluate")
    def evaluate(payload: dict):
        records = payload.get("records")
        if not isinstance(records, list):
            return JSONResponse(
                status_code=400,
                content={"error": "invalid-request: 'records' must be a list"},
            )
        try:
            policy = PairPolicy.from_dict(payload.get("pair_policy") or {})
            parsed_records = []
            for record in records:
                if not isinstance(record, dict) or "truth" not in record:
                    raise InvalidInputError(f"bad record: {record!r}")
                predicted = record.get("predicted")
                parsed_records.append(
                    (None if predicted is None else float(predicted), float(record["truth"]))
                )
            report = evaluate_run(parsed_records, policy)
        except (InvalidInputError, TypeError, ValueError) as exc:
            return JSONResponse(status_code=400, content={"error": str(exc)})
        return report

    return app


def serve(
    bind_address: str = "127.0.0.1:8080",
    config: RewardConfig | None = None,
    judge_endpoint: EndpointConfig | None = None,
    server_seed: int = 0,
    log_level: str = "info",
) -> None:
    """Run the service until SIGINT/SIGTERM; in-flight requests finish first.

    A clean signal-initiated shutdown exits with status 0: uvicorn re-raises
    the captured signal after draining, and the absorbing handler installed
    here keeps that re-raise from killing the process.
    """
    import signal
    import threading

    import uvicorn

    host, _, port_text = bind_address.rpartition(":")
    host = host or "127.0.0.1"
    app = create_app(config=config, judge_endpoint=judge_endpoint, server_seed=server_seed)

    if threading.current_thread() is threading.main_thread():
        absorb = lambda signum, frame: logger.info("shutdown signal %d handled", signum)  # noqa: E731
        signal.signal(signal.SIGTERM, absorb)
        signal.signal(signal.SIGINT, absorb)

    uvicorn.run(app, host=host, port=int(port_text), log_level=log_level)
