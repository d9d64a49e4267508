"""Operator command line.

Subcommands: retrieve, reward, evaluate, judge-eval, balance, sample-eval,
serve.  Every command that writes outputs also writes a manifest recording
the parameters and seeds needed to reproduce the run.  Exit codes: 0 on
success, 1 on runtime failure, 2 on usage errors.
"""

from __future__ import annotations

import argparse
import datetime
import json
import sys
from pathlib import Path

from . import __version__, dataset, metrics, prompts, retrieval, service
from .arxiv import parse_atom_feed
from .errors import ReviewKitError
from .judge import EndpointConfig, compare_reviews, score_review_dimensions
from .parsing import missing_sections, parse_review
from .rewards import score_generated_review
from .types import PaperDocument, RewardConfig


def _fail(stage: str, message: str) -> int:
    print(f"error [{stage}]: {message}", file=sys.stderr)
    return 1


def _write_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")


def _write_manifest(out_dir: Path, command: str, parameters: dict) -> None:
    _write_json(
        out_dir / "manifest.json",
        {
            "tool": f"reviewkit {__version__}",
            "command": command,
            "parameters": parameters,
            "created_at": datetime.datetime.now(datetime.timezone.utc).isoformat(),
        },
    )


def _read_jsonl(path: Path) -> list[dict]:
    records = []
    with path.open("r", encoding="utf-8") as handle:
        for line in handle:
            if line.strip():
                records.append(json.loads(line))
    return records


def _endpoint_from_args(args, prefix: str) -> EndpointConfig | None:
    url = getattr(args, f"{prefix}_url")
    if not url:
        return None
    return EndpointConfig(
        base_url=url,
        model_name=getattr(args, f"{prefix}_model"),
        api_key_source=getattr(args, f"{prefix}_key_env"),
        max_retries=args.max_retries,
        timeout=args.timeout,
    )


def _add_endpoint_flags(parser: argparse.ArgumentParser, prefix: str, role: str) -> None:
    parser.add_argument(f"--{prefix}-url", default="", help=f"{role} chat endpoint base URL")
    parser.add_argument(f"--{prefix}-model", default="", help=f"{role} model name")
    parser.add_argument(
        f"--{prefix}-key-env",
        default="REVIEWKIT_API_KEY",
        help=f"environment variable holding the {role} API key",
    )


def _add_common_endpoint_knobs(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--max-retries", type=int, default=3)
    parser.add_argument("--timeout", type=float, default=60.0)


def _load_paper(path: Path) -> PaperDocument:
    text = path.read_text(encoding="utf-8")
    if path.suffix == ".json":
        record = json.loads(text)
        return PaperDocument(
            id=record.get("paper_id") or record.get("id") or path.stem,
            title=record.get("title", ""),
            body=record["body"],
            venue=record.get("venue", "other"),
            year=record.get("year", 0),
        )
    lines = text.splitlines()
    title = next((line.strip().lstrip("# ") for line in lines if line.strip()), "")
    return PaperDocument(id=path.stem, title=title, body=text)


def cmd_retrieve(args) -> int:
    out_dir = Path(args.out_dir)
    try:
        paper = _load_paper(Path(args.paper))
    except (OSError, KeyError, json.JSONDecodeError, ReviewKitError) as exc:
        return _fail("load-paper", str(exc))

    endpoint = _endpoint_from_args(args, "endpoint")
    if endpoint is None:
        return _fail("config", "--endpoint-url is required")

    searcher = None
    if args.arxiv_feed:
        try:
            entries = parse_atom_feed(Path(args.arxiv_feed).read_text(encoding="utf-8"))
        except (OSError, ReviewKitError) as exc:
            return _fail("arxiv-feed", str(exc))
        searcher = lambda query, n: entries[:n]  # noqa: E731

    try:
        queries, context = retrieval.build_context(
            paper, endpoint, searcher=searcher, max_results=args.max_results
        )
    except ReviewKitError as exc:
        return _fail("retrieve", str(exc))

    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "context.json", context.to_dict())
    (out_dir / "context.txt").write_text(
        retrieval.render_context_block(context), encoding="utf-8"
    )
    _write_manifest(
        out_dir,
        "retrieve",
        {
            "paper": str(args.paper),
            "paper_id": paper.id,
            "queries": list(queries.queries),
            "endpoint_url": endpoint.base_url,
            "endpoint_model": endpoint.model_name,
            "max_results": args.max_results,
            "arxiv_feed": args.arxiv_feed or None,
        },
    )
    print(f"wrote {out_dir / 'context.json'} and {out_dir / 'context.txt'}")
    return 0


def cmd_reward(args) -> int:
    out_dir = Path(args.out_dir)
    try:
        ingest = dataset.ingest_jsonl(Path(args.dataset))
    except (OSError, ReviewKitError) as exc:
        return _fail("dataset", str(exc))
    for line_no, reason in ingest.rejects:
        print(f"dataset line {line_no} rejected: {reason}", file=sys.stderr)

    try:
        review_records = _read_jsonl(Path(args.reviews))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("reviews", str(exc))
    reviews = {
        r["paper_id"]: r["review"]
        for r in review_records
        if "paper_id" in r and "review" in r
    }

    try:
        config = RewardConfig(sigma=args.sigma, alpha=args.alpha, beta=args.beta, gamma=args.gamma)
    except ReviewKitError as exc:
        return _fail("config", str(exc))
    judge = _endpoint_from_args(args, "judge")

    examples = {ex.paper.id: ex for ex in ingest.examples}
    joined = [pid for pid in examples if pid in reviews]
    for pid in sorted(set(examples) - set(reviews)):
        print(f"no generated review for paper_id {pid!r}", file=sys.stderr)
    for pid in sorted(set(reviews) - set(examples)):
        print(f"no dataset example for paper_id {pid!r}", file=sys.stderr)
    if not joined:
        return _fail("join", "no paper_id is present in both inputs")

    rows = []
    sums = {"r_rc": 0.0, "r_f": 0.0, "r_rule": 0.0, "r_final": 0.0}
    judge_values = []
    histogram = {name: 0 for name in ("thinking", "summary", "strengths", "weaknesses")}
    for pid in joined:
        example = examples[pid]
        generated = reviews[pid]
        judge_outcome = None
        judge_degraded = False
        if judge is not None:
            try:
                _, judge_outcome = compare_reviews(
                    paper_context=example.paper.body,
                    candidate=generated,
                    reference=example.truth.reference_review,
                    endpoint=judge,
                    rng_seed=service.item_seed(args.seed, pid),
                )
            except ReviewKitError as exc:
                print(f"judge failed for {pid!r}: {exc}", file=sys.stderr)
                judge_degraded = True
        breakdown = score_generated_review(
            example.truth.mean_rating, generated, judge_outcome, config
        )
        parsed = parse_review(generated)
        missing = sorted(missing_sections(parsed))
        for name in missing:
            histogram[name] += 1
        row = {"paper_id": pid, **breakdown.to_dict()}
        row["predicted_rating"] = parsed.rating
        row["missing_sections"] = missing
        if judge is None:
            del row["r_judge"]
        else:
            row["judge_degraded"] = judge_degraded
            if judge_outcome is not None:
                judge_values.append(judge_outcome)
        rows.append(row)
        for key in sums:
            sums[key] += row[key]

    out_dir.mkdir(parents=True, exist_ok=True)
    with (out_dir / "rewards.jsonl").open("w", encoding="utf-8") as handle:
        for row in rows:
            handle.write(json.dumps(row, ensure_ascii=False) + "\n")
    summary = {
        "n_scored": len(rows),
        "means": {key: sums[key] / len(rows) for key in sums},
        "mean_r_judge": (sum(judge_values) / len(judge_values)) if judge_values else None,
        "missing_section_histogram": histogram,
    }
    _write_json(out_dir / "summary.json", summary)
    _write_manifest(
        out_dir,
        "reward",
        {
            "dataset": str(args.dataset),
            "reviews": str(args.reviews),
            "config": config.to_dict(),
            "judge_url": judge.base_url if judge else None,
            "judge_model": judge.model_name if judge else None,
            "seed": args.seed,
        },
    )
    print(f"scored {len(rows)} reviews -> {out_dir / 'rewards.jsonl'}")
    return 0


def _parse_pair_policy(text: str) -> metrics.PairPolicy:
    if text == "all":
        return metrics.PairPolicy("all_pairs")
    if text == "auto":
        return metrics.PairPolicy("auto")
    if text.startswith("sampled:"):
        _, n, seed = text.split(":")
        return metrics.PairPolicy("sampled", n=int(n), seed=int(seed))
    raise argparse.ArgumentTypeError(
        f"bad pair policy {text!r}; expected all, auto, or sampled:N:SEED"
    )


def cmd_evaluate(args) -> int:
    try:
        records = _read_jsonl(Path(args.predictions))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("predictions", str(exc))
    pairs = []
    for record in records:
        predicted = record.get("predicted")
        pairs.append((None if predicted is None else float(predicted), float(record["truth"])))
    try:
        report = metrics.evaluate_run(pairs, args.pairs)
    except ReviewKitError as exc:
        return _fail("evaluate", str(exc))

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    _write_json(out_dir / "report.json", report)
    (out_dir / "report.txt").write_text(metrics.render_report_table(report), encoding="utf-8")
    _write_manifest(
        out_dir,
        "evaluate",
        {"predictions": str(args.predictions), "pair_policy": report["pair_policy"]},
    )
    print(metrics.render_report_table(report), end="")
    return 0


def cmd_judge_eval(args) -> int:
    judge = _endpoint_from_args(args, "judge")
    if judge is None:
        return _fail("config", "--judge-url is required")
    try:
        records = _read_jsonl(Path(args.reviews))
    except (OSError, json.JSONDecodeError) as exc:
        return _fail("reviews", str(exc))
    if not records:
        return _fail("reviews", "no records in input")

    dimension_names = list(prompts.DIMENSIONS)
    rows = []
    for record in records:
        paper_id = record.get("paper_id", "?")
        try:
            scores = score_review_dimensions(record["paper"], record["review"], judge)
            rows.append({"paper_id": paper_id, "scores": scores, "error": None})
        except KeyError as exc:
            rows.append({"paper_id": paper_id, "scores": {}, "error": f"missing field {exc}"})
            print(f"record {paper_id!r} missing field {exc}", file=sys.stderr)
        except ReviewKitError as exc:
            partial = getattr(exc, "partial_scores", {})
            rows.append({"paper_id": paper_id, "scores": partial, "error": str(exc)})
            print(f"judge failed for {paper_id!r}: {exc}", file=sys.stderr)

    means = {}
    for name in dimension_names:
        values = [row["scores"][name] for row in rows if name in row["scores"]]
        means[name] = (sum(values) / len(values)) if values else None

    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    report = {"per_review": rows, "dimension_means": means, "n_reviews": len(rows)}
    _write_json(out_dir / "dimension_report.json", report)
    width = max(len(name) for name in dimension_names)
    table = "\n".join(
        f"{name.ljust(width)}  {means[name]:.3f}" if means[name] is not None else f"{name.ljust(width)}  n/a"
        for name in dimension_names
    )
    (out_dir / "dimension_report.txt").write_text(table + "\n", encoding="utf-8")
    _write_manifest(
        out_dir,
        "judge-eval",
        {"reviews": str(args.reviews), "judge_url": judge.base_url, "judge_model": judge.model_name},
    )
    print(table)
    return 0


def cmd_balance(args) -> int:
    try:
        ingest = dataset.ingest_jsonl(Path(args.dataset))
        balanced = dataset.balance_dataset(
            ingest.examples,
            mid_cap_fraction=args.mid_cap_fraction,
            extreme_boost=args.extreme_boost,
            seed=args.seed,
        )
    except (OSError, ReviewKitError) as exc:
        return _fail("balance", str(exc))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset.write_jsonl(out_dir / "balanced.jsonl", balanced)
    _write_manifest(
        out_dir,
        "balance",
        {
            "dataset": str(args.dataset),
            "mid_cap_fraction": args.mid_cap_fraction,
            "extreme_boost": args.extreme_boost,
            "seed": args.seed,
            "n_in": len(ingest.examples),
            "n_out": len(balanced),
        },
    )
    print(f"balanced {len(ingest.examples)} -> {len(balanced)} examples")
    return 0


def cmd_sample_eval(args) -> int:
    try:
        ingest = dataset.ingest_jsonl(Path(args.dataset))
        pool = [(ex, ex.truth.mean_rating) for ex in ingest.examples]
        sampled = dataset.sample_uniform_eval_set(pool, n=args.n, bins=args.bins, seed=args.seed)
    except (OSError, ReviewKitError) as exc:
        return _fail("sample-eval", str(exc))
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    dataset.write_jsonl(out_dir / "eval_set.jsonl", [ex for ex, _ in sampled])
    _write_manifest(
        out_dir,
        "sample-eval",
        {
            "dataset": str(args.dataset),
            "n": args.n,
            "bins": args.bins,
            "seed": args.seed,
            "pool_size": len(pool),
        },
    )
    print(f"sampled {len(sampled)} of {len(pool)} examples")
    return 0


def cmd_serve(args) -> int:
    try:
        config = RewardConfig(sigma=args.sigma, alpha=args.alpha, beta=args.beta, gamma=args.gamma)
        judge = _endpoint_from_args(args, "judge")
    except ReviewKitError as exc:
        return _fail("config", str(exc))
    try:
        service.serve(
            bind_address=args.bind,
            config=config,
            judge_endpoint=judge,
            server_seed=args.seed,
            log_level=args.log_level,
        )
    except OSError as exc:
        return _fail("bind", str(exc))
    return 0


def _add_reward_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--sigma", type=float, default=1.0)
    parser.add_argument("--alpha", type=float, default=1.0)
    parser.add_argument("--beta", type=float, default=0.25)
    parser.add_argument("--gamma", type=float, default=0.5)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="reviewkit",
        description="Rewards, metrics, retrieval contexts, and datasets for "
        "automated scientific-review generation.",
    )
    parser.add_argument("--version", action="version", version=f"reviewkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("retrieve", help="build a retrieval-augmented context for a paper")
    p.add_argument("--paper", required=True, help="paper file (.json record or plain text)")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--max-results", type=int, default=5)
    p.add_argument("--arxiv-feed", default="", help="use a recorded Atom feed instead of the live API")
    _add_endpoint_flags(p, "endpoint", "query/answer")
    _add_common_endpoint_knobs(p)
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("reward", help="score generated reviews against a dataset")
    p.add_argument("--dataset", required=True, help="ReviewExample JSONL")
    p.add_argument("--reviews", required=True, help="JSONL of {paper_id, review}")
    p.add_argument("--out-dir", required=True)
    p.add_argument("--seed", type=int, default=0, help="base seed for judge order randomization")
    _add_reward_config_flags(p)
    _add_endpoint_flags(p, "judge", "judge")
    _add_common_endpoint_knobs(p)
    p.set_defaults(func=cmd_reward)

    p = sub.add_parser("evaluate", help="rule-based metric report for predictions")
    p.add_argument("--predictions", required=True, help="JSONL of {predicted, truth}")
    p.add_argument("--out-dir", required=True)
    p.add_argument(
        "--pairs",
        type=_parse_pair_policy,
        default=metrics.PairPolicy("auto"),
        help="all, auto, or sampled:N:SEED",
    )
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("judge-eval", help="seven-dimension model-based review scoring")
    p.add_argument("--reviews", required=True, help="JSONL of {paper_id, paper, review}")
    p.add_argument("--out-dir", required=True)
    _add_endpoint_flags(p, "judge", "judge")
    _add_common_endpoint_knobs(p)
    p.set_defaults(func=cmd_judge_eval)

    p = sub.add_parser("balance", help="flatten the rating histogram of a dataset")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--mid-cap-fraction", type=float, required=True)
    p.add_argument("--extreme-boost", type=float, required=True)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_balance)

    p = sub.add_parser("sample-eval", help="draw a rating-uniform evaluation set")
    p.add_argument("--dataset", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--bins", type=int, default=9)
    p.add_argument("--seed", type=int, required=True)
    p.set_defaults(func=cmd_sample_eval)

    p = sub.add_parser("serve", help="run the reward/evaluation HTTP service")
    p.add_argument("--bind", default="127.0.0.1:8080")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--log-level", default="info")
    _add_reward_config_flags(p)
    _add_endpoint_flags(p, "judge", "judge")
    _add_common_endpoint_knobs(p)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ReviewKitError as exc:
        return _fail(args.command, str(exc))


if __name__ == "__main__":
    sys.exit(main())
