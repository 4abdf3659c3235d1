"""Command-line front end: generate, consolidate, update, query and evaluate."""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import dataclass, field, replace
from datetime import datetime
from pathlib import Path
from typing import Sequence

from smartvector import evaluation as ev
from smartvector.bench import BenchConfig, GroundTruth, Query, generate_corpus, generate_queries
from smartvector.bench import load_queries, save_queries
from smartvector.confidence import DEFAULT_HALF_LIFE, ConfidenceParams
from smartvector.consolidation import RippleParams, propagate, run_consolidation
from smartvector.core import (
    SmartVectorError,
    SourceAuthority,
    VectorStore,
    add_edge,
    format_ts,
    ingest_document,
    parse_ts,
)
from smartvector.retrieval import (
    DEFAULT_WEIGHTS,
    ScoreWeights,
    assemble_context,
    record_feedback,
    retrieve,
)
from smartvector.updates import ingest_update

DEFAULT_STORE = "smartvector_store.json"
DEFAULT_QUERIES = "smartvector_queries.json"
DEFAULT_RATES = "0,0.15,0.30,0.50,0.75"


@dataclass
class RunConfig:
    """Everything a subcommand needs, resolved from flags and an optional config file."""

    store: Path = Path(DEFAULT_STORE)
    queries: Path = Path(DEFAULT_QUERIES)
    report: Path | None = None
    weights: ScoreWeights = DEFAULT_WEIGHTS
    confidence: ConfidenceParams = field(default_factory=ConfidenceParams)
    ripple: RippleParams = field(default_factory=RippleParams)
    bench: BenchConfig = field(default_factory=BenchConfig)
    seed: int = 7

    @classmethod
    def from_args(cls, args: argparse.Namespace) -> RunConfig:
        cfg = cls()
        if getattr(args, "store", None):
            cfg.store = Path(args.store)
        if getattr(args, "queries", None):
            cfg.queries = Path(args.queries)
        if getattr(args, "report", None):
            cfg.report = Path(args.report)
        if getattr(args, "weights", None):
            cfg.weights = ScoreWeights.parse(args.weights)
        cfg.confidence = replace(cfg.confidence, half_life_days=args.half_life)
        cfg.ripple = RippleParams(gamma=args.gamma, d_max=args.d_max)
        cfg.seed = args.seed
        cfg.bench = BenchConfig(seed=args.seed, rumor_rate=getattr(args, "rumor_rate", 0.30))
        return cfg


# -- helpers ----------------------------------------------------------------------


def _timestamp(text: str) -> datetime:
    try:
        return parse_ts(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an ISO-8601 timestamp: {text!r}") from None


def _newest(store: VectorStore) -> datetime:
    """Default clock for store commands: the newest creation time in the store."""
    if not store.vectors:
        raise SmartVectorError("the store is empty")
    return max(v.created_at for v in store)


def _load_store(path: Path) -> VectorStore:
    if not path.exists():
        raise SmartVectorError(f"store file {path} does not exist; run `smartvector gen` first")
    return VectorStore.load(path)


def _benchmark(cfg: RunConfig) -> tuple[VectorStore, list[Query], GroundTruth, str]:
    """Consolidated snapshot from the gen files when both exist, else a fresh corpus."""
    if cfg.store.exists() and cfg.queries.exists():
        queries, truth = load_queries(cfg.queries)
        if truth is not None:
            store = ev.consolidate_snapshot(VectorStore.load(cfg.store), truth, cfg.confidence)
            return store, queries, truth, f"{cfg.store} + {cfg.queries}"
    store, queries, truth = ev.prepare(cfg.bench, cfg.confidence)
    return store, queries, truth, f"generated in memory (seed {cfg.seed})"


def _finish(cfg: RunConfig, payload: dict, checks: list[ev.BandCheck], check: bool) -> int:
    for c in checks:
        print(c.line())
    payload["checks"] = [{"name": c.name, "passed": c.passed, "detail": c.detail} for c in checks]
    if cfg.report is not None:
        ev.write_report(cfg.report, payload)
        print(f"report written to {cfg.report}")
    return 1 if check and not all(c.passed for c in checks) else 0


# -- store commands ------------------------------------------------------------------


def cmd_gen(args: argparse.Namespace, cfg: RunConfig) -> int:
    store, truth = generate_corpus(cfg.bench)
    queries = generate_queries(truth, cfg.bench)
    store.save(cfg.store)
    save_queries(cfg.queries, queries, truth)
    kinds = {k: sum(q.kind == k for q in queries) for k in ev.KINDS}
    print(
        f"{len(store)} vectors, {len(truth.topics)} topics, {len(truth.contradictions)} rumors, "
        f"{len(truth.dependencies)} dependency edges"
    )
    print(f"{len(queries)} queries: " + ", ".join(f"{n} {k}" for k, n in kinds.items()))
    print(f"store -> {cfg.store}; queries -> {cfg.queries}")
    return 0


def cmd_consolidate(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = _load_store(cfg.store)
    now = args.now or _newest(store)
    report = run_consolidation(store, now, cfg.confidence, cfg.ripple)
    store.save(cfg.store)
    print(f"consolidated at {format_ts(now)}")
    print(report.table())
    if cfg.report is not None:
        ev.write_report(cfg.report, report.to_json())
    return 0


def cmd_update(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = _load_store(cfg.store)
    text = Path(args.file).read_text(encoding="utf-8") if args.file else args.text
    if text is None:
        raise SmartVectorError("give the new revision with --text or --file")
    now = args.now or _newest(store)
    pairs = ingest_update(store, args.doc, text, now)
    store.save(cfg.store)
    if not pairs:
        print("no change")
    for old, new in pairs:
        print(f"{old} -> {new}")
    print(f"{len(pairs)} re-embedded; {len(store.recent_changes)} queued for the next consolidation")
    return 0


def cmd_query(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = _load_store(cfg.store)
    at = args.at or _newest(store)
    results = retrieve(store, args.text, at, k=args.k, weights=cfg.weights, params=cfg.confidence)
    print(assemble_context(results, store, at), end="")
    if args.save:
        store.save(cfg.store)
    return 0


def cmd_feedback(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = _load_store(cfg.store)
    record_feedback(store, args.vector_id, positive=args.vote == "up", now=args.now or _newest(store))
    store.save(cfg.store)
    v = store.get(args.vector_id)
    print(f"{v.vector_id}: feedback +{v.positive_feedback}/-{v.negative_feedback}")
    return 0


# -- experiments ------------------------------------------------------------------------


def cmd_eval(args: argparse.Namespace, cfg: RunConfig) -> int:
    store, queries, _, source = _benchmark(cfg)
    methods = list(ev.BASELINES)
    if cfg.weights != DEFAULT_WEIGHTS:
        methods.append(ev.MethodSpec("custom", cfg.weights))
    results = ev.compare(store, queries, methods, cfg.confidence)
    print(f"corpus: {source}; {len(queries)} queries")
    print(ev.methods_table(results))
    payload = {"source": source, "methods": [r.to_json() for r in results]}
    return _finish(cfg, payload, ev.check_methods(results), args.check)


def cmd_ablate(args: argparse.Namespace, cfg: RunConfig) -> int:
    store, queries, _, source = _benchmark(cfg)
    results = ev.ablation(store, queries, cfg.weights, cfg.confidence)
    print(f"corpus: {source}")
    print(ev.methods_table(results))
    payload = {"source": source, "variants": [r.to_json(with_log=False) for r in results]}
    return _finish(cfg, payload, ev.check_ablation(results), args.check)


def cmd_sweep(args: argparse.Namespace, cfg: RunConfig) -> int:
    rates = [float(x) for x in args.rates.split(",") if x.strip()]
    rows = ev.noise_sweep(cfg.bench, rates, cfg.confidence)
    print(ev.sweep_table(rows))
    payload = {"seed": cfg.seed, "rows": [r.to_json() for r in rows]}
    return _finish(cfg, payload, ev.check_sweep(rows), args.check)


def cmd_tune(args: argparse.Namespace, cfg: RunConfig) -> int:
    store, queries, _, source = _benchmark(cfg)
    result = ev.grid_search(store, queries, args.granularity, args.split_seed, cfg.confidence)
    print(f"corpus: {source}; {result.evaluated} weight tuples")
    print(ev.grid_table(result))
    payload = {"source": source, "grid": result.to_json()}
    return _finish(cfg, payload, ev.check_grid(result), args.check)


def cmd_cost(args: argparse.Namespace, cfg: RunConfig) -> int:
    store, _, truth, source = _benchmark(cfg)
    cost = ev.update_cost_experiment(store, truth, cfg.ripple, seed=cfg.seed)
    print(f"corpus: {source}")
    print(ev.cost_table(cost))
    payload = {"source": source, "cost": cost.to_json()}
    return _finish(cfg, payload, ev.check_cost(cost), args.check)


# -- demo ----------------------------------------------------------------------------------

DEMO_QUERY = "Which baseline does the sky-color calibration use, and how often are sensors calibrated?"


def build_demo_store() -> VectorStore:
    """A five-document corpus with a two-hop dependency chain and a chat rumor."""
    store = VectorStore()
    ingest_document(
        store, "sky_color", 1,
        "Section 1: The sky-color calibration uses a blue baseline for atmospheric "
        "modelling. All sensors are calibrated every 90 days.",
        SourceAuthority.WIKI, parse_ts("2026-01-05T09:00:00Z"),
        validity_start=parse_ts("2026-01-05T09:00:00Z"), author="wiki_editor",
    )
    ingest_document(
        store, "atmospheric_model", 1,
        "The atmospheric model reads the sky-color baseline to correct scattering estimates.",
        SourceAuthority.TECH_DOC, parse_ts("2026-02-01T09:00:00Z"), author="modelling_team",
    )
    ingest_document(
        store, "sensor_calibration", 1,
        "Sensor calibration runs use the atmospheric model output as their reference.",
        SourceAuthority.TECH_DOC, parse_ts("2026-02-10T09:00:00Z"), author="field_ops",
    )
    add_edge(store, "atmospheric_model:v1:c0", "sky_color:v1:c0", "depends_on")
    add_edge(store, "sensor_calibration:v1:c0", "atmospheric_model:v1:c0", "depends_on")
    # the starting corpus is the baseline, not a pending change
    store.recent_changes.clear()
    return store


def cmd_demo(args: argparse.Namespace, cfg: RunConfig) -> int:
    store = build_demo_store()
    run_consolidation(store, parse_ts("2026-02-15T00:00:00Z"), cfg.confidence, cfg.ripple)
    before = {v.vector_id: v.base_confidence for v in store}
    print("Dependency chain: sensor_calibration -> atmospheric_model -> sky_color")

    edited = store.doc_text("sky_color").replace("blue baseline", "yellow baseline")
    pairs = ingest_update(store, "sky_color", edited, parse_ts("2026-04-17T09:00:00Z"))
    old, new = pairs[0]
    print(f"Edit: {old} superseded by {new} (one chunk re-embedded)")
    store.recent_changes.clear()
    visited = propagate(store.get(new), store, cfg.ripple)
    penalties = {vid: before[vid] - store.get(vid).base_confidence for vid in visited}
    for vid in sorted(visited, key=lambda x: (-penalties[x], x)):
        penalty = penalties[vid]
        print(f"  ripple {vid}: base confidence {before[vid]:.3f} -> "
              f"{store.get(vid).base_confidence:.3f} (penalty {penalty:.3f})")

    ingest_document(
        store, "slack_engineering", 1,
        "I heard the sky-color calibration is switching to a yellow baseline and sensors "
        "are calibrated every 30 days.",
        SourceAuthority.CHAT, parse_ts("2026-04-12T15:30:00Z"),
        validity_start=parse_ts("2026-04-12T15:30:00Z"), author="chat_user",
    )
    for day in range(13, 17):
        record_feedback(store, new, positive=True, now=parse_ts(f"2026-04-{day}T12:00:00Z"))
    report = run_consolidation(store, parse_ts("2026-04-18T00:00:00Z"), cfg.confidence, cfg.ripple)
    print(f"Consolidation flagged {len(report.contradictions)} contradiction pair(s)")
    at = parse_ts("2026-04-20T00:00:00Z")
    results = retrieve(store, DEMO_QUERY, at, k=args.k, weights=cfg.weights, params=cfg.confidence)
    print()
    print(f"Query: {DEMO_QUERY}")
    print(assemble_context(results, store, at), end="")
    return 0


# -- parser ----------------------------------------------------------------------------------


class _Formatter(argparse.ArgumentDefaultsHelpFormatter, argparse.RawDescriptionHelpFormatter):
    pass


def _common(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("model parameters")
    g.add_argument("--config", metavar="FILE",
                   help="JSON object of flag values; its entries override the command line")
    g.add_argument("--seed", type=int, default=7, help="benchmark seed")
    g.add_argument("--weights", default="0.35,0.25,0.25,0.15",
                   help="similarity,temporal,confidence,relational weights (renormalised)")
    g.add_argument("--half-life", type=float, default=DEFAULT_HALF_LIFE,
                   help="confidence and recency half-life in days")
    g.add_argument("--gamma", type=float, default=0.15, help="ripple penalty at the first hop")
    g.add_argument("--d-max", type=int, default=2, help="ripple depth bound")


def _store_flag(p: argparse.ArgumentParser) -> None:
    p.add_argument("--store", default=DEFAULT_STORE, help="store JSON file")


def _experiment_flags(p: argparse.ArgumentParser, report: str) -> None:
    _store_flag(p)
    p.add_argument("--queries", default=DEFAULT_QUERIES,
                   help="queries JSON file; with --store it replaces in-memory generation")
    p.add_argument("--report", default=report, help="JSON report path")
    p.add_argument("--check", action="store_true",
                   help="exit nonzero when an acceptance band is violated")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="smartvector",
        description="Lifecycle-aware reranking over a TF-IDF retriever.",
        formatter_class=_Formatter,
    )
    sub = parser.add_subparsers(dest="command", metavar="COMMAND")

    def add(name: str, help_text: str, func) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text, description=help_text, formatter_class=_Formatter)
        p.set_defaults(func=func)
        _common(p)
        return p

    p = add("gen", "generate the benchmark corpus and its queries", cmd_gen)
    _store_flag(p)
    p.add_argument("--queries", default=DEFAULT_QUERIES, help="queries JSON output")
    p.add_argument("--rumor-rate", type=float, default=0.30, help="share of topics given a chat rumor")

    p = add("consolidate", "run one consolidation cycle over a store", cmd_consolidate)
    _store_flag(p)
    p.add_argument("--now", type=_timestamp, help="cycle time (default: newest creation time)")
    p.add_argument("--report", help="optional JSON report path")

    p = add("update", "apply a new revision of a document", cmd_update)
    _store_flag(p)
    p.add_argument("--doc", required=True, help="document id")
    src = p.add_mutually_exclusive_group()
    src.add_argument("--text", help="full text of the new revision")
    src.add_argument("--file", help="file holding the new revision")
    p.add_argument("--now", type=_timestamp, help="revision time (default: newest creation time)")

    p = add("query", "print the retrieval context for a question", cmd_query)
    _store_flag(p)
    p.add_argument("text", help="the question")
    p.add_argument("-k", "--k", type=int, default=3, help="results to show")
    p.add_argument("--at", type=_timestamp, help="reference time (default: newest creation time)")
    p.add_argument("--save", action="store_true", help="persist the access-count reinforcement")

    p = add("feedback", "record a vote on a vector", cmd_feedback)
    _store_flag(p)
    p.add_argument("vector_id", help="vector id, e.g. doc:v2:c0")
    p.add_argument("vote", choices=("up", "down"), help="vote direction")
    p.add_argument("--now", type=_timestamp, help="vote time (default: newest creation time)")

    p = add("eval", "compare the four scoring methods", cmd_eval)
    _experiment_flags(p, "report_eval.json")

    p = add("ablate", "leave-one-signal-out ablation", cmd_ablate)
    _experiment_flags(p, "report_ablate.json")

    p = add("sweep", "rumor-rate noise sweep", cmd_sweep)
    p.add_argument("--rates", default=DEFAULT_RATES, help="comma-separated rumor rates")
    p.add_argument("--report", default="report_sweep.json", help="JSON report path")
    p.add_argument("--check", action="store_true",
                   help="exit nonzero when an acceptance band is violated")

    p = add("tune", "grid-search the score weights on a dev split", cmd_tune)
    _experiment_flags(p, "report_tune.json")
    p.add_argument("--granularity", type=float, default=0.1, help="weight grid step")
    p.add_argument("--split-seed", type=int, default=7, help="dev/test split seed")

    p = add("cost", "re-embedding cost of one-word edits", cmd_cost)
    _experiment_flags(p, "report_cost.json")

    p = add("demo", "ripple propagation and context assembly on a toy corpus", cmd_demo)
    p.add_argument("-k", "--k", type=int, default=2, help="results to show")
    return parser


def _apply_config(args: argparse.Namespace, parser: argparse.ArgumentParser) -> None:
    if not getattr(args, "config", None):
        return
    data = json.loads(Path(args.config).read_text(encoding="utf-8"))
    if not isinstance(data, dict):
        parser.error("--config must hold a JSON object")
    for key, value in data.items():
        dest = key.replace("-", "_")
        if dest in ("command", "func", "config") or not hasattr(args, dest):
            parser.error(f"unknown config key {key!r} for {args.command}")
        if dest in ("now", "at") and isinstance(value, str):
            value = _timestamp(value)
        setattr(args, dest, value)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    _apply_config(args, parser)
    try:
        cfg = RunConfig.from_args(args)
        return args.func(args, cfg)
    except (SmartVectorError, ValueError, OSError) as exc:
        print(f"smartvector {args.command}: error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
