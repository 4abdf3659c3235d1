"""Method comparison over the synthetic benchmark.

Accuracy, stale rate and calibration per method, plus the update-cost,
ablation, noise-sweep and weight-grid experiments. Every method runs on its
own copy of one consolidated snapshot so that access-count reinforcement in
one run never leaks into another.
"""

from __future__ import annotations

import json
import math
import random
from dataclasses import asdict, dataclass, field, replace
from itertools import product
from typing import Iterable, Sequence

from smartvector.bench import BenchConfig, GroundTruth, Query, generate_corpus, generate_queries
from smartvector.confidence import DEFAULT_PARAMS, ConfidenceParams
from smartvector.consolidation import RippleParams, propagate, run_consolidation
from smartvector.core import VectorStatus, VectorStore, parse_ts
from smartvector.retrieval import DEFAULT_WEIGHTS, ScoreWeights, retrieve
from smartvector.updates import ingest_update

KINDS = ("current", "time_point", "conflict")


@dataclass(frozen=True)
class MethodSpec:
    name: str
    weights: ScoreWeights

    @property
    def uses_confidence(self) -> bool:
        """Methods without a confidence signal are calibrated on similarity instead."""
        return self.weights.w_conf > 0


M1 = MethodSpec("M1_plain", ScoreWeights(1.0, 0.0, 0.0, 0.0))
M2 = MethodSpec("M2_temporal", ScoreWeights(0.6, 0.4, 0.0, 0.0))
M3 = MethodSpec("M3_confidence", ScoreWeights(0.6, 0.0, 0.4, 0.0))
M4 = MethodSpec("M4_smart_default", DEFAULT_WEIGHTS)
BASELINES = (M1, M2, M3, M4)

SIGNALS = ("similarity", "temporal", "confidence", "relational")


def ablations(base: ScoreWeights = DEFAULT_WEIGHTS) -> list[MethodSpec]:
    """Leave-one-out variants of ``base`` with the remaining weights renormalised."""
    out = []
    full = base.as_tuple()
    for i, signal in enumerate(SIGNALS):
        rest = [0.0 if j == i else w for j, w in enumerate(full)]
        out.append(MethodSpec(f"-{signal}", ScoreWeights.normalized(*rest)))
    return out


# -- per-query log ------------------------------------------------------------------


@dataclass(frozen=True)
class Prediction:
    kind: str
    gold_topic: str
    gold_version: int
    vector_id: str | None
    doc_id: str | None
    doc_version: int | None
    status: str | None
    confidence: float  # the calibration signal: live confidence, or similarity
    correct: bool


def stale_rate(predictions: Sequence[Prediction]) -> float:
    """Share of current queries whose top-1 result is DEPRECATED."""
    current = [p for p in predictions if p.kind == "current"]
    if not current:
        return 0.0
    stale = sum(1 for p in current if p.status == VectorStatus.DEPRECATED.value)
    return stale / len(current)


def ece(pairs: Iterable[tuple[float, bool]], n_bins: int = 10) -> float:
    """Expected calibration error over equal-width bins; 1.0 falls in the last bin."""
    counts = [0] * n_bins
    conf_sum = [0.0] * n_bins
    hits = [0] * n_bins
    total = 0
    for conf, correct in pairs:
        if not 0.0 <= conf <= 1.0:
            raise ValueError(f"confidence {conf!r} outside [0, 1]")
        b = min(int(math.floor(conf * n_bins)), n_bins - 1)
        counts[b] += 1
        conf_sum[b] += conf
        hits[b] += bool(correct)
        total += 1
    if total == 0:
        return 0.0
    return sum(
        (counts[b] / total) * abs(conf_sum[b] / counts[b] - hits[b] / counts[b])
        for b in range(n_bins)
        if counts[b]
    )


@dataclass
class MethodResult:
    name: str
    weights: tuple[float, float, float, float]
    predictions: list[Prediction] = field(default_factory=list)

    def accuracy(self, kind: str | None = None) -> float:
        preds = [p for p in self.predictions if kind is None or p.kind == kind]
        if not preds:
            return 0.0
        return sum(p.correct for p in preds) / len(preds)

    @property
    def overall(self) -> float:
        return self.accuracy()

    @property
    def stale(self) -> float:
        return stale_rate(self.predictions)

    @property
    def ece(self) -> float:
        return ece((p.confidence, p.correct) for p in self.predictions)

    def summary(self) -> dict[str, float]:
        return {
            "overall": self.overall,
            "current": self.accuracy("current"),
            "time_point": self.accuracy("time_point"),
            "conflict": self.accuracy("conflict"),
            "stale_rate": self.stale,
            "ece": self.ece,
        }

    def to_json(self, with_log: bool = True) -> dict:
        out = {"name": self.name, "weights": list(self.weights), **self.summary()}
        if with_log:
            out["predictions"] = [asdict(p) for p in self.predictions]
        return out


def run_method(
    store: VectorStore,
    queries: Sequence[Query],
    method: MethodSpec,
    params: ConfidenceParams = DEFAULT_PARAMS,
) -> MethodResult:
    """Top-1 retrieval for every query against ``store`` (mutated by reinforcement)."""
    result = MethodResult(method.name, method.weights.as_tuple())
    for q in queries:
        top = retrieve(store, q.text, q.reference_time, k=1, weights=method.weights, params=params)
        if not top:
            result.predictions.append(
                Prediction(q.kind, q.gold_topic, q.gold_version, None, None, None, None, 0.0, False)
            )
            continue
        hit = top[0]
        v = store.vectors[hit.vector_id]
        signal = hit.confidence if method.uses_confidence else hit.sim
        result.predictions.append(
            Prediction(
                kind=q.kind,
                gold_topic=q.gold_topic,
                gold_version=q.gold_version,
                vector_id=v.vector_id,
                doc_id=v.doc_id,
                doc_version=v.doc_version,
                status=hit.status.value,
                confidence=min(1.0, max(0.0, signal)),
                correct=v.doc_id == q.gold_topic and v.doc_version == q.gold_version,
            )
        )
    return result


def consolidate_snapshot(
    store: VectorStore, truth: GroundTruth, params: ConfidenceParams = DEFAULT_PARAMS
) -> VectorStore:
    """Consolidate a generated corpus at its reference time and build the index."""
    run_consolidation(store, parse_ts(truth.now), params)
    store.term_index
    return store


def prepare(
    config: BenchConfig = BenchConfig(), params: ConfidenceParams = DEFAULT_PARAMS
) -> tuple[VectorStore, list[Query], GroundTruth]:
    """Generate, consolidate once at the benchmark's reference time, and index."""
    store, truth = generate_corpus(config)
    queries = generate_queries(truth, config)
    return consolidate_snapshot(store, truth, params), queries, truth


def compare(
    snapshot: VectorStore,
    queries: Sequence[Query],
    methods: Sequence[MethodSpec] = BASELINES,
    params: ConfidenceParams = DEFAULT_PARAMS,
) -> list[MethodResult]:
    return [run_method(snapshot.copy(), queries, m, params) for m in methods]


# -- update cost ---------------------------------------------------------------------


@dataclass
class UpdateCost:
    plain: list[int]
    smart: list[int]
    ripples: list[int]

    @property
    def mean_plain(self) -> float:
        return sum(self.plain) / len(self.plain)

    @property
    def mean_smart(self) -> float:
        return sum(self.smart) / len(self.smart)

    @property
    def mean_ripples(self) -> float:
        return sum(self.ripples) / len(self.ripples)

    @property
    def reduction(self) -> float:
        return 1.0 - self.mean_smart / self.mean_plain

    def to_json(self) -> dict:
        return {
            "topics": len(self.plain),
            "mean_plain": self.mean_plain,
            "mean_smart": self.mean_smart,
            "mean_ripples": self.mean_ripples,
            "reduction": self.reduction,
        }


def one_word_edit(text: str, rng: random.Random) -> str:
    """Swap one seeded alphabetic word for a word that is not in the text."""
    words = [(i, w) for i, w in enumerate(text.split(" ")) if w.isalpha()]
    pos, word = words[rng.randrange(len(words))]
    parts = text.split(" ")
    parts[pos] = "revised" if word != "revised" else "amended"
    return " ".join(parts)


def update_cost_experiment(
    store: VectorStore,
    truth: GroundTruth,
    ripple: RippleParams = RippleParams(),
    seed: int = 0,
) -> UpdateCost:
    """Re-embedding cost of a one-word edit to each topic's latest version."""
    rng = random.Random(seed)
    now = parse_ts(truth.now)
    cost = UpdateCost([], [], [])
    for topic in truth.topics:
        work = store.copy()
        lineage = [topic.topic_id, f"{topic.topic_id}-chat"]
        cost.plain.append(sum(len(work.by_doc.get(doc, [])) for doc in lineage))
        old = work.doc_text(topic.topic_id)
        pairs = ingest_update(work, topic.topic_id, one_word_edit(old, rng), now)
        cost.smart.append(len(pairs))
        cost.ripples.append(
            sum(len(propagate(work.vectors[new], work, ripple)) for _, new in pairs)
        )
    return cost


# -- experiments ---------------------------------------------------------------------


def ablation(
    snapshot: VectorStore,
    queries: Sequence[Query],
    base: ScoreWeights = DEFAULT_WEIGHTS,
    params: ConfidenceParams = DEFAULT_PARAMS,
) -> list[MethodResult]:
    """Full scorer first, then each leave-one-out variant."""
    return compare(snapshot, queries, [MethodSpec("full", base), *ablations(base)], params)


@dataclass
class SweepRow:
    rate: float
    contradictions: int
    m1: MethodResult
    m4: MethodResult

    def to_json(self) -> dict:
        return {
            "rate": self.rate,
            "contradictions": self.contradictions,
            "M1": self.m1.to_json(with_log=False),
            "M4": self.m4.to_json(with_log=False),
        }


def noise_sweep(
    config: BenchConfig = BenchConfig(),
    rates: Sequence[float] = (0.0, 0.15, 0.30, 0.50, 0.75),
    params: ConfidenceParams = DEFAULT_PARAMS,
) -> list[SweepRow]:
    rows = []
    for rate in rates:
        if not 0.0 <= rate <= 1.0:
            raise ValueError(f"rate {rate} outside [0, 1]")
        snapshot, queries, truth = prepare(replace(config, rumor_rate=rate), params)
        m1, m4 = compare(snapshot, queries, (M1, M4), params)
        rows.append(SweepRow(rate, len(truth.contradictions), m1, m4))
    return rows


def weight_grid(granularity: float = 0.1) -> list[ScoreWeights]:
    """All non-negative 4-tuples on the grid that sum to one."""
    steps = round(1.0 / granularity)
    if not math.isclose(steps * granularity, 1.0):
        raise ValueError("granularity must divide 1")
    grid = []
    for a, b, c in product(range(steps + 1), repeat=3):
        d = steps - a - b - c
        if d >= 0:
            grid.append(ScoreWeights(a / steps, b / steps, c / steps, d / steps))
    return grid


def split_queries(
    queries: Sequence[Query], seed: int = 7
) -> tuple[list[Query], list[Query]]:
    """Stratified 50/50 dev/test split by query kind."""
    rng = random.Random(seed)
    dev, test = [], []
    for kind in KINDS:
        group = [q for q in queries if q.kind == kind]
        rng.shuffle(group)
        half = len(group) // 2
        dev += group[:half]
        test += group[half:]
    return dev, test


@dataclass
class GridResult:
    best: ScoreWeights
    dev_accuracy: float
    test_accuracy: float
    default_dev_accuracy: float
    default_test_accuracy: float
    evaluated: int

    def to_json(self) -> dict:
        out = asdict(self)
        out["best"] = list(self.best.as_tuple())
        return out


def grid_search(
    snapshot: VectorStore,
    queries: Sequence[Query],
    granularity: float = 0.1,
    split_seed: int = 7,
    params: ConfidenceParams = DEFAULT_PARAMS,
) -> GridResult:
    """Pick the dev-set argmax on the weight grid; report it on the test half.

    Ties prefer the larger similarity weight, then the lexicographically
    smallest tuple.
    """
    dev, test = split_queries(queries, split_seed)
    grid = weight_grid(granularity)
    best_key, best = None, None
    for w in grid:
        acc = run_method(snapshot.copy(), dev, MethodSpec("grid", w), params).overall
        key = (-acc, -w.w_sim, w.as_tuple())
        if best_key is None or key < best_key:
            best_key, best = key, w
    default_dev = run_method(snapshot.copy(), dev, M4, params).overall
    return GridResult(
        best=best,
        dev_accuracy=-best_key[0],
        test_accuracy=run_method(snapshot.copy(), test, MethodSpec("M5_smart_tuned", best), params).overall,
        default_dev_accuracy=default_dev,
        default_test_accuracy=run_method(snapshot.copy(), test, M4, params).overall,
        evaluated=len(grid),
    )


# -- tables ---------------------------------------------------------------------------


def format_table(header: Sequence[str], rows: Sequence[Sequence[object]]) -> str:
    """Left-aligned first column, right-aligned numbers; floats shown as percentages."""

    def cell(x: object) -> str:
        return f"{100 * x:.1f}%" if isinstance(x, float) else str(x)

    cells = [[cell(x) for x in row] for row in rows]
    widths = [max(len(str(h)), *(len(r[i]) for r in cells)) for i, h in enumerate(header)]
    lines = [
        "  ".join(
            str(h).ljust(widths[i]) if i == 0 else str(h).rjust(widths[i])
            for i, h in enumerate(header)
        )
    ]
    lines.append("  ".join("-" * w for w in widths))
    for r in cells:
        lines.append(
            "  ".join(c.ljust(widths[i]) if i == 0 else c.rjust(widths[i]) for i, c in enumerate(r))
        )
    return "\n".join(lines)


def methods_table(results: Sequence[MethodResult]) -> str:
    header = ["method", "overall", "current", "time-pt", "conflict", "stale", "ECE"]
    rows = []
    for r in results:
        s = r.summary()
        rows.append(
            [r.name, s["overall"], s["current"], s["time_point"], s["conflict"], s["stale_rate"],
             f"{s['ece']:.3f}"]
        )
    return format_table(header, rows)


def sweep_table(rows: Sequence[SweepRow]) -> str:
    header = ["rate", "contradictions", "M1 overall", "M1 stale", "M4 overall", "M4 stale"]
    return format_table(
        header,
        [
            [f"{r.rate:.2f}", r.contradictions, r.m1.overall, r.m1.stale, r.m4.overall, r.m4.stale]
            for r in rows
        ],
    )


def cost_table(cost: UpdateCost) -> str:
    return format_table(
        ["metric", "value"],
        [
            ["topics edited", len(cost.plain)],
            ["plain re-embeddings / edit", f"{cost.mean_plain:.3f}"],
            ["smart re-embeddings / edit", f"{cost.mean_smart:.3f}"],
            ["ripple messages / edit", f"{cost.mean_ripples:.3f}"],
            ["reduction", cost.reduction],
        ],
    )


def grid_table(result: GridResult) -> str:
    w = ", ".join(f"{x:.1f}" for x in result.best.as_tuple())
    return format_table(
        ["weights", "dev", "test"],
        [
            ["default (0.35, 0.25, 0.25, 0.15)", result.default_dev_accuracy, result.default_test_accuracy],
            [f"tuned ({w})", result.dev_accuracy, result.test_accuracy],
        ],
    )


# -- acceptance bands ---------------------------------------------------------------


@dataclass(frozen=True)
class BandCheck:
    name: str
    passed: bool
    detail: str

    def line(self) -> str:
        return f"{'PASS' if self.passed else 'FAIL'}  {self.name}: {self.detail}"


def check_methods(results: Sequence[MethodResult]) -> list[BandCheck]:
    by = {r.name: r for r in results}
    m1, m2, m4 = by[M1.name], by[M2.name], by[M4.name]
    return [
        BandCheck(
            "M4 overall beats M1 by >= 20 points",
            m4.overall - m1.overall >= 0.20,
            f"{m4.overall:.3f} vs {m1.overall:.3f}",
        ),
        BandCheck(
            "M1 time-point <= 10%, M2 and M4 time-point >= 55%",
            m1.accuracy("time_point") <= 0.10
            and m2.accuracy("time_point") >= 0.55
            and m4.accuracy("time_point") >= 0.55,
            f"M1 {m1.accuracy('time_point'):.3f}, M2 {m2.accuracy('time_point'):.3f}, "
            f"M4 {m4.accuracy('time_point'):.3f}",
        ),
        BandCheck(
            "M1 stale >= 25% and M4 stale <= M1 stale - 10 points",
            m1.stale >= 0.25 and m4.stale <= m1.stale - 0.10,
            f"M1 {m1.stale:.3f}, M4 {m4.stale:.3f}",
        ),
        BandCheck("ECE(M4) <= 0.6 ECE(M1)", m4.ece <= 0.6 * m1.ece, f"{m4.ece:.3f} vs {m1.ece:.3f}"),
    ]


def check_ablation(results: Sequence[MethodResult]) -> list[BandCheck]:
    full = results[0]
    by = {r.name: r for r in results[1:]}
    no_sim, no_time = by["-similarity"], by["-temporal"]
    others = [r for r in by.values() if r is not no_sim]
    return [
        BandCheck(
            "removing similarity gives the lowest accuracy",
            all(no_sim.overall < r.overall for r in others),
            f"-similarity {no_sim.overall:.3f}, lowest other {min(r.overall for r in others):.3f}",
        ),
        BandCheck(
            "removing temporal costs >= 15 points",
            full.overall - no_time.overall >= 0.15,
            f"{full.overall:.3f} -> {no_time.overall:.3f}",
        ),
    ]


def check_cost(cost: UpdateCost) -> list[BandCheck]:
    return [
        BandCheck(
            "update cost: smart 1.0, plain in [4.0, 4.6], reduction >= 70%",
            cost.mean_smart == 1.0 and 4.0 <= cost.mean_plain <= 4.6 and cost.reduction >= 0.70,
            f"smart {cost.mean_smart:.3f}, plain {cost.mean_plain:.3f}, reduction {cost.reduction:.3f}",
        )
    ]


def check_sweep(rows: Sequence[SweepRow]) -> list[BandCheck]:
    by_rate = {r.rate: r for r in rows}
    checks = []
    if 0.0 in by_rate and 0.75 in by_rate:
        lo, hi = by_rate[0.0].m1.stale, by_rate[0.75].m1.stale
        checks.append(
            BandCheck("M1 stale rises >= 10 points from rate 0 to 0.75", hi - lo >= 0.10,
                      f"{lo:.3f} -> {hi:.3f}")
        )
    gaps = [r.m4.overall - r.m1.overall for r in rows]
    checks.append(
        BandCheck("M4 beats M1 by >= 15 points at every rate", all(g >= 0.15 for g in gaps),
                  "gaps " + ", ".join(f"{g:.3f}" for g in gaps))
    )
    return checks


def check_grid(result: GridResult) -> list[BandCheck]:
    return [
        BandCheck(
            "grid has 286 points; tuned test >= default test - 2 points",
            result.evaluated == 286 and result.test_accuracy >= result.default_test_accuracy - 0.02,
            f"{result.evaluated} points, tuned {result.test_accuracy:.3f} vs default "
            f"{result.default_test_accuracy:.3f}",
        )
    ]


def write_report(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


__all__ = [
    "BASELINES",
    "M1",
    "M2",
    "M3",
    "M4",
    "MethodSpec",
    "MethodResult",
    "Prediction",
    "UpdateCost",
    "GridResult",
    "SweepRow",
    "BandCheck",
    "ablation",
    "ablations",
    "compare",
    "consolidate_snapshot",
    "ece",
    "grid_search",
    "noise_sweep",
    "prepare",
    "run_method",
    "split_queries",
    "stale_rate",
    "update_cost_experiment",
    "weight_grid",
]
