"""TF-IDF first stage, four-signal reranking and annotated context assembly."""

from __future__ import annotations

import math
import re
from collections import Counter
from dataclasses import dataclass
from datetime import datetime
from typing import Callable, Iterable, Sequence

import numpy as np

from smartvector import kernels
from smartvector.confidence import (
    DEFAULT_PARAMS,
    ConfidenceParams,
    confidence,
    is_dormant,
    temporal_score,
)
from smartvector.core import SmartVector, VectorStatus, VectorStore, to_utc, transition, utcnow

FIRST_STAGE_K = 8
RELATIONAL_CAP = 0.3
RELATIONAL_SCALE = 0.1

_SPLIT = re.compile(r"[\W_]+")


def tokenize(text: str) -> list[str]:
    return _SPLIT.sub(" ", text.lower()).split()


def ngrams(tokens: Sequence[str]) -> list[str]:
    """Unigrams followed by space-joined bigrams."""
    return [*tokens, *(f"{a} {b}" for a, b in zip(tokens, tokens[1:]))]


def _csr(rows: list[list[int]], vals: list[list[float]] | None = None):
    ptr = np.zeros(len(rows) + 1, dtype=np.int64)
    ptr[1:] = np.cumsum([len(r) for r in rows])
    terms = np.fromiter((t for r in rows for t in r), dtype=np.int64, count=int(ptr[-1]))
    if vals is None:
        return ptr, terms
    data = np.fromiter((x for r in vals for x in r), dtype=np.float64, count=int(ptr[-1]))
    return ptr, terms, data


class TfidfIndex:
    """Unigram+bigram TF-IDF over a fixed set of documents.

    idf is smoothed as ``ln((1 + N) / (1 + df)) + 1`` and every row is
    L2-normalised, so a dot product is a cosine.
    """

    def __init__(self, ids: Sequence[str], texts: Sequence[str]):
        self.ids = list(ids)
        self.row_of = {vid: i for i, vid in enumerate(self.ids)}
        n = len(self.ids)
        tokenized = [tokenize(t) for t in texts]
        counts = [Counter(ngrams(toks)) for toks in tokenized]
        df: Counter[str] = Counter()
        for c in counts:
            df.update(c.keys())
        self.vocab = {term: i for i, term in enumerate(sorted(df))}
        self.terms = sorted(df)
        self.idf = np.array(
            [math.log((1 + n) / (1 + df[t])) + 1.0 for t in self.terms], dtype=np.float64
        )
        idf = self.idf.tolist()

        rows: list[list[int]] = []
        vals: list[list[float]] = []
        for c in counts:
            items = sorted((self.vocab[t], tf * idf[self.vocab[t]]) for t, tf in c.items())
            norm = math.sqrt(sum(w * w for _, w in items))
            rows.append([t for t, _ in items])
            vals.append([w / norm for _, w in items] if norm else [0.0 for _ in items])
        self.doc_ptr, self.doc_terms, self.doc_vals = _csr(rows, vals)

        # inverted (term-major) layout for query scoring
        order = np.argsort(self.doc_terms, kind="stable")
        doc_of_entry = np.repeat(np.arange(n, dtype=np.int64), np.diff(self.doc_ptr))
        self.post_docs = doc_of_entry[order]
        self.post_vals = self.doc_vals[order]
        self.term_ptr = np.zeros(len(self.terms) + 1, dtype=np.int64)
        np.cumsum(np.bincount(self.doc_terms, minlength=len(self.terms)), out=self.term_ptr[1:])

        uni_rows = [sorted({self.vocab[t] for t in toks}) for toks in tokenized]
        self.uni_ptr, self.uni_terms = _csr(uni_rows)
        self.numbers = [frozenset(t for t in toks if t.isdigit()) for toks in tokenized]
        self.id_rank = np.empty(n, dtype=np.int64)
        self.id_rank[np.argsort(np.array(self.ids, dtype=object), kind="stable")] = np.arange(n)

    def __len__(self) -> int:
        return len(self.ids)

    def term_vector(self, row: int) -> dict[str, float]:
        a, b = self.doc_ptr[row], self.doc_ptr[row + 1]
        return {
            self.terms[t]: float(w)
            for t, w in zip(self.doc_terms[a:b].tolist(), self.doc_vals[a:b].tolist())
        }

    def query_vector(self, text: str) -> tuple[np.ndarray, np.ndarray]:
        """Sorted term ids and unit-length weights; unknown terms are dropped."""
        counts = Counter(t for t in ngrams(tokenize(text)) if t in self.vocab)
        items = sorted((self.vocab[t], tf * self.idf[self.vocab[t]]) for t, tf in counts.items())
        terms = np.array([t for t, _ in items], dtype=np.int64)
        weights = np.array([w for _, w in items], dtype=np.float64)
        norm = math.sqrt(float(np.dot(weights, weights))) if len(weights) else 0.0
        if norm:
            weights /= norm
        return terms, weights

    def scores(self, text: str) -> np.ndarray:
        """Cosine of the query against every indexed document."""
        terms, weights = self.query_vector(text)
        return kernels.accumulate_scores(
            terms, weights, self.term_ptr, self.post_docs, self.post_vals, len(self.ids)
        )

    def similarity(self, text: str, vector_id: str) -> float:
        return float(self.scores(text)[self.row_of[vector_id]])

    def cosine_matrix(self) -> np.ndarray:
        return kernels.pairwise_cosine(self.doc_ptr, self.doc_terms, self.doc_vals)

    def jaccard_matrix(self) -> np.ndarray:
        """Jaccard index over unigram sets."""
        return kernels.pairwise_jaccard(self.uni_ptr, self.uni_terms)


def build_index(store: VectorStore) -> TfidfIndex:
    vectors = list(store.vectors.values())
    index = TfidfIndex([v.vector_id for v in vectors], [v.content for v in vectors])
    for row, v in enumerate(vectors):
        v.term_vector = index.term_vector(row)
    return index


def similarity(query_text: str, v: SmartVector, index: TfidfIndex) -> float:
    return min(1.0, max(0.0, index.similarity(query_text, v.vector_id)))


def relational_bonus(v: SmartVector) -> float:
    """Log-saturating reward for depends_on/depended_by degree, capped at 0.3."""
    return min(RELATIONAL_CAP, RELATIONAL_SCALE * math.log1p(v.edge_count))


@dataclass(frozen=True)
class ScoreWeights:
    w_sim: float = 0.35
    w_time: float = 0.25
    w_conf: float = 0.25
    w_rel: float = 0.15

    def __post_init__(self) -> None:
        values = self.as_tuple()
        if any(w < 0 for w in values):
            raise ValueError(f"weights must be non-negative: {values}")
        if abs(sum(values) - 1.0) > 1e-9:
            raise ValueError(f"weights must sum to 1, got {sum(values)!r}")

    @classmethod
    def normalized(cls, w_sim: float, w_time: float, w_conf: float, w_rel: float) -> ScoreWeights:
        total = w_sim + w_time + w_conf + w_rel
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        return cls(w_sim / total, w_time / total, w_conf / total, w_rel / total)

    @classmethod
    def parse(cls, text: str) -> ScoreWeights:
        """Parse ``"0.35,0.25,0.25,0.15"``; values are renormalised."""
        parts = [float(x) for x in text.split(",")]
        if len(parts) != 4:
            raise ValueError("expected four comma-separated weights")
        return cls.normalized(*parts)

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.w_sim, self.w_time, self.w_conf, self.w_rel)


DEFAULT_WEIGHTS = ScoreWeights()


@dataclass(frozen=True)
class ScoredResult:
    vector_id: str
    sim: float
    temporal: float
    confidence: float
    relational: float
    final: float
    status: VectorStatus


def weighted_sum(signals: Sequence[float], weights: Sequence[float]) -> float:
    return sum(w * s for w, s in zip(weights, signals))


def final_score(
    v: SmartVector,
    query_text: str,
    t: datetime,
    weights: ScoreWeights = DEFAULT_WEIGHTS,
    params: ConfidenceParams = DEFAULT_PARAMS,
    *,
    index: TfidfIndex | None = None,
    sim: float | None = None,
) -> ScoredResult:
    """Score one vector; pass ``sim`` to reuse a first-stage cosine."""
    if sim is None:
        if index is None:
            raise ValueError("need either sim or an index")
        sim = similarity(query_text, v, index)
    signals = (
        sim,
        temporal_score(v, t, params),
        confidence(v, t, params),
        relational_bonus(v),
    )
    return ScoredResult(
        v.vector_id, *signals, final=weighted_sum(signals, weights.as_tuple()), status=v.status
    )


def retrieve(
    store: VectorStore,
    query_text: str,
    t: datetime,
    k: int = 1,
    weights: ScoreWeights = DEFAULT_WEIGHTS,
    params: ConfidenceParams = DEFAULT_PARAMS,
    pool_filter: Callable[[SmartVector], bool] | None = None,
    *,
    candidates: int = FIRST_STAGE_K,
    reinforce: bool = True,
) -> list[ScoredResult]:
    """Shortlist by cosine, rerank by the weighted four-signal score.

    Only vectors sharing at least one term with the query are candidates.
    ARCHIVED vectors are never returned. The returned vectors each get one
    access (reconsolidation) unless ``reinforce`` is false; a DORMANT vector
    whose confidence then clears the threshold is re-promoted to ACTIVE.
    """
    if k < 1:
        raise ValueError("k must be at least 1")
    if not store.vectors:
        return []
    t = to_utc(t)
    index = store.term_index
    sims = index.scores(query_text)
    rows = np.flatnonzero(sims > 0)
    eligible = []
    for r in rows.tolist():
        v = store.vectors[index.ids[r]]
        if v.status is VectorStatus.ARCHIVED:
            continue
        if pool_filter is not None and not pool_filter(v):
            continue
        eligible.append(r)
    if not eligible:
        return []
    eligible_arr = np.array(eligible, dtype=np.int64)
    order = np.lexsort((index.id_rank[eligible_arr], -sims[eligible_arr]))
    shortlist = eligible_arr[order[:candidates]]

    scored = [
        final_score(
            store.vectors[index.ids[r]], query_text, t, weights, params, sim=float(sims[r])
        )
        for r in shortlist.tolist()
    ]
    scored.sort(key=lambda s: (-s.final, s.vector_id))
    top = scored[:k]
    if reinforce:
        for s in top:
            v = store.vectors[s.vector_id]
            v.access_count += 1
            # reinforcement can lift a dormant vector back over the threshold
            if v.status is VectorStatus.DORMANT and not is_dormant(v, t, params):
                transition(store, v.vector_id, VectorStatus.ACTIVE, t)
    return top


def record_feedback(
    store: VectorStore, vector_id: str, positive: bool, now: datetime | None = None
) -> None:
    v = store.get(vector_id)
    if positive:
        v.positive_feedback += 1
    else:
        v.negative_feedback += 1
    v.updated_at = to_utc(now) if now is not None else utcnow()


# -- context assembly ------------------------------------------------------------

CONTEXT_BANNER = "=== SMART VECTOR RETRIEVAL CONTEXT ==="
CONTEXT_INSTRUCTIONS = (
    "INSTRUCTIONS:",
    "- Order: combined similarity, validity, live confidence and graph score",
    "- Confidence: source authority prior, decayed by age and adjusted by feedback",
    "- On a conflict marker, trust the source with the higher confidence",
    "- Cite the source and version of every claim",
)
RULE_WIDTH = 68


def _doc_rule(label: str) -> str:
    head = f"-- {label} "
    return head + "-" * max(3, RULE_WIDTH - len(head))


def _conflicts(v: SmartVector, earlier: Iterable[tuple[int, SmartVector]]) -> list[int]:
    return [
        n
        for n, other in earlier
        if other.vector_id in v.contradictions or v.vector_id in other.contradictions
    ]


def assemble_context(results: Sequence[ScoredResult], store: VectorStore, t: datetime) -> str:
    """Render ranked results as an annotated prompt block for a generator."""
    lines = [CONTEXT_BANNER, *CONTEXT_INSTRUCTIONS, f"Reference time: {to_utc(t).date().isoformat()}"]
    shown: list[tuple[int, SmartVector]] = []
    for n, res in enumerate(sorted(results, key=lambda r: (-r.final, r.vector_id)), start=1):
        v = store.get(res.vector_id)
        label = f"Document {n}"
        clashes = _conflicts(v, shown)
        if clashes:
            noun = "DOC" if len(clashes) == 1 else "DOCS"
            label += f" (CONFLICTS WITH {noun} {', '.join(map(str, clashes))})"
        lines += [
            "",
            _doc_rule(label),
            f"Source: {v.doc_id} ({v.source_authority.value}) | Author: {v.author or 'unknown'}"
            f" | Version: v{v.doc_version} | {v.status.value}",
            f"Created: {v.created_at.date().isoformat()}",
            f"Scores: sim={res.sim:.3f}, temporal={res.temporal:.2f}, "
            f"confidence={res.confidence:.2f}, relational={res.relational:.3f}",
            f"FINAL: {res.final:.3f}",
            f"Edges: {v.edge_count} | Accesses: {v.access_count} | "
            f"Feedback: +{v.positive_feedback}/-{v.negative_feedback}",
            "",
            v.content.strip(),
        ]
        shown.append((n, v))
    return "\n".join(lines) + "\n"
