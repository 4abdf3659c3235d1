"""The offline consolidation cycle: dormancy, conflicts, edges, ripples, promotion."""

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass, field
from datetime import datetime
from itertools import combinations

import numpy as np

from smartvector.confidence import DEFAULT_PARAMS, ConfidenceParams, confidence
from smartvector.core import (
    MIN_CONFIDENCE,
    SmartVector,
    VectorStatus,
    VectorStore,
    add_edge,
    to_utc,
    transition,
)

LIVE = (VectorStatus.UNCONSOLIDATED, VectorStatus.ACTIVE, VectorStatus.DORMANT)


@dataclass(frozen=True)
class RippleParams:
    gamma: float = 0.15
    d_max: int = 2

    def __post_init__(self) -> None:
        if not 0 < self.gamma < 1:
            raise ValueError("gamma must lie in (0, 1)")
        if self.d_max < 1:
            raise ValueError("d_max must be at least 1")


@dataclass(frozen=True)
class ConflictParams:
    """Topic-overlap / content-divergence thresholds for contradiction candidates."""

    jaccard_min: float = 0.4
    cosine_max: float = 0.6
    require_numeric_divergence: bool = True


@dataclass(frozen=True)
class RelationshipParams:
    sim_threshold: float = 0.75
    # "newer_to_older": the later vector depends on the earlier one
    direction: str = "newer_to_older"

    def __post_init__(self) -> None:
        if self.direction not in ("newer_to_older", "older_to_newer"):
            raise ValueError(f"unknown edge direction {self.direction!r}")


@dataclass
class ConsolidationReport:
    recalculated: int = 0
    dormant: list[str] = field(default_factory=list)
    contradictions: list[tuple[str, str]] = field(default_factory=list)
    new_contradictions: int = 0
    winners: list[str] = field(default_factory=list)
    edges_added: list[tuple[str, str]] = field(default_factory=list)
    ripples: list[tuple[str, int]] = field(default_factory=list)
    promoted: list[str] = field(default_factory=list)

    def counts(self) -> dict[str, int]:
        return {
            "recalculated": self.recalculated,
            "dormancy transitions": len(self.dormant),
            "contradiction pairs": len(self.contradictions),
            "new contradiction pairs": self.new_contradictions,
            "conflicts resolved": len(self.winners),
            "edges added": len(self.edges_added),
            "ripples propagated": len(self.ripples),
            "ripple recipients": sum(n for _, n in self.ripples),
            "promoted": len(self.promoted),
        }

    def to_json(self) -> dict:
        out = asdict(self)
        out["counts"] = self.counts()
        return out

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2)

    def table(self) -> str:
        counts = self.counts()
        width = max(len(k) for k in counts)
        return "\n".join(f"{k:<{width}}  {v:>6}" for k, v in counts.items())


def detect_conflicts(
    store: VectorStore, params: ConflictParams = ConflictParams()
) -> list[tuple[str, str]]:
    """Pairs from different documents with shared topic words but divergent content."""
    index = store.term_index
    rows = [
        r
        for r, vid in enumerate(index.ids)
        if store.vectors[vid].status is not VectorStatus.ARCHIVED
    ]
    if len(rows) < 2:
        return []
    jac = index.jaccard_matrix()
    cos = index.cosine_matrix()
    docs = [store.vectors[vid].doc_id for vid in index.ids]
    pairs = []
    sub = np.array(rows)
    candidates = (jac[np.ix_(sub, sub)] >= params.jaccard_min) & (
        cos[np.ix_(sub, sub)] <= params.cosine_max
    )
    for a, b in zip(*np.nonzero(np.triu(candidates, k=1))):
        i, j = rows[a], rows[b]
        if docs[i] == docs[j]:
            continue
        if params.require_numeric_divergence:
            ni, nj = index.numbers[i], index.numbers[j]
            if not ni or not nj or ni == nj:
                continue
        pairs.append(tuple(sorted((index.ids[i], index.ids[j]))))
    return sorted(pairs)


def feedback_ratio(v: SmartVector) -> float:
    # add-one smoothing keeps fresh vectors at 0.5 instead of 0/0
    return (v.positive_feedback + 1) / (v.positive_feedback + v.negative_feedback + 2)


def resolve(a: SmartVector, b: SmartVector) -> str:
    """Winner of two out of the three pairwise votes below; each tie goes to ``b``."""
    if a.vector_id == b.vector_id:
        raise ValueError("cannot resolve a vector against itself")
    votes = [
        a if a.created_at > b.created_at else b,
        a if a.base_confidence > b.base_confidence else b,
        a if feedback_ratio(a) > feedback_ratio(b) else b,
    ]
    a_votes = sum(1 for v in votes if v is a)
    return a.vector_id if a_votes >= 2 else b.vector_id


def build_relationships(
    store: VectorStore, params: RelationshipParams = RelationshipParams()
) -> list[tuple[str, str]]:
    """Add structural and semantic depends_on edges among live vectors.

    Returns the (from, to) edges that did not exist before.
    """
    added: list[tuple[str, str]] = []
    live = [v for v in store.vectors.values() if v.status in LIVE]

    groups: dict[tuple[str, int], list[SmartVector]] = {}
    for v in live:
        groups.setdefault((v.doc_id, v.doc_version), []).append(v)
    for members in groups.values():
        heads = [v for v in members if v.chunk_index == 0]
        if not heads:
            continue
        head = heads[0]
        for v in sorted(members, key=lambda x: x.chunk_index):
            if v is not head and add_edge(store, v.vector_id, head.vector_id, "depends_on"):
                added.append((v.vector_id, head.vector_id))

    index = store.term_index
    rows = sorted(index.row_of[v.vector_id] for v in live)
    if len(rows) > 1:
        cos = index.cosine_matrix()
        for i, j in combinations(rows, 2):
            if cos[i, j] < params.sim_threshold:
                continue
            a, b = store.vectors[index.ids[i]], store.vectors[index.ids[j]]
            if a.doc_id == b.doc_id:
                continue
            newer, older = sorted((a, b), key=lambda v: (v.created_at, v.vector_id), reverse=True)
            src, dst = (newer, older) if params.direction == "newer_to_older" else (older, newer)
            if add_edge(store, src.vector_id, dst.vector_id, "depends_on"):
                added.append((src.vector_id, dst.vector_id))
    return added


def propagate(
    changed: SmartVector, store: VectorStore, params: RippleParams = RippleParams()
) -> set[str]:
    """Breadth-first penalty along depended_by edges.

    A recipient at hop ``d`` loses ``gamma / (d + 1)`` base confidence and is
    flagged with the changed id. Hops at or beyond ``d_max`` are not visited.
    """
    queue = deque((vid, 0) for vid in changed.depended_by)
    visited: set[str] = set()
    while queue:
        vid, d = queue.popleft()
        if vid in visited or d >= params.d_max:
            continue
        visited.add(vid)
        u = store.vectors[vid]
        u.base_confidence = max(MIN_CONFIDENCE, u.base_confidence - params.gamma / (d + 1))
        if changed.vector_id not in u.contradictions and changed.vector_id != vid:
            u.contradictions.append(changed.vector_id)
        queue.extend((x, d + 1) for x in u.depended_by)
    return visited


def run_consolidation(
    store: VectorStore,
    now: datetime,
    params: ConfidenceParams = DEFAULT_PARAMS,
    ripple: RippleParams = RippleParams(),
    conflicts: ConflictParams = ConflictParams(),
    relationships: RelationshipParams = RelationshipParams(),
) -> ConsolidationReport:
    now = to_utc(now)
    report = ConsolidationReport()

    # 1. live confidence; ACTIVE vectors under the threshold go dormant
    for v in store.with_status(VectorStatus.ACTIVE):
        report.recalculated += 1
        if confidence(v, now, params) < params.dormant_threshold:
            transition(store, v.vector_id, VectorStatus.DORMANT, now)
            report.dormant.append(v.vector_id)

    # 2. contradictions are flagged, not penalised
    for a, b in detect_conflicts(store, conflicts):
        report.contradictions.append((a, b))
        if add_edge(store, a, b, "contradicts"):
            report.new_contradictions += 1
        report.winners.append(resolve(store.vectors[a], store.vectors[b]))

    # 3. edges
    report.edges_added = build_relationships(store, relationships)

    # 4. ripples for everything written since the last cycle
    for vid in store.recent_changes:
        if vid in store.vectors:
            report.ripples.append((vid, len(propagate(store.vectors[vid], store, ripple))))
    store.recent_changes.clear()

    # 5. promotion
    for v in store.with_status(VectorStatus.UNCONSOLIDATED):
        transition(store, v.vector_id, VectorStatus.ACTIVE, now)
        report.promoted.append(v.vector_id)
    return report
