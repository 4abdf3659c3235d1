"""Diff-based document updates that re-embed only the chunks an edit touches."""

from __future__ import annotations

import difflib
import re
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from smartvector import kernels
from smartvector.core import (
    SmartVector,
    VectorNotFoundError,
    VectorStatus,
    VectorStore,
    authority_prior,
    content_hash,
    make_vector_id,
    to_utc,
    transfer_edges,
    transition,
)

_TOKEN = re.compile(r"\s|\S+")
# Above this many DP cells the middle section is matched with difflib instead.
LCS_CELL_LIMIT = 20_000_000


@dataclass(frozen=True)
class DiffChange:
    """Replace old_text[start:end] with ``replacement``."""

    start: int
    end: int
    replacement: str


def apply_changes(old_text: str, changes: list[DiffChange]) -> str:
    out = []
    pos = 0
    for ch in changes:
        out.append(old_text[pos : ch.start])
        out.append(ch.replacement)
        pos = ch.end
    out.append(old_text[pos:])
    return "".join(out)


def _match_middle(a: list[int], b: list[int]) -> list[tuple[int, int]]:
    if not a or not b:
        return []
    if len(a) * len(b) > LCS_CELL_LIMIT:
        sm = difflib.SequenceMatcher(None, a, b, autojunk=False)
        return [
            (blk.a + k, blk.b + k) for blk in sm.get_matching_blocks() for k in range(blk.size)
        ]
    pairs = kernels.lcs_matches(np.array(a, dtype=np.int64), np.array(b, dtype=np.int64))
    return [tuple(p) for p in pairs.tolist()]


def diff(old_text: str, new_text: str) -> list[DiffChange]:
    """Token-level LCS diff; each whitespace character is a token, so offsets are exact.

    Runs of unmatched tokens become one change, and changes separated only by
    whitespace are merged.
    """
    if old_text == new_text:
        return []
    old_spans = [m.span() for m in _TOKEN.finditer(old_text)]
    new_spans = [m.span() for m in _TOKEN.finditer(new_text)]
    ids: dict[str, int] = {}
    a = [ids.setdefault(old_text[s:e], len(ids)) for s, e in old_spans]
    b = [ids.setdefault(new_text[s:e], len(ids)) for s, e in new_spans]
    n, m = len(a), len(b)

    prefix = 0
    while prefix < min(n, m) and a[prefix] == b[prefix]:
        prefix += 1
    suffix = 0
    while suffix < min(n, m) - prefix and a[n - 1 - suffix] == b[m - 1 - suffix]:
        suffix += 1
    matches = [(i, i) for i in range(prefix)]
    matches += [
        (i + prefix, j + prefix) for i, j in _match_middle(a[prefix : n - suffix], b[prefix : m - suffix])
    ]
    matches += [(n - suffix + k, m - suffix + k) for k in range(suffix)]

    def old_pos(i: int) -> int:
        return old_spans[i][0] if i < n else len(old_text)

    def new_pos(j: int) -> int:
        return new_spans[j][0] if j < m else len(new_text)

    changes = []
    pi = pj = -1
    for i, j in [*matches, (n, m)]:
        if i > pi + 1 or j > pj + 1:
            start, end = old_pos(pi + 1), old_pos(i)
            replacement = new_text[new_pos(pj + 1) : new_pos(j)]
            if changes and not old_text[changes[-1].end : start].strip():
                last = changes.pop()
                replacement = last.replacement + old_text[last.end : start] + replacement
                start = last.start
            changes.append(DiffChange(start, end, replacement))
        pi, pj = i, j
    return changes


def _touches(v_start: int, v_end: int, ch: DiffChange) -> bool:
    if ch.start < ch.end:
        return v_start < ch.end and v_end > ch.start
    # a pure insertion belongs to the chunk it follows (or the first chunk)
    return v_start < ch.start <= v_end or (ch.start == 0 and v_start == 0)


def _map_boundary(p: int, changes: list[DiffChange]) -> int:
    shift = 0
    for ch in changes:
        if ch.start == ch.end == p:
            shift += len(ch.replacement)
        elif ch.end <= p:
            shift += len(ch.replacement) - (ch.end - ch.start)
        elif ch.start < p:
            return ch.start + shift + min(p - ch.start, len(ch.replacement))
        else:
            break
    return p + shift


def ingest_update(
    store: VectorStore, doc_id: str, new_text: str, now: datetime
) -> list[tuple[str, str]]:
    """Apply a new revision of ``doc_id``; returns (deprecated, replacement) pairs.

    Chunks overlapping a change are deprecated and replaced by re-chunked
    content; the rest are carried into the new version with shifted offsets
    and unchanged content hashes. A chunk whose text is deleted outright is
    deprecated without a replacement.
    """
    if doc_id not in store.by_doc:
        raise VectorNotFoundError(doc_id)
    if not new_text.strip():
        raise ValueError("new_text is empty")
    now = to_utc(now)
    latest = store.latest_version(doc_id)
    chunks = store.doc_chunks(doc_id, latest)
    old_text = "".join(v.content for v in chunks)
    changes = diff(old_text, new_text)
    if not changes:
        return []

    # plan everything before mutating so the update is all-or-nothing
    version = latest + 1
    plan: list[tuple[SmartVector, int, int, bool]] = []
    for v in chunks:
        start = _map_boundary(v.source_offset_start, changes) if v.source_offset_start else 0
        end = (
            len(new_text)
            if v.source_offset_end == len(old_text)
            else _map_boundary(v.source_offset_end, changes)
        )
        affected = any(_touches(v.source_offset_start, v.source_offset_end, ch) for ch in changes)
        if not affected and new_text[start:end] != v.content:
            raise AssertionError(f"carried chunk {v.vector_id} changed content")
        plan.append((v, start, end, affected))

    pairs: list[tuple[str, str]] = []
    mapping: dict[str, str] = {}
    new_index = 0
    for old, start, end, affected in plan:
        if start < end:
            piece = new_text[start:end]
            vid = make_vector_id(doc_id, version, new_index)
            if affected:
                new = SmartVector(
                    vector_id=vid,
                    doc_id=doc_id,
                    doc_version=version,
                    chunk_index=new_index,
                    content=piece,
                    content_hash=content_hash(piece),
                    created_at=now,
                    updated_at=now,
                    base_confidence=authority_prior(old.source_authority),
                    source_offset_start=start,
                    source_offset_end=end,
                    temporal_validity_start=now,
                    half_life_days=old.half_life_days,
                    source_authority=old.source_authority,
                    author=old.author,
                )
                pairs.append((old.vector_id, vid))
                store.recent_changes.append(vid)
            else:
                new = old.copy()
                new.vector_id = vid
                new.doc_version = version
                new.chunk_index = new_index
                new.source_offset_start = start
                new.source_offset_end = end
                new.depends_on, new.depended_by = [], []
                new.supersedes = new.superseded_by = None
                new.temporal_validity_end = None
                new.updated_at = now
                new.term_vector = {}
            new.supersedes = old.vector_id
            store.add(new)
            old.superseded_by = vid
            mapping[old.vector_id] = vid
            new_index += 1
        if old.status in (VectorStatus.UNCONSOLIDATED, VectorStatus.ACTIVE, VectorStatus.DORMANT):
            transition(store, old.vector_id, VectorStatus.DEPRECATED, now)
        if old.temporal_validity_end is None:
            old.temporal_validity_end = max(now, old.temporal_validity_start or now)
    transfer_edges(store, mapping)
    return pairs


def archive_superseded(
    store: VectorStore, grace_generations: int = 2, now: datetime | None = None
) -> int:
    """Archive DEPRECATED vectors at least ``grace_generations`` versions behind."""
    if grace_generations < 1:
        raise ValueError("grace_generations must be at least 1")
    count = 0
    for v in store.with_status(VectorStatus.DEPRECATED):
        if store.latest_version(v.doc_id) - v.doc_version >= grace_generations:
            transition(store, v.vector_id, VectorStatus.ARCHIVED, now)
            count += 1
    return count
