"""SmartVector records, lifecycle, the in-memory store and document ingestion."""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass, field, fields
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Iterator


class SmartVectorError(Exception):
    """Base class for store errors."""


class VectorNotFoundError(SmartVectorError, KeyError):
    pass


class VersionConflictError(SmartVectorError, ValueError):
    pass


class IllegalTransitionError(SmartVectorError, ValueError):
    pass


class EdgeError(SmartVectorError, ValueError):
    pass


class VectorStatus(str, Enum):
    UNCONSOLIDATED = "UNCONSOLIDATED"
    ACTIVE = "ACTIVE"
    DORMANT = "DORMANT"
    DEPRECATED = "DEPRECATED"
    ARCHIVED = "ARCHIVED"


LEGAL_TRANSITIONS: dict[VectorStatus, frozenset[VectorStatus]] = {
    VectorStatus.UNCONSOLIDATED: frozenset({VectorStatus.ACTIVE, VectorStatus.DEPRECATED}),
    VectorStatus.ACTIVE: frozenset({VectorStatus.DORMANT, VectorStatus.DEPRECATED}),
    VectorStatus.DORMANT: frozenset({VectorStatus.ACTIVE, VectorStatus.DEPRECATED}),
    VectorStatus.DEPRECATED: frozenset({VectorStatus.ARCHIVED}),
    VectorStatus.ARCHIVED: frozenset(),
}


class SourceAuthority(str, Enum):
    OFFICIAL_DB = "OfficialDB"
    POLICY = "Policy"
    TECH_DOC = "TechDoc"
    WIKI = "Wiki"
    EMAIL = "Email"
    MEETING_NOTES = "MeetingNotes"
    CHAT = "Chat"
    UNKNOWN = "Unknown"

    @classmethod
    def parse(cls, value: str | SourceAuthority | None) -> SourceAuthority:
        """Lenient lookup by value or member name; anything unrecognised is UNKNOWN."""
        if isinstance(value, cls):
            return value
        if value is None:
            return cls.UNKNOWN
        key = str(value).strip()
        for member in cls:
            if key.lower() in (member.value.lower(), member.name.lower()):
                return member
        return cls.UNKNOWN


AUTHORITY_PRIORS: dict[SourceAuthority, float] = {
    SourceAuthority.OFFICIAL_DB: 0.95,
    SourceAuthority.POLICY: 0.90,
    SourceAuthority.TECH_DOC: 0.85,
    SourceAuthority.WIKI: 0.75,
    SourceAuthority.EMAIL: 0.50,
    SourceAuthority.MEETING_NOTES: 0.45,
    SourceAuthority.CHAT: 0.30,
    SourceAuthority.UNKNOWN: 0.20,
}

MIN_CONFIDENCE = 0.01
MAX_CONFIDENCE = 1.0
MAX_CHUNK_CHARS = 800


def authority_prior(source: SourceAuthority | str) -> float:
    return AUTHORITY_PRIORS[SourceAuthority.parse(source)]


def clamp_confidence(value: float) -> float:
    return min(MAX_CONFIDENCE, max(MIN_CONFIDENCE, value))


# -- time helpers -------------------------------------------------------------


def to_utc(ts: datetime) -> datetime:
    """Normalise to an aware UTC datetime with second precision."""
    if ts.tzinfo is None:
        ts = ts.replace(tzinfo=timezone.utc)
    return ts.astimezone(timezone.utc).replace(microsecond=0)


def utcnow() -> datetime:
    return to_utc(datetime.now(timezone.utc))


def format_ts(ts: datetime | None) -> str | None:
    if ts is None:
        return None
    return to_utc(ts).strftime("%Y-%m-%dT%H:%M:%SZ")


def parse_ts(text: str | None) -> datetime | None:
    if text is None:
        return None
    if text.endswith("Z"):
        text = text[:-1] + "+00:00"
    return to_utc(datetime.fromisoformat(text))


def content_hash(text: str) -> str:
    return hashlib.sha256(text.encode("utf-8")).hexdigest()


def make_vector_id(doc_id: str, doc_version: int, chunk_index: int) -> str:
    return f"{doc_id}:v{doc_version}:c{chunk_index}"


# -- the record ----------------------------------------------------------------


@dataclass
class SmartVector:
    vector_id: str
    doc_id: str
    doc_version: int
    chunk_index: int
    content: str
    content_hash: str
    created_at: datetime
    updated_at: datetime
    base_confidence: float
    source_offset_start: int
    source_offset_end: int
    temporal_validity_start: datetime | None = None
    temporal_validity_end: datetime | None = None
    access_count: int = 0
    positive_feedback: int = 0
    negative_feedback: int = 0
    last_validated: datetime | None = None
    half_life_days: float = 30.0
    depends_on: list[str] = field(default_factory=list)
    depended_by: list[str] = field(default_factory=list)
    supersedes: str | None = None
    superseded_by: str | None = None
    contradictions: list[str] = field(default_factory=list)
    status: VectorStatus = VectorStatus.UNCONSOLIDATED
    source_authority: SourceAuthority = SourceAuthority.UNKNOWN
    author: str = ""
    # TF-IDF weights; rebuilt from content by the index, never persisted.
    term_vector: dict[str, float] = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self.base_confidence = clamp_confidence(self.base_confidence)
        if not self.source_offset_start < self.source_offset_end:
            raise ValueError(
                f"{self.vector_id}: offsets must satisfy start < end "
                f"({self.source_offset_start}, {self.source_offset_end})"
            )
        if (
            self.temporal_validity_start is not None
            and self.temporal_validity_end is not None
            and self.temporal_validity_start > self.temporal_validity_end
        ):
            raise ValueError(f"{self.vector_id}: validity window is inverted")

    @property
    def edge_count(self) -> int:
        return len(self.depends_on) + len(self.depended_by)

    def copy(self) -> SmartVector:
        """Shallow-copy with fresh edge lists (cheap alternative to deepcopy)."""
        clone = SmartVector.__new__(SmartVector)
        clone.__dict__.update(self.__dict__)
        clone.depends_on = list(self.depends_on)
        clone.depended_by = list(self.depended_by)
        clone.contradictions = list(self.contradictions)
        return clone

    def to_json(self) -> dict[str, Any]:
        out: dict[str, Any] = {}
        for f in fields(self):
            if f.name == "term_vector":
                continue
            value = getattr(self, f.name)
            if isinstance(value, datetime):
                value = format_ts(value)
            elif isinstance(value, Enum):
                value = value.value
            elif isinstance(value, list):
                value = list(value)
            out[f.name] = value
        return out

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> SmartVector:
        kwargs = dict(data)
        for key in (
            "created_at",
            "updated_at",
            "temporal_validity_start",
            "temporal_validity_end",
            "last_validated",
        ):
            kwargs[key] = parse_ts(kwargs.get(key))
        kwargs["status"] = VectorStatus(kwargs["status"])
        kwargs["source_authority"] = SourceAuthority.parse(kwargs.get("source_authority"))
        kwargs.pop("term_vector", None)
        return cls(**kwargs)


# -- the store -----------------------------------------------------------------


class VectorStore:
    """Id-indexed SmartVectors plus the doc index, ripple queue and term index.

    Vectors are never removed. The TF-IDF index is rebuilt lazily whenever
    content has been added since the last build.
    """

    def __init__(self) -> None:
        self.vectors: dict[str, SmartVector] = {}
        self.by_doc: dict[str, list[str]] = {}
        self.recent_changes: list[str] = []
        self._index = None

    def __len__(self) -> int:
        return len(self.vectors)

    def __contains__(self, vector_id: object) -> bool:
        return vector_id in self.vectors

    def __iter__(self) -> Iterator[SmartVector]:
        return iter(self.vectors.values())

    def get(self, vector_id: str) -> SmartVector:
        try:
            return self.vectors[vector_id]
        except KeyError:
            raise VectorNotFoundError(vector_id) from None

    def add(self, vector: SmartVector) -> None:
        if vector.vector_id in self.vectors:
            raise SmartVectorError(f"duplicate vector id {vector.vector_id}")
        self.vectors[vector.vector_id] = vector
        self.by_doc.setdefault(vector.doc_id, []).append(vector.vector_id)
        self._index = None

    @property
    def term_index(self):
        """The TF-IDF index over every vector (built on first use)."""
        if self._index is None:
            from smartvector.retrieval import build_index

            self._index = build_index(self)
        return self._index

    def invalidate_index(self) -> None:
        self._index = None

    def latest_version(self, doc_id: str) -> int:
        ids = self.by_doc.get(doc_id)
        if not ids:
            raise VectorNotFoundError(doc_id)
        return max(self.vectors[i].doc_version for i in ids)

    def doc_chunks(self, doc_id: str, version: int | None = None) -> list[SmartVector]:
        """Chunks of one doc version (latest by default) ordered by offset."""
        if version is None:
            version = self.latest_version(doc_id)
        chunks = [
            self.vectors[i]
            for i in self.by_doc.get(doc_id, [])
            if self.vectors[i].doc_version == version
        ]
        return sorted(chunks, key=lambda v: (v.source_offset_start, v.chunk_index))

    def doc_text(self, doc_id: str, version: int | None = None) -> str:
        return "".join(v.content for v in self.doc_chunks(doc_id, version))

    def with_status(self, *statuses: VectorStatus) -> list[SmartVector]:
        wanted = set(statuses)
        return [v for v in self.vectors.values() if v.status in wanted]

    def copy(self) -> VectorStore:
        """Independent copy of all mutable state; the built index is shared."""
        clone = VectorStore()
        clone.vectors = {k: v.copy() for k, v in self.vectors.items()}
        clone.by_doc = {k: list(ids) for k, ids in self.by_doc.items()}
        clone.recent_changes = list(self.recent_changes)
        clone._index = self._index
        return clone

    # -- persistence

    def to_json(self) -> dict[str, Any]:
        return {
            "vectors": [v.to_json() for v in self.vectors.values()],
            "recent_changes": list(self.recent_changes),
        }

    def dumps(self) -> str:
        return json.dumps(self.to_json(), indent=2, ensure_ascii=False) + "\n"

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def from_json(cls, data: dict[str, Any]) -> VectorStore:
        store = cls()
        for item in data.get("vectors", []):
            store.add(SmartVector.from_json(item))
        store.recent_changes = list(data.get("recent_changes", []))
        check_edges(store)
        return store

    @classmethod
    def loads(cls, text: str) -> VectorStore:
        return cls.from_json(json.loads(text))

    @classmethod
    def load(cls, path: str | Path) -> VectorStore:
        store = cls.loads(Path(path).read_text(encoding="utf-8"))
        store.term_index  # rebuild term vectors
        return store


def check_edges(store: VectorStore) -> None:
    """Raise EdgeError on dangling ids or depends_on/depended_by asymmetry."""
    vectors = store.vectors
    for v in vectors.values():
        for target in (*v.depends_on, *v.depended_by, *v.contradictions):
            if target not in vectors:
                raise EdgeError(f"{v.vector_id} references unknown vector {target}")
        for ref in (v.supersedes, v.superseded_by):
            if ref is not None and ref not in vectors:
                raise EdgeError(f"{v.vector_id} references unknown vector {ref}")
        for target in v.depends_on:
            if v.vector_id not in vectors[target].depended_by:
                raise EdgeError(f"asymmetric edge {v.vector_id} -> {target}")
        for source in v.depended_by:
            if v.vector_id not in vectors[source].depends_on:
                raise EdgeError(f"asymmetric edge {source} -> {v.vector_id}")


# -- chunking ------------------------------------------------------------------

_PARAGRAPH_BREAK = re.compile(r"\n[ \t]*\n\s*")
_SENTENCE_END = re.compile(r"[.!?]+[\"')\]]*\s+")


def _split_long(text: str, start: int, end: int, limit: int) -> list[int]:
    """Interior split points for text[start:end] at sentence ends nearest the midpoint."""
    if len(text[start:end].strip()) <= limit:
        return []
    candidates = [
        m.end()
        for m in _SENTENCE_END.finditer(text, start, end)
        if m.end() < end and text[m.end() : end].strip()
    ]
    if not candidates:
        return []
    mid = (start + end) / 2
    cut = min(candidates, key=lambda p: (abs(p - mid), p))
    return _split_long(text, start, cut, limit) + [cut] + _split_long(text, cut, end, limit)


def chunk_spans(text: str, max_chars: int = MAX_CHUNK_CHARS) -> list[tuple[int, int]]:
    """Tile ``text`` into (start, end) spans on paragraph boundaries.

    Separating whitespace stays with the preceding chunk so that the spans
    concatenate back to the original text. Paragraphs longer than
    ``max_chars`` are split at sentence ends.
    """
    if not text.strip():
        return []
    cuts = [0]
    for m in _PARAGRAPH_BREAK.finditer(text):
        if m.end() < len(text) and text[cuts[-1] : m.start()].strip():
            cuts.append(m.end())
    cuts.append(len(text))
    spans: list[tuple[int, int]] = []
    for a, b in zip(cuts, cuts[1:]):
        points = [a, *_split_long(text, a, b, max_chars), b]
        spans.extend(zip(points, points[1:]))
    return spans


# -- mutations -----------------------------------------------------------------


def transition(
    store: VectorStore, vector_id: str, new_status: VectorStatus, now: datetime | None = None
) -> None:
    v = store.get(vector_id)
    new_status = VectorStatus(new_status)
    if new_status not in LEGAL_TRANSITIONS[v.status]:
        raise IllegalTransitionError(
            f"illegal transition for {vector_id}: {v.status.value} -> {new_status.value}"
        )
    v.status = new_status
    v.updated_at = to_utc(now) if now is not None else utcnow()


def _append_unique(items: list[str], value: str) -> bool:
    if value in items:
        return False
    items.append(value)
    return True


def add_edge(
    store: VectorStore,
    from_id: str,
    to_id: str,
    kind: str,
    now: datetime | None = None,
) -> bool:
    """Record an edge; returns False when it already existed.

    ``depends_on``: from depends on to (the reverse depended_by is kept in step).
    ``supersedes``: from replaces to, which is deprecated if still live.
    ``contradicts``: recorded on both vectors.
    """
    if from_id == to_id:
        raise EdgeError(f"self-edge on {from_id}")
    a = store.get(from_id)
    b = store.get(to_id)
    if kind == "depends_on":
        added = _append_unique(a.depends_on, to_id)
        _append_unique(b.depended_by, from_id)
        return added
    if kind == "contradicts":
        added = _append_unique(a.contradictions, to_id)
        added |= _append_unique(b.contradictions, from_id)
        return added
    if kind == "supersedes":
        if a.supersedes == to_id and b.superseded_by == from_id:
            return False
        a.supersedes = to_id
        b.superseded_by = from_id
        if b.status in (VectorStatus.UNCONSOLIDATED, VectorStatus.ACTIVE, VectorStatus.DORMANT):
            transition(store, to_id, VectorStatus.DEPRECATED, now)
        return True
    raise EdgeError(f"unknown edge kind {kind!r}")


def transfer_edges(store: VectorStore, mapping: dict[str, str]) -> None:
    """Move depends_on/depended_by edges from old ids to their replacements.

    Neighbour lists are rewritten in place so symmetry holds afterwards; the
    old vectors keep their supersession links but lose graph edges.
    """
    if not mapping:
        return
    touched: set[str] = set()
    for old_id, new_id in mapping.items():
        old = store.vectors[old_id]
        new = store.vectors[new_id]
        for target in old.depends_on:
            _append_unique(new.depends_on, mapping.get(target, target))
        for source in old.depended_by:
            _append_unique(new.depended_by, mapping.get(source, source))
        touched.update(old.depends_on)
        touched.update(old.depended_by)
    for old_id in mapping:
        store.vectors[old_id].depends_on = []
        store.vectors[old_id].depended_by = []
    for nid in touched - set(mapping):
        n = store.vectors[nid]
        n.depends_on = _dedupe(mapping.get(x, x) for x in n.depends_on)
        n.depended_by = _dedupe(mapping.get(x, x) for x in n.depended_by)


def _dedupe(items: Iterable[str]) -> list[str]:
    return list(dict.fromkeys(items))


def ingest_document(
    store: VectorStore,
    doc_id: str,
    doc_version: int,
    text: str,
    source: SourceAuthority | str,
    created_at: datetime,
    validity_start: datetime | None = None,
    validity_end: datetime | None = None,
    author: str = "",
    max_chars: int = MAX_CHUNK_CHARS,
) -> list[str]:
    """Chunk and insert one document version; returns the new vector ids.

    Chunks of the previous version that share a chunk_index are deprecated,
    linked through supersedes/superseded_by, and hand their edges over.
    """
    if doc_version < 1:
        raise VersionConflictError(f"{doc_id}: version must be positive, got {doc_version}")
    previous: list[SmartVector] = []
    if store.by_doc.get(doc_id):
        latest = store.latest_version(doc_id)
        if doc_version <= latest:
            raise VersionConflictError(
                f"{doc_id}: version {doc_version} is not newer than existing v{latest}"
            )
        previous = store.doc_chunks(doc_id, latest)
    spans = chunk_spans(text, max_chars)
    if not spans:
        raise ValueError(f"{doc_id}: document has no content")

    created_at = to_utc(created_at)
    vs = to_utc(validity_start) if validity_start is not None else None
    ve = to_utc(validity_end) if validity_end is not None else None
    source = SourceAuthority.parse(source)
    prior = authority_prior(source)
    old_by_index = {v.chunk_index: v for v in previous}

    new_ids: list[str] = []
    mapping: dict[str, str] = {}
    for idx, (start, end) in enumerate(spans):
        piece = text[start:end]
        vid = make_vector_id(doc_id, doc_version, idx)
        vec = SmartVector(
            vector_id=vid,
            doc_id=doc_id,
            doc_version=doc_version,
            chunk_index=idx,
            content=piece,
            content_hash=content_hash(piece),
            created_at=created_at,
            updated_at=created_at,
            base_confidence=prior,
            source_offset_start=start,
            source_offset_end=end,
            temporal_validity_start=vs,
            temporal_validity_end=ve,
            source_authority=source,
            author=author,
        )
        store.add(vec)
        new_ids.append(vid)
        old = old_by_index.pop(idx, None)
        if old is not None:
            _supersede(store, old, vec, created_at, vs)
            mapping[old.vector_id] = vid
    for orphan in old_by_index.values():
        # previous version had more chunks; the surplus simply stops being current
        _retire(store, orphan, created_at, vs)
    transfer_edges(store, mapping)
    store.recent_changes.extend(new_ids)
    return new_ids


def _retire(store: VectorStore, old: SmartVector, now: datetime, cutoff: datetime | None) -> None:
    if old.status in (VectorStatus.UNCONSOLIDATED, VectorStatus.ACTIVE, VectorStatus.DORMANT):
        transition(store, old.vector_id, VectorStatus.DEPRECATED, now)
    if old.temporal_validity_end is None:
        end = cutoff if cutoff is not None else now
        if old.temporal_validity_start is not None and end < old.temporal_validity_start:
            end = old.temporal_validity_start
        old.temporal_validity_end = end


def _supersede(
    store: VectorStore,
    old: SmartVector,
    new: SmartVector,
    now: datetime,
    cutoff: datetime | None,
) -> None:
    new.supersedes = old.vector_id
    old.superseded_by = new.vector_id
    _retire(store, old, now, cutoff)
