from __future__ import annotations

import json

import pytest

from conftest import T0, days, make_vector, store_of
from smartvector.core import (
    EdgeError,
    IllegalTransitionError,
    SourceAuthority,
    VectorNotFoundError,
    VectorStatus,
    VectorStore,
    VersionConflictError,
    add_edge,
    authority_prior,
    check_edges,
    chunk_spans,
    ingest_document,
    make_vector_id,
    parse_ts,
    format_ts,
    transition,
)

THREE_PARAGRAPHS = "Section one covers scope.\n\nSection two covers limits.\n\nSection three covers review.\n"


@pytest.mark.parametrize(
    ("source", "prior"),
    [
        (SourceAuthority.OFFICIAL_DB, 0.95),
        (SourceAuthority.POLICY, 0.90),
        (SourceAuthority.TECH_DOC, 0.85),
        (SourceAuthority.WIKI, 0.75),
        (SourceAuthority.EMAIL, 0.50),
        (SourceAuthority.MEETING_NOTES, 0.45),
        (SourceAuthority.CHAT, 0.30),
        (SourceAuthority.UNKNOWN, 0.20),
    ],
)
def test_authority_prior_table(source, prior):
    assert authority_prior(source) == prior


def test_authority_parse_is_lenient():
    assert SourceAuthority.parse("chat") is SourceAuthority.CHAT
    assert SourceAuthority.parse("OFFICIAL_DB") is SourceAuthority.OFFICIAL_DB
    assert SourceAuthority.parse("carrier pigeon") is SourceAuthority.UNKNOWN
    assert SourceAuthority.parse(None) is SourceAuthority.UNKNOWN


def test_first_ingest_single_chunk():
    store = VectorStore()
    ids = ingest_document(store, "doc", 1, "One short paragraph.", "Wiki", T0)
    assert ids == ["doc:v1:c0"]
    v = store.get("doc:v1:c0")
    assert v.status is VectorStatus.UNCONSOLIDATED
    assert v.supersedes is None and v.superseded_by is None
    assert v.base_confidence == 0.75
    assert store.recent_changes == ids


def test_reingest_supersedes_and_transfers_edges():
    store = VectorStore()
    ingest_document(store, "doc", 1, "Old text.", "TechDoc", T0)
    ingest_document(store, "dep", 1, "Dependent text.", "TechDoc", T0)
    add_edge(store, "dep:v1:c0", "doc:v1:c0", "depends_on")
    ingest_document(store, "doc", 2, "New text.", "TechDoc", days(10))
    old, new = store.get("doc:v1:c0"), store.get("doc:v2:c0")
    assert old.status is VectorStatus.DEPRECATED
    assert old.superseded_by == new.vector_id and new.supersedes == old.vector_id
    assert old.temporal_validity_end == days(10)
    assert new.depended_by == ["dep:v1:c0"] and old.depended_by == []
    assert store.get("dep:v1:c0").depends_on == ["doc:v2:c0"]
    check_edges(store)


def test_multi_chunk_offsets_reconstruct_text():
    store = VectorStore()
    ids = ingest_document(store, "doc", 1, THREE_PARAGRAPHS, "Policy", T0)
    chunks = [store.get(i) for i in ids]
    assert [c.chunk_index for c in chunks] == [0, 1, 2]
    assert "".join(c.content for c in chunks) == THREE_PARAGRAPHS
    for a, b in zip(chunks, chunks[1:]):
        assert a.source_offset_end == b.source_offset_start
    for c in chunks:
        assert THREE_PARAGRAPHS[c.source_offset_start : c.source_offset_end] == c.content


def test_long_paragraph_splits_at_sentences():
    text = " ".join(f"Sentence number {i} is here." for i in range(80))
    spans = chunk_spans(text, max_chars=200)
    assert len(spans) > 1
    assert "".join(text[a:b] for a, b in spans) == text
    assert all(len(text[a:b].strip()) <= 200 for a, b in spans)


def test_version_must_increase():
    store = VectorStore()
    ingest_document(store, "doc", 2, "text", "Wiki", T0)
    with pytest.raises(VersionConflictError):
        ingest_document(store, "doc", 2, "again", "Wiki", T0)
    with pytest.raises(VersionConflictError):
        ingest_document(store, "doc", 1, "older", "Wiki", T0)
    with pytest.raises(ValueError):
        ingest_document(store, "other", 1, "   ", "Wiki", T0)


def test_depends_on_symmetry_and_idempotence():
    store = store_of(make_vector("a"), make_vector("b"))
    assert add_edge(store, "a", "b", "depends_on")
    assert store.get("b").depended_by == ["a"]
    assert not add_edge(store, "a", "b", "depends_on")
    assert store.get("a").depends_on == ["b"]
    assert store.get("b").depended_by == ["a"]


def test_supersedes_deprecates_target():
    store = store_of(make_vector("new"), make_vector("old"))
    transition(store, "old", VectorStatus.ACTIVE, T0)
    add_edge(store, "new", "old", "supersedes")
    assert store.get("old").superseded_by == "new"
    assert store.get("old").status is VectorStatus.DEPRECATED
    assert not add_edge(store, "new", "old", "supersedes")


def test_contradicts_is_recorded_on_both():
    store = store_of(make_vector("a"), make_vector("b"))
    add_edge(store, "a", "b", "contradicts")
    assert store.get("a").contradictions == ["b"]
    assert store.get("b").contradictions == ["a"]


def test_edge_errors():
    store = store_of(make_vector("a"))
    with pytest.raises(EdgeError):
        add_edge(store, "a", "a", "depends_on")
    with pytest.raises(VectorNotFoundError):
        add_edge(store, "a", "missing", "depends_on")
    store.add(make_vector("b"))
    with pytest.raises(EdgeError):
        add_edge(store, "a", "b", "likes")


def test_legal_transitions():
    store = store_of(make_vector("a"))
    transition(store, "a", VectorStatus.ACTIVE, days(1))
    assert store.get("a").updated_at == days(1)
    transition(store, "a", VectorStatus.DORMANT, days(2))
    transition(store, "a", VectorStatus.ACTIVE, days(3))
    transition(store, "a", VectorStatus.DEPRECATED, days(4))
    transition(store, "a", VectorStatus.ARCHIVED, days(5))
    with pytest.raises(IllegalTransitionError, match="ARCHIVED -> ACTIVE"):
        transition(store, "a", VectorStatus.ACTIVE, days(6))
    assert len(store) == 1


def test_vector_invariants_enforced():
    assert make_vector(base=3.0).base_confidence == 1.0
    assert make_vector(base=-1.0).base_confidence == 0.01
    with pytest.raises(ValueError):
        make_vector(temporal_validity_start=days(2), temporal_validity_end=days(1))
    store = store_of(make_vector("a"))
    with pytest.raises(Exception):
        store.add(make_vector("a"))


def test_ids_and_timestamps():
    assert make_vector_id("doc", 3, 1) == "doc:v3:c1"
    assert format_ts(T0) == "2026-01-01T00:00:00Z"
    assert parse_ts("2026-01-01T00:00:00Z") == T0
    assert parse_ts("2026-01-01T01:00:00+01:00") == T0


def test_json_round_trip_is_byte_identical(tmp_path):
    store = VectorStore()
    ingest_document(store, "doc", 1, THREE_PARAGRAPHS, "Policy", T0, validity_start=T0)
    ingest_document(store, "dep", 1, "Depends on the policy.", "Chat", days(3), author="ops")
    add_edge(store, "dep:v1:c0", "doc:v1:c0", "depends_on")
    first = store.dumps()
    path = tmp_path / "store.json"
    store.save(path)
    loaded = VectorStore.load(path)
    assert loaded.dumps() == first
    data = json.loads(first)
    assert set(data) == {"vectors", "recent_changes"}
    assert "term_vector" not in data["vectors"][0]
    assert loaded.get("doc:v1:c0").term_vector


def test_load_rejects_dangling_and_asymmetric_edges():
    store = store_of(make_vector("a"), make_vector("b"))
    add_edge(store, "a", "b", "depends_on")
    data = store.to_json()
    data["vectors"][1]["depended_by"] = []
    with pytest.raises(EdgeError):
        VectorStore.from_json(data)
    data = store.to_json()
    data["vectors"][0]["contradictions"] = ["ghost"]
    with pytest.raises(EdgeError):
        VectorStore.from_json(data)


def test_store_copy_is_independent():
    store = store_of(make_vector("a"), make_vector("b"))
    clone = store.copy()
    add_edge(clone, "a", "b", "depends_on")
    clone.get("a").access_count += 1
    assert store.get("a").depends_on == [] and store.get("a").access_count == 0
