from __future__ import annotations

import pytest

from conftest import T0, days
from smartvector.core import (
    IllegalTransitionError,
    VectorNotFoundError,
    VectorStatus,
    VectorStore,
    add_edge,
    check_edges,
    ingest_document,
    transition,
)
from smartvector.updates import DiffChange, apply_changes, archive_superseded, diff, ingest_update

FOUR = (
    "Preamble of the travel policy.\n\n"
    "Per diem is 60 dollars in every city.\n\n"
    "Receipts are due within 30 days.\n\n"
    "Exceptions need director approval.\n"
)


def four_chunk_store() -> VectorStore:
    store = VectorStore()
    ingest_document(store, "travel", 1, FOUR, "Policy", T0)
    ingest_document(store, "audit", 1, "Audit relies on the travel policy.", "TechDoc", T0)
    add_edge(store, "audit:v1:c0", "travel:v1:c1", "depends_on")
    store.recent_changes.clear()
    return store


def test_diff_identity():
    assert diff("same text", "same text") == []


def test_diff_single_word():
    old = "the quick brown fox"
    new = "the quick red fox"
    changes = diff(old, new)
    assert changes == [DiffChange(10, 15, "red")]
    assert apply_changes(old, changes) == new


def test_diff_append_at_end():
    old = "first paragraph.\n"
    new = old + "\nsecond paragraph.\n"
    changes = diff(old, new)
    assert len(changes) == 1
    assert changes[0].start == changes[0].end == len(old)
    assert apply_changes(old, changes) == new


def test_diff_coalesces_adjacent_tokens_and_handles_empties():
    changes = diff("a b c d", "a x y d")
    assert changes == [DiffChange(2, 5, "x y")]
    assert apply_changes("", diff("", "new text")) == "new text"
    assert apply_changes("old text", diff("old text", "")) == ""


def test_one_word_edit_reembeds_one_chunk():
    store = four_chunk_store()
    new = FOUR.replace("60 dollars", "75 dollars")
    pairs = ingest_update(store, "travel", new, days(5))
    assert pairs == [("travel:v1:c1", "travel:v2:c1")]
    assert store.doc_text("travel") == new
    latest = store.doc_chunks("travel")
    assert [v.doc_version for v in latest] == [2, 2, 2, 2]
    assert all(v.status is VectorStatus.DEPRECATED for v in store.doc_chunks("travel", 1))
    # carried chunks keep their content hash; the replacement does not
    old_hashes = [v.content_hash for v in store.doc_chunks("travel", 1)]
    new_hashes = [v.content_hash for v in latest]
    assert [a == b for a, b in zip(old_hashes, new_hashes)] == [True, False, True, True]
    assert store.recent_changes == ["travel:v2:c1"]
    replacement = store.get("travel:v2:c1")
    assert replacement.supersedes == "travel:v1:c1"
    assert replacement.depended_by == ["audit:v1:c0"]
    assert store.get("audit:v1:c0").depends_on == ["travel:v2:c1"]
    assert replacement.temporal_validity_start == days(5)
    assert store.get("travel:v1:c1").temporal_validity_end == days(5)
    check_edges(store)


def test_noop_update():
    store = four_chunk_store()
    assert ingest_update(store, "travel", FOUR, days(5)) == []
    assert store.latest_version("travel") == 1


def test_edit_straddling_boundary_hits_two_chunks():
    store = four_chunk_store()
    new = FOUR.replace("every city.\n\nReceipts", "every city and receipts")
    pairs = ingest_update(store, "travel", new, days(5))
    assert [old for old, _ in pairs] == ["travel:v1:c1", "travel:v1:c2"]
    assert store.doc_text("travel") == new


def test_shifted_offsets_after_length_change():
    store = four_chunk_store()
    new = FOUR.replace("Preamble", "The long and detailed preamble")
    ingest_update(store, "travel", new, days(5))
    for v in store.doc_chunks("travel"):
        assert new[v.source_offset_start : v.source_offset_end] == v.content


def test_update_errors():
    store = four_chunk_store()
    with pytest.raises(VectorNotFoundError):
        ingest_update(store, "nope", "text", T0)
    with pytest.raises(ValueError):
        ingest_update(store, "travel", "  ", T0)


def test_archive_superseded():
    store = VectorStore()
    ingest_document(store, "doc", 1, "v one", "Wiki", T0)
    ingest_update(store, "doc", "v two", days(1))
    assert archive_superseded(store) == 0
    ingest_update(store, "doc", "v three", days(2))
    assert archive_superseded(store, now=days(3)) == 1
    archived = store.get("doc:v1:c0")
    assert archived.status is VectorStatus.ARCHIVED
    assert store.get("doc:v2:c0").status is VectorStatus.DEPRECATED
    with pytest.raises(IllegalTransitionError):
        transition(store, archived.vector_id, VectorStatus.ACTIVE)
    assert archive_superseded(store) == 0
    assert len(store) == 3
    with pytest.raises(ValueError):
        archive_superseded(store, 0)
