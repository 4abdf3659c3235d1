from __future__ import annotations

from itertools import product

import pytest

from conftest import T0, days, make_vector, store_of
from smartvector.bench import BenchConfig, generate_corpus
from smartvector.core import VectorStatus, VectorStore, add_edge, ingest_document, transition
from smartvector.consolidation import (
    ConflictParams,
    ConsolidationReport,
    RelationshipParams,
    RippleParams,
    build_relationships,
    detect_conflicts,
    propagate,
    resolve,
    run_consolidation,
)
from smartvector.bench import parse_ts


def chain(*ids: str, base: float = 0.85) -> VectorStore:
    """ids[i+1] depends_on ids[i]."""
    store = store_of(*(make_vector(i, f"text {i}", base=base) for i in ids))
    for a, b in zip(ids, ids[1:]):
        add_edge(store, b, a, "depends_on")
    return store


def test_ripple_params_validation():
    with pytest.raises(ValueError):
        RippleParams(gamma=1.0)
    with pytest.raises(ValueError):
        RippleParams(d_max=0)
    with pytest.raises(ValueError):
        RelationshipParams(direction="sideways")


def test_propagate_chain_penalties():
    store = chain("A", "B", "C")
    visited = propagate(store.get("A"), store)
    assert visited == {"B", "C"}
    assert store.get("A").base_confidence == 0.85
    assert store.get("B").base_confidence == pytest.approx(0.85 - 0.15, abs=1e-12)
    assert store.get("C").base_confidence == pytest.approx(0.85 - 0.075, abs=1e-12)
    assert store.get("B").contradictions == ["A"]


def test_propagate_without_dependents():
    store = chain("A")
    assert propagate(store.get("A"), store) == set()


def test_propagate_cycle_visits_once():
    store = chain("A", "B")
    add_edge(store, "A", "B", "depends_on")
    visited = propagate(store.get("A"), store)
    # the originator sits one hop away on a 2-cycle and is penalised once, like any node
    assert visited == {"A", "B"}
    assert store.get("B").base_confidence == pytest.approx(0.70)
    assert store.get("A").base_confidence == pytest.approx(0.775)
    assert store.get("A").contradictions == []
    store = chain("A", "B", "C")
    add_edge(store, "A", "C", "depends_on")
    assert propagate(store.get("A"), store, RippleParams(d_max=10)) == {"A", "B", "C"}
    assert [store.get(x).base_confidence for x in "BCA"] == pytest.approx([0.70, 0.775, 0.80])


def test_propagate_stops_at_d_max():
    store = chain("A", "B", "C", "D", "E")
    assert propagate(store.get("A"), store) == {"B", "C"}
    assert store.get("D").base_confidence == 0.85
    assert store.get("E").base_confidence == 0.85
    store = chain("A", "B", "C", "D", "E")
    assert propagate(store.get("A"), store, RippleParams(d_max=3)) == {"B", "C", "D"}
    assert store.get("D").base_confidence == pytest.approx(0.85 - 0.05)


def test_propagate_floor():
    store = chain("A", "B", base=0.05)
    propagate(store.get("A"), store)
    assert store.get("B").base_confidence == 0.01


def test_conflict_trivial_cases():
    same = store_of(make_vector("a", "leave is 60 days"), make_vector("b", "leave is 60 days"))
    assert detect_conflicts(same) == []
    disjoint = store_of(make_vector("a", "leave is 60 days"), make_vector("b", "vpn at 45 minutes"))
    assert detect_conflicts(disjoint) == []


def test_conflict_needs_numeric_divergence():
    a = "Boston finance parental leave policy: 60 days (J. Smith)."
    b = "heard Boston finance parental leave is 45 days now, Smith says"
    store = store_of(make_vector("a", a), make_vector("b", b))
    assert detect_conflicts(store) == [("a", "b")]
    store = store_of(make_vector("a", a), make_vector("b", b.replace("45", "60")))
    assert detect_conflicts(store) == []
    store = store_of(make_vector("a", a), make_vector("b", b.replace("45", "sixty")))
    assert detect_conflicts(store) == []
    loose = ConflictParams(require_numeric_divergence=False)
    assert detect_conflicts(store, loose) == [("a", "b")]


def test_conflict_skips_same_document_and_archived():
    a = make_vector("a:v1", "Boston finance parental leave policy: 60 days (J. Smith).", doc_id="a")
    b = make_vector("a:v2", "heard Boston finance parental leave is 45 days now, Smith says", doc_id="a")
    assert detect_conflicts(store_of(a, b)) == []
    b2 = make_vector("b", b.content)
    store = store_of(a, b2)
    transition(store, "b", VectorStatus.DEPRECATED, T0)
    transition(store, "b", VectorStatus.ARCHIVED, T0)
    assert detect_conflicts(store) == []


def test_benchmark_contradictions_detected_exactly():
    store, truth = generate_corpus(BenchConfig())
    pairs = set(detect_conflicts(store))
    known = {tuple(sorted(p)) for p in truth.contradictions}
    assert len(known) == 18
    assert known <= pairs
    rumors = {r for r, _ in truth.contradictions}
    for a, b in pairs:
        # every flagged pair involves a rumor and stays within one topic
        rumor = a if a in rumors else b
        assert rumor in rumors
        other = b if rumor == a else a
        assert store.get(other).doc_id == store.get(rumor).doc_id.removesuffix("-chat")


def feedback_vector(vid: str, created: int, base: float, pos: int, neg: int):
    return make_vector(vid, created=days(created), base=base, positive_feedback=pos, negative_feedback=neg)


@pytest.mark.parametrize("pattern", list(product([True, False], repeat=3)))
def test_resolve_truth_table(pattern):
    newer, stronger, liked = pattern
    a = feedback_vector("a", 10 if newer else 0, 0.9 if stronger else 0.5, 5 if liked else 0, 0 if liked else 5)
    b = feedback_vector("b", 0 if newer else 10, 0.5 if stronger else 0.9, 0 if liked else 5, 5 if liked else 0)
    expected = "a" if sum(pattern) >= 2 else "b"
    assert resolve(a, b) == expected
    assert resolve(b, a) == expected


def test_resolve_canonical_beats_fresh_rumor():
    canonical = feedback_vector("canon", -200, 0.90, 3, 0)
    rumor = feedback_vector("rumor", -2, 0.30, 0, 0)
    assert resolve(canonical, rumor) == "canon"
    with pytest.raises(ValueError):
        resolve(rumor, rumor)


def test_build_relationships_structural():
    store = VectorStore()
    text = "Preamble here.\n\nSection one.\n\nSection two.\n"
    ids = ingest_document(store, "doc", 1, text, "Policy", T0)
    added = build_relationships(store)
    assert added == [(ids[1], ids[0]), (ids[2], ids[0])]
    assert store.get(ids[0]).depended_by == [ids[1], ids[2]]
    assert build_relationships(store) == []


def test_build_relationships_semantic():
    store = store_of(
        make_vector("old", "vpn timeout policy for remote staff", created=T0),
        make_vector("new", "vpn timeout policy for remote staff members", created=days(5)),
        make_vector("other", "parental leave weeks"),
    )
    assert build_relationships(store) == [("new", "old")]
    flipped = store_of(
        make_vector("old", "vpn timeout policy for remote staff", created=T0),
        make_vector("new", "vpn timeout policy for remote staff members", created=days(5)),
    )
    assert build_relationships(flipped, RelationshipParams(direction="older_to_newer")) == [("old", "new")]
    assert build_relationships(store, RelationshipParams(sim_threshold=0.99)) == []


def test_consolidation_promotes_fresh_store():
    store = store_of(make_vector("a", "alpha words"), make_vector("b", "beta things"))
    report = run_consolidation(store, T0)
    assert sorted(report.promoted) == ["a", "b"]
    assert report.dormant == [] and report.contradictions == [] and report.edges_added == []
    assert all(v.status is VectorStatus.ACTIVE for v in store)


def test_consolidation_moves_stale_vector_to_dormant():
    store = store_of(make_vector("a", created=T0))
    transition(store, "a", VectorStatus.ACTIVE, T0)
    report = run_consolidation(store, days(90))
    assert report.dormant == ["a"]
    assert store.get("a").status is VectorStatus.DORMANT


def test_consolidation_ripples_recent_changes():
    store = VectorStore()
    ingest_document(store, "base", 1, "Base fact.", "TechDoc", T0)
    ingest_document(store, "child", 1, "Child fact.", "TechDoc", T0)
    add_edge(store, "child:v1:c0", "base:v1:c0", "depends_on")
    store.recent_changes.clear()
    ingest_document(store, "base", 2, "Base fact revised.", "TechDoc", days(1))
    report = run_consolidation(store, days(1))
    assert report.ripples == [("base:v2:c0", 1)]
    assert store.get("child:v1:c0").base_confidence == pytest.approx(0.70)
    assert store.recent_changes == []


def test_benchmark_consolidation_report_and_idempotence():
    store, truth = generate_corpus(BenchConfig())
    now = parse_ts(truth.now)
    first = run_consolidation(store, now)
    assert isinstance(first, ConsolidationReport)
    flagged = set(first.contradictions)
    for rumor, canon in truth.contradictions:
        assert tuple(sorted((rumor, canon))) in flagged
        assert canon in store.get(rumor).contradictions
        assert rumor in store.get(canon).contradictions
        assert canon in first.winners
    for v in store:
        for other in v.contradictions:
            assert v.vector_id in store.get(other).contradictions
    assert store.recent_changes == []
    second = run_consolidation(store, now)
    assert second.new_contradictions == 0
    assert second.edges_added == [] and second.promoted == []
    counts = first.counts()
    assert counts["contradiction pairs"] == len(flagged)
    assert "promoted" in first.table()
    assert '"counts"' in first.dumps()
