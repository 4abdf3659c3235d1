from __future__ import annotations

from datetime import datetime, timedelta, timezone

import pytest

from smartvector.core import SmartVector, SourceAuthority, VectorStore, content_hash
from smartvector.evaluation import prepare

T0 = datetime(2026, 1, 1, tzinfo=timezone.utc)


def days(n: float) -> datetime:
    return T0 + timedelta(days=n)


def make_vector(
    vid: str = "a",
    content: str = "alpha beta",
    *,
    doc_id: str | None = None,
    version: int = 1,
    base: float = 0.85,
    created: datetime = T0,
    source: SourceAuthority = SourceAuthority.TECH_DOC,
    **kwargs,
) -> SmartVector:
    return SmartVector(
        vector_id=vid,
        doc_id=doc_id or vid,
        doc_version=version,
        chunk_index=0,
        content=content,
        content_hash=content_hash(content),
        created_at=created,
        updated_at=created,
        base_confidence=base,
        source_offset_start=0,
        source_offset_end=len(content),
        source_authority=source,
        **kwargs,
    )


def store_of(*vectors: SmartVector) -> VectorStore:
    store = VectorStore()
    for v in vectors:
        store.add(v)
    return store


@pytest.fixture(scope="session")
def benchmark_snapshot():
    """Default corpus, consolidated once; tests must copy before mutating."""
    return prepare()


def pytest_terminal_summary(terminalreporter):
    import sys

    module = sys.modules.get("test_acceptance")
    results = getattr(module, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for key in sorted(results):
        terminalreporter.write_line(results[key])
