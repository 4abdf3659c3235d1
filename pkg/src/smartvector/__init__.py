"""Lifecycle-aware reranking over a TF-IDF retriever."""

from __future__ import annotations

from smartvector.confidence import ConfidenceParams, confidence, temporal_score
from smartvector.consolidation import (
    ConflictParams,
    ConsolidationReport,
    RelationshipParams,
    RippleParams,
    detect_conflicts,
    propagate,
    run_consolidation,
)
from smartvector.core import (
    SmartVector,
    SmartVectorError,
    SourceAuthority,
    VectorStatus,
    VectorStore,
    add_edge,
    ingest_document,
    transition,
)
from smartvector.kernels import BACKEND
from smartvector.retrieval import ScoreWeights, ScoredResult, assemble_context, retrieve
from smartvector.updates import diff, ingest_update

__version__ = "0.1.0"

__all__ = [
    "BACKEND",
    "ConfidenceParams",
    "ConflictParams",
    "ConsolidationReport",
    "RelationshipParams",
    "RippleParams",
    "ScoreWeights",
    "ScoredResult",
    "SmartVector",
    "SmartVectorError",
    "SourceAuthority",
    "VectorStatus",
    "VectorStore",
    "add_edge",
    "assemble_context",
    "confidence",
    "detect_conflicts",
    "diff",
    "ingest_document",
    "ingest_update",
    "propagate",
    "retrieve",
    "run_consolidation",
    "temporal_score",
    "transition",
]
