"""Small factories shared across test modules."""

from __future__ import annotations

import math

import numpy as np

from gradekit.cache import FactChunk, Tier
from gradekit.embedding import Embedding
from gradekit.retrieval import ReferenceChunk, SimilarityVerdict, threshold_passed

DIM = 8


def unit(values, dim: int = DIM) -> Embedding:
    """Pad to dim, L2-normalize, wrap."""
    arr = np.zeros(dim, dtype=np.float64)
    arr[: len(values)] = values
    return Embedding(values=arr / np.linalg.norm(arr))


def axis(i: int = 0, dim: int = DIM) -> Embedding:
    values = [0.0] * dim
    values[i] = 1.0
    return unit(values, dim)


def emb_with_cos(c: float, dim: int = DIM) -> Embedding:
    """An embedding whose cosine against axis(0) is exactly c."""
    return unit([c, math.sqrt(max(0.0, 1.0 - c * c))], dim)


def ref_chunk(
    chunk_id: str = "c1",
    question_id: str = "q1",
    text: str = "reference answer text",
    embedding: Embedding | None = None,
    max_marks: float = 5.0,
    marking_notes: str | None = None,
) -> ReferenceChunk:
    return ReferenceChunk(
        chunk_id=chunk_id,
        question_id=question_id,
        text=text,
        embedding=embedding if embedding is not None else axis(0),
        max_marks=max_marks,
        marking_notes=marking_notes,
    )


def fact(
    fact_id: str = "f1",
    topic: str = "topic",
    text: str = "a course fact",
    embedding: Embedding | None = None,
    access_count: int = 0,
    tier: Tier = Tier.DEEP_STORE,
    inserted_at: int = 0,
) -> FactChunk:
    return FactChunk(
        fact_id=fact_id,
        topic=topic,
        text=text,
        embedding=embedding if embedding is not None else axis(0),
        access_count=access_count,
        tier=tier,
        inserted_at=inserted_at,
    )


def verdict(
    similarity: float,
    threshold: float = 0.20,
    best_chunk_id: str = "c1",
) -> SimilarityVerdict:
    return SimilarityVerdict(
        best_chunk_id=best_chunk_id,
        similarity=similarity,
        passed=threshold_passed(similarity, threshold),
        threshold=threshold,
    )
