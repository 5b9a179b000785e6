"""Faculty answer index: question-level reference chunks with threshold checks.

Model answers are chunked per question and searched exhaustively. At desk
scale a brute-force scan is both fast enough and exactly reproducible, which
matters because verdicts feed a tamper-evident audit trail: approximate
indexes would make replay verification probabilistic.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .embedding import Embedding, clamped_similarity
from .errors import DimensionMismatch, DuplicateChunkId, QuestionUnknown


@dataclass(frozen=True)
class ReferenceChunk:
    """One faculty-prepared answer unit for a question."""

    chunk_id: str
    question_id: str
    text: str
    embedding: Embedding
    max_marks: float
    marking_notes: str | None = None

    def __post_init__(self) -> None:
        if self.max_marks < 0:
            raise ValueError(f"max_marks must be >= 0, got {self.max_marks}")


@dataclass(frozen=True)
class SimilarityVerdict:
    """Outcome of checking a response against one question's references.

    ``passed`` is strict: a similarity exactly equal to the threshold fails,
    because the threshold must be *exceeded*.
    """

    best_chunk_id: str
    similarity: float
    passed: bool
    threshold: float

    def __post_init__(self) -> None:
        if self.passed != threshold_passed(self.similarity, self.threshold):
            raise ValueError(
                "passed flag inconsistent with strict threshold rule: "
                f"similarity={self.similarity}, threshold={self.threshold}"
            )


def threshold_passed(similarity: float, threshold: float) -> bool:
    """Strict comparison used everywhere a threshold gate is applied."""
    return similarity > threshold


class Rag1Index:
    """Immutable per-question index over reference chunks.

    Rebuilding produces a new index; readers never observe a partial state.
    """

    def __init__(self, by_question: Mapping[str, tuple[ReferenceChunk, ...]], dimension: int):
        self._by_question = dict(by_question)
        self.dimension = dimension

    @property
    def question_count(self) -> int:
        return len(self._by_question)

    @property
    def chunk_count(self) -> int:
        return sum(len(chunks) for chunks in self._by_question.values())

    def question_ids(self) -> list[str]:
        return sorted(self._by_question)

    def has_question(self, question_id: str) -> bool:
        return question_id in self._by_question

    def chunks_for(self, question_id: str) -> tuple[ReferenceChunk, ...]:
        try:
            return self._by_question[question_id]
        except KeyError:
            raise QuestionUnknown(f"no reference chunks for question {question_id!r}") from None

    def chunk_by_id(self, chunk_id: str) -> ReferenceChunk:
        for chunks in self._by_question.values():
            for chunk in chunks:
                if chunk.chunk_id == chunk_id:
                    return chunk
        raise KeyError(chunk_id)

    def max_marks_for(self, question_id: str) -> float:
        """Marks available for a question: the max over its chunks."""
        return max(chunk.max_marks for chunk in self.chunks_for(question_id))


def index_references(chunks: Iterable[ReferenceChunk]) -> Rag1Index:
    """Build an index over reference chunks.

    All chunks must share one embedding dimension and carry unique ids.
    Within a question, chunks are stored sorted by chunk_id so that search
    order (and therefore tie-breaking) is independent of insertion order.
    """
    by_question: dict[str, list[ReferenceChunk]] = {}
    seen_ids: set[str] = set()
    dimension: int | None = None
    for chunk in chunks:
        if chunk.chunk_id in seen_ids:
            raise DuplicateChunkId(f"chunk id {chunk.chunk_id!r} occurs more than once")
        seen_ids.add(chunk.chunk_id)
        if dimension is None:
            dimension = chunk.embedding.dimension
        elif chunk.embedding.dimension != dimension:
            raise DimensionMismatch(
                f"chunk {chunk.chunk_id!r} has dimension "
                f"{chunk.embedding.dimension}, index uses {dimension}"
            )
        by_question.setdefault(chunk.question_id, []).append(chunk)
    frozen = {
        qid: tuple(sorted(group, key=lambda c: c.chunk_id))
        for qid, group in by_question.items()
    }
    return Rag1Index(frozen, dimension or 0)


def check_rag1(
    index: Rag1Index,
    question_id: str,
    response_embedding: Embedding,
    threshold: float,
) -> SimilarityVerdict:
    """Score a response against one question's reference chunks.

    Similarity is the max clamped cosine over the question's chunks; ties
    break toward the lexicographically smallest chunk_id. ``passed`` follows
    the strict rule: equality with the threshold fails.
    """
    if not 0.0 <= threshold <= 1.0:
        raise ValueError(f"threshold must lie in [0, 1], got {threshold}")
    chunks = index.chunks_for(question_id)
    best_id = ""
    best_sim = -1.0
    for chunk in chunks:  # sorted by chunk_id: first strict max wins ties
        sim = clamped_similarity(chunk.embedding, response_embedding)
        if sim > best_sim:
            best_sim = sim
            best_id = chunk.chunk_id
    return SimilarityVerdict(
        best_chunk_id=best_id,
        similarity=best_sim,
        passed=threshold_passed(best_sim, threshold),
        threshold=threshold,
    )
