"""Per-response orchestration: embed, gate, retrieve, evaluate, log.

The grader walks one response through the retrieval ladder. A pass against
the faculty answer ends the climb immediately; otherwise the question's
HOT/COLD cache is consulted, and only when that turns up nothing useful
does the deep store get scanned. Every outcome, including provider
failures, lands in the audit log exactly once.

The ablation harness at the bottom reruns the same batch under the three
retrieval modes and reports Pearson-against-oracle at growing prefixes of
the response stream.
"""

from __future__ import annotations

import csv
import enum
import threading
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

from .audit import AuditLog, AuditRecord, grading_payload
from .cache import CacheConfig, FactChunk, TieredCache, init_for_question
from .corpus import build_fact_chunks, build_reference_chunks, write_ndjson
from .embedding import EmbedderConfig, Embedding, clamped_similarity, make_embedder
from .errors import (
    EmptyTranscript,
    InsufficientData,
    MalformedProviderResponse,
    ProviderUnavailable,
    QuestionUnknown,
)
from .evaluation import (
    COVERAGE_SIMILARITY_FLOOR,
    EvaluationRequest,
    GradeResult,
    RubricWeights,
    Stage,
    assemble_request,
    evaluate_mock,
)
from .metrics import pearson
from .retrieval import Rag1Index, SimilarityVerdict, check_rag1, threshold_passed
from .synthetic import (
    DEFAULT_OFFSCRIPT_RATE,
    DEFAULT_TOPIC_DRIFT,
    SyntheticBatch,
    SyntheticSpec,
    generate_synthetic,
)

LOW_TRANSCRIPT_CONFIDENCE = 0.5

# The ablation harness runs the embedder wider than the 256-dim default:
# at 256 buckets, unrelated paragraph-length texts already collide into
# cosines near the 0.20 threshold, which drowns the gating signal.
ABLATION_EMBED_DIMENSION = 2048


class Mode(enum.Enum):
    LLM_ONLY = "LLM_ONLY"
    LLM_RAG1 = "LLM_RAG1"
    LLM_RAG1_RAG2 = "LLM_RAG1_RAG2"


MODE_ORDER = (Mode.LLM_ONLY, Mode.LLM_RAG1, Mode.LLM_RAG1_RAG2)


@dataclass(frozen=True)
class PipelineConfig:
    threshold: float = 0.20
    min_evidence: int = 1
    mode: Mode = Mode.LLM_RAG1_RAG2

    def __post_init__(self) -> None:
        if not 0.0 <= self.threshold <= 1.0:
            raise ValueError(f"threshold {self.threshold} outside [0, 1]")
        if self.min_evidence < 1:
            raise ValueError("min_evidence must be a positive integer")


@dataclass(frozen=True)
class StudentResponse:
    response_id: str
    pseudonym: str
    question_id: str
    transcript: str
    transcript_confidence: float

    def __post_init__(self) -> None:
        if not self.transcript.strip():
            raise EmptyTranscript(f"response {self.response_id!r} has an empty transcript")
        if not 0.0 <= self.transcript_confidence <= 1.0:
            raise ValueError("transcript_confidence outside [0, 1]")

    @classmethod
    def from_dict(cls, row: Mapping) -> "StudentResponse":
        return cls(
            response_id=row["response_id"],
            pseudonym=row["pseudonym"],
            question_id=row["question_id"],
            transcript=row["transcript"],
            transcript_confidence=float(row["transcript_confidence"]),
        )


class MemoEmbedder:
    """Wraps an embedder with a text -> Embedding memo.

    Shared across graders in the ablation harness so the same transcript is
    never hashed three times. Thread-safe for the single-question-writer
    discipline the pipeline already imposes.
    """

    def __init__(self, inner) -> None:
        self._inner = inner
        self._memo: dict[str, Embedding] = {}
        self._lock = threading.Lock()

    def embed(self, text: str) -> Embedding:
        with self._lock:
            hit = self._memo.get(text)
        if hit is not None:
            return hit
        vector = self._inner.embed(text)
        with self._lock:
            self._memo[text] = vector
        return vector


class Grader:
    """Grades responses against one corpus under one configuration.

    Holds the per-question caches and the audit log; responses for the same
    question are serialized, distinct questions may run concurrently.
    """

    def __init__(
        self,
        rag1: Rag1Index,
        deep_store: Sequence[FactChunk],
        question_texts: Mapping[str, str],
        embedder=None,
        cache_config: CacheConfig | None = None,
        config: PipelineConfig | None = None,
        weights: RubricWeights | None = None,
        audit_log: AuditLog | None = None,
        evaluator: Callable[[EvaluationRequest], GradeResult] | None = None,
    ):
        self.rag1 = rag1
        self.deep_store = list(deep_store)
        self.question_texts = dict(question_texts)
        self._embedder = embedder if embedder is not None else make_embedder()
        self.cache_config = cache_config or CacheConfig()
        self.config = config or PipelineConfig()
        self.weights = weights or RubricWeights()
        self.audit_log = audit_log if audit_log is not None else AuditLog()
        self._evaluate = evaluator or (lambda req: evaluate_mock(req, self.weights))
        self.caches: dict[str, TieredCache] = {}
        self.unresolved: list[str] = []
        self._qlocks: dict[str, threading.Lock] = {}
        self._meta = threading.Lock()

    def _qlock(self, question_id: str) -> threading.Lock:
        with self._meta:
            if question_id not in self._qlocks:
                self._qlocks[question_id] = threading.Lock()
            return self._qlocks[question_id]

    def _cache_for(self, question_id: str) -> TieredCache:
        cache = self.caches.get(question_id)
        if cache is None:
            question_embedding = self._embedder.embed(self.question_texts[question_id])
            cache = init_for_question(self.deep_store, question_embedding, self.cache_config)
            self.caches[question_id] = cache
        return cache

    def _question_text(self, question_id: str) -> str:
        try:
            return self.question_texts[question_id]
        except KeyError:
            raise QuestionUnknown(f"no question text for {question_id!r}") from None

    def grade(self, response: StudentResponse) -> tuple[GradeResult, AuditRecord]:
        _request, result, record = self.grade_with_request(response)
        return result, record

    def grade_with_request(
        self, response: StudentResponse
    ) -> tuple[EvaluationRequest, GradeResult, AuditRecord]:
        """Like :meth:`grade`, but also hands back the evaluation request."""
        if not self.rag1.has_question(response.question_id):
            raise QuestionUnknown(f"question {response.question_id!r} not indexed")
        question_text = self._question_text(response.question_id)
        transcript_embedding = self._embedder.embed(response.transcript)
        max_marks = self.rag1.max_marks_for(response.question_id)

        with self._qlock(response.question_id):
            request = self._build_request(
                response, question_text, transcript_embedding, max_marks
            )
            try:
                result = self._evaluate(request)
            except (ProviderUnavailable, MalformedProviderResponse):
                self.audit_log.append(
                    grading_payload(
                        response_id=response.response_id,
                        stage=request.stage.value,
                        request_hash=request.content_hash(),
                        score=None,
                        evidence_citations=[],
                        actor="SYSTEM",
                        action="UNRESOLVED",
                    )
                )
                self.unresolved.append(response.response_id)
                raise
            if response.transcript_confidence < LOW_TRANSCRIPT_CONFIDENCE:
                result = replace(result, confidence_flag=True)
            record = self.audit_log.append(
                grading_payload(
                    response_id=response.response_id,
                    stage=result.stage.value,
                    request_hash=request.content_hash(),
                    score=result.score,
                    evidence_citations=list(result.evidence_citations),
                    actor="SYSTEM",
                    action="GRADED",
                )
            )
        return request, result, record

    def _build_request(
        self,
        response: StudentResponse,
        question_text: str,
        transcript_embedding: Embedding,
        max_marks: float,
    ) -> EvaluationRequest:
        mode = self.config.mode
        threshold = self.config.threshold

        if mode is Mode.LLM_ONLY:
            # No retrieval at all: the stand-in verdict scores the transcript
            # against the question text, which is all an unaided model sees.
            question_embedding = self._embedder.embed(question_text)
            similarity = clamped_similarity(transcript_embedding, question_embedding)
            verdict = SimilarityVerdict(
                best_chunk_id="",
                similarity=similarity,
                passed=threshold_passed(similarity, threshold),
                threshold=threshold,
            )
            return assemble_request(
                question_id=response.question_id,
                question_text=question_text,
                transcript=response.transcript,
                faculty_chunks=(),
                evidence_facts=(),
                rag1_verdict=verdict,
                max_marks=max_marks,
                stage=Stage.CACHE_AUGMENTED,
                allow_empty_faculty=True,
            )

        verdict = check_rag1(self.rag1, response.question_id, transcript_embedding, threshold)
        faculty = self.rag1.chunks_for(response.question_id)
        if verdict.passed:
            stage = Stage.RAG1_PASS
            evidence: Sequence[tuple[FactChunk, float]] = ()
        elif mode is Mode.LLM_RAG1:
            stage = Stage.CACHE_AUGMENTED
            evidence = ()
        else:
            cache = self._cache_for(response.question_id)
            hits = cache.lookup(transcript_embedding)
            supported = sum(1 for _, sim in hits if sim >= COVERAGE_SIMILARITY_FLOOR)
            if supported >= self.config.min_evidence:
                stage = Stage.CACHE_AUGMENTED
                evidence = hits
            else:
                stage = Stage.RAG2_FALLBACK
                evidence = cache.fallback_retrieve(transcript_embedding)
        return assemble_request(
            question_id=response.question_id,
            question_text=question_text,
            transcript=response.transcript,
            faculty_chunks=faculty,
            evidence_facts=evidence,
            rag1_verdict=verdict,
            max_marks=max_marks,
            stage=stage,
        )

    def grade_batch(
        self, responses: Sequence[StudentResponse]
    ) -> list[tuple[StudentResponse, GradeResult]]:
        return [(response, self.grade(response)[0]) for response in responses]


def write_grades(path: str | Path, graded: Sequence[tuple[StudentResponse, GradeResult]]) -> None:
    """Grades file: one canonical JSON object per response."""
    write_ndjson(
        path,
        ({"response_id": response.response_id, **result.to_dict()} for response, result in graded),
    )


def grader_from_rows(
    reference_rows: Sequence[dict],
    fact_rows: Sequence[dict],
    question_rows: Sequence[dict],
    embedder=None,
    **kwargs,
) -> Grader:
    """Wire a Grader from corpus-file rows (embedding everything once)."""
    from .retrieval import index_references

    embedder = embedder if embedder is not None else MemoEmbedder(make_embedder())
    chunks = build_reference_chunks(reference_rows, embedder.embed)
    facts = build_fact_chunks(fact_rows, embedder.embed)
    question_texts = {row["question_id"]: row["question_text"] for row in question_rows}
    return Grader(
        rag1=index_references(chunks),
        deep_store=facts,
        question_texts=question_texts,
        embedder=embedder,
        **kwargs,
    )


def prefix_lengths(total: int, start: int = 50) -> list[int]:
    """50, 100, 200, ... doubling, with the full length always included."""
    lengths = []
    n = start
    while n < total:
        lengths.append(n)
        n *= 2
    lengths.append(total)
    return lengths


def run_ablation(
    batch: SyntheticBatch,
    threshold: float = 0.20,
    min_evidence: int = 1,
    weights: RubricWeights | None = None,
    cache_config: CacheConfig | None = None,
    embedder_config: EmbedderConfig | None = None,
) -> dict[str, dict[int, float]]:
    """Grade one batch under each mode; Pearson vs oracle per prefix length.

    Returns {mode value: {n: pearson}}. The response stream is the batch's
    own order, so prefixes grow across questions the way a live exam feed
    would.
    """
    responses = [StudentResponse.from_dict(row) for row in batch.responses]
    if len(responses) < 50:
        raise InsufficientData(f"ablation needs at least 50 responses, got {len(responses)}")
    oracle = [batch.oracle_scores[r.response_id] for r in responses]
    lengths = prefix_lengths(len(responses))

    embedder_config = embedder_config or EmbedderConfig(dimension=ABLATION_EMBED_DIMENSION)
    embedder = MemoEmbedder(make_embedder(embedder_config))

    out: dict[str, dict[int, float]] = {}
    for mode in MODE_ORDER:
        grader = grader_from_rows(
            batch.references,
            batch.facts,
            batch.questions,
            embedder=embedder,
            config=PipelineConfig(threshold=threshold, min_evidence=min_evidence, mode=mode),
            weights=weights,
            cache_config=cache_config,
        )
        scores = [grader.grade(response)[0].score for response in responses]
        out[mode.value] = {
            n: pearson(scores[:n], oracle[:n]) for n in lengths
        }
    return out


def ablation_suite(
    spec: SyntheticSpec,
    seeds: int = 10,
    offscript_rate: float = DEFAULT_OFFSCRIPT_RATE,
    topic_drift: float = DEFAULT_TOPIC_DRIFT,
    **kwargs,
) -> list[tuple[str, int, float]]:
    """Mean Pearson per (mode, prefix) over ``seeds`` regenerated workloads."""
    if seeds < 1:
        raise ValueError("seeds must be a positive integer")
    sums: dict[tuple[str, int], float] = {}
    order: list[tuple[str, int]] = []
    for i in range(seeds):
        batch = generate_synthetic(
            replace(spec, seed=spec.seed + i), offscript_rate, topic_drift
        )
        series = run_ablation(batch, **kwargs)
        for mode in MODE_ORDER:
            for n, value in series[mode.value].items():
                key = (mode.value, n)
                if key not in sums:
                    sums[key] = 0.0
                    order.append(key)
                sums[key] += value
    return [(mode, n, sums[(mode, n)] / seeds) for mode, n in order]


def write_ablation_csv(path: str | Path, rows: Sequence[tuple[str, int, float]]) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["mode", "n", "pearson"])
        for mode, n, value in rows:
            writer.writerow([mode, n, f"{value:.6f}"])
