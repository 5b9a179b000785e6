"""Scoring stage: turn retrieval context into a graded, explained result.

An evaluation request bundles everything the scorer may consult: the
faculty chunks, the retrieved facts with similarities, the reference-check
verdict, and the transcript itself. Two scorers implement the same result
contract: a deterministic rubric mock (weighted blend of reference
similarity and fact coverage, half-mark granularity) used for all offline
tests, and a remote client that parses a hosted model's JSON response
without ever repairing it.
"""

from __future__ import annotations

import enum
import json
import os
import threading
from dataclasses import dataclass, field
from typing import Callable, Sequence

from .cache import FactChunk
from .canonical import canonical_bytes, sha256_hex
from .errors import (
    InconsistentQuestionId,
    MalformedProviderResponse,
    MissingFacultyChunks,
    ProviderUnavailable,
)
from .retrieval import ReferenceChunk, SimilarityVerdict

ENV_EVAL_URL = "GRADEKIT_EVAL_URL"

COVERAGE_SIMILARITY_FLOOR = 0.5  # a fact counts as supporting evidence at or above this
NEAR_THRESHOLD_MARGIN = 0.05


class Stage(enum.Enum):
    RAG1_PASS = "RAG1_PASS"
    CACHE_AUGMENTED = "CACHE_AUGMENTED"
    RAG2_FALLBACK = "RAG2_FALLBACK"


class Category(enum.Enum):
    FAIL = "FAIL"
    AVERAGE = "AVERAGE"
    GOOD = "GOOD"
    EXCELLENT = "EXCELLENT"


CATEGORY_ORDER = (Category.FAIL, Category.AVERAGE, Category.GOOD, Category.EXCELLENT)

DEFAULT_CATEGORY_BOUNDS = (0.40, 0.60, 0.80)


def bin_category(fraction: float, bounds: Sequence[float] = DEFAULT_CATEGORY_BOUNDS) -> Category:
    """Map a normalized score to a category band; lower bounds are inclusive."""
    if not 0.0 <= fraction <= 1.0:
        raise ValueError(f"fraction must lie in [0, 1], got {fraction}")
    b1, b2, b3 = bounds
    if fraction < b1:
        return Category.FAIL
    if fraction < b2:
        return Category.AVERAGE
    if fraction < b3:
        return Category.GOOD
    return Category.EXCELLENT


@dataclass(frozen=True)
class RubricWeights:
    """Mock scorer knobs: similarity weight, coverage weight, category bands."""

    alpha: float = 0.7
    beta: float = 0.3
    category_bounds: tuple[float, float, float] = DEFAULT_CATEGORY_BOUNDS

    def __post_init__(self) -> None:
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("weights must be non-negative")
        if abs(self.alpha + self.beta - 1.0) > 1e-9:
            raise ValueError("alpha + beta must equal 1.0")
        b1, b2, b3 = self.category_bounds
        if not (0.0 < b1 < b2 < b3 < 1.0):
            raise ValueError("category bounds must be strictly ascending within (0, 1)")


@dataclass(frozen=True)
class Rationale:
    """Structured explanation sections backing a score."""

    correct_points: tuple[str, ...]
    omissions: tuple[str, ...]
    improvements: tuple[str, ...]

    def to_dict(self) -> dict:
        return {
            "correct_points": list(self.correct_points),
            "omissions": list(self.omissions),
            "improvements": list(self.improvements),
        }


@dataclass(frozen=True)
class EvaluationRequest:
    """Everything the scorer sees for one response.

    Serialization is canonical, so identical inputs hash identically; the
    hash is what the audit trail binds a decision to.
    """

    question_id: str
    question_text: str
    transcript: str
    faculty_chunks: tuple[ReferenceChunk, ...]
    evidence_facts: tuple[tuple[FactChunk, float], ...]
    rag1_verdict: SimilarityVerdict
    max_marks: float
    stage: Stage

    def __post_init__(self) -> None:
        if self.stage is Stage.RAG1_PASS and not self.rag1_verdict.passed:
            raise ValueError("stage RAG1_PASS requires a passing verdict")
        if self.stage is Stage.RAG2_FALLBACK and not self.evidence_facts:
            raise ValueError("stage RAG2_FALLBACK requires deep-store evidence")
        if self.max_marks < 0:
            raise ValueError("max_marks must be >= 0")

    def cited_ids(self) -> set[str]:
        ids = {chunk.chunk_id for chunk in self.faculty_chunks}
        ids.update(fact.fact_id for fact, _ in self.evidence_facts)
        return ids

    def to_dict(self) -> dict:
        return {
            "question_id": self.question_id,
            "question_text": self.question_text,
            "transcript": self.transcript,
            "faculty_chunks": [
                {
                    "chunk_id": c.chunk_id,
                    "question_id": c.question_id,
                    "text": c.text,
                    "max_marks": c.max_marks,
                    "marking_notes": c.marking_notes,
                }
                for c in self.faculty_chunks
            ],
            "evidence_facts": [
                {"fact_id": f.fact_id, "topic": f.topic, "text": f.text, "similarity": sim}
                for f, sim in self.evidence_facts
            ],
            "rag1_verdict": {
                "best_chunk_id": self.rag1_verdict.best_chunk_id,
                "similarity": self.rag1_verdict.similarity,
                "passed": self.rag1_verdict.passed,
                "threshold": self.rag1_verdict.threshold,
            },
            "max_marks": self.max_marks,
            "stage": self.stage.value,
        }

    def content_hash(self) -> str:
        return sha256_hex(canonical_bytes(self.to_dict()))


@dataclass(frozen=True)
class GradeResult:
    """Score, category, explanation, and provenance for one response."""

    score: float
    max_marks: float
    category: Category
    rationale: Rationale
    evidence_citations: tuple[str, ...]
    confidence_flag: bool
    stage: Stage

    def __post_init__(self) -> None:
        if not 0.0 <= self.score <= self.max_marks:
            raise ValueError(
                f"score {self.score} outside [0, {self.max_marks}]"
            )

    def to_dict(self) -> dict:
        return {
            "score": self.score,
            "max_marks": self.max_marks,
            "category": self.category.value,
            "rationale": self.rationale.to_dict(),
            "evidence_citations": list(self.evidence_citations),
            "confidence_flag": self.confidence_flag,
            "stage": self.stage.value,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "GradeResult":
        rationale = Rationale(
            tuple(data["rationale"]["correct_points"]),
            tuple(data["rationale"]["omissions"]),
            tuple(data["rationale"]["improvements"]),
        )
        return cls(
            score=float(data["score"]),
            max_marks=float(data["max_marks"]),
            category=Category(data["category"]),
            rationale=rationale,
            evidence_citations=tuple(data["evidence_citations"]),
            confidence_flag=bool(data["confidence_flag"]),
            stage=Stage(data["stage"]),
        )


def assemble_request(
    question_id: str,
    question_text: str,
    transcript: str,
    faculty_chunks: Sequence[ReferenceChunk],
    evidence_facts: Sequence[tuple[FactChunk, float]],
    rag1_verdict: SimilarityVerdict,
    max_marks: float,
    stage: Stage,
    allow_empty_faculty: bool = False,
) -> EvaluationRequest:
    """Validate and freeze the scorer's inputs for one response.

    ``allow_empty_faculty`` exists solely for the retrieval-free ablation
    arm, where the scorer deliberately receives no reference material.
    """
    for chunk in faculty_chunks:
        if chunk.question_id != question_id:
            raise InconsistentQuestionId(
                f"chunk {chunk.chunk_id!r} belongs to {chunk.question_id!r}, "
                f"request is for {question_id!r}"
            )
    if not faculty_chunks and not allow_empty_faculty:
        raise MissingFacultyChunks(f"no faculty chunks supplied for {question_id!r}")
    return EvaluationRequest(
        question_id=question_id,
        question_text=question_text,
        transcript=transcript,
        faculty_chunks=tuple(faculty_chunks),
        evidence_facts=tuple(evidence_facts),
        rag1_verdict=rag1_verdict,
        max_marks=max_marks,
        stage=stage,
    )


def _fact_coverage(request: EvaluationRequest) -> float:
    if request.stage is Stage.RAG1_PASS:
        return 1.0
    supported = sum(
        1 for _, sim in request.evidence_facts if sim >= COVERAGE_SIMILARITY_FLOOR
    )
    return supported / max(1, len(request.evidence_facts))


def _confidence_flag(request: EvaluationRequest) -> bool:
    verdict = request.rag1_verdict
    near_threshold = abs(verdict.similarity - verdict.threshold) < NEAR_THRESHOLD_MARGIN
    evidence_starved = (
        request.stage is not Stage.RAG1_PASS and len(request.evidence_facts) == 0
    )
    return near_threshold or evidence_starved


def _mock_rationale(request: EvaluationRequest, coverage: float) -> Rationale:
    verdict = request.rag1_verdict
    correct = []
    if verdict.best_chunk_id:
        correct.append(
            f"Response aligns with reference {verdict.best_chunk_id} "
            f"(similarity {verdict.similarity:.3f})."
        )
    for fact, sim in request.evidence_facts:
        if sim >= COVERAGE_SIMILARITY_FLOOR:
            correct.append(f"Supported by fact {fact.fact_id} (similarity {sim:.3f}).")
    omissions = []
    if verdict.similarity < 1.0:
        omissions.append(
            f"Reference alignment is {verdict.similarity:.3f}; parts of the "
            "expected answer are missing or divergent."
        )
    if request.stage is not Stage.RAG1_PASS and coverage < 1.0:
        omissions.append(
            f"Only {coverage:.2f} of the retrieved facts support this response."
        )
    improvements = ["Cover the reference points above in more depth."]
    if request.stage is Stage.RAG2_FALLBACK:
        improvements.append("Ground the answer in the course materials cited here.")
    return Rationale(tuple(correct), tuple(omissions), tuple(improvements))


def _validated_citations(request: EvaluationRequest, citations: Sequence[str]) -> tuple[str, ...]:
    known = request.cited_ids()
    for cid in citations:
        if cid not in known:
            raise MalformedProviderResponse(
                f"citation {cid!r} does not appear in the evaluation request"
            )
    return tuple(citations)


def evaluate_mock(request: EvaluationRequest, weights: RubricWeights | None = None) -> GradeResult:
    """Deterministic rubric scorer standing in for the remote model.

    score = round((alpha * reference_similarity + beta * fact_coverage)
    * max_marks * 2) / 2, where coverage is the fraction of evidence facts
    at similarity >= 0.5 (defined as 1.0 on the reference-pass stage).
    """
    weights = weights or RubricWeights()
    coverage = _fact_coverage(request)
    raw = weights.alpha * request.rag1_verdict.similarity + weights.beta * coverage
    score = round(raw * request.max_marks * 2) / 2
    score = min(request.max_marks, max(0.0, float(score)))
    fraction = score / request.max_marks if request.max_marks > 0 else 0.0
    citations: list[str] = []
    if request.rag1_verdict.best_chunk_id:
        citations.append(request.rag1_verdict.best_chunk_id)
    citations.extend(fact.fact_id for fact, _ in request.evidence_facts)
    return GradeResult(
        score=score,
        max_marks=request.max_marks,
        category=bin_category(fraction, weights.category_bounds),
        rationale=_mock_rationale(request, coverage),
        evidence_citations=_validated_citations(request, citations),
        confidence_flag=_confidence_flag(request),
        stage=request.stage,
    )


def parse_provider_response(
    request: EvaluationRequest,
    raw: str,
    category_bounds: Sequence[float] = DEFAULT_CATEGORY_BOUNDS,
) -> GradeResult:
    """Parse a remote evaluator's JSON reply into a GradeResult.

    Scores outside [0, max_marks] are clamped and flagged; anything else
    malformed (non-numeric score, missing rationale sections, citations not
    present in the request) is rejected rather than repaired.
    """
    try:
        data = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise MalformedProviderResponse(f"response is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise MalformedProviderResponse("response must be a JSON object")

    score_raw = data.get("score")
    if isinstance(score_raw, bool) or not isinstance(score_raw, (int, float)):
        raise MalformedProviderResponse(f"score must be numeric, got {score_raw!r}")
    score = float(score_raw)
    clamped = False
    if score < 0.0 or score > request.max_marks:
        score = min(request.max_marks, max(0.0, score))
        clamped = True

    rationale_raw = data.get("rationale")
    if not isinstance(rationale_raw, dict):
        raise MalformedProviderResponse("rationale must be an object")
    sections = []
    for key in ("correct_points", "omissions", "improvements"):
        section = rationale_raw.get(key)
        if not isinstance(section, list) or not all(isinstance(s, str) for s in section):
            raise MalformedProviderResponse(
                f"rationale section {key!r} must be a list of strings"
            )
        sections.append(tuple(section))
    citations_raw = data.get("citations")
    if not isinstance(citations_raw, list) or not all(isinstance(c, str) for c in citations_raw):
        raise MalformedProviderResponse("citations must be a list of strings")

    fraction = score / request.max_marks if request.max_marks > 0 else 0.0
    return GradeResult(
        score=score,
        max_marks=request.max_marks,
        category=bin_category(fraction, category_bounds),
        rationale=Rationale(*sections),
        evidence_citations=_validated_citations(request, citations_raw),
        confidence_flag=clamped or _confidence_flag(request),
        stage=request.stage,
    )


class RemoteEvaluator:
    """Client for a hosted scoring model.

    ``transport`` receives the canonically serialized request JSON and
    returns the provider's raw response string. Concurrent calls are capped
    by ``max_inflight``; failures surface as ProviderUnavailable and are
    never retried here, because a retry that lands on a different answer
    would make the audit trail nondeterministic.
    """

    def __init__(
        self,
        transport: Callable[[str], str],
        max_inflight: int = 4,
        category_bounds: Sequence[float] = DEFAULT_CATEGORY_BOUNDS,
    ):
        self._transport = transport
        self._gate = threading.Semaphore(max_inflight)
        self._category_bounds = tuple(category_bounds)

    def evaluate(self, request: EvaluationRequest) -> GradeResult:
        payload = canonical_bytes(request.to_dict()).decode("utf-8")
        with self._gate:
            try:
                raw = self._transport(payload)
            except Exception as exc:
                raise ProviderUnavailable(f"evaluation provider failed: {exc}") from exc
        return parse_provider_response(request, raw, self._category_bounds)


def http_evaluation_transport(url: str, timeout: float = 60.0) -> Callable[[str], str]:
    """POST the serialized request; return the provider's raw JSON text."""
    import httpx

    def transport(request_json: str) -> str:
        response = httpx.post(
            url, content=request_json, headers={"content-type": "application/json"},
            timeout=timeout,
        )
        response.raise_for_status()
        return response.text

    return transport


def make_evaluator(weights: RubricWeights | None = None):
    """Pick the evaluator: remote when GRADEKIT_EVAL_URL is set, else mock."""
    url = os.environ.get(ENV_EVAL_URL)
    if url:
        return RemoteEvaluator(
            http_evaluation_transport(url),
            category_bounds=(weights or RubricWeights()).category_bounds,
        ).evaluate
    rubric = weights or RubricWeights()
    return lambda request: evaluate_mock(request, rubric)
