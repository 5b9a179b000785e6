"""HTTP surface: submissions, grades, review queue, appeals, audit checks.

The service owns no grading logic; it drives a Grader, keeps the
per-response review state (override, appeal), and guarantees that every
state-changing request appends exactly one audit record. Overrides never
erase anything: the original grade stays in the store and in the chain.
"""

from __future__ import annotations

import threading
from typing import Optional

from fastapi import FastAPI, HTTPException
from pydantic import BaseModel, Field

from .audit import grading_payload
from .errors import (
    ConstantSeries,
    EmptyTranscript,
    LengthMismatch,
    MalformedProviderResponse,
    ProviderUnavailable,
    QuestionUnknown,
)
from .evaluation import bin_category
from .metrics import agreement_report, score_pair
from .pipeline import Grader, StudentResponse

APPEAL_OPEN = "OPEN"
APPEAL_RESOLVED = "RESOLVED"


class ResponseIn(BaseModel):
    response_id: Optional[str] = None
    pseudonym: str
    question_id: str
    transcript: str
    transcript_confidence: float = Field(default=1.0, ge=0.0, le=1.0)


class OverrideIn(BaseModel):
    score: float
    reason: str
    reviewer_id: str


class AppealIn(BaseModel):
    reason: str = ""
    actor: str = "STUDENT"


class ResolveIn(BaseModel):
    reviewer_id: str
    note: str = ""


class _Entry:
    """Mutable review state for one graded response."""

    def __init__(self, response: StudentResponse, request, result, submitted_at: int):
        self.response = response
        self.request = request
        self.result = result
        self.submitted_at = submitted_at
        self.unresolved = result is None
        self.override: dict | None = None
        self.appeal: str | None = None

    @property
    def current_score(self) -> float | None:
        if self.override is not None:
            return self.override["score"]
        return self.result.score if self.result else None

    @property
    def max_marks(self) -> float:
        if self.result is not None:
            return self.result.max_marks
        return self.request.max_marks

    def in_queue(self) -> bool:
        if self.appeal == APPEAL_OPEN:
            return True
        if self.override is not None or self.appeal == APPEAL_RESOLVED:
            return False
        if self.unresolved:
            return True
        return self.result.confidence_flag

    def queue_item(self) -> dict:
        base = {
            "response_id": self.response.response_id,
            "pseudonym": self.response.pseudonym,
            "question_id": self.response.question_id,
            "question_text": self.request.question_text,
            "transcript": self.response.transcript,
            "max_marks": self.max_marks,
            "appeal": self.appeal,
            "submitted_at": self.submitted_at,
            "rag1_similarity": self.request.rag1_verdict.similarity,
        }
        if self.unresolved:
            base.update(
                score=None,
                category=None,
                rationale=None,
                evidence_citations=[],
                confidence_flag=True,
                stage="UNRESOLVED",
            )
        else:
            base.update(
                score=self.current_score,
                category=self.result.category.value,
                rationale=self.result.rationale.to_dict(),
                evidence_citations=list(self.result.evidence_citations),
                confidence_flag=self.result.confidence_flag,
                stage=self.result.stage.value,
            )
        return base

    def grade_view(self) -> dict:
        if self.unresolved:
            raise HTTPException(status_code=409, detail="response awaits human review")
        grade = self.result.to_dict()
        if self.override is not None:
            grade["score"] = self.override["score"]
            grade["category"] = bin_category(
                self.override["score"] / self.max_marks if self.max_marks else 0.0
            ).value
        return {
            "response_id": self.response.response_id,
            "pseudonym": self.response.pseudonym,
            "question_id": self.response.question_id,
            "grade": grade,
            "overridden": self.override is not None,
            "original_score": self.result.score,
            "override_reason": self.override["reason"] if self.override else None,
            "appeal": self.appeal,
        }


def _queue_sort_key(item: dict) -> tuple[int, int]:
    if item["appeal"] == APPEAL_OPEN:
        bucket = 0
    elif item["confidence_flag"]:
        bucket = 1
    else:
        bucket = 2
    return (bucket, item["submitted_at"])


def build_app(grader: Grader) -> FastAPI:
    app = FastAPI(title="gradekit", docs_url=None, redoc_url=None)
    # The review UI is served as static files from another origin.
    from fastapi.middleware.cors import CORSMiddleware

    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    entries: dict[str, _Entry] = {}
    lock = threading.Lock()
    serial = {"n": 0}
    facts_by_id = {fact.fact_id: fact for fact in grader.deep_store}

    def entry_or_404(response_id: str) -> _Entry:
        entry = entries.get(response_id)
        if entry is None:
            raise HTTPException(status_code=404, detail=f"unknown response {response_id!r}")
        return entry

    pending: set[str] = set()

    @app.post("/responses")
    def submit_response(body: ResponseIn) -> dict:
        with lock:
            if body.response_id:
                response_id = body.response_id
            else:
                while f"resp-{serial['n']:06d}" in entries or f"resp-{serial['n']:06d}" in pending:
                    serial["n"] += 1
                response_id = f"resp-{serial['n']:06d}"
            if response_id in entries or response_id in pending:
                raise HTTPException(status_code=409, detail=f"response {response_id!r} already exists")
            pending.add(response_id)
            serial["n"] += 1
            submitted_at = serial["n"]
        try:
            response = StudentResponse(
                response_id=response_id,
                pseudonym=body.pseudonym,
                question_id=body.question_id,
                transcript=body.transcript,
                transcript_confidence=body.transcript_confidence,
            )
        except EmptyTranscript as exc:
            with lock:
                pending.discard(response_id)
            raise HTTPException(status_code=422, detail=str(exc)) from exc
        try:
            request, result, _record = grader.grade_with_request(response)
        except QuestionUnknown as exc:
            with lock:
                pending.discard(response_id)
            raise HTTPException(status_code=404, detail=str(exc)) from exc
        except (ProviderUnavailable, MalformedProviderResponse) as exc:
            # The grader already appended the UNRESOLVED record; keep the
            # submission so it can surface in the review queue.
            with lock:
                pending.discard(response_id)
                entries[response_id] = _Entry(response, _FailedRequest(), None, submitted_at)
            raise HTTPException(status_code=502, detail=str(exc)) from exc
        with lock:
            pending.discard(response_id)
            entries[response_id] = _Entry(response, request, result, submitted_at)
        return {"response_id": response_id}

    @app.get("/grades/{response_id}")
    def get_grade(response_id: str) -> dict:
        with lock:
            return entry_or_404(response_id).grade_view()

    @app.get("/review/queue")
    def review_queue() -> dict:
        with lock:
            items = [e.queue_item() for e in entries.values() if e.in_queue()]
        items.sort(key=_queue_sort_key)
        return {"items": items}

    @app.post("/review/{response_id}/override")
    def override(response_id: str, body: OverrideIn) -> dict:
        if not body.reason.strip():
            raise HTTPException(status_code=422, detail="override requires a reason")
        if not body.reviewer_id.strip():
            raise HTTPException(status_code=422, detail="override requires a reviewer id")
        with lock:
            entry = entry_or_404(response_id)
            if entry.unresolved:
                raise HTTPException(status_code=409, detail="response has no grade to override")
            if not 0.0 <= body.score <= entry.max_marks:
                raise HTTPException(
                    status_code=422,
                    detail=f"score must lie in [0, {entry.max_marks}]",
                )
            already = entry.override is not None
            entry.override = {
                "score": body.score,
                "reason": body.reason,
                "reviewer_id": body.reviewer_id,
            }
            if entry.appeal == APPEAL_OPEN:
                entry.appeal = APPEAL_RESOLVED
            grader.audit_log.append(
                grading_payload(
                    response_id=response_id,
                    stage=entry.result.stage.value,
                    request_hash=entry.request.content_hash(),
                    score=body.score,
                    evidence_citations=list(entry.result.evidence_citations),
                    actor=body.reviewer_id,
                    action="OVERRIDDEN",
                )
            )
        return {
            "response_id": response_id,
            "score": body.score,
            "previously_overridden": already,
        }

    @app.post("/appeals/{response_id}")
    def open_appeal(response_id: str, body: AppealIn | None = None) -> dict:
        body = body or AppealIn()
        with lock:
            entry = entry_or_404(response_id)
            if entry.appeal == APPEAL_OPEN:
                raise HTTPException(status_code=409, detail="appeal already open")
            entry.appeal = APPEAL_OPEN
            grader.audit_log.append(
                grading_payload(
                    response_id=response_id,
                    stage=entry.result.stage.value if entry.result else "UNRESOLVED",
                    request_hash=entry.request.content_hash(),
                    score=entry.current_score,
                    evidence_citations=[],
                    actor=body.actor,
                    action="APPEAL_OPENED",
                )
            )
        return {"response_id": response_id, "appeal": APPEAL_OPEN}

    @app.post("/appeals/{response_id}/resolve")
    def resolve_appeal(response_id: str, body: ResolveIn) -> dict:
        with lock:
            entry = entry_or_404(response_id)
            if entry.appeal != APPEAL_OPEN:
                raise HTTPException(status_code=409, detail="no open appeal")
            entry.appeal = APPEAL_RESOLVED
            grader.audit_log.append(
                grading_payload(
                    response_id=response_id,
                    stage=entry.result.stage.value if entry.result else "UNRESOLVED",
                    request_hash=entry.request.content_hash(),
                    score=entry.current_score,
                    evidence_citations=[],
                    actor=body.reviewer_id,
                    action="APPEAL_RESOLVED",
                )
            )
        return {"response_id": response_id, "appeal": APPEAL_RESOLVED}

    @app.get("/audit/verify")
    def audit_verify() -> dict:
        bad = grader.audit_log.verify()
        if bad is None:
            return {"status": "OK", "records": len(grader.audit_log), "head": grader.audit_log.head_hash().hex()}
        return {"status": "FAIL", "first_bad": bad}

    @app.get("/audit/records")
    def audit_records(response_id: Optional[str] = None) -> dict:
        records = [
            {
                "sequence_no": r.sequence_no,
                "hash": r.hash.hex(),
                **r.payload,
            }
            for r in grader.audit_log.records()
            if response_id is None or r.payload.get("response_id") == response_id
        ]
        return {"records": records}

    @app.get("/metrics/agreement")
    def metrics_agreement() -> dict:
        with lock:
            pairs = [
                score_pair(
                    rid,
                    entry.result.score,
                    entry.override["score"],
                    entry.max_marks,
                )
                for rid, entry in entries.items()
                if entry.override is not None and entry.result is not None
            ]
        if len(pairs) < 2:
            raise HTTPException(
                status_code=409,
                detail="agreement needs at least two overridden responses",
            )
        try:
            report = agreement_report(pairs)
        except (ConstantSeries, LengthMismatch) as exc:
            raise HTTPException(status_code=409, detail=str(exc)) from exc
        return report.to_dict()

    @app.get("/chunks/{chunk_id}")
    def get_chunk(chunk_id: str) -> dict:
        try:
            chunk = grader.rag1.chunk_by_id(chunk_id)
            return {
                "id": chunk.chunk_id,
                "kind": "reference",
                "question_id": chunk.question_id,
                "text": chunk.text,
            }
        except KeyError:
            pass
        fact = facts_by_id.get(chunk_id)
        if fact is None:
            raise HTTPException(status_code=404, detail=f"unknown chunk {chunk_id!r}")
        return {"id": fact.fact_id, "kind": "fact", "topic": fact.topic, "text": fact.text}

    return app


class _FailedRequest:
    """Stand-in request for submissions the provider never graded."""

    def __init__(self):
        self.question_text = ""
        self.max_marks = 0.0
        self.rag1_verdict = _ZeroVerdict()

    def content_hash(self) -> str:
        return ""


class _ZeroVerdict:
    similarity = 0.0


def serve(grader: Grader, host: str = "127.0.0.1", port: int = 8000) -> None:
    """Run the service; raises BindFailure when the port cannot be taken."""
    import uvicorn

    from .errors import BindFailure

    try:
        uvicorn.run(build_app(grader), host=host, port=port, log_level="warning")
    except OSError as exc:
        raise BindFailure(f"cannot bind {host}:{port}: {exc}") from exc
