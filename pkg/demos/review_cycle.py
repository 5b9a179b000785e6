"""
A full review cycle against the HTTP service
============================================

Drives the service in-process: submit two answers, watch the shaky one land
in the review queue, open an appeal, override the grade, and verify the
audit chain at the end. The same endpoints serve the browser UI.
"""

from fastapi.testclient import TestClient

from gradekit.embedding import EmbedderConfig, LocalHashEmbedder
from gradekit.pipeline import MemoEmbedder, PipelineConfig, grader_from_rows
from gradekit.service import build_app

references = [
    {
        "chunk_id": "c-q1",
        "question_id": "q1",
        "text": "the delta floods every monsoon and silt renews the fields",
        "max_marks": 5.0,
    }
]
facts = [
    {"fact_id": "f1", "topic": "floods", "text": "the delta floods every monsoon bringing fresh silt"},
    {"fact_id": "f2", "topic": "floods", "text": "silt renews the fields after each flood season"},
]
questions = [{"question_id": "q1", "question_text": "explain how monsoon floods shape delta farming"}]

grader = grader_from_rows(
    references, facts, questions,
    embedder=MemoEmbedder(LocalHashEmbedder(EmbedderConfig())),
    config=PipelineConfig(),
)
client = TestClient(build_app(grader))


def show(label, response):
    print(f"{label:28s} -> {response.status_code} {response.json()}")


show("submit clean answer", client.post("/responses", json={
    "pseudonym": "anon-101", "question_id": "q1",
    "transcript": references[0]["text"],
}))
show("submit shaky transcription", client.post("/responses", json={
    "pseudonym": "anon-102", "question_id": "q1",
    "transcript": references[0]["text"], "transcript_confidence": 0.4,
}))

queue = client.get("/review/queue").json()["items"]
print(f"\nreview queue: {[item['response_id'] for item in queue]} "
      f"(only the low-confidence one is flagged)\n")

show("student appeals the grade", client.post("/appeals/resp-000000", json={
    "reason": "marks seem low",
}))
show("reviewer overrides", client.post("/review/resp-000000/override", json={
    "score": 4.0, "reason": "one omission on appeal", "reviewer_id": "rev-1",
}))
show("regrade visible", client.get("/grades/resp-000000"))
show("audit verification", client.get("/audit/verify"))

print("\naudit trail:")
for record in grader.audit_log.records():
    payload = record.payload
    print(f"  #{record.sequence_no} {payload['action']:14s} {payload['response_id']}"
          f" by {payload['actor']} score={payload['score']}")
