"""
Walking one answer through the grading ladder
=============================================

Three transcripts for the same question: a verbatim copy of the faculty
answer, a partial answer that matches a cached fact, and an off-topic one.
Each lands on a different rung: reference match, cache support, deep-store
fallback.
"""

from gradekit.cache import CacheConfig
from gradekit.embedding import EmbedderConfig, LocalHashEmbedder
from gradekit.pipeline import MemoEmbedder, PipelineConfig, StudentResponse, grader_from_rows

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
    {"fact_id": "f3", "topic": "floods", "text": "farmers time planting to the flood calendar"},
    {"fact_id": "f4", "topic": "floods", "text": "embankments fail when the river crests early"},
]

questions = [{"question_id": "q1", "question_text": "explain how monsoon floods shape delta farming"}]

# A high threshold makes the reference gate hard to pass, so the partial
# answer below has to be carried by retrieved facts instead.
grader = grader_from_rows(
    references,
    facts,
    questions,
    embedder=MemoEmbedder(LocalHashEmbedder(EmbedderConfig())),
    config=PipelineConfig(threshold=0.9, min_evidence=1),
    cache_config=CacheConfig(k_cold_seed=4, promote_threshold=3,
                             hot_capacity=2, cold_capacity=8, retrieval_top_m=2),
)

transcripts = {
    "verbatim": references[0]["text"],
    "partial": "silt renews the fields after each flood season",
    "off-topic": "bip bop zug zug wobble fizz",
}

for label, transcript in transcripts.items():
    response = StudentResponse(
        response_id=f"demo-{label}",
        pseudonym="anon-000",
        question_id="q1",
        transcript=transcript,
        transcript_confidence=1.0,
    )
    request, result, record = grader.grade_with_request(response)
    print(f"--- {label}")
    print(f"  stage      {result.stage.value}")
    print(f"  gate sim   {request.rag1_verdict.similarity:.3f} (threshold {request.rag1_verdict.threshold})")
    print(f"  score      {result.score} / {result.max_marks}  [{result.category.value}]")
    print(f"  citations  {', '.join(result.evidence_citations) or '(none)'}")
    print(f"  audit      #{record.sequence_no} {record.payload['action']}")

print()
print(f"audit chain intact: {grader.audit_log.verify() is None}")
print(f"q1 cache tiers  hot={sorted(grader.caches['q1'].hot)} cold={sorted(grader.caches['q1'].cold)}")
