"""Rubric scorer, category binning, and the remote-provider parser."""

from __future__ import annotations

import json
import random
from pathlib import Path

import pytest

from _helpers import fact, ref_chunk, verdict
from gradekit.cache import Tier
from gradekit.errors import (
    InconsistentQuestionId,
    MalformedProviderResponse,
    MissingFacultyChunks,
    ProviderUnavailable,
)
from gradekit.evaluation import (
    CATEGORY_ORDER,
    Category,
    Rationale,
    RemoteEvaluator,
    RubricWeights,
    Stage,
    assemble_request,
    bin_category,
    evaluate_mock,
    make_evaluator,
    parse_provider_response,
)

DATA = Path(__file__).parent / "data"


def make_request(
    similarity: float = 0.45,
    threshold: float = 0.6,
    stage: Stage = Stage.CACHE_AUGMENTED,
    evidence_sims: tuple = (),
    max_marks: float = 5.0,
    transcript: str = "a student answer",
    faculty: tuple | None = None,
):
    chunks = faculty if faculty is not None else (ref_chunk(),)
    evidence = tuple(
        (fact(fact_id=f"f{i}", tier=Tier.COLD), sim) for i, sim in enumerate(evidence_sims)
    )
    return assemble_request(
        question_id="q1",
        question_text="describe the system",
        transcript=transcript,
        faculty_chunks=chunks,
        evidence_facts=evidence,
        rag1_verdict=verdict(similarity, threshold),
        max_marks=max_marks,
        stage=stage,
        allow_empty_faculty=not chunks,
    )


# -- binning ------------------------------------------------------------------


def test_bins_are_lower_inclusive() -> None:
    assert bin_category(0.0) is Category.FAIL
    assert bin_category(0.39999) is Category.FAIL
    assert bin_category(0.40) is Category.AVERAGE
    assert bin_category(0.59999) is Category.AVERAGE
    assert bin_category(0.60) is Category.GOOD
    assert bin_category(0.85) is Category.EXCELLENT
    assert bin_category(0.80) is Category.EXCELLENT
    assert bin_category(1.0) is Category.EXCELLENT


def test_bin_rejects_out_of_range() -> None:
    with pytest.raises(ValueError):
        bin_category(-0.01)
    with pytest.raises(ValueError):
        bin_category(1.01)


def test_category_order_is_worst_to_best() -> None:
    assert [c.value for c in CATEGORY_ORDER] == ["FAIL", "AVERAGE", "GOOD", "EXCELLENT"]


def test_rubric_weights_validated() -> None:
    with pytest.raises(ValueError):
        RubricWeights(alpha=0.7, beta=0.4)  # sums to 1.1
    with pytest.raises(ValueError):
        RubricWeights(category_bounds=(0.6, 0.4, 0.8))  # not ascending
    RubricWeights(alpha=0.5, beta=0.5)


# -- mock scorer --------------------------------------------------------------


def test_mock_worked_example() -> None:
    """similarity 0.45 with one of three facts supporting: raw 0.415 -> 2.0."""
    request = make_request(similarity=0.45, evidence_sims=(0.9, 0.3, 0.1))
    result = evaluate_mock(request)
    raw = 0.7 * 0.45 + 0.3 * (1.0 / 3.0)
    assert raw == pytest.approx(0.415, abs=1e-12)
    assert result.score == 2.0
    assert result.category is Category.AVERAGE


def test_mock_upper_bound() -> None:
    request = make_request(similarity=1.0, threshold=0.2, stage=Stage.RAG1_PASS)
    result = evaluate_mock(request)
    assert result.score == 5.0
    assert result.category is Category.EXCELLENT
    assert not result.confidence_flag


def test_mock_lower_bound_flags_missing_evidence() -> None:
    request = make_request(similarity=0.0, threshold=0.2, evidence_sims=())
    result = evaluate_mock(request)
    assert result.score == 0.0
    assert result.category is Category.FAIL
    assert result.confidence_flag  # evidence-starved on a non-pass stage


def test_mock_coverage_is_one_on_rag1_pass() -> None:
    # No evidence facts, but a passing reference hit scores as full coverage.
    request = make_request(similarity=0.9, threshold=0.2, stage=Stage.RAG1_PASS)
    assert evaluate_mock(request).score == pytest.approx(
        round((0.7 * 0.9 + 0.3) * 5.0 * 2) / 2
    )


def test_near_threshold_flags() -> None:
    request = make_request(similarity=0.59, threshold=0.6, evidence_sims=(0.9,))
    assert evaluate_mock(request).confidence_flag
    request = make_request(similarity=0.45, threshold=0.6, evidence_sims=(0.9,))
    assert not evaluate_mock(request).confidence_flag


def test_mock_monotone_in_similarity() -> None:
    rng = random.Random(3)
    for _ in range(50):
        sims = sorted(rng.random() for _ in range(2))
        evidence = tuple(rng.random() for _ in range(3))
        low = evaluate_mock(make_request(similarity=sims[0], threshold=1.0,
                                         evidence_sims=evidence))
        high = evaluate_mock(make_request(similarity=sims[1], threshold=1.0,
                                          evidence_sims=evidence))
        assert low.score <= high.score


def test_mock_properties_on_random_requests() -> None:
    rng = random.Random(17)
    for _ in range(200):
        request = make_request(
            similarity=rng.random(),
            threshold=1.0,
            evidence_sims=tuple(rng.random() for _ in range(rng.randint(0, 5))),
            max_marks=rng.choice([1.0, 4.0, 5.0, 10.0]),
        )
        result = evaluate_mock(request)
        assert 0.0 <= result.score <= result.max_marks
        assert result.score * 2 == int(result.score * 2)  # half-mark grid
        assert result.category is bin_category(result.score / result.max_marks)
        assert set(result.evidence_citations) <= request.cited_ids()
        assert result.stage is request.stage


def test_mock_citations_cover_reference_and_evidence() -> None:
    request = make_request(similarity=0.7, threshold=0.9, evidence_sims=(0.8, 0.2))
    result = evaluate_mock(request)
    assert result.evidence_citations == ("c1", "f0", "f1")


# -- request assembly ---------------------------------------------------------


def test_assemble_rejects_question_id_mismatch() -> None:
    with pytest.raises(InconsistentQuestionId):
        assemble_request(
            question_id="q2",
            question_text="t",
            transcript="x",
            faculty_chunks=(ref_chunk(question_id="q1"),),
            evidence_facts=(),
            rag1_verdict=verdict(0.1),
            max_marks=5.0,
            stage=Stage.CACHE_AUGMENTED,
        )


def test_assemble_requires_faculty_unless_waived() -> None:
    kwargs = dict(
        question_id="q1",
        question_text="t",
        transcript="x",
        faculty_chunks=(),
        evidence_facts=(),
        rag1_verdict=verdict(0.1),
        max_marks=5.0,
        stage=Stage.CACHE_AUGMENTED,
    )
    with pytest.raises(MissingFacultyChunks):
        assemble_request(**kwargs)
    request = assemble_request(**kwargs, allow_empty_faculty=True)
    assert request.faculty_chunks == ()


def test_stage_invariants_enforced() -> None:
    with pytest.raises(ValueError):
        make_request(similarity=0.1, threshold=0.6, stage=Stage.RAG1_PASS)
    with pytest.raises(ValueError):
        make_request(similarity=0.1, threshold=0.6, stage=Stage.RAG2_FALLBACK,
                     evidence_sims=())


def test_content_hash_tracks_inputs() -> None:
    a = make_request(transcript="first answer")
    b = make_request(transcript="first answer")
    c = make_request(transcript="second answer")
    assert a.content_hash() == b.content_hash()
    assert a.content_hash() != c.content_hash()
    assert len(a.content_hash()) == 64


# -- provider parsing ---------------------------------------------------------


def provider_json(score=3.5, citations=("c1",), **overrides) -> str:
    body = {
        "score": score,
        "rationale": {
            "correct_points": ["point"],
            "omissions": [],
            "improvements": ["more depth"],
        },
        "citations": list(citations),
    }
    body.update(overrides)
    return json.dumps(body)


def test_parse_happy_path() -> None:
    request = make_request(evidence_sims=(0.7,))
    result = parse_provider_response(request, provider_json(citations=("c1", "f0")))
    assert result.score == 3.5
    assert result.category is Category.GOOD
    assert result.evidence_citations == ("c1", "f0")
    assert not result.confidence_flag


def test_parse_clamps_out_of_range_score_and_flags() -> None:
    request = make_request(evidence_sims=(0.7,))
    result = parse_provider_response(request, provider_json(score=7))
    assert result.score == 5.0
    assert result.confidence_flag
    result = parse_provider_response(request, provider_json(score=-2))
    assert result.score == 0.0
    assert result.confidence_flag


def test_parse_rejects_non_numeric_scores() -> None:
    request = make_request()
    for bad in ('"three"', "true", "null"):
        raw = provider_json().replace("3.5", bad)
        with pytest.raises(MalformedProviderResponse):
            parse_provider_response(request, raw)


def test_parse_rejects_structural_junk() -> None:
    request = make_request()
    with pytest.raises(MalformedProviderResponse):
        parse_provider_response(request, "not json at all")
    with pytest.raises(MalformedProviderResponse):
        parse_provider_response(request, "[1, 2]")
    with pytest.raises(MalformedProviderResponse):
        parse_provider_response(request, provider_json(rationale={"correct_points": "x"}))
    with pytest.raises(MalformedProviderResponse):
        parse_provider_response(request, provider_json(citations=[1, 2]))


def test_parse_rejects_unknown_citations() -> None:
    request = make_request(evidence_sims=(0.7,))
    with pytest.raises(MalformedProviderResponse):
        parse_provider_response(request, provider_json(citations=("ghost-id",)))


def test_recorded_provider_exchange_replays() -> None:
    """Frozen request/response pair: hash, parse, and expected grade all stable."""
    fixture = json.loads((DATA / "provider_transcript.json").read_text(encoding="utf-8"))
    spec = fixture["request"]
    chunks = tuple(
        ref_chunk(
            chunk_id=c["chunk_id"],
            question_id=c["question_id"],
            text=c["text"],
            max_marks=c["max_marks"],
            marking_notes=c.get("marking_notes"),
        )
        for c in spec["faculty_chunks"]
    )
    evidence = tuple(
        (fact(fact_id=e["fact_id"], topic=e["topic"], text=e["text"], tier=Tier.COLD),
         e["similarity"])
        for e in spec["evidence_facts"]
    )
    v = spec["rag1_verdict"]
    request = assemble_request(
        question_id=spec["question_id"],
        question_text=spec["question_text"],
        transcript=spec["transcript"],
        faculty_chunks=chunks,
        evidence_facts=evidence,
        rag1_verdict=verdict(v["similarity"], v["threshold"], v["best_chunk_id"]),
        max_marks=spec["max_marks"],
        stage=Stage(spec["stage"]),
    )
    assert request.content_hash() == fixture["request_hash"]

    result = parse_provider_response(request, fixture["raw_response"])
    expected = fixture["expected"]
    assert result.score == expected["score"]
    assert result.category.value == expected["category"]
    assert result.confidence_flag == expected["confidence_flag"]
    assert list(result.evidence_citations) == expected["evidence_citations"]
    assert result.rationale.to_dict() == expected["rationale"]


def test_remote_evaluator_wraps_transport_failure_without_retry() -> None:
    calls = []

    def transport(payload: str) -> str:
        calls.append(payload)
        raise TimeoutError("deadline")

    evaluator = RemoteEvaluator(transport)
    with pytest.raises(ProviderUnavailable):
        evaluator.evaluate(make_request())
    assert len(calls) == 1  # no retry: a second answer could differ


def test_remote_evaluator_round_trip() -> None:
    def transport(payload: str) -> str:
        request = json.loads(payload)
        assert request["question_id"] == "q1"
        return provider_json(score=4.0)

    result = RemoteEvaluator(transport).evaluate(make_request())
    assert result.score == 4.0


def test_make_evaluator_defaults_to_mock(monkeypatch: pytest.MonkeyPatch) -> None:
    monkeypatch.delenv("GRADEKIT_EVAL_URL", raising=False)
    evaluate = make_evaluator()
    request = make_request(similarity=1.0, threshold=0.2, stage=Stage.RAG1_PASS)
    assert evaluate(request).score == 5.0


def test_rationale_to_dict() -> None:
    r = Rationale(("a",), (), ("c",))
    assert r.to_dict() == {
        "correct_points": ["a"],
        "omissions": [],
        "improvements": ["c"],
    }
