"""Retrieval-gated grading engine with auditable, reviewable decisions.

The grading ladder: embed the transcript, compare against the faculty
answer (pass ends here), consult the question's HOT/COLD fact cache, and
only then fall back to a deep-store scan. A pluggable evaluator turns the
gathered context into a score with a structured rationale; every decision
is chained into a tamper-evident audit log. Around that core: anonymized
reviewer allocation, agreement metrics against human grades, a synthetic
corpus generator, and an HTTP review service.
"""

from .allocation import AllocationPlan, PseudonymMap, allocate, anonymize, spread_bound
from .audit import AuditLog, AuditRecord, grading_payload, verify_chain
from .cache import CacheConfig, FactChunk, Tier, TieredCache, init_for_question
from .canonical import canonical_bytes, canonical_json, sha256_hex
from .embedding import (
    EmbedderConfig,
    Embedding,
    LocalHashEmbedder,
    clamped_similarity,
    cosine_similarity,
    embed,
    make_embedder,
)
from .errors import GradekitError
from .evaluation import (
    Category,
    EvaluationRequest,
    GradeResult,
    Rationale,
    RubricWeights,
    Stage,
    assemble_request,
    bin_category,
    evaluate_mock,
    parse_provider_response,
)
from .metrics import (
    AgreementReport,
    ScorePair,
    agreement_report,
    cohen_kappa,
    confusion_matrix,
    kappa_from_confusion,
    pearson,
    score_pair,
    spearman,
)
from .pipeline import (
    Grader,
    Mode,
    PipelineConfig,
    StudentResponse,
    ablation_suite,
    run_ablation,
)
from .retrieval import Rag1Index, ReferenceChunk, SimilarityVerdict, check_rag1, index_references
from .synthetic import SyntheticBatch, SyntheticSpec, generate_synthetic
from .transcription import TranscriptionResult, passthrough_transcribe

__version__ = "0.1.0"

__all__ = [
    "AgreementReport",
    "AllocationPlan",
    "AuditLog",
    "AuditRecord",
    "CacheConfig",
    "Category",
    "EmbedderConfig",
    "Embedding",
    "EvaluationRequest",
    "FactChunk",
    "GradeResult",
    "Grader",
    "GradekitError",
    "LocalHashEmbedder",
    "Mode",
    "PipelineConfig",
    "PseudonymMap",
    "Rag1Index",
    "Rationale",
    "ReferenceChunk",
    "RubricWeights",
    "ScorePair",
    "SimilarityVerdict",
    "Stage",
    "StudentResponse",
    "SyntheticBatch",
    "SyntheticSpec",
    "Tier",
    "TieredCache",
    "TranscriptionResult",
    "ablation_suite",
    "agreement_report",
    "allocate",
    "anonymize",
    "assemble_request",
    "bin_category",
    "canonical_bytes",
    "canonical_json",
    "check_rag1",
    "clamped_similarity",
    "cohen_kappa",
    "confusion_matrix",
    "cosine_similarity",
    "embed",
    "evaluate_mock",
    "generate_synthetic",
    "grading_payload",
    "index_references",
    "init_for_question",
    "kappa_from_confusion",
    "make_embedder",
    "parse_provider_response",
    "passthrough_transcribe",
    "pearson",
    "run_ablation",
    "score_pair",
    "sha256_hex",
    "spearman",
    "spread_bound",
    "verify_chain",
]
