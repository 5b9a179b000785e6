"""Deterministic synthetic corpus generator.

Each question owns a topic with a pool of facts; the faculty answer is a
template over a sample of those facts, and every response is the answer
corrupted token-by-token at a level c, with ground truth max_marks * (1 - c).
Corruption both shortens and damages the text, so the oracle behaves like a
strict grader: the more damage, the lower the score.

Two optional knobs shape the ablation workload and default to off:

* ``offscript_rate``: fraction of responses answering from other course
  material, built over a neighboring topic's facts instead of the faculty
  answer. Their content is real and retrievable from the deep store, but
  reference similarity alone cannot see it; only fact retrieval recovers
  how intact such an answer is.
* ``topic_drift``: later questions draw a growing share of their vocabulary
  from a shared pool, so question texts lose their discriminative power as
  the corpus grows.
"""

from __future__ import annotations

import random
import string
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

from .corpus import write_ndjson

MAX_MARKS = 5.0

WORDS_PER_FACT = 8
CORE_WORDS_PER_TOPIC = 3
CORE_WORD_RATE = 0.12
SOURCE_FACTS_PER_ANSWER = 3
QUESTION_LEAD_FACTS = 1
LEAD_WORDS_PER_FACT = 2
SHARED_VOCAB_SIZE = 40

DEFAULT_CORRUPTION_LEVELS = (0.0, 0.15, 0.3, 0.45, 0.6, 0.75, 0.9)

DEFAULT_OFFSCRIPT_RATE = 0.15
DEFAULT_TOPIC_DRIFT = 0.5


@dataclass(frozen=True)
class SyntheticSpec:
    n_questions: int = 25
    n_facts_per_topic: int = 12
    n_responses_per_question: int = 20
    corruption_levels: tuple[float, ...] = DEFAULT_CORRUPTION_LEVELS
    seed: int = 0

    def __post_init__(self) -> None:
        for name in ("n_questions", "n_facts_per_topic", "n_responses_per_question"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if not self.corruption_levels:
            raise ValueError("corruption_levels must be non-empty")
        for c in self.corruption_levels:
            if not 0.0 <= c <= 1.0:
                raise ValueError(f"corruption level {c} outside [0, 1]")
        if not 0 <= self.seed < 2**64:
            raise ValueError("seed must fit in 64 unsigned bits")
        object.__setattr__(
            self, "corruption_levels", tuple(float(c) for c in self.corruption_levels)
        )

    @classmethod
    def from_dict(cls, data: Mapping) -> "SyntheticSpec":
        return cls(
            n_questions=int(data.get("n_questions", cls.n_questions)),
            n_facts_per_topic=int(data.get("n_facts_per_topic", cls.n_facts_per_topic)),
            n_responses_per_question=int(
                data.get("n_responses_per_question", cls.n_responses_per_question)
            ),
            corruption_levels=tuple(data.get("corruption_levels", DEFAULT_CORRUPTION_LEVELS)),
            seed=int(data.get("seed", 0)),
        )


@dataclass
class SyntheticBatch:
    """Everything one generator run produces, in corpus-file row form."""

    references: list[dict]
    facts: list[dict]
    questions: list[dict]
    responses: list[dict]
    oracle_scores: dict[str, float]

    def oracle_rows(self) -> list[dict]:
        return [
            {"response_id": rid, "score": score}
            for rid, score in self.oracle_scores.items()
        ]

    def write(self, out_dir: str | Path) -> None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        write_ndjson(out / "references.ndjson", self.references)
        write_ndjson(out / "facts.ndjson", self.facts)
        write_ndjson(out / "questions.ndjson", self.questions)
        write_ndjson(out / "responses.ndjson", self.responses)
        write_ndjson(out / "oracle_scores.ndjson", self.oracle_rows())


def _word(rng: random.Random, lo: int, hi: int) -> str:
    return "".join(rng.choice(string.ascii_lowercase) for _ in range(rng.randint(lo, hi)))


def _corrupt(rng: random.Random, text: str, level: float) -> str:
    """Delete or garble each token independently with probability ``level``."""
    kept: list[str] = []
    for token in text.split():
        if rng.random() < level:
            if rng.random() < 0.5:
                continue
            kept.append(_word(rng, 5, 8))
        else:
            kept.append(token)
    if not kept:
        kept.append(_word(rng, 5, 8))
    return " ".join(kept)


def generate_synthetic(
    spec: SyntheticSpec,
    offscript_rate: float = 0.0,
    topic_drift: float = 0.0,
) -> SyntheticBatch:
    """Build corpora, responses, and oracle scores for one seed.

    Responses come out question-major (all of q-000, then q-001, ...) so a
    growing prefix of the batch covers a growing share of the question set.
    """
    if not 0.0 <= offscript_rate <= 1.0:
        raise ValueError("offscript_rate must lie in [0, 1]")
    if not 0.0 <= topic_drift <= 1.0:
        raise ValueError("topic_drift must lie in [0, 1]")

    rng = random.Random(spec.seed)
    shared_vocab = [_word(rng, 6, 9) for _ in range(SHARED_VOCAB_SIZE)]

    facts: list[dict] = []
    fact_pools: list[list[str]] = []
    topic_cores: list[list[str]] = []
    for qi in range(spec.n_questions):
        topic = f"topic-{qi:03d}"
        drift = topic_drift * (qi / max(1, spec.n_questions - 1))
        core = [_word(rng, 4, 4) for _ in range(CORE_WORDS_PER_TOPIC)]
        topic_cores.append(core)
        pool: list[str] = []
        for fi in range(spec.n_facts_per_topic):
            words = []
            for _ in range(WORDS_PER_FACT):
                roll = rng.random()
                if roll < drift:
                    words.append(rng.choice(shared_vocab))
                elif roll < drift + CORE_WORD_RATE * (1.0 - drift):
                    words.append(rng.choice(core))
                else:
                    words.append(_word(rng, 6, 9))
            text = " ".join(words)
            pool.append(text)
            facts.append({"fact_id": f"{topic}-f{fi:02d}", "topic": topic, "text": text})
        fact_pools.append(pool)

    references: list[dict] = []
    questions: list[dict] = []
    responses: list[dict] = []
    oracle: dict[str, float] = {}

    serial = 0
    for qi in range(spec.n_questions):
        question_id = f"q-{qi:03d}"
        pool = fact_pools[qi]
        n_source = min(SOURCE_FACTS_PER_ANSWER, spec.n_facts_per_topic)
        source_idx = sorted(rng.sample(range(spec.n_facts_per_topic), n_source))
        answer = " ".join(pool[i] for i in source_idx)
        references.append(
            {
                "chunk_id": f"{question_id}-ref",
                "question_id": question_id,
                "text": answer,
                "max_marks": MAX_MARKS,
            }
        )

        # Exam questions name the topic and hint at a couple of points; they
        # share only a handful of exact tokens with a full answer.
        leads = " ".join(
            " ".join(pool[i].split()[:LEAD_WORDS_PER_FACT])
            for i in source_idx[:QUESTION_LEAD_FACTS]
        )
        question_text = (
            "discuss " + " ".join(topic_cores[qi]) + " covering " + leads
        )
        questions.append({"question_id": question_id, "question_text": question_text})

        # Off-script answers draw on the next topic's facts: true course
        # material the reference answer never mentions.
        neighbor = fact_pools[(qi + 1) % spec.n_questions]
        off_idx = sorted(rng.sample(range(len(neighbor)), min(n_source, len(neighbor))))
        offscript = " ".join(neighbor[i] for i in off_idx)

        for ri in range(spec.n_responses_per_question):
            level = spec.corruption_levels[ri % len(spec.corruption_levels)]
            base = offscript if rng.random() < offscript_rate else answer
            transcript = _corrupt(rng, base, level)
            response_id = f"r-{qi:03d}-{ri:03d}"
            responses.append(
                {
                    "response_id": response_id,
                    "pseudonym": f"anon-{serial:05d}",
                    "question_id": question_id,
                    "transcript": transcript,
                    "transcript_confidence": 1.0,
                }
            )
            oracle[response_id] = MAX_MARKS * (1.0 - level)
            serial += 1

    return SyntheticBatch(
        references=references,
        facts=facts,
        questions=questions,
        responses=responses,
        oracle_scores=oracle,
    )
