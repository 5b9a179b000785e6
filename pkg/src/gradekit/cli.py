"""Command-line surface: ingest, gen, grade, ablate, metrics, serve.

Every subcommand reads and writes the flat-file formats defined by the
corpus module, so a full batch run is scriptable end to end:

    gradekit gen --spec spec.json --out data/
    gradekit grade --responses data/responses.ndjson ... --out grades.ndjson
    gradekit metrics --grades grades.ndjson --human data/oracle_scores.ndjson --out report.json
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import corpus
from .audit import write_head, write_log
from .canonical import canonical_json
from .embedding import EmbedderConfig, make_embedder
from .errors import GradekitError
from .metrics import agreement_report, confusion_csv, score_pair
from .pipeline import (
    Grader,
    MemoEmbedder,
    Mode,
    PipelineConfig,
    StudentResponse,
    ablation_suite,
    grader_from_rows,
    write_ablation_csv,
    write_grades,
)
from .synthetic import (
    DEFAULT_OFFSCRIPT_RATE,
    DEFAULT_TOPIC_DRIFT,
    SyntheticSpec,
    generate_synthetic,
)


_SPEC_FILE_KEYS = frozenset(
    {
        "n_questions",
        "n_facts_per_topic",
        "n_responses_per_question",
        "corruption_levels",
        "seed",
        "offscript_rate",
        "topic_drift",
    }
)


def _read_spec_file(path: str) -> tuple[SyntheticSpec, float, float]:
    data = json.loads(Path(path).read_text(encoding="utf-8"))
    # A misspelled key would otherwise fall back to a default silently,
    # generating a different corpus than the one asked for.
    unknown = sorted(set(data) - _SPEC_FILE_KEYS)
    if unknown:
        raise GradekitError(f"{path}: unknown spec keys {unknown}")
    spec = SyntheticSpec.from_dict(data)
    offscript = float(data.get("offscript_rate", DEFAULT_OFFSCRIPT_RATE))
    drift = float(data.get("topic_drift", DEFAULT_TOPIC_DRIFT))
    return spec, offscript, drift


def _cmd_ingest(args: argparse.Namespace) -> int:
    references = corpus.read_references(args.references)
    facts = corpus.read_facts(args.facts)
    summary = {
        "reference_chunks": len(references),
        "questions": len({r["question_id"] for r in references}),
        "facts": len(facts),
        "topics": len({f["topic"] for f in facts}),
    }
    if args.questions:
        summary["question_texts"] = len(corpus.read_questions(args.questions))
    print(canonical_json(summary))
    return 0


def _cmd_gen(args: argparse.Namespace) -> int:
    spec, offscript, drift = _read_spec_file(args.spec)
    batch = generate_synthetic(spec, offscript_rate=offscript, topic_drift=drift)
    batch.write(args.out)
    print(
        canonical_json(
            {
                "out": str(args.out),
                "questions": len(batch.questions),
                "facts": len(batch.facts),
                "responses": len(batch.responses),
            }
        )
    )
    return 0


def _build_grader(args: argparse.Namespace, mode: Mode) -> Grader:
    embedder = MemoEmbedder(
        make_embedder(EmbedderConfig(dimension=args.dimension, seed=args.seed))
    )
    return grader_from_rows(
        corpus.read_references(args.references),
        corpus.read_facts(args.facts),
        corpus.read_questions(args.questions),
        embedder=embedder,
        config=PipelineConfig(
            threshold=args.threshold, min_evidence=args.min_evidence, mode=mode
        ),
    )


def _cmd_grade(args: argparse.Namespace) -> int:
    grader = _build_grader(args, Mode(args.mode))
    responses = [
        StudentResponse.from_dict(row) for row in corpus.read_responses(args.responses)
    ]
    graded = grader.grade_batch(responses)
    write_grades(args.out, graded)
    audit_path = Path(str(args.out) + ".audit.ndjson")
    write_log(audit_path, grader.audit_log.records())
    write_head(Path(str(args.out) + ".audit.head"), grader.audit_log.head_hash())
    print(canonical_json({"graded": len(graded), "out": str(args.out)}))
    return 0


def _cmd_ablate(args: argparse.Namespace) -> int:
    spec, offscript, drift = _read_spec_file(args.spec)
    rows = ablation_suite(
        spec,
        seeds=args.seeds,
        offscript_rate=offscript,
        topic_drift=drift,
        threshold=args.threshold,
        min_evidence=args.min_evidence,
    )
    write_ablation_csv(args.out, rows)
    print(canonical_json({"rows": len(rows), "seeds": args.seeds, "out": str(args.out)}))
    return 0


def _cmd_metrics(args: argparse.Namespace) -> int:
    grades = {row["response_id"]: row for row in corpus.read_grades(args.grades)}
    human = corpus.read_scores(args.human)
    pairs = []
    for row in human:
        rid = row["response_id"]
        if rid not in grades:
            raise GradekitError(f"human score for unknown response {rid!r}")
        grade = grades[rid]
        pairs.append(score_pair(rid, float(grade["score"]), row["score"], float(grade["max_marks"])))
    report = agreement_report(pairs)
    Path(args.out).write_text(canonical_json(report.to_dict()) + "\n", encoding="utf-8")
    if args.confusion_csv:
        Path(args.confusion_csv).write_text(confusion_csv(report.confusion), encoding="utf-8")
    print(canonical_json({"n": report.n, "out": str(args.out)}))
    return 0


def _cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    grader = _build_grader(args, Mode(args.mode))
    serve(grader, host=args.host, port=args.port)
    return 0


def _add_corpus_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--references", required=True, help="reference corpus (NDJSON)")
    parser.add_argument("--facts", required=True, help="deep-store fact corpus (NDJSON)")
    parser.add_argument("--questions", required=True, help="question texts (NDJSON)")


def _add_pipeline_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--mode", default=Mode.LLM_RAG1_RAG2.value,
                        choices=[m.value for m in Mode])
    parser.add_argument("--threshold", type=float, default=0.20)
    parser.add_argument("--min-evidence", type=int, default=1, dest="min_evidence")
    parser.add_argument("--seed", type=int, default=0, help="embedder hash seed")
    parser.add_argument("--dimension", type=int, default=256, help="embedding dimension")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="gradekit")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("ingest", help="validate corpus files and print counts")
    p.add_argument("--references", required=True)
    p.add_argument("--facts", required=True)
    p.add_argument("--questions", default=None)
    p.set_defaults(func=_cmd_ingest)

    p = sub.add_parser("gen", help="generate a synthetic corpus")
    p.add_argument("--spec", required=True, help="JSON generator spec")
    p.add_argument("--out", required=True, help="output directory")
    p.set_defaults(func=_cmd_gen)

    p = sub.add_parser("grade", help="grade a batch of responses")
    p.add_argument("--responses", required=True)
    _add_corpus_args(p)
    _add_pipeline_args(p)
    p.add_argument("--out", required=True, help="grades file (NDJSON)")
    p.set_defaults(func=_cmd_grade)

    p = sub.add_parser("ablate", help="run the retrieval-mode comparison")
    p.add_argument("--spec", required=True)
    p.add_argument("--seeds", type=int, default=10)
    p.add_argument("--threshold", type=float, default=0.20)
    p.add_argument("--min-evidence", type=int, default=1, dest="min_evidence")
    p.add_argument("--out", required=True, help="CSV output (mode,n,pearson)")
    p.set_defaults(func=_cmd_ablate)

    p = sub.add_parser("metrics", help="agreement report between grades and human scores")
    p.add_argument("--grades", required=True)
    p.add_argument("--human", required=True)
    p.add_argument("--out", required=True, help="JSON report path")
    p.add_argument("--confusion-csv", default=None, dest="confusion_csv")
    p.set_defaults(func=_cmd_metrics)

    p = sub.add_parser("serve", help="run the HTTP service")
    _add_corpus_args(p)
    _add_pipeline_args(p)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=_cmd_serve)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GradekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
