"""Flat-file corpora: newline-delimited JSON readers and writers.

Every writer emits one canonically serialized object per line, so a file
written here, parsed, and re-written is byte-identical (modulo a trailing
newline). Readers validate shape strictly; a malformed line is an error
with the line number, never a silently skipped record.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Callable, Iterable, Sequence

from .cache import FactChunk, Tier
from .canonical import canonical_json
from .embedding import Embedding
from .errors import CorpusFormatError
from .retrieval import ReferenceChunk


def _require(row: dict, line_no: int, field: str, kind: type, path: Path) -> object:
    if field not in row:
        raise CorpusFormatError(f"{path}:{line_no}: missing field {field!r}")
    value = row[field]
    if kind is float:
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise CorpusFormatError(f"{path}:{line_no}: field {field!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise CorpusFormatError(
            f"{path}:{line_no}: field {field!r} must be {kind.__name__}"
        )
    return value


def _read_ndjson(path: str | Path, validate: Callable[[dict, int, Path], dict]) -> list[dict]:
    path = Path(path)
    rows: list[dict] = []
    with path.open("r", encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                raw = json.loads(line)
            except json.JSONDecodeError as exc:
                raise CorpusFormatError(f"{path}:{line_no}: invalid JSON: {exc}") from exc
            if not isinstance(raw, dict):
                raise CorpusFormatError(f"{path}:{line_no}: each line must be an object")
            rows.append(validate(raw, line_no, path))
    return rows


def write_ndjson(path: str | Path, rows: Iterable[dict]) -> None:
    with Path(path).open("w", encoding="utf-8") as fh:
        for row in rows:
            fh.write(canonical_json(row))
            fh.write("\n")


def _check_extras(row: dict, allowed: set[str], line_no: int, path: Path) -> None:
    extras = set(row) - allowed
    if extras:
        raise CorpusFormatError(
            f"{path}:{line_no}: unexpected fields {sorted(extras)}"
        )


def _reference_row(row: dict, line_no: int, path: Path) -> dict:
    _check_extras(row, {"chunk_id", "question_id", "text", "max_marks", "marking_notes"}, line_no, path)
    out = {
        "chunk_id": _require(row, line_no, "chunk_id", str, path),
        "question_id": _require(row, line_no, "question_id", str, path),
        "text": _require(row, line_no, "text", str, path),
        "max_marks": _require(row, line_no, "max_marks", float, path),
    }
    if out["max_marks"] < 0:
        raise CorpusFormatError(f"{path}:{line_no}: max_marks must be >= 0")
    if "marking_notes" in row:
        out["marking_notes"] = _require(row, line_no, "marking_notes", str, path)
    return out


def _fact_row(row: dict, line_no: int, path: Path) -> dict:
    _check_extras(row, {"fact_id", "topic", "text"}, line_no, path)
    return {
        "fact_id": _require(row, line_no, "fact_id", str, path),
        "topic": _require(row, line_no, "topic", str, path),
        "text": _require(row, line_no, "text", str, path),
    }


def _question_row(row: dict, line_no: int, path: Path) -> dict:
    _check_extras(row, {"question_id", "question_text"}, line_no, path)
    return {
        "question_id": _require(row, line_no, "question_id", str, path),
        "question_text": _require(row, line_no, "question_text", str, path),
    }


def _response_row(row: dict, line_no: int, path: Path) -> dict:
    _check_extras(
        row,
        {"response_id", "pseudonym", "question_id", "transcript", "transcript_confidence"},
        line_no,
        path,
    )
    out = {
        "response_id": _require(row, line_no, "response_id", str, path),
        "pseudonym": _require(row, line_no, "pseudonym", str, path),
        "question_id": _require(row, line_no, "question_id", str, path),
        "transcript": _require(row, line_no, "transcript", str, path),
        "transcript_confidence": _require(row, line_no, "transcript_confidence", float, path),
    }
    if not 0.0 <= out["transcript_confidence"] <= 1.0:
        raise CorpusFormatError(f"{path}:{line_no}: transcript_confidence outside [0, 1]")
    return out


def _score_row(row: dict, line_no: int, path: Path) -> dict:
    _check_extras(row, {"response_id", "score"}, line_no, path)
    return {
        "response_id": _require(row, line_no, "response_id", str, path),
        "score": _require(row, line_no, "score", float, path),
    }


def read_references(path: str | Path) -> list[dict]:
    return _read_ndjson(path, _reference_row)


def read_facts(path: str | Path) -> list[dict]:
    return _read_ndjson(path, _fact_row)


def read_questions(path: str | Path) -> list[dict]:
    return _read_ndjson(path, _question_row)


def read_responses(path: str | Path) -> list[dict]:
    return _read_ndjson(path, _response_row)


def read_scores(path: str | Path) -> list[dict]:
    return _read_ndjson(path, _score_row)


def read_grades(path: str | Path) -> list[dict]:
    """Grade rows are GradeResult dicts plus response_id; shape-checked only."""

    def validate(row: dict, line_no: int, p: Path) -> dict:
        for field in ("response_id", "score", "max_marks", "category", "stage"):
            if field not in row:
                raise CorpusFormatError(f"{p}:{line_no}: missing field {field!r}")
        return row

    return _read_ndjson(path, validate)


def build_reference_chunks(rows: Sequence[dict], embed: Callable[[str], Embedding]) -> list[ReferenceChunk]:
    return [
        ReferenceChunk(
            chunk_id=row["chunk_id"],
            question_id=row["question_id"],
            text=row["text"],
            embedding=embed(row["text"]),
            max_marks=row["max_marks"],
            marking_notes=row.get("marking_notes"),
        )
        for row in rows
    ]


def build_fact_chunks(rows: Sequence[dict], embed: Callable[[str], Embedding]) -> list[FactChunk]:
    return [
        FactChunk(
            fact_id=row["fact_id"],
            topic=row["topic"],
            text=row["text"],
            embedding=embed(row["text"]),
            access_count=0,
            tier=Tier.DEEP_STORE,
            inserted_at=0,
        )
        for row in rows
    ]
