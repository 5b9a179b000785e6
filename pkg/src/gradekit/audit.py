"""Append-only, hash-chained decision log.

Every record binds its payload to the previous record's hash, so editing
any byte of history breaks verification from that point on. Truncating the
tail is the one tamper the chain itself cannot see; the head hash is
exported to a sidecar file so an external copy catches it.
"""

from __future__ import annotations

import hashlib
import threading
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

from .canonical import canonical_bytes, canonical_json

GENESIS_PREV = b"\x00" * 32

GRADING_ACTIONS = frozenset(
    {"GRADED", "OVERRIDDEN", "APPEAL_OPENED", "APPEAL_RESOLVED", "UNRESOLVED"}
)


def grading_payload(
    response_id: str,
    stage: str,
    request_hash: str,
    score: float | None,
    evidence_citations: Sequence[str],
    actor: str,
    action: str,
) -> dict:
    """The standard payload shape for grading decisions.

    actor is SYSTEM or a reviewer id; score may be None only for
    UNRESOLVED records (the provider never produced one).
    """
    if action not in GRADING_ACTIONS:
        raise ValueError(f"unknown audit action {action!r}")
    if score is None and action != "UNRESOLVED":
        raise ValueError(f"action {action} requires a score")
    return {
        "response_id": response_id,
        "stage": stage,
        "request_hash": request_hash,
        "score": score,
        "evidence_citations": list(evidence_citations),
        "actor": actor,
        "action": action,
    }


@dataclass(frozen=True)
class AuditRecord:
    sequence_no: int
    prev_hash: bytes
    payload: dict
    hash: bytes

    def to_dict(self) -> dict:
        return {
            "sequence_no": self.sequence_no,
            "prev_hash": self.prev_hash.hex(),
            "payload": self.payload,
            "hash": self.hash.hex(),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "AuditRecord":
        return cls(
            sequence_no=int(data["sequence_no"]),
            prev_hash=bytes.fromhex(data["prev_hash"]),
            payload=data["payload"],
            hash=bytes.fromhex(data["hash"]),
        )


def record_hash(prev_hash: bytes, payload: dict) -> bytes:
    return hashlib.sha256(prev_hash + canonical_bytes(payload)).digest()


class AuditLog:
    """In-memory chain with a single, serialized append point."""

    def __init__(self) -> None:
        self._records: list[AuditRecord] = []
        self._lock = threading.Lock()

    def append(self, payload: dict) -> AuditRecord:
        # Serialize before taking the lock so a bad payload can't stall writers.
        payload_bytes = canonical_bytes(payload)
        with self._lock:
            prev = self._records[-1].hash if self._records else GENESIS_PREV
            record = AuditRecord(
                sequence_no=len(self._records),
                prev_hash=prev,
                payload=payload,
                hash=hashlib.sha256(prev + payload_bytes).digest(),
            )
            self._records.append(record)
            return record

    def records(self) -> tuple[AuditRecord, ...]:
        with self._lock:
            return tuple(self._records)

    def __len__(self) -> int:
        with self._lock:
            return len(self._records)

    def head_hash(self) -> bytes:
        with self._lock:
            return self._records[-1].hash if self._records else GENESIS_PREV

    def verify(self) -> int | None:
        return verify_chain(self.records())


def verify_chain(records: Iterable[AuditRecord]) -> int | None:
    """Walk the chain; return the first bad sequence number, or None if OK."""
    prev = GENESIS_PREV
    for i, record in enumerate(records):
        if record.sequence_no != i:
            return i
        if record.prev_hash != prev:
            return i
        if record.hash != record_hash(prev, record.payload):
            return i
        prev = record.hash
    return None


def write_log(path: str | Path, records: Iterable[AuditRecord]) -> None:
    """Newline-delimited canonical JSON, one record per line."""
    path = Path(path)
    with path.open("w", encoding="utf-8") as fh:
        for record in records:
            fh.write(canonical_json(record.to_dict()))
            fh.write("\n")


def read_log(path: str | Path) -> list[AuditRecord]:
    import json

    records = []
    with Path(path).open("r", encoding="utf-8") as fh:
        for line in fh:
            line = line.strip()
            if line:
                records.append(AuditRecord.from_dict(json.loads(line)))
    return records


def write_head(path: str | Path, head: bytes) -> None:
    Path(path).write_text(head.hex() + "\n", encoding="utf-8")


def read_head(path: str | Path) -> bytes:
    return bytes.fromhex(Path(path).read_text(encoding="utf-8").strip())
