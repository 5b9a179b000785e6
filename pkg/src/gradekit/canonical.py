"""Canonical JSON serialization used for hashing.

Audit chaining and request hashing need one byte representation per logical
value: UTF-8 JSON with sorted keys and no insignificant whitespace. NaN and
infinity are rejected rather than serialized, since they would round-trip
inconsistently.
"""

from __future__ import annotations

import hashlib
import json

from .errors import SerializationFailure


def canonical_json(obj) -> str:
    try:
        return json.dumps(
            obj,
            sort_keys=True,
            separators=(",", ":"),
            ensure_ascii=False,
            allow_nan=False,
        )
    except (TypeError, ValueError) as exc:
        raise SerializationFailure(f"payload is not canonically serializable: {exc}") from exc


def canonical_bytes(obj) -> bytes:
    return canonical_json(obj).encode("utf-8")


def sha256_hex(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()
