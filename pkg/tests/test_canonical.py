from __future__ import annotations

import hashlib
import json
import math

import pytest

from gradekit.canonical import canonical_bytes, canonical_json, sha256_hex
from gradekit.errors import SerializationFailure


def test_sorted_keys_and_compact_separators() -> None:
    assert canonical_json({"b": 1, "a": [1, 2]}) == '{"a":[1,2],"b":1}'


def test_key_order_does_not_change_bytes() -> None:
    left = canonical_bytes({"x": 1, "y": {"b": 2, "a": 3}})
    right = canonical_bytes({"y": {"a": 3, "b": 2}, "x": 1})
    assert left == right


def test_unicode_is_not_escaped() -> None:
    # ensure_ascii=False: non-ASCII text stays readable and deterministic.
    assert canonical_json({"t": "mughal café"}) == '{"t":"mughal café"}'
    assert canonical_bytes({"t": "é"}) == b'{"t":"\xc3\xa9"}'


def test_nan_and_infinity_rejected() -> None:
    with pytest.raises(SerializationFailure):
        canonical_json({"x": math.nan})
    with pytest.raises(SerializationFailure):
        canonical_json({"x": math.inf})


def test_unserializable_object_rejected() -> None:
    with pytest.raises(SerializationFailure):
        canonical_json({"x": object()})


def test_round_trip_preserves_value() -> None:
    payload = {"score": 2.5, "ids": ["a", "b"], "nested": {"k": None, "ok": True}}
    assert json.loads(canonical_json(payload)) == payload


def test_sha256_hex_matches_hashlib() -> None:
    data = canonical_bytes({"a": 1})
    assert sha256_hex(data) == hashlib.sha256(data).hexdigest()
