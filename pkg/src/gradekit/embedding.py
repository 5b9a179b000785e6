"""Deterministic text embeddings and cosine comparison.

Transcripts and reference texts are encoded into unit-norm dense vectors.
The default provider is an offline feature-hashing embedder over character
n-grams: lowercase the text, slide a window of ``ngram_size`` characters,
hash each n-gram into one of ``dimension`` buckets with a seeded keyed hash,
accumulate counts, then L2-normalize. Identical (text, config) pairs produce
bitwise-identical vectors across processes, which keeps every downstream
retrieval and audit test reproducible without network access.

A remote provider contract is also defined (request ``{text}``, response
``{vector of D floats}``) for deployments that swap in a hosted embedding
model.
"""

from __future__ import annotations

import hashlib
import os
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .errors import DimensionMismatch, EmptyText, ProviderUnavailable

LOCAL_HASH = "LOCAL_HASH"
REMOTE = "REMOTE"

_MAX_SEED = 2**64

ENV_EMBED_URL = "GRADEKIT_EMBED_URL"


@dataclass(frozen=True)
class EmbedderConfig:
    """Configuration shared by every embedding produced in one run.

    Two embedders built from equal configs are interchangeable: they map
    identical input text to identical vectors.
    """

    dimension: int = 256
    ngram_size: int = 3
    seed: int = 0
    provider: str = LOCAL_HASH

    def __post_init__(self) -> None:
        if self.dimension < 8:
            raise ValueError(f"dimension must be >= 8, got {self.dimension}")
        if self.ngram_size < 1:
            raise ValueError(f"ngram_size must be >= 1, got {self.ngram_size}")
        if not (0 <= self.seed < _MAX_SEED):
            raise ValueError("seed must fit in an unsigned 64-bit integer")
        if self.provider not in (LOCAL_HASH, REMOTE):
            raise ValueError(f"unknown provider {self.provider!r}")


@dataclass(frozen=True, eq=False)
class Embedding:
    """A unit-norm vector of fixed dimension.

    Construction validates the invariants every consumer relies on: the
    stated dimension matches the data, all components are finite, and the
    L2 norm is 1 within 1e-9.
    """

    values: np.ndarray
    dimension: int = field(default=0)

    def __post_init__(self) -> None:
        arr = np.asarray(self.values, dtype=np.float64)
        arr.setflags(write=False)
        object.__setattr__(self, "values", arr)
        dim = self.dimension or arr.shape[0]
        object.__setattr__(self, "dimension", dim)
        if arr.ndim != 1 or arr.shape[0] != dim:
            raise DimensionMismatch(
                f"expected a flat vector of length {dim}, got shape {arr.shape}"
            )
        if not np.all(np.isfinite(arr)):
            raise ValueError("embedding components must be finite")
        norm = float(np.linalg.norm(arr))
        if abs(norm - 1.0) > 1e-9:
            raise ValueError(f"embedding must be unit-norm, got ||v|| = {norm}")

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Embedding):
            return NotImplemented
        return self.dimension == other.dimension and np.array_equal(
            self.values, other.values
        )

    def __hash__(self) -> int:
        return hash((self.dimension, self.values.tobytes()))


def _char_ngrams(text: str, n: int) -> list[str]:
    # Strings shorter than n collapse to a single gram so one-character
    # inputs still embed.
    if len(text) < n:
        return [text]
    return [text[i : i + n] for i in range(len(text) - n + 1)]


def _bucket(gram: str, seed: int, dimension: int) -> int:
    digest = hashlib.blake2b(
        gram.encode("utf-8"), key=seed.to_bytes(8, "big"), digest_size=8
    ).digest()
    return int.from_bytes(digest, "big") % dimension


class LocalHashEmbedder:
    """Seeded feature-hashing n-gram embedder.

    Instances are immutable after construction and safe for concurrent use.
    """

    def __init__(self, config: EmbedderConfig | None = None):
        self.config = config or EmbedderConfig()

    def embed(self, text: str) -> Embedding:
        cfg = self.config
        trimmed = text.strip()
        if not trimmed:
            raise EmptyText("cannot embed empty or whitespace-only text")
        counts = np.zeros(cfg.dimension, dtype=np.float64)
        for gram in _char_ngrams(trimmed.lower(), cfg.ngram_size):
            counts[_bucket(gram, cfg.seed, cfg.dimension)] += 1.0
        norm = float(np.linalg.norm(counts))
        return Embedding(counts / norm, cfg.dimension)


class RemoteEmbedder:
    """Client for a hosted embedding provider.

    ``transport`` is any callable taking the input text and returning a
    sequence of ``dimension`` floats; HTTP plumbing lives in the caller (see
    :func:`http_embedding_transport`). Responses are re-normalized so the
    unit-norm invariant holds regardless of provider behavior.
    """

    def __init__(self, config: EmbedderConfig, transport: Callable[[str], Sequence[float]]):
        self.config = config
        self._transport = transport

    def embed(self, text: str) -> Embedding:
        trimmed = text.strip()
        if not trimmed:
            raise EmptyText("cannot embed empty or whitespace-only text")
        try:
            raw = self._transport(trimmed)
        except Exception as exc:  # transport failures surface as one error type
            raise ProviderUnavailable(f"embedding provider failed: {exc}") from exc
        vec = np.asarray(list(raw), dtype=np.float64)
        if vec.ndim != 1 or vec.shape[0] != self.config.dimension:
            raise ProviderUnavailable(
                f"provider returned {vec.shape} vector, expected ({self.config.dimension},)"
            )
        if not np.all(np.isfinite(vec)):
            raise ProviderUnavailable("provider returned non-finite components")
        norm = float(np.linalg.norm(vec))
        if norm == 0.0:
            raise ProviderUnavailable("provider returned a zero vector")
        return Embedding(vec / norm, self.config.dimension)


def http_embedding_transport(url: str, timeout: float = 30.0) -> Callable[[str], Sequence[float]]:
    """Build a transport that POSTs ``{"text": ...}`` and reads ``{"vector": [...]}``."""
    import httpx

    def transport(text: str) -> Sequence[float]:
        response = httpx.post(url, json={"text": text}, timeout=timeout)
        response.raise_for_status()
        return response.json()["vector"]

    return transport


def make_embedder(config: EmbedderConfig | None = None):
    """Resolve an embedder from config plus environment.

    A remote endpoint in ``GRADEKIT_EMBED_URL`` selects the remote provider;
    otherwise the local hashing embedder is used.
    """
    cfg = config or EmbedderConfig()
    url = os.environ.get(ENV_EMBED_URL)
    if cfg.provider == REMOTE or url:
        if not url:
            raise ProviderUnavailable(
                f"provider REMOTE requested but {ENV_EMBED_URL} is not set"
            )
        return RemoteEmbedder(cfg, http_embedding_transport(url))
    return LocalHashEmbedder(cfg)


def embed(text: str, config: EmbedderConfig | None = None) -> Embedding:
    """Embed ``text`` with the local hashing provider under ``config``."""
    return LocalHashEmbedder(config).embed(text)


def cosine_similarity(a: Embedding, b: Embedding) -> float:
    """Dot product of two unit vectors; no re-normalization is applied."""
    if a.dimension != b.dimension:
        raise DimensionMismatch(
            f"cannot compare embeddings of dimension {a.dimension} and {b.dimension}"
        )
    return float(np.dot(a.values, b.values))


def clamped_similarity(a: Embedding, b: Embedding) -> float:
    """Cosine similarity clamped into [0, 1].

    Retrieval thresholds and the rubric scorer treat similarity as a
    [0, 1] alignment score, so negative cosines (impossible for the local
    hash embedder, possible for remote providers) clamp to zero.
    """
    return min(1.0, max(0.0, cosine_similarity(a, b)))
