"""Two-tier fact cache over topic-chunked supporting materials.

Each question owns a cache seeded from the deep store: the COLD tier starts
with the top-k facts most similar to the question, the HOT tier starts empty.
Facts retrieved often enough are promoted into HOT; hard capacities with
least-frequently-used eviction (ties broken oldest-first) keep both tiers
bounded. When neither tier yields usable evidence, a fallback pass scans the
full deep store and feeds new facts back into COLD, so a question's cache
grows more useful as responses to it accumulate.

All bookkeeping runs on a logical clock, never wall time, so any operation
sequence can be replayed bit-for-bit for audit verification.
"""

from __future__ import annotations

import enum
import json
import threading
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

from .embedding import Embedding, clamped_similarity
from .errors import EmptyDeepStore, SeedLargerThanStore


class Tier(enum.Enum):
    HOT = "HOT"
    COLD = "COLD"
    DEEP_STORE = "DEEP_STORE"


@dataclass
class FactChunk:
    """A retrievable topic fact with access statistics.

    ``access_count`` only increases. ``inserted_at`` is the logical clock
    value at which the fact entered its current tier; it refreshes on every
    tier transition so eviction tie-breaking ("oldest first") is always
    relative to the current tier.
    """

    fact_id: str
    topic: str
    text: str
    embedding: Embedding
    access_count: int = 0
    tier: Tier = Tier.DEEP_STORE
    inserted_at: int = 0


@dataclass(frozen=True)
class CacheConfig:
    k_cold_seed: int = 5
    promote_threshold: int = 3
    hot_capacity: int = 32
    cold_capacity: int = 256
    retrieval_top_m: int = 3

    def __post_init__(self) -> None:
        for name in ("k_cold_seed", "promote_threshold", "hot_capacity",
                     "cold_capacity", "retrieval_top_m"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be a positive integer")
        if self.hot_capacity > self.cold_capacity:
            raise ValueError("hot_capacity must not exceed cold_capacity")

    def to_dict(self) -> dict:
        return {
            "k_cold_seed": self.k_cold_seed,
            "promote_threshold": self.promote_threshold,
            "hot_capacity": self.hot_capacity,
            "cold_capacity": self.cold_capacity,
            "retrieval_top_m": self.retrieval_top_m,
        }

    @classmethod
    def from_dict(cls, data: Mapping) -> "CacheConfig":
        return cls(**{k: int(v) for k, v in data.items()})


@dataclass(frozen=True)
class TierTransition:
    """One tier change; ``None`` marks the outside of the cache."""

    fact_id: str
    from_tier: Tier | None
    to_tier: Tier | None
    access_count: int
    clock: int


def _normalize_store(deep_store) -> dict[str, FactChunk]:
    if isinstance(deep_store, Mapping):
        items: Iterable[FactChunk] = deep_store.values()
    else:
        items = deep_store
    return {fact.fact_id: fact for fact in items}


class TieredCache:
    """Per-question HOT/COLD cache over a shared deep store.

    Single-writer: all mutations for one cache are serialized through an
    internal lock. Distinct questions' caches may be driven concurrently.
    """

    def __init__(self, deep_store, config: CacheConfig):
        self.deep_store = _normalize_store(deep_store)
        if not self.deep_store:
            raise EmptyDeepStore("deep store holds no facts")
        self.config = config
        self.hot: dict[str, FactChunk] = {}
        self.cold: dict[str, FactChunk] = {}
        self.clock = 0
        self.transitions: list[TierTransition] = []
        self.facts_scanned = 0  # instrumentation for lookup-cost benchmarks
        self._lock = threading.Lock()

    # -- internal helpers -------------------------------------------------

    def _tick(self) -> int:
        now = self.clock
        self.clock += 1
        return now

    def _record(self, fact: FactChunk, from_tier: Tier | None, to_tier: Tier | None) -> TierTransition:
        t = TierTransition(fact.fact_id, from_tier, to_tier, fact.access_count, self.clock)
        self.transitions.append(t)
        return t

    def _insert_cold(self, source: FactChunk, access_count: int = 0) -> FactChunk:
        entry = replace(
            source,
            access_count=access_count,
            tier=Tier.COLD,
            inserted_at=self._tick(),
        )
        self.cold[entry.fact_id] = entry
        self._record(entry, None, Tier.COLD)
        return entry

    @staticmethod
    def _eviction_key(fact: FactChunk) -> tuple[int, int, str]:
        # Lowest access count goes first; ties fall to the oldest entry.
        return (fact.access_count, fact.inserted_at, fact.fact_id)

    def _promote_and_evict_locked(self) -> list[TierTransition]:
        out: list[TierTransition] = []
        ready = sorted(
            (f for f in self.cold.values() if f.access_count >= self.config.promote_threshold),
            key=lambda f: f.fact_id,
        )
        for fact in ready:
            del self.cold[fact.fact_id]
            fact.tier = Tier.HOT
            fact.inserted_at = self._tick()
            self.hot[fact.fact_id] = fact
            out.append(self._record(fact, Tier.COLD, Tier.HOT))
        while len(self.hot) > self.config.hot_capacity:
            victim = min(self.hot.values(), key=self._eviction_key)
            del self.hot[victim.fact_id]
            victim.tier = Tier.COLD
            victim.inserted_at = self._tick()
            self.cold[victim.fact_id] = victim
            out.append(self._record(victim, Tier.HOT, Tier.COLD))
        while len(self.cold) > self.config.cold_capacity:
            victim = min(self.cold.values(), key=self._eviction_key)
            del self.cold[victim.fact_id]
            out.append(self._record(victim, Tier.COLD, None))
        return out

    # -- operations --------------------------------------------------------

    def lookup(self, response_embedding: Embedding) -> list[tuple[FactChunk, float]]:
        """Search HOT then COLD for up to ``retrieval_top_m`` facts.

        Results are ordered by similarity descending with HOT entries
        winning ties against COLD; every returned fact's access count is
        incremented and the promotion check runs afterwards.
        """
        with self._lock:
            scored: list[tuple[float, int, str, FactChunk]] = []
            for rank, tier_map in ((0, self.hot), (1, self.cold)):
                for fact in tier_map.values():
                    sim = clamped_similarity(fact.embedding, response_embedding)
                    scored.append((sim, rank, fact.fact_id, fact))
            self.facts_scanned += len(scored)
            scored.sort(key=lambda item: (-item[0], item[1], item[2]))
            selected = scored[: self.config.retrieval_top_m]
            for _, _, _, fact in selected:
                fact.access_count += 1
            self._promote_and_evict_locked()
            return [(fact, sim) for sim, _, _, fact in selected]

    def promote_and_evict(self) -> list[TierTransition]:
        """Apply the promotion/eviction policy once; exposed for testing."""
        with self._lock:
            return self._promote_and_evict_locked()

    def fallback_retrieve(self, response_embedding: Embedding) -> list[tuple[FactChunk, float]]:
        """Brute-force search over the full deep store.

        The top ``retrieval_top_m`` facts are returned; any that are not
        already cached are inserted into COLD (subject to capacity), and all
        returned facts' access counts increment.
        """
        with self._lock:
            if not self.deep_store:
                raise EmptyDeepStore("deep store holds no facts")
            scored = []
            for fact_id in sorted(self.deep_store):
                fact = self.deep_store[fact_id]
                sim = clamped_similarity(fact.embedding, response_embedding)
                scored.append((sim, fact_id))
            self.facts_scanned += len(scored)
            scored.sort(key=lambda item: (-item[0], item[1]))
            results: list[tuple[FactChunk, float]] = []
            for sim, fact_id in scored[: self.config.retrieval_top_m]:
                if fact_id in self.hot:
                    entry = self.hot[fact_id]
                    entry.access_count += 1
                elif fact_id in self.cold:
                    entry = self.cold[fact_id]
                    entry.access_count += 1
                else:
                    entry = self._insert_cold(self.deep_store[fact_id], access_count=1)
                    while len(self.cold) > self.config.cold_capacity:
                        victim = min(self.cold.values(), key=self._eviction_key)
                        del self.cold[victim.fact_id]
                        self._record(victim, Tier.COLD, None)
                results.append((entry, sim))
            self._promote_and_evict_locked()
            return results

    # -- snapshots ----------------------------------------------------------

    def snapshot(self) -> dict:
        """Serializable cache state: tier membership, counts, and clock.

        The ``hot`` and ``cold`` lists are ordered by ``inserted_at`` so a
        restore reproduces eviction tie-breaking exactly.
        """
        with self._lock:
            by_age = lambda tier_map: [
                f.fact_id for f in sorted(tier_map.values(), key=lambda f: f.inserted_at)
            ]
            counts = {
                fact_id: fact.access_count
                for fact_id, fact in sorted({**self.cold, **self.hot}.items())
            }
            return {
                "config": self.config.to_dict(),
                "hot": by_age(self.hot),
                "cold": by_age(self.cold),
                "counts": counts,
                "clock": self.clock,
            }

    @classmethod
    def restore(cls, deep_store, snapshot: Mapping) -> "TieredCache":
        """Rebuild a cache from :meth:`snapshot` plus the deep store."""
        cache = cls(deep_store, CacheConfig.from_dict(snapshot["config"]))
        counts = snapshot.get("counts", {})
        stamp = 0
        for tier, ids in ((Tier.COLD, snapshot["cold"]), (Tier.HOT, snapshot["hot"])):
            for fact_id in ids:
                entry = replace(
                    cache.deep_store[fact_id],
                    access_count=int(counts.get(fact_id, 0)),
                    tier=tier,
                    inserted_at=stamp,
                )
                stamp += 1
                (cache.cold if tier is Tier.COLD else cache.hot)[fact_id] = entry
        cache.clock = max(int(snapshot["clock"]), stamp)
        return cache

    def save_snapshot(self, path) -> None:
        with open(path, "w", encoding="utf-8") as handle:
            json.dump(self.snapshot(), handle, sort_keys=True, separators=(",", ":"))
            handle.write("\n")

    @classmethod
    def load_snapshot(cls, deep_store, path) -> "TieredCache":
        with open(path, "r", encoding="utf-8") as handle:
            return cls.restore(deep_store, json.load(handle))


def init_for_question(
    deep_store,
    question_embedding: Embedding,
    config: CacheConfig,
) -> TieredCache:
    """Create a question's cache: COLD seeded with the k nearest facts.

    COLD receives exactly the ``k_cold_seed`` deep-store facts with the
    highest clamped cosine to the question embedding (ties toward the
    smallest fact_id); HOT starts empty and all access counts start at zero.
    """
    store = _normalize_store(deep_store)
    if not store:
        raise EmptyDeepStore("deep store holds no facts")
    if config.k_cold_seed > len(store):
        raise SeedLargerThanStore(
            f"k_cold_seed={config.k_cold_seed} exceeds deep store size {len(store)}"
        )
    scored = []
    for fact_id in sorted(store):
        sim = clamped_similarity(store[fact_id].embedding, question_embedding)
        scored.append((sim, fact_id))
    scored.sort(key=lambda item: (-item[0], item[1]))
    cache = TieredCache(store, config)
    for _, fact_id in scored[: config.k_cold_seed]:
        cache._insert_cold(store[fact_id], access_count=0)
    return cache
