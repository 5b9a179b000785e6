"""Tiered fact cache: seeding, promotion, eviction, snapshots.

The randomized sequences are cross-checked against the id-level policy
mirror in _oracles.CacheMirror, which reimplements the promotion and
eviction rules without looking at this package's code.
"""

from __future__ import annotations

import random

import pytest

from _helpers import axis, fact, unit
from _oracles import CacheMirror
from gradekit.cache import CacheConfig, Tier, TieredCache, init_for_question
from gradekit.embedding import Embedding, clamped_similarity
from gradekit.errors import EmptyDeepStore, SeedLargerThanStore


def orthogonal_store(n: int, dim: int = 16) -> list:
    return [fact(fact_id=f"f{i}", embedding=axis(i, dim)) for i in range(n)]


def random_store(n: int, rng: random.Random, dim: int = 16) -> list:
    return [
        fact(fact_id=f"f{i:03d}", embedding=unit([rng.random() + 0.05 for _ in range(dim)], dim))
        for i in range(n)
    ]


def rand_query(rng: random.Random, dim: int = 16) -> Embedding:
    return unit([rng.random() + 0.05 for _ in range(dim)], dim)


def config(**overrides) -> CacheConfig:
    base = dict(k_cold_seed=3, promote_threshold=3, hot_capacity=2,
                cold_capacity=6, retrieval_top_m=1)
    base.update(overrides)
    return CacheConfig(**base)


# -- seeding ---------------------------------------------------------------


def test_init_seeds_cold_only() -> None:
    store = orthogonal_store(10)
    cache = init_for_question(store, axis(0, 16), config(k_cold_seed=3))
    assert len(cache.cold) == 3
    assert len(cache.hot) == 0
    assert all(f.access_count == 0 for f in cache.cold.values())
    assert all(f.tier is Tier.COLD for f in cache.cold.values())
    # axis(0) matches f0 exactly; the zero-similarity ties resolve by id
    assert set(cache.cold) == {"f0", "f1", "f2"}


def test_init_matches_full_sort_oracle() -> None:
    rng = random.Random(21)
    for trial in range(20):
        store = random_store(30, rng)
        question = rand_query(rng)
        k = rng.randint(1, 12)
        cache = init_for_question(store, question, config(k_cold_seed=k, cold_capacity=32))
        ranked = sorted(
            ((-clamped_similarity(f.embedding, question), f.fact_id) for f in store),
        )
        expected = {fid for _, fid in ranked[:k]}
        assert set(cache.cold) == expected


def test_init_rejects_bad_stores() -> None:
    with pytest.raises(EmptyDeepStore):
        init_for_question([], axis(0, 16), config())
    with pytest.raises(SeedLargerThanStore):
        init_for_question(orthogonal_store(2), axis(0, 16), config(k_cold_seed=3))


def test_config_validation() -> None:
    with pytest.raises(ValueError):
        config(promote_threshold=0)
    with pytest.raises(ValueError):
        config(hot_capacity=8, cold_capacity=4)
    round_tripped = CacheConfig.from_dict(config().to_dict())
    assert round_tripped == config()


# -- lookup and promotion ----------------------------------------------------


def test_lookup_returns_best_and_increments() -> None:
    cache = init_for_question(orthogonal_store(6), axis(0, 16), config(k_cold_seed=4))
    results = cache.lookup(axis(2, 16))
    assert [f.fact_id for f, _ in results] == ["f2"]
    assert results[0][1] == pytest.approx(1.0)
    assert cache.cold["f2"].access_count == 1
    assert cache.cold["f0"].access_count == 0


def test_promotion_at_access_threshold() -> None:
    """Third access crosses promote_threshold=3 and moves the fact to HOT."""
    cache = init_for_question(orthogonal_store(6), axis(0, 16), config(k_cold_seed=4))
    cache.lookup(axis(1, 16))
    cache.lookup(axis(1, 16))
    assert "f1" in cache.cold and cache.cold["f1"].access_count == 2
    cache.lookup(axis(1, 16))
    assert "f1" in cache.hot
    assert "f1" not in cache.cold
    assert cache.hot["f1"].access_count == 3
    promo = [t for t in cache.transitions if t.to_tier is Tier.HOT]
    assert [t.fact_id for t in promo] == ["f1"]
    assert promo[0].from_tier is Tier.COLD
    assert promo[0].access_count == 3


def test_hot_overflow_demotes_lowest_count_then_oldest() -> None:
    cache = init_for_question(
        orthogonal_store(6), axis(5, 16),
        config(k_cold_seed=4, promote_threshold=2, hot_capacity=2),
    )
    for _ in range(3):
        cache.lookup(axis(0, 16))  # f0 -> count 3, promoted at 2
    for _ in range(2):
        cache.lookup(axis(1, 16))  # f1 -> count 2, promoted
    assert set(cache.hot) == {"f0", "f1"}
    for _ in range(2):
        cache.lookup(axis(2, 16))  # f2 promoted; HOT overflows
    # f1 and f2 tie at count 2; f1 is the older HOT entry and is demoted.
    assert set(cache.hot) == {"f0", "f2"}
    assert "f1" in cache.cold
    demotions = [t for t in cache.transitions
                 if t.from_tier is Tier.HOT and t.to_tier is Tier.COLD]
    assert [t.fact_id for t in demotions] == ["f1"]


def test_hot_ties_beat_cold_on_equal_similarity() -> None:
    # f0 in HOT and f1 in COLD both sit at similarity 0 for axis(3);
    # the HOT entry must be selected.
    cache = init_for_question(
        orthogonal_store(4), axis(0, 16),
        config(k_cold_seed=2, promote_threshold=1, hot_capacity=1),
    )
    cache.lookup(axis(0, 16))  # promotes f0 immediately at threshold 1
    assert set(cache.hot) == {"f0"}
    results = cache.lookup(axis(3, 16))
    assert [f.fact_id for f, _ in results] == ["f0"]


# -- fallback ---------------------------------------------------------------


def test_fallback_inserts_top_m_into_cold() -> None:
    store = orthogonal_store(8)
    cache = init_for_question(
        store, axis(0, 16),
        config(k_cold_seed=2, retrieval_top_m=3, cold_capacity=8),
    )
    assert set(cache.cold) == {"f0", "f1"}
    results = cache.fallback_retrieve(axis(5, 16))
    ids = [f.fact_id for f, _ in results]
    assert ids[0] == "f5"
    assert len(ids) == 3
    for fid in ids:
        assert fid in cache.cold
        assert cache.cold[fid].access_count >= 1
    assert cache.cold["f5"].access_count == 1


def test_fallback_hot_hit_increments_without_duplicate() -> None:
    cache = init_for_question(
        orthogonal_store(5), axis(0, 16),
        config(k_cold_seed=2, promote_threshold=1, hot_capacity=1, retrieval_top_m=1),
    )
    cache.lookup(axis(0, 16))
    assert set(cache.hot) == {"f0"}
    before = cache.hot["f0"].access_count
    results = cache.fallback_retrieve(axis(0, 16))
    assert [f.fact_id for f, _ in results] == ["f0"]
    assert cache.hot["f0"].access_count == before + 1
    assert "f0" not in cache.cold  # no duplicate in COLD


def test_fallback_respects_cold_capacity_evicting_oldest_zero_count() -> None:
    store = orthogonal_store(8)
    cache = init_for_question(
        store, axis(0, 16),
        config(k_cold_seed=2, promote_threshold=10, hot_capacity=2,
               cold_capacity=3, retrieval_top_m=3),
    )
    # COLD seeded with f0 (stamp 0) then f1 (stamp 1), both count 0.
    query = unit([0, 0, 1.0, 0.9, 0.8], 16)
    cache.fallback_retrieve(query)
    assert len(cache.cold) == 3
    assert set(cache.cold) == {"f2", "f3", "f4"}
    dropped = [t.fact_id for t in cache.transitions if t.to_tier is None]
    assert dropped == ["f0", "f1"]  # equal counts evict by inserted_at ascending


def test_fallback_on_empty_cache_tiers_still_works() -> None:
    store = orthogonal_store(4)
    cache = TieredCache(store, config(k_cold_seed=1, retrieval_top_m=2, cold_capacity=4))
    results = cache.fallback_retrieve(axis(1, 16))
    assert [f.fact_id for f, _ in results][0] == "f1"
    assert "f1" in cache.cold


# -- randomized sequences against the policy mirror --------------------------


def drive_pair(cache: TieredCache, mirror: CacheMirror, store: list,
               rng: random.Random, steps: int, check_every: int = 50) -> None:
    embeddings = {f.fact_id: f.embedding for f in store}
    for step in range(steps):
        query = rand_query(rng)
        sims = {fid: clamped_similarity(emb, query) for fid, emb in embeddings.items()}
        if rng.random() < 0.7:
            got = [f.fact_id for f, _ in cache.lookup(query)]
            expected = mirror.lookup(sims)
        else:
            got = [f.fact_id for f, _ in cache.fallback_retrieve(query)]
            ranked = [fid for _, fid in sorted((-sims[fid], fid) for fid in embeddings)]
            expected = mirror.fallback(ranked)
        assert got == expected, f"step {step}: selection diverged"

        cfg = cache.config
        assert len(cache.hot) <= cfg.hot_capacity
        assert len(cache.cold) <= cfg.cold_capacity
        assert not set(cache.hot) & set(cache.cold)
        assert all(f.access_count >= cfg.promote_threshold for f in cache.hot.values())

        if step % check_every == 0:
            hot, cold, counts = mirror.state()
            assert set(cache.hot) == hot
            assert set(cache.cold) == cold
            got_counts = {fid: f.access_count
                          for fid, f in [*cache.hot.items(), *cache.cold.items()]}
            assert got_counts == counts


def build_pair(seed: int, n_facts: int = 40) -> tuple:
    rng = random.Random(seed)
    store = random_store(n_facts, rng)
    cfg = config(k_cold_seed=5, promote_threshold=3, hot_capacity=4,
                 cold_capacity=8, retrieval_top_m=3)
    question = rand_query(rng)
    cache = init_for_question(store, question, cfg)
    mirror = CacheMirror(cfg.hot_capacity, cfg.cold_capacity,
                         cfg.promote_threshold, cfg.retrieval_top_m)
    mirror.seed_cold(cache.snapshot()["cold"])
    return cache, mirror, store, rng


def test_randomized_sequence_matches_mirror() -> None:
    cache, mirror, store, rng = build_pair(seed=101)
    drive_pair(cache, mirror, store, rng, steps=2000)


def test_seeded_replay_is_identical() -> None:
    def run(seed: int) -> dict:
        cache, mirror, store, rng = build_pair(seed)
        drive_pair(cache, mirror, store, rng, steps=400, check_every=400)
        return cache.snapshot()

    assert run(7) == run(7)
    assert run(7) != run(8)


# -- snapshots ----------------------------------------------------------------


def test_snapshot_restore_round_trip() -> None:
    cache, mirror, store, rng = build_pair(seed=33)
    drive_pair(cache, mirror, store, rng, steps=200, check_every=200)
    snap = cache.snapshot()
    restored = TieredCache.restore(store, snap)
    assert restored.snapshot()["hot"] == snap["hot"]
    assert restored.snapshot()["cold"] == snap["cold"]
    assert restored.snapshot()["counts"] == snap["counts"]
    assert restored.snapshot()["clock"] == snap["clock"]


def test_restored_cache_replays_like_the_original() -> None:
    """Driving original and restored caches with one op stream stays in lockstep."""
    cache, _mirror, store, rng = build_pair(seed=55)
    warm = random.Random(1)
    for _ in range(150):
        cache.lookup(rand_query(warm))
    restored = TieredCache.restore(store, cache.snapshot())
    ops = random.Random(2)
    for _ in range(150):
        query = rand_query(ops)
        original_ids = [f.fact_id for f, _ in cache.lookup(query)]
        restored_ids = [f.fact_id for f, _ in restored.lookup(query)]
        assert original_ids == restored_ids
    assert cache.snapshot() == restored.snapshot()


def test_snapshot_file_round_trip(tmp_path) -> None:
    cache, _mirror, store, rng = build_pair(seed=44)
    for _ in range(50):
        cache.lookup(rand_query(rng))
    path = tmp_path / "cache.json"
    cache.save_snapshot(path)
    loaded = TieredCache.load_snapshot(store, path)
    assert loaded.snapshot() == cache.snapshot()


def test_facts_scanned_counts_work() -> None:
    store = orthogonal_store(10)
    cache = init_for_question(store, axis(0, 16), config(k_cold_seed=3))
    cache.lookup(axis(0, 16))     # scans the 3 cached facts
    cache.fallback_retrieve(axis(7, 16))  # scans all 10
    assert cache.facts_scanned == 13
