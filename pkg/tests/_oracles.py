"""Independent reference implementations used to cross-check the library.

Everything here is deliberately naive pure Python: no numpy, no shared code
with src/. If a library function and its oracle twin agree on thousands of
random inputs, a bug would have to be present in both, written twice, in two
different styles.
"""

from __future__ import annotations

import math


def pearson_bruteforce(xs: list[float], ys: list[float]) -> float:
    n = len(xs)
    mean_x = sum(xs) / n
    mean_y = sum(ys) / n
    cov = sum((x - mean_x) * (y - mean_y) for x, y in zip(xs, ys))
    var_x = sum((x - mean_x) ** 2 for x in xs)
    var_y = sum((y - mean_y) ** 2 for y in ys)
    return cov / math.sqrt(var_x * var_y)


def average_ranks_bruteforce(values: list[float]) -> list[float]:
    """1-based ranks, ties averaged, by scanning every value pair."""
    ranks = []
    for v in values:
        below = sum(1 for other in values if other < v)
        equal = sum(1 for other in values if other == v)
        # ranks occupied by the tie group: below+1 .. below+equal
        ranks.append(below + (equal + 1) / 2.0)
    return ranks


def spearman_bruteforce(xs: list[float], ys: list[float]) -> float:
    return pearson_bruteforce(average_ranks_bruteforce(xs), average_ranks_bruteforce(ys))


def kappa_bruteforce(labels_a: list[int], labels_b: list[int], k: int = 4) -> float:
    n = len(labels_a)
    observed = sum(1 for a, b in zip(labels_a, labels_b) if a == b) / n
    expected = 0.0
    for cat in range(k):
        p_a = sum(1 for a in labels_a if a == cat) / n
        p_b = sum(1 for b in labels_b if b == cat) / n
        expected += p_a * p_b
    if expected == 1.0:
        return 1.0
    return (observed - expected) / (1.0 - expected)


class CacheMirror:
    """Dict-and-loop replay of the tiered cache policy.

    Tracks only ids, counts and insertion stamps; mirrors lookup selection,
    promotion at the access threshold, LFU demotion/eviction with the
    (count, inserted_at, id) key, and fallback insertion.
    """

    def __init__(self, hot_capacity: int, cold_capacity: int, promote_threshold: int,
                 top_m: int) -> None:
        self.hot_capacity = hot_capacity
        self.cold_capacity = cold_capacity
        self.promote_threshold = promote_threshold
        self.top_m = top_m
        self.hot: dict[str, dict] = {}
        self.cold: dict[str, dict] = {}
        self.clock = 0

    def seed_cold(self, fact_ids: list[str]) -> None:
        for fact_id in fact_ids:
            self.clock += 1
            self.cold[fact_id] = {"count": 0, "at": self.clock}

    def _evict_key(self, entry_map: dict[str, dict]):
        return min(entry_map, key=lambda fid: (entry_map[fid]["count"], entry_map[fid]["at"], fid))

    def _rebalance(self) -> None:
        ready = sorted(fid for fid, e in self.cold.items()
                       if e["count"] >= self.promote_threshold)
        for fid in ready:
            entry = self.cold.pop(fid)
            self.clock += 1
            self.hot[fid] = {"count": entry["count"], "at": self.clock}
        while len(self.hot) > self.hot_capacity:
            fid = self._evict_key(self.hot)
            entry = self.hot.pop(fid)
            self.clock += 1
            self.cold[fid] = {"count": entry["count"], "at": self.clock}
        while len(self.cold) > self.cold_capacity:
            del self.cold[self._evict_key(self.cold)]

    def lookup(self, sims: dict[str, float]) -> list[str]:
        """sims maps fact_id -> similarity for every cached fact."""
        scored = []
        for fid in self.hot:
            scored.append((-sims[fid], 0, fid))
        for fid in self.cold:
            scored.append((-sims[fid], 1, fid))
        scored.sort()
        selected = [fid for _, _, fid in scored[: self.top_m]]
        for fid in selected:
            tier = self.hot if fid in self.hot else self.cold
            tier[fid]["count"] += 1
        self._rebalance()
        return selected

    def fallback(self, ranked_fact_ids: list[str]) -> list[str]:
        """ranked_fact_ids is the whole deep store, best match first."""
        selected = ranked_fact_ids[: self.top_m]
        for fid in selected:
            if fid in self.hot:
                self.hot[fid]["count"] += 1
            elif fid in self.cold:
                self.cold[fid]["count"] += 1
            else:
                self.clock += 1
                self.cold[fid] = {"count": 1, "at": self.clock}
                while len(self.cold) > self.cold_capacity:
                    del self.cold[self._evict_key(self.cold)]
        self._rebalance()
        return selected

    def state(self) -> tuple[frozenset, frozenset, dict]:
        counts = {fid: e["count"] for fid, e in [*self.hot.items(), *self.cold.items()]}
        return frozenset(self.hot), frozenset(self.cold), counts
