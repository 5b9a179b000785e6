"""Pseudonymize students and distribute their scripts across reviewers.

Two rules shape this module: reviewers only ever see pseudonyms, and no
reviewer may monopolize one student's scripts. The second is quantified as
a spread bound: with s scripts and R reviewers, no reviewer receives more
than ceil(s / min(s, R)) of that student's scripts.
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Sequence

from .audit import AuditLog
from .errors import DuplicateStudentId, MapSealed, NoReviewers


def _pseudonym(real_id: str, seed: int, attempt: int) -> str:
    data = real_id.encode("utf-8")
    if attempt:
        data += b"#%d" % attempt
    digest = hashlib.blake2b(data, key=seed.to_bytes(8, "big"), digest_size=9)
    return "anon-" + digest.hexdigest()


@dataclass(frozen=True)
class PseudonymMap:
    """Sealed bijection from real student ids to opaque pseudonyms."""

    forward: Mapping[str, str]
    created_at: int
    sealed: bool = True

    def pseudonym_for(self, real_id: str) -> str:
        return self.forward[real_id]

    def real_id_for(self, pseudonym: str) -> str:
        """Reverse lookup; refused while the map is sealed."""
        if self.sealed:
            raise MapSealed("map is sealed; unseal with an audit-logged action first")
        for real, anon in self.forward.items():
            if anon == pseudonym:
                return real
        raise KeyError(pseudonym)

    def to_dict(self) -> dict:
        return {
            "forward": dict(sorted(self.forward.items())),
            "created_at": self.created_at,
            "sealed": self.sealed,
        }


def unseal(pmap: PseudonymMap, actor: str, reason: str, log: AuditLog) -> PseudonymMap:
    """Return an unsealed copy; the act itself goes on the audit trail."""
    if not reason.strip():
        raise ValueError("unsealing requires a stated reason")
    log.append(
        {
            "event": "PSEUDONYM_MAP_UNSEALED",
            "actor": actor,
            "reason": reason,
            "map_created_at": pmap.created_at,
        }
    )
    return replace(pmap, sealed=False)


def anonymize(students: Sequence[str], seed: int, created_at: int = 0) -> PseudonymMap:
    """Assign every student a keyed-hash pseudonym; deterministic per seed.

    Collisions are resolved by rehashing with an attempt counter, scanning
    students in sorted order so the outcome never depends on input order.
    """
    seen: set[str] = set()
    for sid in students:
        if sid in seen:
            raise DuplicateStudentId(f"duplicate student id {sid!r}")
        seen.add(sid)
    forward: dict[str, str] = {}
    used: set[str] = set()
    for sid in sorted(students):
        attempt = 0
        anon = _pseudonym(sid, seed, attempt)
        while anon in used:
            attempt += 1
            anon = _pseudonym(sid, seed, attempt)
        forward[sid] = anon
        used.add(anon)
    return PseudonymMap(forward=forward, created_at=created_at, sealed=True)


def spread_bound(script_count: int, reviewer_count: int) -> int:
    return math.ceil(script_count / min(script_count, reviewer_count))


@dataclass(frozen=True)
class AllocationPlan:
    assignments: Mapping[str, str]
    seed: int
    constraints_satisfied: bool


def check_spread(
    assignments: Mapping[str, str],
    owner: Mapping[str, str],
    reviewer_count: int,
) -> bool:
    """Direct recount of the per-student spread bound over a finished plan."""
    per_pair: dict[tuple[str, str], int] = {}
    totals: dict[str, int] = {}
    for script_id, reviewer in assignments.items():
        student = owner[script_id]
        per_pair[(student, reviewer)] = per_pair.get((student, reviewer), 0) + 1
        totals[student] = totals.get(student, 0) + 1
    for (student, _reviewer), count in per_pair.items():
        if count > spread_bound(totals[student], reviewer_count):
            return False
    return True


def allocate(
    scripts: Sequence[tuple[str, str]],
    reviewers: Sequence[str],
    seed: int,
) -> AllocationPlan:
    """Seeded shuffle, round-robin, then repair any spread violations.

    The repair pass prefers swapping two assignments (reviewer loads stay
    untouched); when no legal swap exists it moves the script to the least
    loaded legal reviewer. Either way one over-bound assignment is cleared
    per step and none created, so the pass terminates.
    """
    if not reviewers:
        raise NoReviewers("at least one reviewer is required")
    if not scripts:
        raise ValueError("scripts must be non-empty")
    if len(set(reviewers)) != len(reviewers):
        raise ValueError("reviewer ids must be unique")
    if len({sid for sid, _ in scripts}) != len(scripts):
        raise ValueError("script ids must be unique")

    rng = random.Random(seed)
    script_order = sorted(scripts)
    rng.shuffle(script_order)
    reviewer_order = sorted(reviewers)
    rng.shuffle(reviewer_order)

    owner = {script_id: student for script_id, student in scripts}
    totals: dict[str, int] = {}
    for _sid, student in scripts:
        totals[student] = totals.get(student, 0) + 1
    bounds = {s: spread_bound(n, len(reviewers)) for s, n in totals.items()}

    assignments: dict[str, str] = {}
    counts: dict[tuple[str, str], int] = {}
    by_reviewer: dict[str, set[str]] = {r: set() for r in reviewers}
    loads: dict[str, int] = {r: 0 for r in reviewers}

    def place(script_id: str, reviewer: str) -> None:
        assignments[script_id] = reviewer
        key = (owner[script_id], reviewer)
        counts[key] = counts.get(key, 0) + 1
        by_reviewer[reviewer].add(script_id)
        loads[reviewer] += 1

    def remove(script_id: str) -> None:
        reviewer = assignments.pop(script_id)
        counts[(owner[script_id], reviewer)] -= 1
        by_reviewer[reviewer].discard(script_id)
        loads[reviewer] -= 1

    for i, (script_id, _student) in enumerate(script_order):
        place(script_id, reviewer_order[i % len(reviewer_order)])

    # Collect over-bound scripts: per (student, reviewer) keep the first
    # `bound` by id, queue the rest for relocation.
    pending: list[str] = []
    grouped: dict[tuple[str, str], list[str]] = {}
    for script_id in sorted(assignments):
        grouped.setdefault((owner[script_id], assignments[script_id]), []).append(script_id)
    for (student, _reviewer), ids in sorted(grouped.items()):
        for script_id in ids[bounds[student]:]:
            pending.append(script_id)

    for script_id in pending:
        student = owner[script_id]
        source = assignments[script_id]
        if counts[(student, source)] <= bounds[student]:
            continue
        targets = sorted(
            (r for r in reviewers
             if r != source and counts.get((student, r), 0) < bounds[student]),
            key=lambda r: (counts.get((student, r), 0), loads[r], r),
        )
        swapped = False
        for target in targets:
            for other_id in sorted(by_reviewer[target]):
                other = owner[other_id]
                if other == student:
                    continue
                if counts.get((other, source), 0) >= bounds[other]:
                    continue
                remove(script_id)
                remove(other_id)
                place(script_id, target)
                place(other_id, source)
                swapped = True
                break
            if swapped:
                break
        if not swapped:
            target = min(targets, key=lambda r: (loads[r], r))
            remove(script_id)
            place(script_id, target)

    satisfied = check_spread(assignments, owner, len(reviewers))
    return AllocationPlan(assignments=dict(assignments), seed=seed, constraints_satisfied=satisfied)


def write_plan_csv(path: str | Path, plan: AllocationPlan) -> None:
    import csv

    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["script_id", "reviewer_id"])
        for script_id in sorted(plan.assignments):
            writer.writerow([script_id, plan.assignments[script_id]])
