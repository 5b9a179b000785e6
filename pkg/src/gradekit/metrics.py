"""Agreement statistics between two score series.

Pearson and Spearman run over raw scores, Cohen's kappa and the confusion
matrix over category bins. Everything here is a pure function over
sequences; numpy does the arithmetic but the formulas stay close enough to
the textbook versions that a brute-force reference can confirm them to
1e-12.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import ConstantSeries, LengthMismatch
from .evaluation import CATEGORY_ORDER, Category, DEFAULT_CATEGORY_BOUNDS, bin_category


@dataclass(frozen=True)
class ScorePair:
    """One item scored by both raters; _a is the machine, _b the human."""

    item_id: str
    score_a: float
    score_b: float
    category_a: Category
    category_b: Category


def score_pair(
    item_id: str,
    ai_score: float,
    human_score: float,
    max_marks: float,
    bounds: Sequence[float] = DEFAULT_CATEGORY_BOUNDS,
) -> ScorePair:
    """Build a ScorePair, binning both scores with the same boundary table."""
    if max_marks <= 0:
        raise ValueError("max_marks must be positive to normalize scores")
    return ScorePair(
        item_id=item_id,
        score_a=ai_score,
        score_b=human_score,
        category_a=bin_category(ai_score / max_marks, bounds),
        category_b=bin_category(human_score / max_marks, bounds),
    )


def _paired_arrays(xs: Sequence[float], ys: Sequence[float]) -> tuple[np.ndarray, np.ndarray]:
    if len(xs) != len(ys):
        raise LengthMismatch(f"series lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 2:
        raise ConstantSeries("correlation needs at least two data points")
    x = np.asarray(xs, dtype=np.float64)
    y = np.asarray(ys, dtype=np.float64)
    if np.ptp(x) == 0.0:
        raise ConstantSeries("first series is constant")
    if np.ptp(y) == 0.0:
        raise ConstantSeries("second series is constant")
    return x, y


def pearson(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Product-moment correlation of two equal-length, non-constant series."""
    x, y = _paired_arrays(xs, ys)
    dx = x - x.mean()
    dy = y - y.mean()
    return float(np.dot(dx, dy) / np.sqrt(np.dot(dx, dx) * np.dot(dy, dy)))


def _average_ranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks; tied values all receive the mean of their rank range."""
    order = np.argsort(values, kind="stable")
    ranks = np.empty(len(values), dtype=np.float64)
    i = 0
    while i < len(values):
        j = i
        while j + 1 < len(values) and values[order[j + 1]] == values[order[i]]:
            j += 1
        mean_rank = (i + j) / 2.0 + 1.0
        for k in range(i, j + 1):
            ranks[order[k]] = mean_rank
        i = j + 1
    return ranks


def spearman(xs: Sequence[float], ys: Sequence[float]) -> float:
    """Pearson over average-ranked series."""
    x, y = _paired_arrays(xs, ys)
    return pearson(_average_ranks(x), _average_ranks(y))


def confusion_matrix(pairs: Iterable[ScorePair]) -> np.ndarray:
    """4x4 counts indexed (human category, machine category), FAIL..EXCELLENT."""
    index = {cat: i for i, cat in enumerate(CATEGORY_ORDER)}
    matrix = np.zeros((4, 4), dtype=np.int64)
    for pair in pairs:
        matrix[index[pair.category_b], index[pair.category_a]] += 1
    return matrix


def kappa_from_confusion(matrix: Sequence[Sequence[float]], weighting: str = "none") -> float:
    """Cohen's kappa from a square contingency table.

    ``weighting`` is "none", "linear", or "quadratic"; the degenerate case
    where chance agreement is already perfect returns 1.0.
    """
    m = np.asarray(matrix, dtype=np.float64)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise ValueError("confusion matrix must be square")
    n = m.sum()
    if n <= 0:
        raise LengthMismatch("confusion matrix is empty")
    k = m.shape[0]
    rows = m.sum(axis=1)
    cols = m.sum(axis=0)
    expected = np.outer(rows, cols) / n

    if weighting == "none":
        p_o = float(np.trace(m) / n)
        p_e = float(np.trace(expected) / n)
        if p_e == 1.0:
            return 1.0
        return (p_o - p_e) / (1.0 - p_e)
    if weighting not in ("linear", "quadratic"):
        raise ValueError(f"unknown weighting {weighting!r}")
    idx = np.arange(k, dtype=np.float64)
    diff = np.abs(idx[:, None] - idx[None, :]) / max(1, k - 1)
    w = diff if weighting == "linear" else diff**2
    denom = float((w * expected).sum())
    if denom == 0.0:
        return 1.0
    return 1.0 - float((w * m).sum()) / denom


def cohen_kappa(
    labels_a: Sequence[Category],
    labels_b: Sequence[Category],
    weighting: str = "none",
) -> float:
    """Chance-corrected agreement between two category sequences."""
    if len(labels_a) != len(labels_b):
        raise LengthMismatch(f"label lengths differ: {len(labels_a)} vs {len(labels_b)}")
    if not labels_a:
        raise LengthMismatch("label sequences are empty")
    index = {cat: i for i, cat in enumerate(CATEGORY_ORDER)}
    matrix = np.zeros((4, 4), dtype=np.float64)
    for a, b in zip(labels_a, labels_b):
        matrix[index[a], index[b]] += 1
    return kappa_from_confusion(matrix, weighting)


@dataclass(frozen=True)
class AgreementReport:
    pearson: float
    spearman: float
    kappa: float
    confusion: tuple[tuple[int, ...], ...]
    n: int

    def __post_init__(self) -> None:
        total = sum(sum(row) for row in self.confusion)
        if total != self.n:
            raise ValueError(f"confusion entries sum to {total}, expected n={self.n}")

    def to_dict(self) -> dict:
        return {
            "pearson": self.pearson,
            "spearman": self.spearman,
            "kappa": self.kappa,
            "confusion": [list(row) for row in self.confusion],
            "n": self.n,
        }


def agreement_report(pairs: Sequence[ScorePair], weighting: str = "none") -> AgreementReport:
    """Full report over paired machine/human scores."""
    matrix = confusion_matrix(pairs)
    return AgreementReport(
        pearson=pearson([p.score_a for p in pairs], [p.score_b for p in pairs]),
        spearman=spearman([p.score_a for p in pairs], [p.score_b for p in pairs]),
        kappa=cohen_kappa(
            [p.category_a for p in pairs], [p.category_b for p in pairs], weighting
        ),
        confusion=tuple(tuple(int(v) for v in row) for row in matrix),
        n=len(pairs),
    )


def confusion_csv(matrix: Sequence[Sequence[int]]) -> str:
    """Render the confusion matrix as CSV with labeled rows and columns."""
    names = [cat.value for cat in CATEGORY_ORDER]
    lines = ["human," + ",".join(names)]
    for name, row in zip(names, matrix):
        lines.append(name + "," + ",".join(str(int(v)) for v in row))
    return "\n".join(lines) + "\n"
