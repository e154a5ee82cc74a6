"""AUROC and FPR@TPR over ID/OOD score samples.

Scores follow the "higher = more ID" polarity.  AUROC uses midrank tie
handling and equals the O(n^2) pairwise count exactly; FPR@TPR thresholds at
the largest score keeping the ID true-positive rate at or above the target,
with no interpolation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import EmptySample, ProbabilityOutOfRange

__all__ = ["ScoreSample", "auroc", "fpr_at_tpr"]


def _as_scores(values: Sequence[float], name: str) -> np.ndarray:
    arr = np.asarray(values, dtype=np.float64).ravel()
    if arr.size == 0:
        raise EmptySample(f"{name} score sample is empty")
    if not np.all(np.isfinite(arr)):
        raise EmptySample(f"{name} score sample contains non-finite values")
    return arr


def _midranks(values: np.ndarray) -> np.ndarray:
    """1-based ranks with ties assigned the mean rank of their block."""
    order = np.argsort(values, kind="mergesort")
    ranks = np.empty(values.size, dtype=np.float64)
    sorted_vals = values[order]
    i = 0
    while i < values.size:
        j = i
        while j + 1 < values.size and sorted_vals[j + 1] == sorted_vals[i]:
            j += 1
        ranks[order[i : j + 1]] = 0.5 * (i + j) + 1.0
        i = j + 1
    return ranks


@dataclass(frozen=True)
class ScoreSample:
    """Paired ID/OOD score samples, higher = more ID.

    Validated on construction: both sides non-empty and finite.  Count-style
    scores (higher = more OOD) must be negated before building a sample.
    """

    id_scores: tuple[float, ...]
    ood_scores: tuple[float, ...]

    def __post_init__(self):
        object.__setattr__(
            self, "id_scores", tuple(float(v) for v in _as_scores(self.id_scores, "ID"))
        )
        object.__setattr__(
            self, "ood_scores", tuple(float(v) for v in _as_scores(self.ood_scores, "OOD"))
        )

    def auroc(self) -> float:
        return auroc(self.id_scores, self.ood_scores)

    def fpr_at_tpr(self, tpr: float = 0.95) -> float:
        return fpr_at_tpr(self.id_scores, self.ood_scores, tpr)


def auroc(id_scores: Sequence[float], ood_scores: Sequence[float]) -> float:
    """P(id > ood) + 0.5 * P(id == ood) over all ID/OOD score pairs.

    Computed from the rank sum with midranks; exactly equal to the pairwise
    count, ties included.
    """
    ids = _as_scores(id_scores, "ID")
    oods = _as_scores(ood_scores, "OOD")
    ranks = _midranks(np.concatenate([ids, oods]))
    id_rank_sum = float(ranks[: ids.size].sum())
    wins = id_rank_sum - ids.size * (ids.size + 1) / 2.0
    return wins / (ids.size * oods.size)


def fpr_at_tpr(
    id_scores: Sequence[float], ood_scores: Sequence[float], tpr: float = 0.95
) -> float:
    """FPR at the largest threshold whose ID true-positive rate is >= tpr.

    The threshold is the ceil(tpr * n_id)-th largest ID score; the FPR is the
    fraction of OOD scores at or above it.
    """
    if not 0.0 < tpr < 1.0:
        raise ProbabilityOutOfRange(f"tpr must lie in (0, 1), got {tpr!r}")
    ids = _as_scores(id_scores, "ID")
    oods = _as_scores(ood_scores, "OOD")
    rank = math.ceil(tpr * ids.size)
    threshold = np.sort(ids)[::-1][rank - 1]
    return float((oods >= threshold).sum() / oods.size)
