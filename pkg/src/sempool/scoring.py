"""Per-image OOD scores and pool-consistency statistics.

The deployed detector uses the grouped softmax ratio of ID mass against
negative-label mass (higher = more ID).  The threshold-count score bridges
the pipeline to the activation-count statistics; for metric use it is negated
at the call site since a higher count means more OOD.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import (
    EmptyIdSet,
    EmptyLabelSet,
    EmptySet,
    NonPositiveTemperature,
    PoolTooSmall,
    ProbabilityOutOfRange,
)
from .selection import EmbeddingMatrix

__all__ = [
    "DEFAULT_TEMPERATURE",
    "ScoringConfig",
    "group_softmax_score",
    "score_images",
    "count_score",
    "expected_single_label_score",
    "avg_max_intra_pool_similarity",
]

DEFAULT_TEMPERATURE = 0.01


@dataclass(frozen=True)
class ScoringConfig:
    """Scoring knobs.

    ``threshold`` only feeds :func:`count_score`, the bridge to the
    activation-count statistics; the deployed detector thresholds the grouped
    softmax score instead, so it defaults to None.  All metric-facing scores
    follow the "higher = more ID" polarity; a count score is negated at the
    metrics boundary.
    """

    temperature: float = DEFAULT_TEMPERATURE
    group_count: int = 100
    threshold: float | None = None

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise NonPositiveTemperature(
                f"temperature must be > 0, got {self.temperature!r}"
            )
        if self.group_count < 1:
            raise ProbabilityOutOfRange(
                f"group_count must be >= 1, got {self.group_count!r}"
            )
        if self.threshold is not None and not -1.0 <= self.threshold <= 1.0:
            raise ProbabilityOutOfRange(
                f"activation threshold must lie in [-1, 1], got {self.threshold!r}"
            )


def _as_vector(x: np.ndarray) -> np.ndarray:
    return np.asarray(x, dtype=np.float64).ravel()


def _group_score_from_sims(
    id_sims: np.ndarray, neg_sims: np.ndarray, groups, temperature: float
) -> float:
    # Shared max-subtraction keeps exp() in range at temperature 0.01.
    id_exp_arg = id_sims / temperature
    neg_exp_arg = neg_sims / temperature
    scores = []
    for group in groups:
        g = np.asarray(group, dtype=np.int64)
        peak = max(id_exp_arg.max(), neg_exp_arg[g].max() if g.size else -np.inf)
        id_mass = np.exp(id_exp_arg - peak).sum()
        neg_mass = np.exp(neg_exp_arg[g] - peak).sum() if g.size else 0.0
        scores.append(id_mass / (id_mass + neg_mass))
    return float(np.mean(scores))


def group_softmax_score(
    image_emb: np.ndarray,
    id_matrix: EmbeddingMatrix,
    neg_matrix: EmbeddingMatrix | None,
    groups: tuple[tuple[int, ...], ...] = (),
    temperature: float = DEFAULT_TEMPERATURE,
) -> float:
    """Grouped softmax ID-vs-negative score in [0, 1]; higher = more ID.

    Per group g the score is sum_ID exp(cos/t) / (sum_ID exp(cos/t) +
    sum_{j in g} exp(cos_j/t)); the result is the mean over groups.  With no
    negatives the score is exactly 1.  ``groups`` hold row indices into
    ``neg_matrix``.
    """
    if temperature <= 0.0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature!r}")
    if id_matrix is None or id_matrix.count == 0:
        raise EmptyIdSet("need at least one ID label embedding")
    vec = _as_vector(image_emb)
    id_sims = id_matrix.vectors.astype(np.float64) @ vec
    if neg_matrix is None or neg_matrix.count == 0 or not groups:
        return 1.0
    neg_sims = neg_matrix.vectors.astype(np.float64) @ vec
    return _group_score_from_sims(id_sims, neg_sims, groups, temperature)


def score_images(
    image_matrix: EmbeddingMatrix,
    id_matrix: EmbeddingMatrix,
    neg_matrix: EmbeddingMatrix | None,
    groups: tuple[tuple[int, ...], ...] = (),
    temperature: float = DEFAULT_TEMPERATURE,
) -> np.ndarray:
    """Vectorized :func:`group_softmax_score` over every image row."""
    if temperature <= 0.0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature!r}")
    if id_matrix is None or id_matrix.count == 0:
        raise EmptyIdSet("need at least one ID label embedding")
    images = image_matrix.vectors.astype(np.float64)
    id_sims = images @ id_matrix.vectors.astype(np.float64).T
    if neg_matrix is None or neg_matrix.count == 0 or not groups:
        return np.ones(image_matrix.count, dtype=np.float64)
    neg_sims = images @ neg_matrix.vectors.astype(np.float64).T

    id_arg = id_sims / temperature
    neg_arg = neg_sims / temperature
    id_peak = id_arg.max(axis=1)
    total = np.zeros(image_matrix.count, dtype=np.float64)
    for group in groups:
        g = np.asarray(group, dtype=np.int64)
        peak = np.maximum(id_peak, neg_arg[:, g].max(axis=1)) if g.size else id_peak
        id_mass = np.exp(id_arg - peak[:, None]).sum(axis=1)
        neg_mass = np.exp(neg_arg[:, g] - peak[:, None]).sum(axis=1) if g.size else 0.0
        total += id_mass / (id_mass + neg_mass)
    return total / len(groups)


def count_score(
    image_emb: np.ndarray, label_matrix: EmbeddingMatrix, threshold: float
) -> int:
    """Number of labels whose cosine to the image reaches ``threshold``.

    Higher count = more OOD when the labels are mined negatives; negate before
    feeding metrics that expect higher = more ID.
    """
    if label_matrix is None or label_matrix.count == 0:
        raise EmptyLabelSet("label embedding set is empty")
    sims = label_matrix.vectors.astype(np.float64) @ _as_vector(image_emb)
    return int((sims >= threshold).sum())


def expected_single_label_score(
    image_matrix: EmbeddingMatrix,
    pool_matrix: EmbeddingMatrix,
    temperature: float = DEFAULT_TEMPERATURE,
) -> float:
    """Expected softmax mass a single pool label receives, scaled by 1000.

    For each image the softmax over the whole pool is averaged across labels,
    then across images.  Since each image's softmax sums to one, k times the
    result is exactly 1000 for a k-label pool; the statistic is reported on
    that x1000 scale.
    """
    if temperature <= 0.0:
        raise NonPositiveTemperature(f"temperature must be > 0, got {temperature!r}")
    if image_matrix is None or pool_matrix is None or image_matrix.count == 0 or pool_matrix.count == 0:
        raise EmptySet("image and pool embedding sets must be non-empty")
    sims = image_matrix.vectors.astype(np.float64) @ pool_matrix.vectors.astype(np.float64).T
    args = sims / temperature
    args -= args.max(axis=1, keepdims=True)
    weights = np.exp(args)
    softmax = weights / weights.sum(axis=1, keepdims=True)
    return float(softmax.mean(axis=1).mean() * 1000.0)


def avg_max_intra_pool_similarity(pool_matrix: EmbeddingMatrix) -> float:
    """Mean over labels of the maximum cosine to any *other* label.

    A proxy for the synonym density of a pool; rises toward 1 as near-
    duplicates accumulate.
    """
    if pool_matrix.count < 2:
        raise PoolTooSmall("need at least two pool labels")
    vectors = pool_matrix.vectors.astype(np.float64)
    sims = vectors @ vectors.T
    np.fill_diagonal(sims, -np.inf)
    return float(sims.max(axis=1).mean())
