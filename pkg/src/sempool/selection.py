"""Negative-label mining over precomputed embeddings.

Candidates are ranked by dissimilarity to the whole ID label space (negative
nearest-rank percentile of cosine similarity, max-similarity by default) and
the most dissimilar fraction is selected, then partitioned into contiguous
groups for the grouped softmax score.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .errors import (
    DimensionMismatch,
    EmptyCandidates,
    EmptyIdSet,
    NormViolation,
    ProbabilityOutOfRange,
    RatioOutOfRange,
)
from .pool import normalize_label

__all__ = [
    "ManifestRecord",
    "EmbeddingMatrix",
    "SelectionResult",
    "cosine",
    "distance_to_id_space",
    "select_negatives",
    "DEFAULT_RATIO",
    "DEFAULT_PERCENTILE",
    "DEFAULT_GROUP_COUNT",
]

DEFAULT_RATIO = 0.15
DEFAULT_PERCENTILE = 100.0
DEFAULT_GROUP_COUNT = 100

_UNIT_NORM_TOL = 1e-4


@dataclass(frozen=True)
class ManifestRecord:
    """Sidecar record for one embedding row."""

    index: int
    label: str
    kind: str
    prompt_count: int = 1


@dataclass(frozen=True)
class EmbeddingMatrix:
    """Unit-norm row embeddings with a per-row label manifest.

    Rows are float32 (the on-disk precision), unit-norm within 1e-4, finite.
    The array is stored read-only.
    """

    vectors: np.ndarray
    manifest: tuple[ManifestRecord, ...]

    def __post_init__(self):
        rows = np.asarray(self.vectors, dtype=np.float32)
        if rows.ndim != 2 or rows.shape[0] == 0 or rows.shape[1] == 0:
            raise DimensionMismatch(f"expected a non-empty 2-D matrix, got shape {rows.shape}")
        if not np.all(np.isfinite(rows)):
            raise NormViolation("embedding matrix contains non-finite entries")
        norms = np.linalg.norm(rows.astype(np.float64), axis=1)
        bad = np.nonzero(np.abs(norms - 1.0) > _UNIT_NORM_TOL)[0]
        if bad.size:
            raise NormViolation(
                f"{bad.size} rows are not unit-norm within {_UNIT_NORM_TOL} "
                f"(first offender: row {int(bad[0])}, norm {norms[bad[0]]!r})"
            )
        if len(self.manifest) != rows.shape[0]:
            raise DimensionMismatch(
                f"manifest has {len(self.manifest)} records for {rows.shape[0]} rows"
            )
        rows = rows.copy()
        rows.setflags(write=False)
        object.__setattr__(self, "vectors", rows)
        object.__setattr__(self, "manifest", tuple(self.manifest))

    @classmethod
    def from_rows(
        cls,
        vectors: np.ndarray,
        labels: Sequence[str],
        kinds: Sequence[str] | None = None,
        prompt_counts: Sequence[int] | None = None,
    ) -> "EmbeddingMatrix":
        n = np.asarray(vectors).shape[0]
        kinds = kinds if kinds is not None else ["original"] * n
        prompt_counts = prompt_counts if prompt_counts is not None else [1] * n
        manifest = tuple(
            ManifestRecord(index=i, label=labels[i], kind=kinds[i], prompt_count=prompt_counts[i])
            for i in range(n)
        )
        return cls(vectors=vectors, manifest=manifest)

    @property
    def dim(self) -> int:
        return int(self.vectors.shape[1])

    @property
    def count(self) -> int:
        return int(self.vectors.shape[0])

    def labels(self) -> list[str]:
        return [rec.label for rec in self.manifest]


@dataclass(frozen=True)
class SelectionResult:
    """Mined negatives: indices into the candidate matrix, most dissimilar first.

    ``distances`` run parallel to ``selected`` and never increase; ``groups``
    partition the selection into contiguous chunks whose sizes differ by at
    most one.
    """

    selected: tuple[int, ...]
    distances: tuple[float, ...]
    ratio: float
    groups: tuple[tuple[int, ...], ...]


def cosine(a: np.ndarray, b: np.ndarray) -> float:
    """Dot product of two unit vectors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise DimensionMismatch(f"vector shapes differ: {a.shape} vs {b.shape}")
    return float(a @ b)


def _nearest_rank(values: np.ndarray, percentile: float) -> float:
    """Nearest-rank percentile: the ceil(p/100 * n)-th smallest value."""
    if not 0.0 < percentile <= 100.0:
        raise ProbabilityOutOfRange(f"percentile must lie in (0, 100], got {percentile!r}")
    rank = max(1, math.ceil(percentile / 100.0 * values.size))
    return float(np.sort(values)[rank - 1])


def distance_to_id_space(
    candidate: np.ndarray, id_matrix: EmbeddingMatrix, percentile: float = DEFAULT_PERCENTILE
) -> float:
    """Negative nearest-rank percentile of cosine similarity to the ID labels.

    percentile=100 ranks by the maximum similarity to any ID label, so exact
    ID matches come last in the selection order.
    """
    sims = id_matrix.vectors.astype(np.float64) @ np.asarray(candidate, dtype=np.float64)
    return -_nearest_rank(sims, percentile)


def _candidate_distances(
    candidates: EmbeddingMatrix, id_matrix: EmbeddingMatrix, percentile: float
) -> np.ndarray:
    sims = candidates.vectors.astype(np.float64) @ id_matrix.vectors.astype(np.float64).T
    rank = max(1, math.ceil(percentile / 100.0 * id_matrix.count))
    part = np.partition(sims, rank - 1, axis=1)[:, rank - 1]
    return -part


def select_negatives(
    candidates: EmbeddingMatrix,
    id_matrix: EmbeddingMatrix,
    ratio: float = DEFAULT_RATIO,
    percentile: float = DEFAULT_PERCENTILE,
    group_count: int = DEFAULT_GROUP_COUNT,
) -> SelectionResult:
    """Select the fraction of candidates most dissimilar to the ID space.

    Candidates whose normalized text equals an ID label are excluded before
    ranking; the effective pool size is what remains.  Sorting is by distance
    descending with ties broken by (label text ascending, original index), so
    the result is deterministic and the selection at a smaller ratio is a
    prefix of the selection at a larger one.  The selection is partitioned
    into min(group_count, size) contiguous chunks in selection order.
    """
    if candidates.count == 0:
        raise EmptyCandidates("candidate matrix is empty")
    if id_matrix.count == 0:
        raise EmptyIdSet("ID embedding matrix is empty")
    if not 0.0 < ratio <= 1.0:
        raise RatioOutOfRange(f"ratio must lie in (0, 1], got {ratio!r}")
    if candidates.dim != id_matrix.dim:
        raise DimensionMismatch(
            f"candidate dim {candidates.dim} != ID dim {id_matrix.dim}"
        )
    if group_count < 1:
        raise ProbabilityOutOfRange(f"group_count must be >= 1, got {group_count!r}")
    if not 0.0 < percentile <= 100.0:
        raise ProbabilityOutOfRange(f"percentile must lie in (0, 100], got {percentile!r}")

    id_texts = {normalize_label(rec.label) for rec in id_matrix.manifest}
    eligible = [
        i for i, rec in enumerate(candidates.manifest)
        if normalize_label(rec.label) not in id_texts
    ]
    if not eligible:
        raise EmptyCandidates("no candidates remain after excluding ID-duplicate texts")

    distances = _candidate_distances(candidates, id_matrix, percentile)
    order = sorted(
        eligible,
        key=lambda i: (-distances[i], normalize_label(candidates.manifest[i].label), i),
    )
    take = max(1, math.floor(ratio * len(eligible)))
    chosen = order[:take]

    n_groups = min(group_count, take)
    bounds = [take * g // n_groups for g in range(n_groups + 1)]
    groups = tuple(
        tuple(chosen[bounds[g] : bounds[g + 1]]) for g in range(n_groups)
    )
    return SelectionResult(
        selected=tuple(chosen),
        distances=tuple(float(distances[i]) for i in chosen),
        ratio=ratio,
        groups=groups,
    )
