"""Per-label activation probabilities and their summary statistics.

The detection model treats "label i fires on an image" as a Bernoulli
variable.  :class:`ActivationModel` holds one firing probability per
candidate label under ID images and under OOD images; :class:`SummaryStats`
condenses either sequence to (mean, population variance), which is all the
closed-form FPR expressions need.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import (
    DegenerateVariance,
    EmptySequence,
    ProbabilityOutOfRange,
)

__all__ = ["ActivationModel", "SummaryStats", "BetaParams", "as_prob_array"]


def as_prob_array(probs: Sequence[float], *, strict_interior: bool = False) -> np.ndarray:
    """Validate a probability sequence and return it as a read-only float64 array.

    ``strict_interior`` additionally rejects exact 0/1 entries (required by the
    normal approximation, whose per-label variance would vanish there).
    """
    arr = np.asarray(probs, dtype=np.float64)
    if arr.ndim != 1:
        arr = arr.ravel()
    if arr.size == 0:
        raise EmptySequence("probability sequence is empty")
    if not np.all(np.isfinite(arr)):
        raise ProbabilityOutOfRange("probability sequence contains non-finite values")
    if np.any(arr < 0.0) or np.any(arr > 1.0):
        raise ProbabilityOutOfRange("probabilities must lie in [0, 1]")
    if strict_interior and (np.any(arr == 0.0) or np.any(arr == 1.0)):
        from ..errors import DegenerateProbability

        raise DegenerateProbability("probabilities must lie strictly inside (0, 1)")
    out = arr.copy()
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class SummaryStats:
    """Mean and population variance of a probability sequence.

    ``mean*(1-mean) - variance`` is the per-label variance of the normal
    approximation to the activation count; it is non-negative for any
    [0,1]-valued data (Bhatia-Davis) and must be strictly positive for the
    closed-form FPR expressions.
    """

    mean: float
    variance: float

    def __post_init__(self):
        if not 0.0 <= self.mean <= 1.0:
            raise ProbabilityOutOfRange(f"mean {self.mean!r} outside [0, 1]")
        bd_bound = self.mean * (1.0 - self.mean)
        # Allow a whisker of float noise above the Bhatia-Davis bound.
        if not -1e-15 <= self.variance <= bd_bound + 1e-12:
            raise ProbabilityOutOfRange(
                f"variance {self.variance!r} violates the Bhatia-Davis bound "
                f"{bd_bound!r} for mean {self.mean!r}"
            )

    @classmethod
    def from_probs(cls, probs: Sequence[float]) -> "SummaryStats":
        arr = as_prob_array(probs)
        return cls(mean=float(arr.mean()), variance=float(arr.var()))

    @property
    def per_label_variance(self) -> float:
        """q(1-q) - v: per-label variance of the approximating normal."""
        return self.mean * (1.0 - self.mean) - self.variance

    def require_positive_spread(self) -> float:
        """Return per_label_variance, rejecting degenerate (<= 0) inputs."""
        spread = self.per_label_variance
        if spread <= 0.0:
            raise DegenerateVariance(
                f"q(1-q) - v = {spread!r} must be strictly positive "
                f"(mean={self.mean!r}, variance={self.variance!r})"
            )
        return spread


@dataclass(frozen=True)
class ActivationModel:
    """Per-label activation probabilities under ID and OOD images.

    ``in_probs[i]`` / ``out_probs[i]`` are the Bernoulli parameters of label i
    firing on an ID / OOD image.  Both sequences have length ``pool_size``.
    Arrays are stored read-only; the model is safe to share across threads.
    """

    in_probs: np.ndarray
    out_probs: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "in_probs", as_prob_array(self.in_probs))
        object.__setattr__(self, "out_probs", as_prob_array(self.out_probs))
        if self.in_probs.shape != self.out_probs.shape:
            raise ProbabilityOutOfRange(
                "in_probs and out_probs must have the same length, got "
                f"{self.in_probs.size} and {self.out_probs.size}"
            )

    @property
    def pool_size(self) -> int:
        return int(self.in_probs.size)

    def in_stats(self, indices: Sequence[int] | None = None) -> SummaryStats:
        probs = self.in_probs if indices is None else self.in_probs[np.asarray(indices)]
        return SummaryStats.from_probs(probs)

    def out_stats(self, indices: Sequence[int] | None = None) -> SummaryStats:
        probs = self.out_probs if indices is None else self.out_probs[np.asarray(indices)]
        return SummaryStats.from_probs(probs)


@dataclass(frozen=True)
class BetaParams:
    """Shape parameters of a Beta distribution used to model OOD activations."""

    alpha: float
    beta: float

    def __post_init__(self):
        if not (self.alpha > 0.0 and self.beta > 0.0):
            raise ProbabilityOutOfRange("Beta shape parameters must be positive")

    @property
    def mean(self) -> float:
        return self.alpha / (self.alpha + self.beta)

    @property
    def variance(self) -> float:
        s = self.alpha + self.beta
        return self.alpha * self.beta / (s * s * (s + 1.0))

    def sample(self, rng: np.random.Generator, size: int) -> np.ndarray:
        return rng.beta(self.alpha, self.beta, size=size)
