"""Exact and approximate distributions of the activation count.

The count of fired labels is a Poisson-binomial variable.  This module
provides its exact pmf (quadratic-time convolution recurrence, no 2^m
enumeration), the matching normal approximation, and the Kolmogorov-style
gap between the two that quantifies how fast the normal limit kicks in.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import math

import numpy as np

from .activation import as_prob_array
from .special import normal_cdf_array

__all__ = [
    "NormalApprox",
    "poisson_binomial_pmf",
    "normal_approx",
    "clt_convergence_gap",
    "DEFAULT_PMF_CAP",
]

# Guard against accidental quadratic blow-ups; 5000 labels ~ 25M flops.
DEFAULT_PMF_CAP = 5000


@dataclass(frozen=True)
class NormalApprox:
    """Mean/variance of the normal approximation to an activation count."""

    mean: float
    variance: float

    def __post_init__(self):
        if self.variance < 0.0:
            raise ValueError(f"variance must be non-negative, got {self.variance!r}")

    @property
    def std(self) -> float:
        return math.sqrt(self.variance)


def poisson_binomial_pmf(probs: Sequence[float], *, cap: int = DEFAULT_PMF_CAP) -> np.ndarray:
    """Exact pmf of the sum of independent Bernoulli(p_i) variables.

    Returns an array of length m+1 over counts 0..m, computed by the O(m^2)
    convolution recurrence pmf <- pmf*(1-p) + shift(pmf)*p.  Sums to 1 within
    1e-12.
    """
    arr = as_prob_array(probs)
    m = arr.size
    if m > cap:
        raise ValueError(f"sequence length {m} exceeds the pmf cap {cap}")
    pmf = np.zeros(m + 1, dtype=np.float64)
    pmf[0] = 1.0
    for i, p in enumerate(arr):
        head = pmf[: i + 2]
        shifted = np.empty_like(head)
        shifted[0] = 0.0
        shifted[1:] = head[:-1]
        head *= 1.0 - p
        head += shifted * p
    return pmf


def normal_approx(probs: Sequence[float]) -> NormalApprox:
    """Normal approximation N(sum p_i, sum p_i(1-p_i)) to the count.

    Requires every probability strictly inside (0, 1); a degenerate label
    contributes zero variance and breaks the limit statement.
    """
    arr = as_prob_array(probs, strict_interior=True)
    return NormalApprox(mean=float(arr.sum()), variance=float((arr * (1.0 - arr)).sum()))


def clt_convergence_gap(probs: Sequence[float], *, cap: int = DEFAULT_PMF_CAP) -> float:
    """Max over integer k of |CDF_exact(k) - CDF_normal(k + 0.5)|.

    The +0.5 continuity correction compares the exact count CDF against the
    normal CDF at cell midpoints.  Non-negative; shrinks as the pool grows.
    """
    arr = as_prob_array(probs, strict_interior=True)
    approx = normal_approx(arr)
    pmf = poisson_binomial_pmf(arr, cap=cap)
    exact_cdf = np.cumsum(pmf)
    ks = np.arange(pmf.size, dtype=np.float64)
    normal_at_midpoints = normal_cdf_array(ks + 0.5, approx.mean, approx.std)
    return float(np.max(np.abs(exact_cdf - normal_at_midpoints)))
