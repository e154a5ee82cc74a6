"""Closed-form FPR curves over the negative-label selection ratio.

The chain implemented here:

* ``closed_form_fpr`` -- FPR at a fixed TPR from the normal approximation of
  the ID/OOD activation counts.
* ``ActivationRamp`` -- a model of how the mean ID-activation probability of
  the selected labels climbs from its floor toward the OOD mean as the
  selection ratio grows from 0 to 1.
* ``fpr_curve_point`` / ``fpr_curve_slope`` -- FPR at TPR=0.5 along the ramp,
  with its analytic first derivative; the curve falls, bottoms out, and rises.
* ``find_critical_ratio`` -- the ratio at which the derivative vanishes
  (1/3 for a linear ramp).
* ``optimal_fpr`` -- the curve value at the critical ratio, in the form that
  exposes pool size and OOD activation mean as the driving factors.
* ``ood_gain_condition`` -- the sign condition under which raising the OOD
  activation mean improves the optimum.

The curve treats the selected-label count as the continuous quantity
ratio*pool_size; the integer count floor(ratio*pool_size) is reported on each
curve point but does not enter the formulas, so the analytic derivative and
central finite differences of the curve agree everywhere.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from ..errors import (
    DegenerateGap,
    DegenerateVariance,
    NoRootInInterval,
    ProbabilityOutOfRange,
    RatioOutOfRange,
)
from .activation import SummaryStats
from .special import erfinv

__all__ = [
    "ActivationRamp",
    "FprCurvePoint",
    "ConditionCheck",
    "closed_form_fpr",
    "fpr_curve_point",
    "fpr_curve_slope",
    "find_critical_ratio",
    "optimal_fpr",
    "ood_gain_condition",
]

_SQRT_2PI = math.sqrt(2.0 * math.pi)


def _clamp01(x: float) -> float:
    return min(1.0, max(0.0, x))


def _positive_spread(mean: float, variance: float) -> float:
    """mean*(1-mean) - variance, rejecting non-positive values."""
    if variance < 0.0:
        raise ProbabilityOutOfRange(f"variance must be non-negative, got {variance!r}")
    spread = mean * (1.0 - mean) - variance
    if spread <= 0.0:
        raise DegenerateVariance(
            f"q(1-q) - v = {spread!r} must be strictly positive "
            f"(mean={mean!r}, variance={variance!r})"
        )
    return spread


def _half_erfc_neg(x: float) -> float:
    """0.5 + 0.5*erf(x), computed as 0.5*erfc(-x) to keep tiny tails nonzero."""
    return 0.5 * math.erfc(-x)


@dataclass(frozen=True)
class ActivationRamp:
    """Accumulated increase of the selected labels' mean ID-activation rate.

    ``value(r)`` is 0 at r=0 and ``ceiling - floor`` at r=1; it never
    decreases.  ``floor`` is the ID-activation rate of the single most
    dissimilar label, ``ceiling`` the mean OOD-activation rate reached when
    the whole pool is selected.

    ``curvature_ok`` records whether |value''| <= value' held on a check grid
    (second central differences).  A violation is reported, never rejected:
    only the monotonicity analysis of the slope relies on it, and concave
    ramps legitimately break it near r=1.
    """

    floor: float
    ceiling: float
    family: str
    _value: Callable[[float], float] = field(repr=False)
    _slope: Callable[[float], float] = field(repr=False)
    curvature_ok: bool = field(init=False)
    curvature_margin: float = field(init=False)

    def __post_init__(self):
        if not (0.0 <= self.floor <= 1.0 and 0.0 <= self.ceiling <= 1.0):
            raise ProbabilityOutOfRange("ramp endpoints must lie in [0, 1]")
        if self.ceiling < self.floor:
            raise ProbabilityOutOfRange(
                f"ceiling {self.ceiling!r} must not be below floor {self.floor!r}"
            )
        ok, margin = self._curvature_check()
        object.__setattr__(self, "curvature_ok", ok)
        object.__setattr__(self, "curvature_margin", margin)

    # -- construction -------------------------------------------------------

    @classmethod
    def linear(cls, floor: float, ceiling: float) -> "ActivationRamp":
        """value(r) = (ceiling - floor) * r."""
        gap = ceiling - floor
        return cls(floor, ceiling, "linear", lambda r: gap * r, lambda r: gap)

    @classmethod
    def quadratic_concave(cls, floor: float, ceiling: float) -> "ActivationRamp":
        """value(r) = (ceiling - floor) * (2r - r^2): steep early, flat late."""
        gap = ceiling - floor
        return cls(
            floor,
            ceiling,
            "quadratic-concave",
            lambda r: gap * (2.0 * r - r * r),
            lambda r: gap * (2.0 - 2.0 * r),
        )

    @classmethod
    def tabulated(
        cls, floor: float, ceiling: float, ratios: Sequence[float], values: Sequence[float]
    ) -> "ActivationRamp":
        """Monotone table of (ratio, value) knots, linearly interpolated.

        The table must start at (0, 0), end at (1, ceiling - floor), and be
        non-decreasing in both coordinates.  The slope at a knot is the slope
        of the segment to its right (left segment at r=1).
        """
        r = np.asarray(ratios, dtype=np.float64)
        u = np.asarray(values, dtype=np.float64)
        if r.ndim != 1 or r.shape != u.shape or r.size < 2:
            raise ProbabilityOutOfRange("tabulated ramp needs matching knot arrays, >= 2 knots")
        if r[0] != 0.0 or r[-1] != 1.0 or np.any(np.diff(r) <= 0.0):
            raise ProbabilityOutOfRange("knot ratios must increase strictly from 0 to 1")
        if abs(u[0]) > 1e-12 or abs(u[-1] - (ceiling - floor)) > 1e-9:
            raise ProbabilityOutOfRange("ramp table must run from 0 to ceiling - floor")
        if np.any(np.diff(u) < 0.0):
            raise ProbabilityOutOfRange("ramp table must be non-decreasing")
        r = r.copy()
        u = u.copy()
        r.setflags(write=False)
        u.setflags(write=False)
        slopes = np.diff(u) / np.diff(r)

        def value(x: float) -> float:
            return float(np.interp(x, r, u))

        def slope(x: float) -> float:
            idx = int(np.searchsorted(r, x, side="right")) - 1
            idx = min(max(idx, 0), slopes.size - 1)
            return float(slopes[idx])

        return cls(floor, ceiling, "tabulated-monotone", value, slope)

    # -- evaluation ----------------------------------------------------------

    def value(self, ratio: float) -> float:
        return self._value(ratio)

    def slope(self, ratio: float) -> float:
        return self._slope(ratio)

    @property
    def gap(self) -> float:
        """ceiling - floor, the total rise of the ramp."""
        return self.ceiling - self.floor

    def _curvature_check(self, points: int = 101) -> tuple[bool, float]:
        # |u''| <= u' via second central differences on an interior grid.
        h = 1.0 / (points + 1)
        worst = -math.inf
        for i in range(1, points + 1):
            r = i * h
            second = (self._value(r + h) - 2.0 * self._value(r) + self._value(r - h)) / (h * h)
            worst = max(worst, abs(second) - self._slope(r))
        return worst <= 1e-9, worst


@dataclass(frozen=True)
class FprCurvePoint:
    """One evaluation of the FPR-at-TPR-0.5 curve.

    ``label_count`` is the integer number of selected labels,
    floor(ratio * pool_size) with a minimum of 1; the smooth fields ``z``,
    ``fpr``, ``slope`` and ``prefactor`` are computed from the continuous
    count ratio * pool_size.
    """

    ratio: float
    label_count: int
    z: float
    fpr: float
    slope: float
    prefactor: float

    def __post_init__(self):
        if not 0.0 <= self.fpr <= 1.0:
            raise ProbabilityOutOfRange(f"fpr {self.fpr!r} outside [0, 1]")


@dataclass(frozen=True)
class ConditionCheck:
    """Sign and margin of the OOD-rate sensitivity condition."""

    holds: bool
    margin: float


def closed_form_fpr(
    in_stats: SummaryStats, out_stats: SummaryStats, selected_count: int, tpr: float
) -> float:
    """FPR at the threshold that fixes the ID true-positive rate to ``tpr``.

    Derived from the normal approximations of the ID/OOD activation counts
    over ``selected_count`` labels; clamped to [0, 1] against overflow of the
    error-function argument.  When the two summary statistics coincide the
    result is exactly ``tpr``.
    """
    if not 0.0 < tpr < 1.0:
        raise ProbabilityOutOfRange(f"tpr must lie in (0, 1), got {tpr!r}")
    if selected_count < 1:
        raise ProbabilityOutOfRange(f"selected_count must be >= 1, got {selected_count!r}")
    spread_in = in_stats.require_positive_spread()
    spread_out = out_stats.require_positive_spread()
    scale = math.sqrt(spread_in / spread_out)
    shift = (
        math.sqrt(selected_count)
        * (in_stats.mean - out_stats.mean)
        / math.sqrt(2.0 * spread_out)
    )
    if scale == 1.0 and shift == 0.0:
        # erf(erfinv(.)) is the identity; skip the numeric round trip.
        return tpr
    return _clamp01(_half_erfc_neg(scale * erfinv(2.0 * tpr - 1.0) + shift))


def fpr_curve_point(
    ratio: float, ramp: ActivationRamp, out_variance: float, pool_size: int
) -> FprCurvePoint:
    """Evaluate the FPR-at-TPR-0.5 curve at one selection ratio.

    ``out_variance`` is the variance of the OOD activation probabilities and
    ``pool_size`` the total number of candidates.  Raises
    :class:`DegenerateVariance` when ceiling*(1-ceiling) - out_variance <= 0
    and :class:`RatioOutOfRange` for ratios outside (0, 1].
    """
    if not 0.0 < ratio <= 1.0:
        raise RatioOutOfRange(f"ratio must lie in (0, 1], got {ratio!r}")
    if pool_size < 1:
        raise ProbabilityOutOfRange(f"pool_size must be >= 1, got {pool_size!r}")
    spread = _positive_spread(ramp.ceiling, out_variance)

    count = ratio * pool_size
    gap = ramp.floor - ramp.ceiling + ramp.value(ratio)
    z = math.sqrt(count / 2.0) * gap / math.sqrt(spread)
    fpr = _clamp01(_half_erfc_neg(z))
    decay = math.exp(-z * z)
    prefactor = math.sqrt(pool_size / (2.0 * math.pi)) * decay / math.sqrt(spread)
    slope = (
        (pool_size * decay / (2.0 * _SQRT_2PI))
        * (gap + 2.0 * ratio * ramp.slope(ratio))
        / (math.sqrt(count) * math.sqrt(spread))
    )
    return FprCurvePoint(
        ratio=ratio,
        label_count=max(1, math.floor(count)),
        z=z,
        fpr=fpr,
        slope=slope,
        prefactor=prefactor,
    )


def fpr_curve_slope(
    ratio: float, ramp: ActivationRamp, out_variance: float, pool_size: int
) -> float:
    """Analytic first derivative of the TPR-0.5 FPR curve at ``ratio``.

    Matches central finite differences of :func:`fpr_curve_point` to relative
    tolerance 1e-4; diverges to -inf as the ratio approaches 0 and is
    non-negative at ratio 1.
    """
    return fpr_curve_point(ratio, ramp, out_variance, pool_size).slope


def find_critical_ratio(
    ramp: ActivationRamp, *, scan_points: int = 4096, tol: float = 1e-12
) -> float:
    """Smallest ratio in (0, 1] where the FPR curve's derivative vanishes.

    Solves floor - ceiling + value(r) + 2r*slope(r) = 0 by a sign-change scan
    followed by bisection to interval width ``tol``; for ramps with a
    continuous slope the residual at the returned root is below 1e-10.  A
    tabulated ramp's slope jumps at knots, where the expression may cross
    zero discontinuously; the crossing is then localized to ``tol`` instead.
    A linear ramp yields exactly 1/3.
    """
    if ramp.ceiling == ramp.floor:
        raise DegenerateGap("floor == ceiling: the critical-ratio equation is identically 0")

    def f(r: float) -> float:
        return ramp.floor - ramp.ceiling + ramp.value(r) + 2.0 * r * ramp.slope(r)

    grid = np.linspace(1.0 / scan_points, 1.0, scan_points)
    prev_r = float(grid[0])
    prev_f = f(prev_r)
    if prev_f == 0.0:
        return prev_r
    lo = hi = None
    for r in grid[1:]:
        cur = f(float(r))
        if cur == 0.0:
            lo = hi = float(r)
            break
        if prev_f < 0.0 < cur:
            lo, hi = prev_r, float(r)
            break
        prev_r, prev_f = float(r), cur
    if lo is None:
        raise NoRootInInterval("derivative expression never changes sign on (0, 1]")
    if lo == hi:
        return lo
    while hi - lo > tol:
        mid = 0.5 * (lo + hi)
        if f(mid) < 0.0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def optimal_fpr(
    floor: float,
    ceiling: float,
    out_variance: float,
    pool_size: int,
    critical_ratio: float,
) -> float:
    """FPR-at-TPR-0.5 at the critical ratio, in closed form.

    Strictly decreasing in ``pool_size`` for a fixed activation gap, and in
    ``ceiling`` whenever :func:`ood_gain_condition` holds.  Agrees exactly
    with :func:`fpr_curve_point` at the critical ratio of a linear ramp.
    """
    if not (0.0 <= floor <= 1.0 and 0.0 <= ceiling <= 1.0):
        raise ProbabilityOutOfRange("floor and ceiling must lie in [0, 1]")
    if ceiling < floor:
        raise ProbabilityOutOfRange("ceiling must not be below floor")
    if not 0.0 < critical_ratio <= 1.0:
        raise RatioOutOfRange(f"critical_ratio must lie in (0, 1], got {critical_ratio!r}")
    if pool_size < 1:
        raise ProbabilityOutOfRange(f"pool_size must be >= 1, got {pool_size!r}")
    spread = _positive_spread(ceiling, out_variance)
    arg = (
        -math.sqrt(2.0 * pool_size)
        * critical_ratio**1.5
        * (ceiling - floor)
        / math.sqrt(spread)
    )
    return _clamp01(_half_erfc_neg(arg))


def ood_gain_condition(floor: float, out_mean: float, out_variance: float) -> ConditionCheck:
    """Margin of the condition guaranteeing the optimum improves with out_mean.

    The optimum's derivative in the OOD activation mean is non-positive iff
    ``out_mean + floor - 2*floor*out_mean - 2*out_variance >= 0``; the check
    returns that margin and its sign.  Holds for any distribution without a
    heavy spike at 0 (e.g. every Beta with alpha >= min(0.5, beta)).
    """
    if not (0.0 <= floor <= 1.0 and 0.0 <= out_mean <= 1.0):
        raise ProbabilityOutOfRange("rates must lie in [0, 1]")
    if out_variance < 0.0:
        raise ProbabilityOutOfRange("variance must be non-negative")
    margin = out_mean + floor - 2.0 * floor * out_mean - 2.0 * out_variance
    return ConditionCheck(holds=margin >= 0.0, margin=margin)
