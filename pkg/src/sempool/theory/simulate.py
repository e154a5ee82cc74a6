"""Monte Carlo validation of the closed-form FPR and the ratio sweep.

``monte_carlo_fpr`` samples activation counts directly from the Bernoulli
model (no normal approximation anywhere in the path), thresholds at the
empirical quantile, and reports the empirical FPR.  ``selection_sweep`` pairs
that estimate with the closed form over a ratio grid, reproducing the
fall-then-rise FPR trend.

Determinism: trials are drawn in fixed-size chunks, each chunk from its own
seeded substream keyed by (master seed, stream index, chunk index).  Results
are bit-for-bit reproducible for a given seed and independent of how chunks
would be distributed across workers.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import EmptySelection, GridEmpty, ProbabilityOutOfRange, RatioOutOfRange
from .activation import ActivationModel, BetaParams
from .curves import closed_form_fpr

__all__ = [
    "SweepPoint",
    "monte_carlo_fpr",
    "selection_sweep",
    "make_ramp_model",
    "MIN_TRIALS",
]

MIN_TRIALS = 10_000

# Fixed chunk size so the substream layout never depends on trial count.
_CHUNK = 1024
_ID_STREAM = 0
_OOD_STREAM = 1


def _sample_counts(probs: np.ndarray, trials: int, seed: int, stream: int) -> np.ndarray:
    """Sample ``trials`` activation counts of sum(Bernoulli(p_i))."""
    counts = np.empty(trials, dtype=np.int64)
    done = 0
    chunk_index = 0
    while done < trials:
        n = min(_CHUNK, trials - done)
        rng = np.random.default_rng(np.random.SeedSequence((seed, stream, chunk_index)))
        draws = rng.random((n, probs.size))
        counts[done : done + n] = (draws < probs).sum(axis=1)
        done += n
        chunk_index += 1
    return counts


def _quantile_threshold(sorted_counts: np.ndarray, tpr: float) -> tuple[int, float]:
    """Smallest count t with empirical P(C <= t) >= tpr, plus the tie fraction.

    The fraction gamma in [0, 1) assigns just enough of the boundary count to
    the positive side that the empirical TPR equals ``tpr`` exactly; the same
    fractional rule is applied to the OOD counts, which realises randomized
    tie-breaking in expectation while staying deterministic.
    """
    trials = sorted_counts.size
    rank = max(1, math.ceil(tpr * trials))
    threshold = int(sorted_counts[rank - 1])
    below = int(np.searchsorted(sorted_counts, threshold, side="left"))
    at = int(np.searchsorted(sorted_counts, threshold, side="right")) - below
    gamma = (tpr * trials - below) / at
    return threshold, gamma


def monte_carlo_fpr(
    model: ActivationModel,
    selected: Sequence[int],
    tpr: float,
    trials: int = 100_000,
    seed: int = 0,
) -> float:
    """Empirical FPR at the empirical ``tpr`` quantile of simulated ID counts.

    Samples ID counts from the in-probabilities and OOD counts from the
    out-probabilities over ``selected`` label indices; thresholds at the
    empirical ``tpr``-quantile of the ID counts with fractional tie handling
    on the boundary count.  Deterministic given ``seed``.
    """
    idx = np.asarray(selected, dtype=np.int64)
    if idx.size == 0:
        raise EmptySelection("selected index set is empty")
    if not 0.0 < tpr < 1.0:
        raise ProbabilityOutOfRange(f"tpr must lie in (0, 1), got {tpr!r}")
    if trials < MIN_TRIALS:
        raise ProbabilityOutOfRange(f"trials must be >= {MIN_TRIALS}, got {trials}")

    in_counts = np.sort(_sample_counts(model.in_probs[idx], trials, seed, _ID_STREAM))
    out_counts = _sample_counts(model.out_probs[idx], trials, seed, _OOD_STREAM)

    threshold, gamma = _quantile_threshold(in_counts, tpr)
    below = int((out_counts < threshold).sum())
    at = int((out_counts == threshold).sum())
    return (below + gamma * at) / trials


@dataclass(frozen=True)
class SweepPoint:
    """One row of a ratio sweep: closed-form and Monte Carlo FPR at a ratio."""

    ratio: float
    closed_fpr: float
    mc_fpr: float


def selection_sweep(
    model: ActivationModel,
    affinity: Sequence[float],
    ratios: Sequence[float],
    tpr: float = 0.5,
    trials: int = MIN_TRIALS,
    seed: int = 0,
) -> list[SweepPoint]:
    """Sweep the selection ratio and emit closed-form vs Monte Carlo FPR.

    For each ratio the floor(ratio * pool_size) candidates with the lowest
    affinity to the ID space are selected (minimum 1); summary statistics of
    the selected subset feed the closed form, and the Monte Carlo estimate
    uses a per-ratio substream of ``seed``.  The in-probabilities must rise
    with affinity for the fall-then-rise trend to appear.
    """
    ratio_arr = [float(r) for r in ratios]
    if len(ratio_arr) == 0:
        raise GridEmpty("ratio grid is empty")
    aff = np.asarray(affinity, dtype=np.float64)
    if aff.size != model.pool_size:
        raise ProbabilityOutOfRange(
            f"affinity length {aff.size} does not match pool size {model.pool_size}"
        )
    order = np.argsort(aff, kind="stable")

    points = []
    for k, ratio in enumerate(ratio_arr):
        if not 0.0 < ratio <= 1.0:
            raise RatioOutOfRange(f"ratio must lie in (0, 1], got {ratio!r}")
        count = max(1, math.floor(ratio * model.pool_size))
        sel = order[:count]
        closed = closed_form_fpr(model.in_stats(sel), model.out_stats(sel), count, tpr)
        mc = monte_carlo_fpr(model, sel, tpr, trials=trials, seed=seed + k)
        points.append(SweepPoint(ratio=ratio, closed_fpr=closed, mc_fpr=mc))
    return points


def make_ramp_model(
    pool_size: int,
    floor: float,
    out_dist: BetaParams,
    seed: int = 0,
    stratify_block: int = 100,
) -> tuple[ActivationModel, np.ndarray]:
    """Synthetic activation model matching a linear ramp.

    In-probabilities rise linearly with affinity rank from ``floor``, scaled
    so the selected-subset mean is exactly floor + (out_mean - floor)*ratio.
    Out-probabilities are i.i.d. Beta draws dealt into ``stratify_block``-sized
    blocks so that every block contains one draw from each quantile stratum:
    prefix statistics then stay flat in the ratio, matching the model's
    constant-out-rate assumption instead of drifting with sampling noise.

    Returns the model and the affinity vector (already in selection order).
    """
    if pool_size < 2:
        raise ProbabilityOutOfRange("pool_size must be >= 2")
    out_mean = out_dist.mean
    if not floor < out_mean:
        raise ProbabilityOutOfRange(
            f"floor {floor!r} must lie below the OOD activation mean {out_mean!r}"
        )
    top = 2.0 * out_mean - floor
    if top > 1.0:
        raise ProbabilityOutOfRange(
            f"linear ramp would exceed 1 (floor={floor!r}, out mean={out_mean!r})"
        )
    if pool_size % stratify_block != 0:
        raise ProbabilityOutOfRange(
            f"pool_size {pool_size} must be a multiple of stratify_block {stratify_block}"
        )

    affinity = (np.arange(pool_size, dtype=np.float64) + 0.5) / pool_size
    in_probs = floor + 2.0 * (out_mean - floor) * affinity

    rng = np.random.default_rng(np.random.SeedSequence((seed, 2)))
    draws = np.sort(out_dist.sample(rng, pool_size))
    n_blocks = pool_size // stratify_block
    # strata[s] = contiguous quantile band s; block j takes one element of
    # each stratum, at a seeded within-stratum position.
    strata = draws.reshape(stratify_block, n_blocks)
    out_probs = np.empty(pool_size, dtype=np.float64)
    positions = np.stack([rng.permutation(n_blocks) for _ in range(stratify_block)])
    for j in range(n_blocks):
        block = strata[np.arange(stratify_block), positions[:, j]]
        out_probs[j * stratify_block : (j + 1) * stratify_block] = rng.permutation(block)
    np.clip(out_probs, 1e-9, 1.0 - 1e-9, out=out_probs)

    return ActivationModel(in_probs=in_probs, out_probs=out_probs), affinity
