"""Monte Carlo estimator and the selection-ratio sweep."""

import math

import numpy as np
import pytest

from sempool.errors import EmptySelection, GridEmpty, ProbabilityOutOfRange, RatioOutOfRange
from sempool.theory import (
    ActivationModel,
    BetaParams,
    closed_form_fpr,
    make_ramp_model,
    monte_carlo_fpr,
    selection_sweep,
)


class TestMonteCarloFpr:
    def test_identical_distributions_recover_tpr(self):
        model = ActivationModel(in_probs=[0.3] * 200, out_probs=[0.3] * 200)
        for tpr in (0.5, 0.95):
            fpr = monte_carlo_fpr(model, range(200), tpr, trials=20_000, seed=7)
            assert abs(fpr - tpr) <= 3.0 * math.sqrt(tpr * (1 - tpr) / 20_000)

    def test_near_perfect_separation(self):
        model = ActivationModel(in_probs=[0.01] * 200, out_probs=[0.6] * 200)
        assert monte_carlo_fpr(model, range(200), 0.5, trials=20_000, seed=1) < 1e-3

    def test_matches_closed_form(self, rng):
        model = ActivationModel(
            in_probs=rng.uniform(0.05, 0.2, size=400),
            out_probs=rng.uniform(0.15, 0.45, size=400),
        )
        sel = list(range(400))
        closed = closed_form_fpr(model.in_stats(sel), model.out_stats(sel), 400, 0.5)
        mc = monte_carlo_fpr(model, sel, 0.5, trials=100_000, seed=3)
        assert abs(closed - mc) <= 0.01

    def test_bit_for_bit_reproducible(self):
        model = ActivationModel(in_probs=[0.1] * 50, out_probs=[0.3] * 50)
        a = monte_carlo_fpr(model, range(50), 0.5, trials=10_000, seed=42)
        b = monte_carlo_fpr(model, range(50), 0.5, trials=10_000, seed=42)
        assert a == b
        c = monte_carlo_fpr(model, range(50), 0.5, trials=10_000, seed=43)
        assert a != c

    def test_trial_floor_enforced(self):
        model = ActivationModel(in_probs=[0.1] * 5, out_probs=[0.3] * 5)
        with pytest.raises(ProbabilityOutOfRange):
            monte_carlo_fpr(model, range(5), 0.5, trials=9_999, seed=0)

    def test_empty_selection(self):
        model = ActivationModel(in_probs=[0.1] * 5, out_probs=[0.3] * 5)
        with pytest.raises(EmptySelection):
            monte_carlo_fpr(model, [], 0.5, trials=10_000, seed=0)


class TestSelectionSweep:
    def test_flat_configuration_pins_fpr_to_tpr(self, rng):
        m = 300
        model = ActivationModel(in_probs=[0.25] * m, out_probs=[0.25] * m)
        affinity = rng.normal(size=m)
        points = selection_sweep(model, affinity, [0.2, 0.6, 1.0], tpr=0.5, trials=10_000)
        for point in points:
            assert point.closed_fpr == 0.5  # identical stats short-circuit
            assert abs(point.mc_fpr - 0.5) <= 3.0 * math.sqrt(0.25 / 10_000)

    def test_grid_must_be_nonempty(self, rng):
        model = ActivationModel(in_probs=[0.2] * 10, out_probs=[0.3] * 10)
        with pytest.raises(GridEmpty):
            selection_sweep(model, rng.normal(size=10), [])

    def test_ratio_validated(self, rng):
        model = ActivationModel(in_probs=[0.2] * 10, out_probs=[0.3] * 10)
        with pytest.raises(RatioOutOfRange):
            selection_sweep(model, rng.normal(size=10), [0.5, 1.5])

    def test_affinity_length_checked(self, rng):
        model = ActivationModel(in_probs=[0.2] * 10, out_probs=[0.3] * 10)
        with pytest.raises(ProbabilityOutOfRange):
            selection_sweep(model, rng.normal(size=9), [0.5])

    def test_selects_lowest_affinity_prefix(self):
        # Two-tier in-probabilities: the low-affinity half has rate .05, the
        # high half .4; at ratio .5 only the low tier is selected, so the
        # closed form must see mean .05 exactly.
        in_probs = np.array([0.05] * 50 + [0.4] * 50)
        out_probs = np.full(100, 0.3)
        model = ActivationModel(in_probs=in_probs, out_probs=out_probs)
        affinity = np.concatenate([np.linspace(0, 0.4, 50), np.linspace(0.6, 1.0, 50)])
        points = selection_sweep(model, affinity, [0.5], tpr=0.5, trials=10_000)
        oracle = closed_form_fpr(
            model.in_stats(range(50)), model.out_stats(range(50)), 50, 0.5
        )
        assert points[0].closed_fpr == oracle


class TestMakeRampModel:
    def test_linear_prefix_means(self):
        model, affinity = make_ramp_model(2000, 0.01, BetaParams(3, 7), seed=5)
        # mean of the first r*M in-probabilities must equal floor + gap*r.
        for ratio in (0.1, 0.5, 1.0):
            n = int(ratio * 2000)
            prefix_mean = float(model.in_probs[:n].mean())
            expected = 0.01 + (0.3 - 0.01) * ratio
            assert prefix_mean == pytest.approx(expected, abs=1e-12)
        assert np.all(np.diff(affinity) > 0)

    def test_stratified_prefix_out_stats_stay_flat(self):
        model, _ = make_ramp_model(2000, 0.01, BetaParams(3, 7), seed=5)
        full_mean = float(model.out_probs.mean())
        for blocks in range(2, 21, 3):
            prefix = model.out_probs[: blocks * 100]
            assert abs(float(prefix.mean()) - full_mean) < 5e-3

    def test_rejects_impossible_ramp(self):
        with pytest.raises(ProbabilityOutOfRange):
            make_ramp_model(1000, 0.5, BetaParams(3, 7), seed=0)  # floor above mean
        with pytest.raises(ProbabilityOutOfRange):
            make_ramp_model(1000, 0.0, BetaParams(8, 2), seed=0)  # ramp top above 1

    def test_fall_then_rise_small_scale(self):
        # Coarse grid on a small pool: the closed-form column must bottom out
        # strictly inside the grid.
        model, affinity = make_ramp_model(1000, 0.01, BetaParams(3, 7), seed=2)
        ratios = [round(0.1 * k, 10) for k in range(1, 11)]
        points = selection_sweep(model, affinity, ratios, tpr=0.5, trials=10_000, seed=2)
        closed = [p.closed_fpr for p in points]
        best = int(np.argmin(closed))
        assert 0 < best < len(closed) - 1
