"""Statistical model of semantic-pool OOD detection.

Exact activation-count distributions, their normal approximation, closed-form
FPR curves over the selection ratio, critical-ratio analysis, and Monte Carlo
validation.  All operations are pure functions of immutable inputs and safe
to call concurrently.
"""

from .activation import ActivationModel, BetaParams, SummaryStats, as_prob_array
from .curves import (
    ActivationRamp,
    ConditionCheck,
    FprCurvePoint,
    closed_form_fpr,
    find_critical_ratio,
    fpr_curve_point,
    fpr_curve_slope,
    ood_gain_condition,
    optimal_fpr,
)
from .distributions import (
    DEFAULT_PMF_CAP,
    NormalApprox,
    clt_convergence_gap,
    normal_approx,
    poisson_binomial_pmf,
)
from .simulate import (
    MIN_TRIALS,
    SweepPoint,
    make_ramp_model,
    monte_carlo_fpr,
    selection_sweep,
)
from .special import erf, erfinv, normal_cdf

__all__ = [
    "ActivationModel",
    "ActivationRamp",
    "BetaParams",
    "ConditionCheck",
    "DEFAULT_PMF_CAP",
    "FprCurvePoint",
    "MIN_TRIALS",
    "NormalApprox",
    "SummaryStats",
    "SweepPoint",
    "as_prob_array",
    "clt_convergence_gap",
    "closed_form_fpr",
    "erf",
    "erfinv",
    "find_critical_ratio",
    "fpr_curve_point",
    "fpr_curve_slope",
    "make_ramp_model",
    "monte_carlo_fpr",
    "normal_approx",
    "normal_cdf",
    "ood_gain_condition",
    "optimal_fpr",
    "poisson_binomial_pmf",
    "selection_sweep",
]
