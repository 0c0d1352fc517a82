"""Estimation of stochastically ordered conditional distributions.

Given pairs (x_i, y_i), fit distribution functions F_x that decrease in x
at every threshold, via per-threshold antitonic least squares, and derive
isotonic quantile curves from the same fit or from check-loss regression.
"""

from .cdf_fit import CdfFamilyFit, evaluate_cdf, fit_cdf_family, fit_from_json, fit_to_json
from .isoreg import (
    LossOracle,
    PinballOracle,
    SolutionBand,
    SquaredOracle,
    check_membership,
    minmax_band,
    pava_antitonic_ls,
    pava_isotonic_ls,
)
from .order_core import (
    DesignGroups,
    Observation,
    StepCDF,
    empirical_cdf,
    group_by_design,
    pooled_cdf,
    step_quantile,
)
from .quantile_fit import (
    QuantileBand,
    pinball_risk,
    plugin_quantiles,
    quantile_band,
    smooth_band_curve,
)

__version__ = "0.1.0"

__all__ = [
    "CdfFamilyFit",
    "DesignGroups",
    "LossOracle",
    "Observation",
    "PinballOracle",
    "QuantileBand",
    "SolutionBand",
    "SquaredOracle",
    "StepCDF",
    "check_membership",
    "empirical_cdf",
    "evaluate_cdf",
    "fit_cdf_family",
    "fit_from_json",
    "fit_to_json",
    "group_by_design",
    "minmax_band",
    "pava_antitonic_ls",
    "pava_isotonic_ls",
    "pinball_risk",
    "plugin_quantiles",
    "pooled_cdf",
    "quantile_band",
    "smooth_band_curve",
    "step_quantile",
]
