"""
Worked estimands: the treatment-specific mean and the integral of the
squared density.
"""

from .ate import AteEstimate, eic_ate, fit_ate, fit_ate_rules, fit_propensity
from .density import (
    DensityEstimate,
    HazardDensity,
    HazardProblem,
    aggregate,
    bin_index,
    eic_density,
    estimate_density_functional,
    estimate_density_rules,
    fit_density_hal,
    long_format,
    make_edges,
    prepare_hazard_fit,
    psi_density,
    select_density,
)
from .inference import Z_95, wald_ci, z_quantile

__all__ = [
    "Z_95",
    "AteEstimate",
    "DensityEstimate",
    "HazardDensity",
    "HazardProblem",
    "aggregate",
    "bin_index",
    "eic_ate",
    "eic_density",
    "estimate_density_functional",
    "estimate_density_rules",
    "fit_ate",
    "fit_ate_rules",
    "fit_density_hal",
    "fit_propensity",
    "long_format",
    "make_edges",
    "prepare_hazard_fit",
    "psi_density",
    "select_density",
    "wald_ci",
    "z_quantile",
]
