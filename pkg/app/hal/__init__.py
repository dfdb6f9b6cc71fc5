"""
HAL core: datasets, spline bases, losses, and the lasso solver.
"""

from .basis import (
    BasisCaps,
    BasisDictionary,
    BasisFunction,
    UnivariateSpline,
    design_matrix,
    enumerate_basis,
    eval_basis,
    eval_univariate,
    integrate_basis,
    sectional_variation_norm,
)
from .dataset import ColumnMeta, Dataset
from .lasso import (
    HalFit,
    KktReport,
    LassoSettings,
    PathResult,
    basis_scores,
    fit_constrained,
    fit_penalized,
    kkt_check,
    lasso_path,
)
from .loss import BINOMIAL, SQUARED_ERROR, LossKind, pointwise_score, risk

__all__ = [
    "BINOMIAL",
    "SQUARED_ERROR",
    "BasisCaps",
    "BasisDictionary",
    "BasisFunction",
    "ColumnMeta",
    "Dataset",
    "HalFit",
    "KktReport",
    "LassoSettings",
    "LossKind",
    "PathResult",
    "UnivariateSpline",
    "basis_scores",
    "design_matrix",
    "enumerate_basis",
    "eval_basis",
    "eval_univariate",
    "fit_constrained",
    "fit_penalized",
    "integrate_basis",
    "kkt_check",
    "lasso_path",
    "pointwise_score",
    "risk",
    "sectional_variation_norm",
]
