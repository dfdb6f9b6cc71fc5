"""
Selection of the L1 bound: cross-validation and undersmoothing rules.
"""

from .base import EicEvaluator, RuleContext, UndersmoothRule, empirical_means
from .cv import cross_validate_path, cv_select_C, cv_select_m, lambda_grid_for, select_from_curve
from .cv_rule import CvRule
from .global_score import GlobalScoreRule, undersmooth_global
from .registry import RuleRegistry, apply_rule, default_registry
from .reports import TRACE_COLUMNS, CriterionPoint, SelectorReport
from .sparse_support import SparseSupportRule, undersmooth_sparsity
from .splits import fold_indices, vfold_split
from .targeted import TargetedEicRule, undersmooth_targeted

__all__ = [
    "TRACE_COLUMNS",
    "CriterionPoint",
    "CvRule",
    "EicEvaluator",
    "GlobalScoreRule",
    "RuleContext",
    "RuleRegistry",
    "SelectorReport",
    "SparseSupportRule",
    "TargetedEicRule",
    "UndersmoothRule",
    "apply_rule",
    "cross_validate_path",
    "cv_select_C",
    "cv_select_m",
    "default_registry",
    "empirical_means",
    "fold_indices",
    "lambda_grid_for",
    "select_from_curve",
    "undersmooth_global",
    "undersmooth_sparsity",
    "undersmooth_targeted",
    "vfold_split",
]
