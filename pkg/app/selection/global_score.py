"""
Global score rule.

Undersmooths until the smallest absolute basis score over the active set
drops below a / (sqrt(n) log n).
"""

import math

import numpy as np
from hal.dataset import Dataset
from hal.lasso import PathResult
from hal.loss import pointwise_score, row_scale
from schemas.run_config import UndersmoothConfig

from .base import RuleContext, UndersmoothRule
from .reports import CriterionPoint, SelectorReport


def score_scale(context: RuleContext) -> float:
    """sqrt(P_n r^2) at the CV fit, r the per-observation loss score."""
    fit = context.cv_report.cv_fit
    r = pointwise_score(fit.linear_predictor(context.design), context.data, fit.loss)
    return math.sqrt(float(np.mean(r**2 / row_scale(context.data))))


class GlobalScoreRule(UndersmoothRule):
    rule_type = "global_score"
    display_name = "Global score"

    def threshold(self, context: RuleContext) -> float:
        a = context.cfg.a if context.cfg.a is not None else score_scale(context)
        n = context.n
        return a / (math.sqrt(n) * math.log(n))

    def is_satisfied(self, point: CriterionPoint, threshold: float, context: RuleContext) -> bool:
        return point.min_active_score <= threshold


def undersmooth_global(
    path: PathResult,
    design: np.ndarray,
    data: Dataset,
    cfg: UndersmoothConfig,
    cv_report: SelectorReport,
    *,
    threshold: float | None = None,
    n_obs: float | None = None,
) -> SelectorReport:
    """
    Smallest C >= C_cv whose fit has min active |score_j| <= a / (sqrt(n) log n).

    Raises:
        SelectorError: If the active set is empty along the entire path.
    """
    context = RuleContext(path, design, data, cfg, cv_report, n_obs=n_obs, threshold=threshold)
    return GlobalScoreRule().select(context)
