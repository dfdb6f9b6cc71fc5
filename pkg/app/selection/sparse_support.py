"""
Sparse support rule.

Undersmooths until the smallest empirical mean P_n phi_j over the active
basis functions drops below c * n^(-1/2 + 1/(2 (k1 + 2))).
"""

import logging
import math

import numpy as np
from hal.dataset import Dataset
from hal.lasso import PathResult
from schemas.run_config import UndersmoothConfig

from .base import RuleContext, UndersmoothRule
from .reports import CriterionPoint, SelectorReport

logger = logging.getLogger(__name__)

# Slack allowed when checking that the trace is nonincreasing in C
TRACE_MONOTONE_TOL = 1e-10


def sparsity_exponent(k1: int) -> float:
    """-1/2 + alpha(k1) with alpha(k1) = 1 / (2 (k1 + 2))."""
    return -0.5 + 1.0 / (2.0 * (k1 + 2))


class SparseSupportRule(UndersmoothRule):
    rule_type = "sparse_support"
    display_name = "Sparse support"

    def threshold(self, context: RuleContext) -> float:
        k1 = context.cfg.k1 if context.cfg.k1 is not None else context.data.k
        return context.cfg.c * context.n ** sparsity_exponent(k1)

    def is_satisfied(self, point: CriterionPoint, threshold: float, context: RuleContext) -> bool:
        return point.min_active_Pn_phi <= threshold

    def check_trace(self, trace: list[CriterionPoint], start: int) -> None:
        values = [p.min_active_Pn_phi for p in trace[start:] if math.isfinite(p.min_active_Pn_phi)]
        increases = sum(1 for a, b in zip(values, values[1:], strict=False) if b > a + TRACE_MONOTONE_TOL)
        if increases:
            logger.warning(f"min active P_n phi increased {increases} time(s) along the path")


def undersmooth_sparsity(
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
    Smallest C >= C_cv whose fit has min active P_n phi_j <= c n^(-1/2 + alpha(k1)).

    Raises:
        SelectorError: If the active set is empty along the entire path.
    """
    context = RuleContext(path, design, data, cfg, cv_report, n_obs=n_obs, threshold=threshold)
    return SparseSupportRule().select(context)
