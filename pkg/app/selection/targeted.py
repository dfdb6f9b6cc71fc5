"""
Targeted influence-curve rule.

Undersmooths until the plug-in solves its efficient influence curve
equation to the level |P_n D*| < P_n{D*^2} / (sqrt(n) log n).
"""

import math

import numpy as np
from errors import SelectorError
from hal.dataset import Dataset
from hal.lasso import HalFit, PathResult
from schemas.run_config import UndersmoothConfig

from .base import EicEvaluator, RuleContext, UndersmoothRule
from .reports import CriterionPoint, SelectorReport


def eic_threshold(Pn_Dstar_sq: float, n: float) -> float:
    """P_n{D*^2} / (sqrt(n) log n)."""
    return Pn_Dstar_sq / (math.sqrt(n) * math.log(n))


class TargetedEicRule(UndersmoothRule):
    """
    The threshold moves with the fit: both sides use the same candidate, so
    threshold() only reports the value at the CV fit.
    """

    rule_type = "targeted_eic"
    display_name = "Targeted EIC"
    needs_active_set = False

    def _eic(self, context: RuleContext, fit: HalFit) -> np.ndarray:
        if context.eic_evaluator is None:
            raise SelectorError("The targeted rule needs an influence-curve evaluator")
        try:
            return np.asarray(context.eic_evaluator(fit), dtype=float)
        except SelectorError:
            raise
        except Exception as e:
            raise SelectorError("Influence-curve evaluation failed", [f"{type(e).__name__}: {e}"]) from e

    def threshold(self, context: RuleContext) -> float:
        eic = self._eic(context, context.cv_report.cv_fit)
        return eic_threshold(float(np.mean(eic**2)), eic.shape[0])

    def is_satisfied(self, point: CriterionPoint, threshold: float, context: RuleContext) -> bool:
        # an exactly solved equation counts even when P_n{D*^2} is 0
        if point.Pn_Dstar == 0.0:
            return True
        if context.threshold is not None:
            return abs(point.Pn_Dstar) < context.threshold
        n = context.n_obs if context.n_obs is not None else context.data.n
        return abs(point.Pn_Dstar) < eic_threshold(point.Pn_Dstar_sq, n)

    def select(self, context: RuleContext) -> SelectorReport:
        if context.eic_evaluator is None:
            raise SelectorError("The targeted rule needs an influence-curve evaluator")
        guarded = RuleContext(
            path=context.path,
            design=context.design,
            data=context.data,
            cfg=context.cfg,
            cv_report=context.cv_report,
            n_obs=context.n_obs,
            eic_evaluator=lambda fit: self._eic(context, fit),
            threshold=context.threshold,
        )
        return super().select(guarded)


def undersmooth_targeted(
    path: PathResult,
    design: np.ndarray,
    data: Dataset,
    eic_evaluator: EicEvaluator,
    cfg: UndersmoothConfig,
    cv_report: SelectorReport,
    *,
    threshold: float | None = None,
    n_obs: float | None = None,
) -> SelectorReport:
    """
    Smallest C >= C_cv with |P_n D*| < P_n{D*^2} / (sqrt(n) log n).

    The influence curve is recomputed for every candidate fit with the
    nuisance held fixed inside eic_evaluator.

    Raises:
        SelectorError: If the evaluator is missing or fails.
    """
    context = RuleContext(
        path, design, data, cfg, cv_report, n_obs=n_obs, eic_evaluator=eic_evaluator, threshold=threshold
    )
    return TargetedEicRule().select(context)
