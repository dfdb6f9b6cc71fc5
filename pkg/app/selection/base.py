"""
Abstract base class for undersmoothing rules.

Defines the interface every rule implements so that the estimands can pick
a rule by name from the registry. A rule evaluates a criterion on each fit
of a lasso path; the shared walk starts at the cross-validated fit and
returns the first fit (smallest C) that meets the criterion.
"""

import dataclasses
import logging
import math
from abc import ABC, abstractmethod
from collections.abc import Callable
from dataclasses import dataclass

import numpy as np
from errors import SelectorError
from hal.dataset import Dataset
from hal.lasso import HalFit, PathResult, basis_scores
from hal.loss import row_scale
from schemas.run_config import UndersmoothConfig

from .reports import CriterionPoint, SelectorReport

logger = logging.getLogger(__name__)

# Maps a candidate fit to its efficient influence curve values
EicEvaluator = Callable[[HalFit], np.ndarray]


@dataclass(frozen=True)
class RuleContext:
    """
    Inputs shared by all rules.

    Attributes:
        path: Full-data lasso path.
        design: Design matrix the path was fitted on.
        data: Observations.
        cfg: Rule constants.
        cv_report: Cross-validation report on the same path.
        n_obs: Sample size in the thresholds (defaults to the data's effective size).
        eic_evaluator: Influence-curve evaluator, for rules that need one.
        threshold: Explicit threshold overriding the rule's default.
    """

    path: PathResult
    design: np.ndarray
    data: Dataset
    cfg: UndersmoothConfig
    cv_report: SelectorReport
    n_obs: float | None = None
    eic_evaluator: EicEvaluator | None = None
    threshold: float | None = None

    @property
    def n(self) -> float:
        return float(self.n_obs) if self.n_obs is not None else self.data.effective_size


def empirical_means(design: np.ndarray, data: Dataset) -> np.ndarray:
    """P_n phi_j for every column, weighting rows by their frequency."""
    return row_scale(data) @ np.asarray(design, dtype=float) / data.n


def point_diagnostics(
    fit: HalFit,
    context: RuleContext,
    Pn_phi: np.ndarray,
    cv_risk: float,
) -> CriterionPoint:
    """Every trace quantity for one fit; min over an empty active set is +inf."""
    scores = basis_scores(fit, context.design, context.data)
    active = np.asarray(fit.penalized_active, dtype=int)
    min_score = float(np.min(np.abs(scores[active]))) if active.size else math.inf
    min_phi = float(np.min(Pn_phi[active])) if active.size else math.inf
    Pn_Dstar = math.nan
    Pn_Dstar_sq = math.nan
    if context.eic_evaluator is not None:
        eic = np.asarray(context.eic_evaluator(fit), dtype=float)
        Pn_Dstar = float(np.mean(eic))
        Pn_Dstar_sq = float(np.mean(eic**2))
    return CriterionPoint(
        lam=float(fit.lam) if fit.lam is not None else math.nan,
        C=fit.C,
        cv_risk=cv_risk,
        min_active_score=min_score,
        min_active_Pn_phi=min_phi,
        Pn_Dstar=Pn_Dstar,
        Pn_Dstar_sq=Pn_Dstar_sq,
    )


class UndersmoothRule(ABC):
    """
    Abstract base class for undersmoothing rules.

    Subclasses supply the threshold and the per-fit criterion; the walk
    along the path, the trace and the not_met handling live here.
    """

    # Rule identification
    rule_type: str = "unknown"
    display_name: str = "Unknown Rule"

    # Rules built on the active set fail when no path fit has one
    needs_active_set: bool = True

    @abstractmethod
    def threshold(self, context: RuleContext) -> float:
        """
        Default threshold for this rule.

        Args:
            context: Path, data and constants.

        Returns:
            Threshold the criterion value is compared against.
        """
        pass

    @abstractmethod
    def is_satisfied(self, point: CriterionPoint, threshold: float, context: RuleContext) -> bool:
        """
        Whether one fit meets the criterion.

        Args:
            point: Diagnostics of the fit.
            threshold: Threshold in force.
            context: Path, data and constants.

        Returns:
            True if the fit satisfies the rule.
        """
        pass

    def check_trace(self, trace: list[CriterionPoint], start: int) -> None:  # noqa: B027
        """Hook for rule-specific consistency checks on the trace."""

    def select(self, context: RuleContext) -> SelectorReport:
        """
        Walk the path from the CV choice toward larger C.

        Returns:
            Report with the smallest C >= C_cv meeting the criterion, or the
            largest path C with not_met=True.

        Raises:
            SelectorError: If the rule needs an active set and no fit from
                the CV choice onward has one, or if every fit failed.
        """
        cv_report = context.cv_report
        start = cv_report.index_cv
        threshold = context.threshold if context.threshold is not None else self.threshold(context)
        Pn_phi = empirical_means(context.design, context.data)

        trace: list[CriterionPoint] = []
        for k, point in enumerate(context.path.points):
            if point.fit is None:
                trace.append(CriterionPoint(lam=point.lam, C=math.nan, cv_risk=cv_report.cv_risk_curve[k]))
                continue
            diag = point_diagnostics(point.fit, context, Pn_phi, cv_report.cv_risk_curve[k])
            satisfied = self.is_satisfied(diag, threshold, context)
            trace.append(dataclasses.replace(diag, satisfied=satisfied))

        candidates = [k for k in range(start, len(trace)) if context.path.points[k].fit is not None]
        if not candidates:
            raise SelectorError(f"No usable path fit at or above C_cv for rule {self.rule_type}")
        fits = [context.path.points[k].fit for k in candidates]
        if self.needs_active_set and all(not fit.penalized_active for fit in fits if fit is not None):
            raise SelectorError(f"Active set is empty along the entire path for rule {self.rule_type}")
        self.check_trace(trace, start)

        chosen = next((k for k in candidates if trace[k].satisfied), None)
        not_met = chosen is None
        if not_met:
            chosen = candidates[-1]
            logger.warning(
                f"Rule {self.rule_type} not met on the path (threshold {threshold:.6g}); "
                f"using the largest C={trace[chosen].C:.6g}"
            )
        C_selected = trace[chosen].C
        if C_selected < cv_report.C_cv:
            logger.warning(f"Selected C={C_selected:.10g} below C_cv={cv_report.C_cv:.10g} (path not monotone)")

        logger.info(
            f"Rule {self.rule_type}: C_cv={cv_report.C_cv:.6g} -> C_selected={C_selected:.6g} "
            f"(path index {start} -> {chosen}{', not met' if not_met else ''})"
        )
        return cv_report.replace(
            rule=self.rule_type,
            C_selected=C_selected,
            index_selected=chosen,
            threshold=threshold,
            not_met=not_met,
            criterion_trace=tuple(trace),
        )
