"""
Treatment-specific mean E[Q(1, W)].

The propensity is a cross-validated zero-order HAL logistic fit. The outcome
regression is a HAL fit on the treated rows whose L1 bound is chosen by the
configured undersmoothing rule; the estimate is the plug-in mean of
Q(1, W) over all rows.
"""

import logging
import math
from collections.abc import Callable, Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from errors import DegenerateDataError, DimensionError, DomainError, PositivityError
from hal.basis import BasisDictionary, design_matrix, enumerate_basis
from hal.dataset import Dataset
from hal.lasso import HalFit, LassoSettings
from hal.loss import BINOMIAL, LossKind
from schemas.run_config import AteConfig
from selection.base import RuleContext, empirical_means
from selection.cv import cv_select_C
from selection.registry import apply_rule
from selection.reports import SelectorReport

from .inference import wald_ci

logger = logging.getLogger(__name__)

# Maps covariate rows to the true propensity, for the oracle-nuisance diagnostic
PropensityFunction = Callable[[np.ndarray], np.ndarray]


@dataclass(frozen=True, eq=False)
class AteEstimate:
    """
    Plug-in estimate of E[Q(1, W)] with its influence curve.

    Attributes:
        psi: Mean of Q_n(1, W_i) over all rows.
        eic: Influence curve values, one per row.
        se: sd(eic) / sqrt(n); 0 when the influence curve is constant.
        ci: Wald interval at the configured level.
        rule: Rule that picked the outcome regression's bound.
        report: Selector report of the outcome regression.
        diagnostics: Scalar diagnostics of the selected fit.
    """

    psi: float
    eic: np.ndarray
    se: float
    ci: tuple[float, float]
    rule: str
    report: SelectorReport = field(repr=False)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def C_cv(self) -> float:
        return self.report.C_cv

    @property
    def C_selected(self) -> float:
        return self.report.C_selected

    def to_json(self) -> dict[str, Any]:
        return {
            "psi": self.psi,
            "se": self.se,
            "ci": list(self.ci),
            "C_cv": self.C_cv,
            "C_selected": self.C_selected,
            "rule": self.rule,
            "diagnostics": self.diagnostics,
        }


def eic_ate(
    qbar1: np.ndarray,
    qbarA: np.ndarray,
    gbar: np.ndarray,
    a: np.ndarray,
    y: np.ndarray,
    psi: float,
) -> np.ndarray:
    """
    Efficient influence curve a/g (y - Q(A, W)) + Q(1, W) - psi.

    Example:
        >>> float(eic_ate(np.array([0.5]), np.array([0.5]), np.array([0.5]), np.ones(1), np.ones(1), 0.5)[0])
        1.0

    Raises:
        DimensionError: If the vectors differ in length.
        DomainError: If any propensity is 0.
    """
    arrays = [np.asarray(v, dtype=float).reshape(-1) for v in (qbar1, qbarA, gbar, a, y)]
    if len({v.shape[0] for v in arrays}) != 1:
        raise DimensionError("Influence curve inputs differ in length", [f"lengths: {[v.shape[0] for v in arrays]}"])
    q1, qa, g, a_, y_ = arrays
    if np.any(g <= 0.0):
        raise DomainError("Propensity must be positive", [f"rows: {np.flatnonzero(g <= 0.0)[:20].tolist()}"])
    return a_ / g * (y_ - qa) + q1 - psi


# =============================================================================
# NUISANCE FITS
# =============================================================================


def fit_propensity(data: Dataset, cfg: AteConfig, settings: LassoSettings | None = None) -> tuple[np.ndarray, int]:
    """
    Zero-order HAL logistic regression of A on W with the CV-selected bound.

    Returns:
        (truncated propensities, number of truncated rows)

    Raises:
        DegenerateDataError: If A is constant.
        PositivityError: If more rows than the budget need truncation.
    """
    if data.A is None:
        raise DimensionError("Dataset has no treatment column")
    if np.all(data.A == data.A[0]):
        raise DegenerateDataError(f"Treatment is constant (all {int(data.A[0])})")

    gdata = Dataset(X=data.X, Y=data.A, column_meta=data.column_meta)
    dictionary = enumerate_basis(gdata, 0, cfg.basis.to_caps())
    design = design_matrix(gdata, dictionary)
    report = cv_select_C(gdata, dictionary, BINOMIAL, cfg.cv, settings=settings, design=design)
    g = report.cv_fit.predict(design)

    outside = np.flatnonzero((g < cfg.gmin) | (g > 1.0 - cfg.gmin))
    if outside.size > cfg.max_truncated_fraction * data.n:
        raise PositivityError(
            f"{outside.size} of {data.n} propensities fall outside [{cfg.gmin}, {1 - cfg.gmin}]",
            outside.tolist(),
        )
    if outside.size:
        logger.warning(f"Truncated {outside.size} propensities to [{cfg.gmin}, {1 - cfg.gmin}]")
    return np.clip(g, cfg.gmin, 1.0 - cfg.gmin), int(outside.size)


@dataclass(frozen=True, eq=False)
class _OutcomeProblem:
    data: Dataset
    design: np.ndarray
    dictionary: BasisDictionary
    loss: LossKind
    gbar: np.ndarray
    cv_report: SelectorReport
    truncated: int

    def eic(self, fit: HalFit, gbar: np.ndarray | None = None) -> tuple[float, np.ndarray]:
        q1 = fit.predict(self.design)
        psi = float(np.mean(q1))
        assert self.data.A is not None
        return psi, eic_ate(q1, q1, self.gbar if gbar is None else gbar, self.data.A, self.data.Y, psi)


def _outcome_problem(data: Dataset, cfg: AteConfig, settings: LassoSettings | None) -> _OutcomeProblem:
    gbar, truncated = fit_propensity(data, cfg, settings)
    loss = LossKind(cfg.loss, observation_weight="treatment")
    dictionary = enumerate_basis(data.treated(), cfg.m, cfg.basis.to_caps())
    design = design_matrix(data, dictionary)
    cv_report = cv_select_C(data, dictionary, loss, cfg.cv, settings=settings, design=design)
    return _OutcomeProblem(data, design, dictionary, loss, gbar, cv_report, truncated)


def _estimate(
    problem: _OutcomeProblem,
    cfg: AteConfig,
    rule: str,
    true_propensity: PropensityFunction | None,
) -> AteEstimate:
    context = RuleContext(
        path=problem.cv_report.path,  # type: ignore[arg-type]
        design=problem.design,
        data=problem.data,
        cfg=cfg.undersmooth,
        cv_report=problem.cv_report,
        eic_evaluator=lambda fit: problem.eic(fit)[1],
    )
    report = apply_rule(context, rule)
    fit = report.selected_fit
    psi, eic = problem.eic(fit)
    n = eic.shape[0]

    try:
        lo, hi, se = wald_ci(psi, eic, cfg.level)
    except DegenerateDataError:
        logger.warning("Influence curve is constant; reporting se = 0")
        lo, hi, se = psi, psi, 0.0

    active = np.asarray(fit.penalized_active, dtype=int)
    Pn_phi = empirical_means(problem.design, problem.data)
    point = report.criterion_trace[report.index_selected] if report.criterion_trace else None
    diagnostics: dict[str, Any] = {
        "sqrt_n_PnDstar": math.sqrt(n) * float(np.mean(eic)),
        "PnDstar_sq": float(np.mean(eic**2)),
        "min_active_Pn_phi": float(Pn_phi[active].min()) if active.size else math.inf,
        "sqrt_n_min_active_score": math.sqrt(n) * point.min_active_score if point is not None else math.nan,
        "C_cv": report.C_cv,
        "C_selected": report.C_selected,
        "variation_norm": fit.C,
        "threshold": report.threshold,
        "not_met": report.not_met,
        "truncated_propensities": problem.truncated,
        "basis_size": len(problem.dictionary),
    }
    if true_propensity is not None:
        _, eic0 = problem.eic(fit, np.asarray(true_propensity(problem.data.X), dtype=float))
        diagnostics["sqrt_n_PnDstar_true_g"] = math.sqrt(n) * float(np.mean(eic0))

    logger.info(f"ATE ({rule}): psi={psi:.6g} se={se:.4g} C_cv={report.C_cv:.6g} C_selected={report.C_selected:.6g}")
    return AteEstimate(psi=psi, eic=eic, se=se, ci=(lo, hi), rule=rule, report=report, diagnostics=diagnostics)


def fit_ate_rules(
    data: Dataset,
    cfg: AteConfig,
    rules: Sequence[str],
    *,
    settings: LassoSettings | None = None,
    true_propensity: PropensityFunction | None = None,
) -> dict[str, AteEstimate]:
    """
    Estimates under several rules sharing one set of nuisance fits and one path.

    Raises:
        DegenerateDataError: If A is constant.
        PositivityError: If too many propensities need truncation.
        SelectorError: If a rule fails.
    """
    settings = settings or cfg.lasso.to_settings()
    problem = _outcome_problem(data, cfg, settings)
    return {rule: _estimate(problem, cfg, rule, true_propensity) for rule in rules}


def fit_ate(
    data: Dataset,
    cfg: AteConfig,
    *,
    settings: LassoSettings | None = None,
    true_propensity: PropensityFunction | None = None,
) -> AteEstimate:
    """
    Undersmoothed HAL plug-in estimate of E[Q(1, W)].

    Args:
        data: Covariates W, treatment A and outcome Y.
        cfg: Loss, order, truncation, selection and solver settings.
        settings: Solver tolerances (defaults to cfg.lasso).
        true_propensity: Known propensity for the oracle-nuisance diagnostic.

    Returns:
        AteEstimate under cfg.undersmooth.rule.
    """
    rule = cfg.undersmooth.rule
    return fit_ate_rules(data, cfg, [rule], settings=settings, true_propensity=true_propensity)[rule]
