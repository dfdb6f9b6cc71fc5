"""
Integral of the squared density through a binned hazard fit.

The real line is cut into B equal bins over the padded sample range. The
discrete hazard of "falling in bin b given at least bin b" is a zero-order
HAL logistic regression on the bin midpoint, fitted to the pooled
long-format data. Long-format rows sharing a bin are identical up to their
event flag, so the fit runs on one frequency-weighted row per at-risk bin
(at-risk count as weight, event share as outcome), which has the same
likelihood.
"""

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
from errors import DegenerateDataError, DimensionError, DomainError
from hal.basis import BasisDictionary, design_matrix, enumerate_basis
from hal.dataset import ColumnMeta, Dataset
from hal.lasso import HalFit, LassoSettings, lasso_path
from hal.loss import BINOMIAL
from schemas.run_config import DensityConfig, UndersmoothConfig
from selection.base import RuleContext
from selection.cv import FoldProblem, cross_validate_path, lambda_grid_for, select_from_curve
from selection.registry import apply_rule
from selection.reports import SelectorReport
from selection.splits import fold_indices, vfold_split

from .inference import wald_ci

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

MIN_BINS = 10
MIN_OBSERVATIONS = 50

# Half-width of the binned range when every observation is equal
DEGENERATE_PAD = 0.5


# =============================================================================
# BINNING
# =============================================================================


def make_edges(o: np.ndarray, B: int, pad_fraction: float = 0.001) -> np.ndarray:
    """B + 1 equidistant edges over [min - pad, max + pad], pad = pad_fraction * range."""
    lo, hi = float(np.min(o)), float(np.max(o))
    spread = hi - lo
    pad = pad_fraction * spread if spread > 0 else DEGENERATE_PAD
    return np.linspace(lo - pad, hi + pad, B + 1)


def bin_index(o: np.ndarray, edges: np.ndarray) -> np.ndarray:
    """Zero-based bin of every value; -1 outside the edges."""
    values = np.asarray(o, dtype=float)
    idx = np.searchsorted(edges, values, side="right") - 1
    B = edges.shape[0] - 1
    idx[values == edges[-1]] = B - 1
    idx[(values < edges[0]) | (values > edges[-1])] = -1
    return idx


def _midpoints(edges: np.ndarray) -> np.ndarray:
    return 0.5 * (edges[:-1] + edges[1:])


def _midpoint_meta(edges: np.ndarray) -> tuple[ColumnMeta, ...]:
    mids = _midpoints(edges)
    return (ColumnMeta(name="bin_midpoint", min=float(mids.min()), max=float(mids.max()), is_binary=False),)


def long_format(o: np.ndarray, edges: np.ndarray) -> Dataset:
    """
    One row per (observation, bin at risk).

    Observation i in bin b_i contributes rows for bins 0..b_i with
    X = bin midpoint and Y = I(bin == b_i).
    """
    idx = bin_index(o, edges)
    if np.any(idx < 0):
        raise DomainError("Observations fall outside the binned range")
    mids = _midpoints(edges)
    bins = np.concatenate([np.arange(b + 1) for b in idx])
    events = np.concatenate([np.arange(b + 1) == b for b in idx]).astype(float)
    return Dataset(X=mids[bins].reshape(-1, 1), Y=events, column_meta=_midpoint_meta(edges))


def aggregate(idx: np.ndarray, edges: np.ndarray) -> tuple[Dataset, np.ndarray]:
    """
    Long-format data collapsed to one weighted row per at-risk bin.

    Returns:
        (dataset with frequency = at-risk count and Y = event share,
         indices of the at-risk bins)
    """
    B = edges.shape[0] - 1
    events = np.bincount(idx, minlength=B).astype(float)
    at_risk = events[::-1].cumsum()[::-1]
    bins = np.flatnonzero(at_risk > 0)
    data = Dataset(
        X=_midpoints(edges)[bins].reshape(-1, 1),
        Y=events[bins] / at_risk[bins],
        frequency=at_risk[bins],
        column_meta=_midpoint_meta(edges),
    )
    return data, bins


# =============================================================================
# DENSITY OBJECTS
# =============================================================================


@dataclass(frozen=True, eq=False)
class HazardDensity:
    """
    Piecewise-constant density assembled from bin hazards.

    Attributes:
        bin_edges: B + 1 equidistant edges.
        hazard: Fitted hazard per bin.
        density: hazard_b * prod_{b' < b}(1 - hazard_b') / binwidth.
        binwidth: Common bin width.
        report: Selector report of the hazard fit.
    """

    bin_edges: np.ndarray
    hazard: np.ndarray
    density: np.ndarray
    binwidth: float
    report: SelectorReport | None = field(default=None, repr=False)

    @classmethod
    def from_hazard(
        cls, edges: np.ndarray, hazard: np.ndarray, report: SelectorReport | None = None
    ) -> "HazardDensity":
        h = np.clip(np.asarray(hazard, dtype=float), 0.0, 1.0)
        width = float(edges[1] - edges[0])
        survival = np.concatenate([[1.0], np.cumprod(1.0 - h)[:-1]])
        return cls(bin_edges=edges, hazard=h, density=h * survival / width, binwidth=width, report=report)

    @property
    def B(self) -> int:
        return int(self.hazard.shape[0])

    @property
    def mass(self) -> float:
        return float(self.density.sum() * self.binwidth)

    @property
    def shortfall(self) -> float:
        """Probability mass left beyond the last bin."""
        return max(0.0, 1.0 - self.mass)

    def density_at(self, o: np.ndarray) -> np.ndarray:
        """Density of each value's bin; 0 outside the binned range."""
        idx = bin_index(np.asarray(o, dtype=float), self.bin_edges)
        out = np.zeros(idx.shape[0])
        inside = idx >= 0
        out[inside] = self.density[idx[inside]]
        return out


@dataclass(frozen=True, eq=False)
class DensityEstimate:
    """Plug-in estimate of the integral of p^2 with its influence curve."""

    psi: float
    eic: np.ndarray
    se: float
    ci: tuple[float, float]
    rule: str
    density: HazardDensity = field(repr=False)
    diagnostics: dict[str, Any] = field(default_factory=dict)

    @property
    def C_cv(self) -> float:
        assert self.density.report is not None
        return self.density.report.C_cv

    @property
    def C_selected(self) -> float:
        assert self.density.report is not None
        return self.density.report.C_selected

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


def psi_density(d: HazardDensity) -> float:
    """Exact integral of the squared piecewise-constant density."""
    return float(np.sum(d.density**2) * d.binwidth)


def eic_density(o: np.ndarray, d: HazardDensity, psi: float) -> np.ndarray:
    """2 (p(o_i) - psi) for every observation."""
    return 2.0 * (d.density_at(o) - psi)


# =============================================================================
# HAZARD FIT
# =============================================================================


@dataclass(frozen=True, eq=False)
class HazardProblem:
    """
    Binned data, basis, design and cross-validated path of one sample.

    Attributes:
        o: Observations.
        edges: Bin edges.
        idx: Bin of every observation.
        data: Aggregated at-risk rows.
        dictionary: Zero-order basis on the at-risk midpoints.
        grid_design: Design of every bin midpoint (B rows).
        design: Design of the at-risk rows.
        cv_report: Cross-validation over the lambda grid, with the full path.
    """

    o: np.ndarray
    edges: np.ndarray
    idx: np.ndarray
    data: Dataset
    dictionary: BasisDictionary
    grid_design: np.ndarray
    design: np.ndarray
    cv_report: SelectorReport

    def density_of(self, fit: HalFit, report: SelectorReport | None = None) -> HazardDensity:
        return HazardDensity.from_hazard(self.edges, fit.predict(self.grid_design), report)

    def eic(self, fit: HalFit) -> np.ndarray:
        d = self.density_of(fit)
        return eic_density(self.o, d, psi_density(d))


def _fold_problem(
    idx: np.ndarray, train: np.ndarray, val: np.ndarray, edges: np.ndarray, grid_design: np.ndarray
) -> FoldProblem:
    train_data, train_bins = aggregate(idx[train], edges)
    val_data, val_bins = aggregate(idx[val], edges)
    return FoldProblem(grid_design[train_bins], train_data, grid_design[val_bins], val_data)


def prepare_hazard_fit(
    o: np.ndarray,
    B: int,
    cfg: DensityConfig | None = None,
    settings: LassoSettings | None = None,
) -> HazardProblem:
    """
    Bin the sample, build the basis, and cross-validate the hazard path.

    CV folds split observations, not long-format rows, so every fold keeps
    whole hazard histories.

    Raises:
        DomainError: If B < 10, n < 50, or n * B exceeds the long-format budget.
    """
    cfg = cfg or DensityConfig()
    values = np.asarray(o, dtype=float).reshape(-1)
    n = values.shape[0]
    if B < MIN_BINS:
        raise DomainError(f"Need at least {MIN_BINS} bins, got {B}")
    if n < MIN_OBSERVATIONS:
        raise DomainError(f"Need at least {MIN_OBSERVATIONS} observations, got {n}")
    if n * B > cfg.max_long_rows:
        raise DomainError(
            f"Long format would have {n * B} rows, above the budget of {cfg.max_long_rows}",
            ["use fewer bins or a smaller sample"],
        )
    if not np.all(np.isfinite(values)):
        raise DimensionError("Observations contain NaN or infinite values")

    edges = make_edges(values, B, cfg.pad_fraction)
    idx = bin_index(values, edges)
    data, bins = aggregate(idx, edges)
    dictionary = enumerate_basis(data, 0)
    grid = Dataset(X=_midpoints(edges).reshape(-1, 1), Y=np.zeros(B), column_meta=data.column_meta)
    grid_design = design_matrix(grid, dictionary)
    design = grid_design[bins]

    intercept = dictionary.intercept_index
    lambdas = lambda_grid_for(design, data, BINOMIAL, cfg.cv, intercept, settings)
    folds = vfold_split(n, cfg.cv.folds, cfg.cv.seed)
    problems = [_fold_problem(idx, train, val, edges, grid_design) for train, val in fold_indices(folds)]
    cv_risk, cv_se = cross_validate_path(
        problems, BINOMIAL, lambdas, intercept=intercept, settings=settings, threads=cfg.cv.threads
    )
    path = lasso_path(design, data, BINOMIAL, lambdas, dictionary=dictionary, settings=settings, on_error="skip")
    cv_report = select_from_curve(lambdas, cv_risk, cv_se, path)
    logger.info(
        f"Hazard fit: n={n}, B={B}, {len(bins)} at-risk bins, "
        f"{len(dictionary)} basis functions, C_cv={cv_report.C_cv:.6g}"
    )
    return HazardProblem(values, edges, idx, data, dictionary, grid_design, design, cv_report)


def select_density(problem: HazardProblem, selector: UndersmoothConfig, rule: str | None = None) -> HazardDensity:
    """Density at the bound the rule picks on the problem's path."""
    context = RuleContext(
        path=problem.cv_report.path,  # type: ignore[arg-type]
        design=problem.design,
        data=problem.data,
        cfg=selector,
        cv_report=problem.cv_report,
        n_obs=float(problem.o.shape[0]),
        eic_evaluator=problem.eic,
    )
    report = apply_rule(context, rule or selector.rule)
    return problem.density_of(report.selected_fit, report)


def fit_density_hal(
    o: np.ndarray,
    B: int,
    selector: UndersmoothConfig,
    cfg: DensityConfig | None = None,
    settings: LassoSettings | None = None,
) -> HazardDensity:
    """
    HAL hazard density with the bound chosen by the selector's rule.

    Args:
        o: Univariate sample.
        B: Number of bins.
        selector: Undersmoothing rule and constants ("cv" keeps the CV choice).
        cfg: Binning, CV and budget settings.
        settings: Solver tolerances.
    """
    return select_density(prepare_hazard_fit(o, B, cfg, settings), selector)


def _estimate(problem: HazardProblem, cfg: DensityConfig, rule: str) -> DensityEstimate:
    d = select_density(problem, cfg.undersmooth, rule)
    psi = psi_density(d)
    eic = eic_density(problem.o, d, psi)
    n = eic.shape[0]
    try:
        lo, hi, se = wald_ci(psi, eic, cfg.level)
    except DegenerateDataError:
        logger.warning("Influence curve is constant; reporting se = 0")
        lo, hi, se = psi, psi, 0.0

    assert d.report is not None
    point = d.report.criterion_trace[d.report.index_selected]
    diagnostics: dict[str, Any] = {
        "sqrt_n_PnDstar": math.sqrt(n) * float(np.mean(eic)),
        "PnDstar_sq": float(np.mean(eic**2)),
        "min_active_Pn_phi": point.min_active_Pn_phi,
        "sqrt_n_min_active_score": math.sqrt(n) * point.min_active_score,
        "C_cv": d.report.C_cv,
        "C_selected": d.report.C_selected,
        "variation_norm": d.report.selected_fit.C,
        "threshold": d.report.threshold,
        "not_met": d.report.not_met,
        "shortfall": d.shortfall,
        "bins": d.B,
    }
    logger.info(f"Density functional ({rule}): psi={psi:.6g} se={se:.4g} shortfall={d.shortfall:.2e}")
    return DensityEstimate(psi=psi, eic=eic, se=se, ci=(lo, hi), rule=rule, density=d, diagnostics=diagnostics)


def estimate_density_rules(
    o: np.ndarray,
    cfg: DensityConfig,
    rules: Sequence[str],
    settings: LassoSettings | None = None,
) -> dict[str, DensityEstimate]:
    """Estimates under several rules on one binned sample and one path."""
    values = np.asarray(o, dtype=float).reshape(-1)
    problem = prepare_hazard_fit(values, cfg.bins_for(values.shape[0]), cfg, settings or cfg.lasso.to_settings())
    return {rule: _estimate(problem, cfg, rule) for rule in rules}


def estimate_density_functional(
    o: np.ndarray,
    cfg: DensityConfig,
    settings: LassoSettings | None = None,
) -> DensityEstimate:
    """Undersmoothed HAL plug-in estimate of the integral of p^2 under cfg.undersmooth.rule."""
    rule = cfg.undersmooth.rule
    return estimate_density_rules(o, cfg, [rule], settings)[rule]
