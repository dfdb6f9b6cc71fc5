"""
Cross-validation selectors for the L1 bound C and the smoothness order m.

Grids are specified in lambda. Every fold fits the whole grid with warm
starts; the fold-average validation risk picks lambda, and the choice is
reported as the realized norm C of the full-data fit at that lambda.
"""

import logging
from dataclasses import dataclass

import numpy as np
from errors import SelectorError
from hal.basis import BasisCaps, BasisDictionary, design_matrix, enumerate_basis
from hal.dataset import Dataset
from hal.lasso import LassoSettings, PathResult, default_lambda_grid, lambda_max, lasso_path
from hal.loss import LossKind, risk
from managers.process_manager import ProcessManager
from schemas.run_config import CvConfig

from .reports import SelectorReport, as_tuple
from .splits import fold_indices, vfold_split

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FoldProblem:
    """Training and validation data of one fold, with their design rows."""

    train_design: np.ndarray
    train_data: Dataset
    val_design: np.ndarray
    val_data: Dataset


def _fold_risks(
    problem: FoldProblem,
    loss: LossKind,
    lambdas: np.ndarray,
    intercept: int | None,
    settings: LassoSettings | None,
) -> np.ndarray:
    path = lasso_path(
        problem.train_design,
        problem.train_data,
        loss,
        lambdas,
        intercept=intercept,
        settings=settings,
        on_error="skip",
    )
    out = np.full(lambdas.shape[0], np.nan)
    for k, point in enumerate(path.points):
        if point.fit is not None:
            out[k] = risk(point.fit.linear_predictor(problem.val_design), problem.val_data, loss)
    return out


def cross_validate_path(
    problems: list[FoldProblem],
    loss: LossKind,
    lambdas: np.ndarray,
    *,
    intercept: int | None = 0,
    settings: LassoSettings | None = None,
    threads: int = 1,
) -> tuple[np.ndarray, np.ndarray]:
    """
    Fold-average validation risk at every grid lambda.

    A grid point where any fold's fit failed gets NaN and a logged warning.

    Returns:
        (mean risk, standard error of the mean) per grid point.
    """
    pool = ProcessManager(workers=threads, kind="thread")
    risks = np.vstack(pool.run_all(lambda p: _fold_risks(p, loss, lambdas, intercept, settings), problems))
    failed = np.any(np.isnan(risks), axis=0)
    for k in np.flatnonzero(failed):
        logger.warning(f"Grid point lambda={lambdas[k]:.6g} aborted: fold fit failed")
    mean = risks.mean(axis=0)
    V = risks.shape[0]
    se = risks.std(axis=0, ddof=1) / np.sqrt(V) if V > 1 else np.zeros_like(mean)
    mean[failed] = np.nan
    se[failed] = np.nan
    return mean, se


def select_from_curve(
    lambdas: np.ndarray,
    cv_risk: np.ndarray,
    cv_se: np.ndarray,
    path: PathResult,
) -> SelectorReport:
    """
    Pick the grid point of least fold-average risk.

    np.argmin returns the first minimizer, which is the largest lambda and so
    the smallest C among ties.

    Raises:
        SelectorError: If no grid point has both a CV risk and a full-data fit.
    """
    usable = np.isfinite(cv_risk) & np.array([p.fit is not None for p in path.points])
    if not usable.any():
        raise SelectorError("Every grid point failed during cross-validation")
    masked = np.where(usable, cv_risk, np.inf)
    index = int(np.argmin(masked))
    Cs = path.Cs
    return SelectorReport(
        rule="cv",
        C_cv=float(Cs[index]),
        C_selected=float(Cs[index]),
        index_cv=index,
        index_selected=index,
        lambdas=as_tuple(lambdas),
        Cs=as_tuple(Cs),
        cv_risk_curve=as_tuple(cv_risk),
        cv_risk_se=as_tuple(cv_se),
        path=path,
    )


def lambda_grid_for(
    design: np.ndarray,
    data: Dataset,
    loss: LossKind,
    cfg: CvConfig,
    intercept: int | None = 0,
    settings: LassoSettings | None = None,
) -> np.ndarray:
    """The configured grid, or the default log grid below the full-data lambda_max."""
    if cfg.lambda_grid is not None:
        return np.asarray(cfg.lambda_grid, dtype=float)
    lam_max = lambda_max(design, data, loss, intercept=intercept, settings=settings)
    return default_lambda_grid(lam_max, cfg.n_lambda, cfg.lambda_ratio)


def cv_select_C(
    data: Dataset,
    dictionary: BasisDictionary,
    loss: LossKind,
    cfg: CvConfig,
    *,
    settings: LassoSettings | None = None,
    design: np.ndarray | None = None,
) -> SelectorReport:
    """
    V-fold cross-validation of the L1 bound for one basis.

    Args:
        data: Observations.
        dictionary: Basis generated from data.
        loss: Loss to fit and validate with.
        cfg: Folds, grid, seed and thread count.
        settings: Solver tolerances.
        design: Precomputed design_matrix(data, dictionary).

    Returns:
        SelectorReport with rule "cv" carrying the full-data path.

    Raises:
        SelectorError: If every grid point fails.
    """
    design = design_matrix(data, dictionary) if design is None else design
    intercept = dictionary.intercept_index
    grid = lambda_grid_for(design, data, loss, cfg, intercept, settings)
    folds = vfold_split(data.n, cfg.folds, cfg.seed)

    problems = [
        FoldProblem(design[train], data.subset(train), design[val], data.subset(val))
        for train, val in fold_indices(folds)
    ]
    cv_risk, cv_se = cross_validate_path(
        problems, loss, grid, intercept=intercept, settings=settings, threads=cfg.threads
    )
    path = lasso_path(design, data, loss, grid, dictionary=dictionary, settings=settings, on_error="skip")
    report = select_from_curve(grid, cv_risk, cv_se, path)
    logger.info(
        f"CV over {grid.shape[0]} lambdas x {cfg.folds} folds: C_cv={report.C_cv:.6g} "
        f"(lambda={report.lambda_cv:.6g}, risk={report.cv_risk:.6g})"
    )
    return report


def cv_select_m(
    data: Dataset,
    loss: LossKind,
    cfg: CvConfig,
    caps: BasisCaps | None = None,
    *,
    settings: LassoSettings | None = None,
) -> tuple[int, dict[int, SelectorReport]]:
    """
    Cross-validate the smoothness order over cfg.m_grid.

    Each order gets its own basis and CV over C on the same folds; the order
    whose CV choice has the least fold-average risk wins, ties going to the
    smaller m.

    Returns:
        (m_selected, {m: report}), each report tagged with its own m.
    """
    reports: dict[int, SelectorReport] = {}
    for m in cfg.m_grid:
        dictionary = enumerate_basis(data, m, caps)
        reports[m] = cv_select_C(data, dictionary, loss, cfg, settings=settings)

    best = min(reports, key=lambda m: (reports[m].cv_risk, m))
    logger.info(f"Selected m={best} from {sorted(reports)} (CV risk {reports[best].cv_risk:.6g})")
    return best, {m: r.replace(m_selected=m) for m, r in reports.items()}
