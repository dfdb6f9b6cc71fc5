"""
Monte Carlo runner for the simulation studies.

Each replicate draws one dataset, fits every configured estimator on it
(paired design), and returns one row per estimator. Rows are aggregated per
(n, estimator) into bias, variance, MSE and coverage scaled by n.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from errors import describe
from managers.process_manager import ProcessManager
from schemas.run_config import CvConfig, SimulationConfig
from targets.ate import fit_ate_rules
from targets.density import estimate_density_rules

from .dgp import draw, true_propensity, true_values

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

# Column order of replicates.csv
REPLICATE_COLUMNS = [
    "n",
    "replicate",
    "estimator",
    "failed",
    "error",
    "psi",
    "se",
    "ci_lo",
    "ci_hi",
    "covered",
    "C_cv",
    "C_selected",
    "variation_norm",
    "sqrt_n_PnDstar",
    "sqrt_n_PnDstar_true_g",
    "sqrt_n_min_active_Pn_phi",
    "sqrt_n_min_active_score",
    "threshold",
    "threshold_met",
    "shortfall",
]

# Column order of summary.csv
SUMMARY_COLUMNS = [
    "n",
    "estimator",
    "replicates",
    "failures",
    "sqrt_n_bias",
    "n_variance",
    "n_mse",
    "coverage_95",
    "mean_sqrt_n_PnDstar",
    "mean_abs_sqrt_n_PnDstar",
    "mean_sqrt_n_PnDstar_true_g",
    "mean_sqrt_n_min_active_Pn_phi",
    "mean_C_cv",
    "mean_C_selected",
    "threshold_met_rate",
    "efficiency_bound",
    "relative_efficiency",
]

# Estimator fitted next to the undersmoothed ones in the density study
COMPARATOR_RULE = "cv"


@dataclass(frozen=True)
class ReplicateTask:
    """One (sample size, replicate) cell; picklable for process pools."""

    n: int
    replicate: int
    config: SimulationConfig


def study_rules(cfg: SimulationConfig) -> list[str]:
    """Configured estimators, plus the CV comparator for the density study."""
    rules = list(dict.fromkeys(cfg.estimators))
    if cfg.study == "density" and COMPARATOR_RULE not in rules:
        rules.append(COMPARATOR_RULE)
    return rules


def _failed_rows(task: ReplicateTask, message: str) -> list[dict[str, Any]]:
    return [
        {"n": task.n, "replicate": task.replicate, "estimator": rule, "failed": True, "error": message}
        for rule in study_rules(task.config)
    ]


def _fold_seed(cfg: SimulationConfig, n: int, replicate: int) -> int:
    # distinct, reproducible fold assignment per cell
    return (cfg.base_seed * 1_000_003 + n * 10_007 + replicate) % (2**31)


def run_replicate(task: ReplicateTask) -> list[dict[str, Any]]:
    """
    Draw one dataset and fit every estimator on it.

    Failures are returned as rows with failed=True rather than raised, so a
    bad replicate never stops the run.
    """
    cfg = task.config
    n = task.n
    rules = study_rules(cfg)
    truth = true_values(cfg.dgp.kind, cfg.dgp)
    try:
        data = draw(cfg.dgp, n, cfg.base_seed, task.replicate)
        seed = _fold_seed(cfg, n, task.replicate)
        if cfg.study == "ate":
            ate_cfg = cfg.ate.model_copy(update={"cv": cfg.ate.cv.model_copy(update={"seed": seed})})
            estimates: dict[str, Any] = fit_ate_rules(
                data,  # type: ignore[arg-type]
                ate_cfg,
                rules,
                true_propensity=true_propensity(cfg.dgp),
            )
        else:
            density_cfg = cfg.density.model_copy(update={"cv": cfg.density.cv.model_copy(update={"seed": seed})})
            estimates = estimate_density_rules(data, density_cfg, rules)  # type: ignore[arg-type]
    except Exception as e:
        info = describe(e)
        message = f"{info['type']}: {info['message']}"
        logger.warning(f"Replicate n={n} r={task.replicate} failed: {message}")
        return _failed_rows(task, message)

    rows = []
    root_n = math.sqrt(n)
    for rule in rules:
        est = estimates[rule]
        diag = est.diagnostics
        rows.append(
            {
                "n": n,
                "replicate": task.replicate,
                "estimator": rule,
                "failed": False,
                "error": "",
                "psi": est.psi,
                "se": est.se,
                "ci_lo": est.ci[0],
                "ci_hi": est.ci[1],
                "covered": bool(est.ci[0] <= truth["psi0"] <= est.ci[1]),
                "C_cv": est.C_cv,
                "C_selected": est.C_selected,
                "variation_norm": diag["variation_norm"],
                "sqrt_n_PnDstar": diag["sqrt_n_PnDstar"],
                "sqrt_n_PnDstar_true_g": diag.get("sqrt_n_PnDstar_true_g", math.nan),
                "sqrt_n_min_active_Pn_phi": root_n * diag["min_active_Pn_phi"],
                "sqrt_n_min_active_score": diag["sqrt_n_min_active_score"],
                "threshold": math.nan if diag["threshold"] is None else diag["threshold"],
                "threshold_met": not diag["not_met"],
                "shortfall": diag.get("shortfall", math.nan),
            }
        )
    return rows


# =============================================================================
# AGGREGATION
# =============================================================================


def _finite_mean(values: pd.Series) -> float:
    v = values.to_numpy(dtype=float)
    v = v[np.isfinite(v)]
    return float(v.mean()) if v.size else math.nan


def aggregate(replicates: pd.DataFrame, psi0: float, bound: float) -> pd.DataFrame:
    """
    Per (n, estimator) summary over successful replicates.

    n_variance uses ddof=0 so that n_mse = n_variance + sqrt_n_bias^2.
    """
    rows = []
    for (n, estimator), group in replicates.groupby(["n", "estimator"], sort=True):
        ok = group[~group["failed"].astype(bool)]
        n = int(n)
        psi = ok["psi"].to_numpy(dtype=float)
        if psi.size:
            bias = float(psi.mean() - psi0)
            variance = float(psi.var(ddof=0))
            mse = float(np.mean((psi - psi0) ** 2))
        else:
            bias = variance = mse = math.nan
        n_variance = n * variance
        rows.append(
            {
                "n": n,
                "estimator": estimator,
                "replicates": int(psi.size),
                "failures": int(len(group) - len(ok)),
                "sqrt_n_bias": math.sqrt(n) * bias,
                "n_variance": n_variance,
                "n_mse": n * mse,
                "coverage_95": float(ok["covered"].astype(float).mean()) if len(ok) else math.nan,
                "mean_sqrt_n_PnDstar": _finite_mean(ok["sqrt_n_PnDstar"]),
                "mean_abs_sqrt_n_PnDstar": _finite_mean(ok["sqrt_n_PnDstar"].abs()),
                "mean_sqrt_n_PnDstar_true_g": _finite_mean(ok["sqrt_n_PnDstar_true_g"]),
                "mean_sqrt_n_min_active_Pn_phi": _finite_mean(ok["sqrt_n_min_active_Pn_phi"]),
                "mean_C_cv": _finite_mean(ok["C_cv"]),
                "mean_C_selected": _finite_mean(ok["C_selected"]),
                "threshold_met_rate": float(ok["threshold_met"].astype(float).mean()) if len(ok) else math.nan,
                "efficiency_bound": bound,
                "relative_efficiency": n_variance / bound if bound > 0 else math.nan,
            }
        )
    return pd.DataFrame(rows, columns=SUMMARY_COLUMNS)


@dataclass(frozen=True, eq=False)
class McReport:
    """
    Outcome of a Monte Carlo study.

    Attributes:
        config: Resolved study configuration.
        truth: psi0 and efficiency bound of the DGP.
        summary: One row per (n, estimator), columns SUMMARY_COLUMNS.
        replicates: One row per (n, replicate, estimator), columns REPLICATE_COLUMNS.
        failure_rate: Share of replicate cells with at least one failed estimator.
        failed_run: failure_rate exceeded the configured tolerance.
    """

    config: SimulationConfig
    truth: dict[str, float]
    summary: pd.DataFrame = field(repr=False)
    replicates: pd.DataFrame = field(repr=False)
    failure_rate: float = 0.0
    failed_run: bool = False

    @classmethod
    def from_replicates(cls, config: SimulationConfig, replicates: pd.DataFrame) -> "McReport":
        """Aggregate replicate rows; used both after a run and when reloading one."""
        truth = true_values(config.dgp.kind, config.dgp)
        frame = replicates.reindex(columns=REPLICATE_COLUMNS)
        frame["failed"] = frame["failed"].fillna(False).astype(bool)
        frame["error"] = frame["error"].fillna("")
        frame = frame.sort_values(["n", "replicate", "estimator"], kind="stable").reset_index(drop=True)
        cells = frame.groupby(["n", "replicate"])["failed"].any()
        failure_rate = float(cells.mean()) if len(cells) else 0.0
        return cls(
            config=config,
            truth=truth,
            summary=aggregate(frame, truth["psi0"], truth["efficiency_bound"]),
            replicates=frame,
            failure_rate=failure_rate,
            failed_run=failure_rate > config.failure_tolerance,
        )


def worker_config(cfg: SimulationConfig, workers: int) -> SimulationConfig:
    """Split each fold-thread count among the replicate processes."""

    def share(cv: CvConfig) -> CvConfig:
        return cv.model_copy(update={"threads": max(1, cv.threads // workers)})

    return cfg.model_copy(
        update={
            "ate": cfg.ate.model_copy(update={"cv": share(cfg.ate.cv)}),
            "density": cfg.density.model_copy(update={"cv": share(cfg.density.cv)}),
        }
    )


def run_monte_carlo(cfg: SimulationConfig, threads: int | None = None) -> McReport:
    """
    Run every (n, replicate) cell and aggregate.

    Cells run on a process pool; rows are collected in (n, replicate) order,
    so the report does not depend on completion order.

    Args:
        cfg: Study configuration.
        threads: Worker processes (defaults to cfg.threads).

    Returns:
        McReport; failed_run is set when more than cfg.failure_tolerance of
        the replicates failed.
    """
    workers = threads or cfg.threads
    task_cfg = worker_config(cfg, workers)
    tasks = [ReplicateTask(n, r, task_cfg) for n in cfg.n_grid for r in range(cfg.replicates)]
    names = [f"n={t.n}/r={t.replicate}" for t in tasks]
    rules = study_rules(cfg)
    logger.info(
        f"Monte Carlo study '{cfg.study}' ({cfg.dgp.kind}): n in {cfg.n_grid}, "
        f"{cfg.replicates} replicates, estimators {rules}"
    )

    pool = ProcessManager(workers=workers, kind="process")
    rows: list[dict[str, Any]] = []
    for task, outcome in zip(tasks, pool.map(run_replicate, tasks, names), strict=True):
        rows.extend(outcome.value if outcome.success else _failed_rows(task, outcome.message))

    report = McReport.from_replicates(cfg, pd.DataFrame(rows))
    if report.failed_run:
        logger.warning(
            f"Run flagged failed: {report.failure_rate:.1%} of replicates failed "
            f"(tolerance {cfg.failure_tolerance:.1%})"
        )
    else:
        logger.info(f"Monte Carlo study complete ({report.failure_rate:.1%} of replicates failed)")
    return report
