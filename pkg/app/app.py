#!/usr/bin/env python3
"""
Undersmoothed HAL - Command Line Interface

Fits highly adaptive lasso regressions, undersmoothed plug-in estimates of
the treatment-specific mean and of the integral of a squared density, and
runs the Monte Carlo studies that check their efficiency.

Subcommands:
    fit       HAL regression from a CSV file (cross-validated m and C)
    ate       E[Q(1, W)] from a CSV file or a fresh draw of the study DGP
    density   Integral of p^2 from a CSV column or a fresh draw
    simulate  Monte Carlo study; writes tables, provenance and SVG panels
    plot      Regenerate summary.csv and the panels of a finished study

Configuration:
    - --config: YAML or JSON run configuration
    - Environment variables: HAL_THREADS, HAL_LOG_LEVEL, HAL_OUTPUT_PATH, HAL_LOG_FILE
    - Precedence: command line > config file > environment > defaults

Exit codes:
    0 success, 1 invalid input or a failed fit, 2 Monte Carlo run flagged failed

Usage:
    python3 app.py simulate --config study.yaml --out results/ --threads 8
    python3 app.py plot --out results/
"""

import argparse
import logging
import sys
import traceback
from collections.abc import Sequence
from pathlib import Path

import numpy as np
import pandas as pd
from common import (
    FIT_FILE,
    LOG_FILE,
    RESOLVED_CONFIG_FILE,
    ensure_out_dir,
    log_env_warnings,
    log_startup,
    setup_logging,
    write_estimate_outputs,
    write_json,
    write_selector_outputs,
)
from env_validation import validate_environment_variables
from errors import HalError
from hal.basis import design_matrix, enumerate_basis
from hal.dataset import Dataset
from hal.loss import LossKind
from managers import ConfigManager, ConfigValidationError
from schemas.run_config import RULE_ALIASES, DataSource, DgpConfig, RunConfig
from selection import RuleContext, apply_rule, cv_select_C, cv_select_m
from sim import emit_report, replot, run_monte_carlo
from sim.dgp import dgp_ate, dgp_density, dgp_null, true_propensity
from targets import estimate_density_functional, fit_ate

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_FAILED_RUN = 2

# Sample size drawn by ate/density when no data file is given
DEFAULT_DRAW_N = 1000

RULE_CHOICES = ("cv", "global", "sparse", "targeted")


# =============================================================================
# ARGUMENTS
# =============================================================================


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="YAML or JSON run configuration")
    common.add_argument("--seed", type=int, help="Seed for data draws and fold assignment")
    common.add_argument("--out", help="Output directory (default: HAL_OUTPUT_PATH)")
    common.add_argument("--threads", type=int, help="Worker count (default: HAL_THREADS)")
    common.add_argument("--rule", choices=RULE_CHOICES, help="Undersmoothing rule")
    common.add_argument("--m", type=int, help="Smoothness order")
    common.add_argument("--grid-size", type=int, dest="grid_size", help="Lambda grid length")

    data = argparse.ArgumentParser(add_help=False)
    data.add_argument("--data", help="CSV file (overrides the config data path)")
    data.add_argument("--n", type=int, default=DEFAULT_DRAW_N, help="Sample size drawn when no data is given")
    data.add_argument("--no-eic", action="store_true", help="Do not write eic.csv")

    parser = argparse.ArgumentParser(prog="undersmoothed-hal", description="Undersmoothed highly adaptive lasso")
    sub = parser.add_subparsers(dest="command", required=True)
    fit = sub.add_parser("fit", parents=[common], help="HAL regression from a CSV file")
    fit.add_argument("--data", help="CSV file (overrides the config data path)")
    sub.add_parser("ate", parents=[common, data], help="Treatment-specific mean")
    sub.add_parser("density", parents=[common, data], help="Integral of the squared density")
    sub.add_parser("simulate", parents=[common], help="Monte Carlo study")
    sub.add_parser("plot", parents=[common], help="Regenerate panels of a finished study")
    return parser


def resolve_config(args: argparse.Namespace, env: dict) -> ConfigManager:
    """Config file, then environment for unset values, then command-line overrides."""
    manager = ConfigManager(args.config)
    manager.apply_environment(threads=env["HAL_THREADS"], out=env["HAL_OUTPUT_PATH"])
    manager.apply_overrides(
        seed=args.seed,
        threads=args.threads,
        rule=RULE_ALIASES[args.rule] if args.rule else None,
        m=args.m,
        grid_size=args.grid_size,
        out=args.out,
    )
    return manager


def _source(source: DataSource | None, path: str | None, outcome: str = "Y") -> DataSource | None:
    if path is not None:
        base = source.model_dump() if source is not None else {"outcome": outcome}
        return DataSource.model_validate(base | {"path": path})
    return source


# =============================================================================
# SUBCOMMANDS
# =============================================================================


def run_fit(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    source = _source(cfg.fit.data, args.data)
    if source is None:
        raise HalError("fit needs a data file (--data or fit.data.path)")
    fit_cfg = cfg.fit
    data = Dataset.from_csv(source.path, source.outcome, source.covariates, source.treatment)
    loss = LossKind(fit_cfg.loss)
    caps = fit_cfg.basis.to_caps()
    settings = fit_cfg.lasso.to_settings()

    if fit_cfg.m is None:
        m, reports = cv_select_m(data, loss, fit_cfg.cv, caps, settings=settings)
        report = reports[m]
    else:
        m = fit_cfg.m
        report = cv_select_C(data, enumerate_basis(data, m, caps), loss, fit_cfg.cv, settings=settings).replace(
            m_selected=m
        )

    rule = fit_cfg.undersmooth.rule
    if rule != "cv":
        assert report.path is not None
        dictionary = report.cv_fit.dictionary
        assert dictionary is not None
        context = RuleContext(
            path=report.path,
            design=design_matrix(data, dictionary),
            data=data,
            cfg=fit_cfg.undersmooth,
            cv_report=report,
        )
        report = apply_rule(context, rule).replace(m_selected=m)

    fit = report.selected_fit
    write_json(out / FIT_FILE, fit.to_json() | {"m": m, "rule": report.rule})
    write_selector_outputs(out, report)
    logger.info(f"Fit m={m} rule={report.rule}: C_cv={report.C_cv:.6g} C_selected={report.C_selected:.6g}")
    return EXIT_OK


def run_ate(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    source = _source(cfg.ate.data, args.data)
    truth_g = None
    if source is not None:
        data = Dataset.from_csv(source.path, source.outcome, source.covariates, source.treatment or "A")
    else:
        dgp = cfg.simulation.dgp if cfg.simulation.dgp.kind != "density_sim62" else DgpConfig()
        logger.info(f"No data given; drawing n={args.n} from {dgp.kind} (seed {cfg.seed})")
        draw = dgp_ate if dgp.kind == "ate_sim61" else dgp_null
        data = draw(args.n, cfg.seed, 0, dgp)
        truth_g = true_propensity(dgp)

    estimate = fit_ate(data, cfg.ate, true_propensity=truth_g)
    write_estimate_outputs(out, estimate, estimate.report, with_eic=not args.no_eic)
    logger.info(f"psi={estimate.psi:.6g} se={estimate.se:.4g} ci=({estimate.ci[0]:.6g}, {estimate.ci[1]:.6g})")
    return EXIT_OK


def run_density(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    source = _source(cfg.density.data, args.data)
    if source is not None:
        frame = pd.read_csv(source.path)
        if source.outcome not in frame.columns:
            raise HalError(f"Column {source.outcome} not found in {source.path}")
        o = frame[source.outcome].to_numpy(dtype=float)
        logger.info(f"Read {o.shape[0]} observations of {source.outcome} from {source.path}")
    else:
        dgp = cfg.simulation.dgp if cfg.simulation.dgp.kind == "density_sim62" else DgpConfig(kind="density_sim62")
        logger.info(f"No data given; drawing n={args.n} from {dgp.kind} (seed {cfg.seed})")
        o = np.asarray(dgp_density(args.n, cfg.seed, 0, dgp))

    estimate = estimate_density_functional(o, cfg.density)
    write_estimate_outputs(out, estimate, estimate.density.report, with_eic=not args.no_eic)
    logger.info(f"psi={estimate.psi:.6g} se={estimate.se:.4g} ci=({estimate.ci[0]:.6g}, {estimate.ci[1]:.6g})")
    return EXIT_OK


def run_simulate(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    report = run_monte_carlo(cfg.simulation, threads=cfg.threads)
    emit_report(report, out)
    if report.failed_run:
        logger.error(f"Monte Carlo run flagged failed ({report.failure_rate:.1%} of replicates failed)")
        return EXIT_FAILED_RUN
    return EXIT_OK


def run_plot(cfg: RunConfig, args: argparse.Namespace, out: Path) -> int:
    written = replot(out)
    logger.info(f"Regenerated {len(written)} files in {out}")
    return EXIT_OK


HANDLERS = {
    "fit": run_fit,
    "ate": run_ate,
    "density": run_density,
    "simulate": run_simulate,
    "plot": run_plot,
}


# =============================================================================
# MAIN
# =============================================================================


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)

    env = validate_environment_variables()
    variables = env["variables"]
    setup_logging(variables["HAL_LOG_LEVEL"])
    log_startup(args.command)
    log_env_warnings(env)

    try:
        manager = resolve_config(args, variables)
        cfg = manager.config
        out = ensure_out_dir(cfg.out or variables["HAL_OUTPUT_PATH"])
        if variables["HAL_LOG_FILE"]:
            setup_logging(variables["HAL_LOG_LEVEL"], out / LOG_FILE)
        if args.command != "plot":
            manager.save(str(out / RESOLVED_CONFIG_FILE))
        return HANDLERS[args.command](cfg, args, out)
    except ConfigValidationError as e:
        logger.error(f"Configuration error: {e}")
        return EXIT_ERROR
    except HalError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_ERROR
    except Exception as e:
        logger.error(f"Unexpected error: {e}")
        logger.error(traceback.format_exc())
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
