"""
Writing and reloading Monte Carlo reports.

An output directory holds summary.csv, replicates.csv, config.json and the
SVG panels. The panels and summary can be rebuilt from replicates.csv and
config.json alone.
"""

import json
import logging
import os
from pathlib import Path
from typing import Any

import pandas as pd
from errors import HalError
from schemas.run_config import SimulationConfig

from .dgp import describe
from .plots import plot_all
from .runner import REPLICATE_COLUMNS, SUMMARY_COLUMNS, McReport, study_rules

logger = logging.getLogger(__name__)

SUMMARY_FILE = "summary.csv"
REPLICATES_FILE = "replicates.csv"
CONFIG_FILE = "config.json"

# Round-trip precision for floats in CSV output
FLOAT_FORMAT = "%.17g"


class ReportError(HalError):
    """Raised when a report cannot be written or read."""


def _ensure_writable(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise ReportError(f"Cannot create output directory {out_dir}", [str(e)]) from e
    if not os.access(out_dir, os.W_OK):
        raise ReportError(f"Output directory {out_dir} is not writable")


def provenance(report: McReport) -> dict[str, Any]:
    """Everything needed to regenerate the run and its plots."""
    return {
        "simulation": report.config.model_dump(mode="json"),
        "estimators": study_rules(report.config),
        "dgp": describe(report.config.dgp),
        "truth": report.truth,
        "base_seed": report.config.base_seed,
        "failure_rate": report.failure_rate,
        "failed_run": report.failed_run,
        "summary_columns": SUMMARY_COLUMNS,
        "replicate_columns": REPLICATE_COLUMNS,
    }


def emit_report(report: McReport, out_dir: str | Path, plots: bool = True) -> list[Path]:
    """
    Write the tables, provenance and panels.

    Raises:
        ReportError: If the directory cannot be written or the report is empty.
    """
    out = Path(out_dir)
    if report.replicates.empty:
        raise ReportError("Report has no replicate rows")
    _ensure_writable(out)

    written = [out / SUMMARY_FILE, out / REPLICATES_FILE, out / CONFIG_FILE]
    try:
        report.summary.to_csv(written[0], index=False, float_format=FLOAT_FORMAT)
        report.replicates.to_csv(written[1], index=False, float_format=FLOAT_FORMAT)
        with open(written[2], "w") as f:
            json.dump(provenance(report), f, indent=2, sort_keys=True)
    except OSError as e:
        raise ReportError(f"Failed to write report to {out}", [str(e)]) from e

    if plots:
        written.extend(plot_all(report.summary, report.replicates, report.truth, out))
    logger.info(f"Report written to {out} ({len(written)} files)")
    return written


def load_report(out_dir: str | Path) -> McReport:
    """
    Rebuild a report from replicates.csv and config.json.

    Raises:
        ReportError: If either file is missing or malformed.
    """
    out = Path(out_dir)
    try:
        with open(out / CONFIG_FILE) as f:
            raw = json.load(f)
        replicates = pd.read_csv(out / REPLICATES_FILE, keep_default_na=True)
    except (OSError, ValueError) as e:
        raise ReportError(f"Cannot read report from {out}", [str(e)]) from e
    if "simulation" not in raw:
        raise ReportError(f"{out / CONFIG_FILE} has no simulation section")
    config = SimulationConfig.model_validate(raw["simulation"])
    return McReport.from_replicates(config, replicates)


def replot(out_dir: str | Path) -> list[Path]:
    """Regenerate summary.csv and the panels from replicates.csv and config.json."""
    out = Path(out_dir)
    report = load_report(out)
    report.summary.to_csv(out / SUMMARY_FILE, index=False, float_format=FLOAT_FORMAT)
    return [out / SUMMARY_FILE, *plot_all(report.summary, report.replicates, report.truth, out)]
