#!/usr/bin/env python3
"""
Common functionality shared by the CLI subcommands.

This module contains:
- Logging setup (stdout plus an optional run.log under the output directory)
- Startup banner and environment warning reporting
- Output directory handling
- JSON and CSV writers for fits, estimates and selector reports
"""

import json
import logging
import math
import os
import sys
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
from errors import HalError
from selection.reports import SelectorReport

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FILE = "run.log"

# Fixed output file names
FIT_FILE = "fit.json"
SELECTOR_FILE = "selector.json"
TRACE_FILE = "trace.csv"
ESTIMATE_FILE = "estimate.json"
EIC_FILE = "eic.csv"
RESOLVED_CONFIG_FILE = "resolved_config.json"

# Round-trip precision for floats in CSV output
FLOAT_FORMAT = "%.17g"

BANNER = "=" * 50


# =============================================================================
# LOGGING
# =============================================================================


def setup_logging(level: str = "INFO", log_file: Path | None = None) -> None:
    """
    Configure the root logger once per process.

    Args:
        level: Level name (DEBUG, INFO, WARNING, ERROR).
        log_file: Also append to this file when given.
    """
    handlers: list[logging.Handler] = [logging.StreamHandler(sys.stdout)]
    if log_file is not None:
        handlers.append(logging.FileHandler(log_file))
    logging.basicConfig(
        level=getattr(logging, level.upper(), logging.INFO), format=LOG_FORMAT, handlers=handlers, force=True
    )


def log_startup(command: str) -> None:
    logger.info(BANNER)
    logger.info(f"Undersmoothed HAL: {command}")
    logger.info(f"Python version: {sys.version.split()[0]}")
    logger.info(f"Working directory: {os.getcwd()}")
    logger.info(BANNER)


def log_env_warnings(validation_result: dict[str, Any]) -> None:
    """Report invalid environment variables in a banner; the run continues with defaults."""
    if validation_result["valid"]:
        return
    logger.warning(BANNER)
    logger.warning("CONFIGURATION WARNINGS DETECTED")
    logger.warning("The following environment variables have invalid values:")
    for warning in validation_result["warnings"]:
        logger.warning(f"  - {warning}")
    logger.warning("Run will continue with default values.")
    logger.warning(BANNER)


# =============================================================================
# OUTPUT
# =============================================================================


def ensure_out_dir(path: str | Path) -> Path:
    """
    Create the output directory if needed.

    Raises:
        HalError: If it cannot be created or written.
    """
    out = Path(path)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise HalError(f"Cannot create output directory {out}", [str(e)]) from e
    if not os.access(out, os.W_OK):
        raise HalError(f"Output directory {out} is not writable")
    logger.debug(f"Directory ensured: {out}")
    return out


def _jsonable(value: Any) -> Any:
    # strict JSON: non-finite floats become null
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, list | tuple):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.bool_):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, float | np.floating):
        return float(value) if math.isfinite(value) else None
    return value


def write_json(path: Path, payload: dict[str, Any]) -> Path:
    with open(path, "w") as f:
        json.dump(_jsonable(payload), f, indent=2, sort_keys=True, allow_nan=False)
    logger.info(f"Wrote {path}")
    return path


def write_eic_csv(path: Path, eic: np.ndarray) -> Path:
    pd.DataFrame({"eic": np.asarray(eic, dtype=float)}).to_csv(path, index=False, float_format=FLOAT_FORMAT)
    logger.info(f"Wrote {path}")
    return path


def write_selector_outputs(out: Path, report: SelectorReport) -> list[Path]:
    """selector.json and trace.csv of one selection."""
    written = [write_json(out / SELECTOR_FILE, report.to_json())]
    report.write_trace_csv(str(out / TRACE_FILE))
    logger.info(f"Wrote {out / TRACE_FILE}")
    written.append(out / TRACE_FILE)
    return written


def write_estimate_outputs(
    out: Path,
    estimate: Any,
    report: SelectorReport | None,
    with_eic: bool = True,
) -> list[Path]:
    """
    estimate.json, plus eic.csv and the selector files when available.

    Args:
        out: Output directory.
        estimate: AteEstimate or DensityEstimate.
        report: Selector report the estimate was chosen with.
        with_eic: Also write the per-observation influence curve.
    """
    written = [write_json(out / ESTIMATE_FILE, estimate.to_json())]
    if with_eic:
        written.append(write_eic_csv(out / EIC_FILE, estimate.eic))
    if report is not None:
        written.extend(write_selector_outputs(out, report))
    return written
