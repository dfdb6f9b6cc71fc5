"""
Simulation studies: data-generating processes, the Monte Carlo runner and
report emission.
"""

from .dgp import dgp_ate, dgp_density, dgp_null, draw, true_values
from .report import ReportError, emit_report, load_report, replot
from .runner import (
    REPLICATE_COLUMNS,
    SUMMARY_COLUMNS,
    McReport,
    ReplicateTask,
    aggregate,
    run_monte_carlo,
    run_replicate,
)

__all__ = [
    "REPLICATE_COLUMNS",
    "SUMMARY_COLUMNS",
    "McReport",
    "ReplicateTask",
    "ReportError",
    "aggregate",
    "dgp_ate",
    "dgp_density",
    "dgp_null",
    "draw",
    "emit_report",
    "load_report",
    "replot",
    "run_monte_carlo",
    "run_replicate",
    "true_values",
]
