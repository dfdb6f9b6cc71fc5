"""
SVG panels of a Monte Carlo report.

Figures are drawn with a fixed SVG hash salt and no date metadata, so the
same tables always produce byte-identical files.
"""

import logging
import math
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402
import pandas as pd  # noqa: E402
from scipy.stats import norm  # noqa: E402

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

SVG_HASH_SALT = "undersmoothed-hal"
SVG_METADATA = {"Date": None}

FIGURE_SIZE = (10.0, 3.2)
HISTOGRAM_BINS = 30

# File names under the output directory
BIAS_VARIANCE_MSE = "bias_variance_mse.svg"
SCALED_ERROR_HISTOGRAM = "scaled_error_histogram.svg"
CRITERION_TRACES = "criterion_traces.svg"


def _save(fig: plt.Figure, path: Path) -> Path:
    with plt.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "path"}):
        fig.savefig(path, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    logger.info(f"Wrote {path}")
    return path


def plot_bias_variance_mse(summary: pd.DataFrame, bound: float, path: Path) -> Path:
    """sqrt(n)|bias|, n variance and n MSE against n, with the bound as a dashed line."""
    fig, axes = plt.subplots(1, 3, figsize=FIGURE_SIZE)
    panels = [
        ("sqrt_n_bias", "sqrt(n) |bias|", None),
        ("n_variance", "n x variance", bound),
        ("n_mse", "n x MSE", bound),
    ]
    for ax, (column, title, reference) in zip(axes, panels, strict=True):
        for estimator, group in summary.groupby("estimator", sort=True):
            values = group[column].abs() if column == "sqrt_n_bias" else group[column]
            ax.plot(group["n"], values, marker="o", label=str(estimator))
        if reference is not None:
            ax.axhline(reference, linestyle="--", color="black", linewidth=1, label="efficiency bound")
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_title(title)
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_scaled_error_histogram(replicates: pd.DataFrame, psi0: float, bound: float, path: Path) -> Path:
    """Histogram of sqrt(n)(psi_n - psi0) per n, overlaid with the N(0, bound) density."""
    ok = replicates[~replicates["failed"].astype(bool)]
    sizes = sorted(int(n) for n in ok["n"].unique())
    fig, axes = plt.subplots(1, max(len(sizes), 1), figsize=FIGURE_SIZE, squeeze=False)
    sd = math.sqrt(bound)
    grid = np.linspace(-4.0 * sd, 4.0 * sd, 200)
    for ax, n in zip(axes[0], sizes, strict=False):
        for estimator, group in ok[ok["n"] == n].groupby("estimator", sort=True):
            scaled = math.sqrt(n) * (group["psi"].to_numpy(dtype=float) - psi0)
            ax.hist(scaled, bins=HISTOGRAM_BINS, density=True, alpha=0.5, label=str(estimator))
        ax.plot(grid, norm.pdf(grid, scale=sd), color="black", linewidth=1, label="N(0, bound)")
        ax.set_title(f"n = {n}")
        ax.set_xlabel("sqrt(n)(psi_n - psi0)")
    axes[0][0].legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_criterion_traces(summary: pd.DataFrame, path: Path) -> Path:
    """Mean sqrt(n) P_n D* and sqrt(n) min active P_n phi against n."""
    fig, axes = plt.subplots(1, 2, figsize=FIGURE_SIZE)
    panels = [
        ("mean_sqrt_n_PnDstar", "sqrt(n) P_n D*"),
        ("mean_sqrt_n_min_active_Pn_phi", "sqrt(n) min active P_n phi"),
    ]
    for ax, (column, title) in zip(axes, panels, strict=True):
        for estimator, group in summary.groupby("estimator", sort=True):
            ax.plot(group["n"], group[column], marker="o", label=str(estimator))
        ax.axhline(0.0, color="grey", linewidth=0.5)
        ax.set_xscale("log")
        ax.set_xlabel("n")
        ax.set_title(title)
    axes[0].legend(fontsize="small")
    fig.tight_layout()
    return _save(fig, path)


def plot_all(summary: pd.DataFrame, replicates: pd.DataFrame, truth: dict[str, float], out_dir: Path) -> list[Path]:
    """Every panel of the fixed set."""
    bound = truth["efficiency_bound"]
    return [
        plot_bias_variance_mse(summary, bound, out_dir / BIAS_VARIANCE_MSE),
        plot_scaled_error_histogram(replicates, truth["psi0"], bound, out_dir / SCALED_ERROR_HISTOGRAM),
        plot_criterion_traces(summary, out_dir / CRITERION_TRACES),
    ]
