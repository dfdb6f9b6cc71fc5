"""Influence-curve based Wald inference."""

import math

import numpy as np
from errors import DegenerateDataError, DimensionError
from scipy.stats import norm

# Two-sided 95% standard normal quantile
Z_95 = 1.959963984540054


def z_quantile(level: float) -> float:
    """Two-sided standard normal quantile for a confidence level in (0, 1)."""
    if not 0.0 < level < 1.0:
        raise ValueError(f"level must lie in (0, 1), got {level}")
    if level == 0.95:
        return Z_95
    return float(norm.ppf(0.5 + level / 2.0))


def wald_ci(psi: float, eic: np.ndarray, level: float = 0.95) -> tuple[float, float, float]:
    """
    Wald interval psi +/- z * sd(eic) / sqrt(n).

    The standard deviation uses the sample convention (ddof=1).

    Returns:
        (lo, hi, se)

    Raises:
        DegenerateDataError: If eic is constant.
    """
    values = np.asarray(eic, dtype=float).reshape(-1)
    if values.size < 2:
        raise DimensionError(f"Need at least 2 influence-curve values, got {values.size}")
    sd = float(np.std(values, ddof=1))
    if sd == 0.0 or not math.isfinite(sd):
        raise DegenerateDataError("Influence curve is constant; the Wald interval is undefined")
    se = sd / math.sqrt(values.size)
    z = z_quantile(level)
    return psi - z * se, psi + z * se, se
