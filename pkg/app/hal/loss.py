"""
Loss functions, pointwise scores, and empirical risk.

Risk is normalized by the number of observations (frequency-weighted),
with observation weights w_i multiplying each row's loss:

    risk(q) = sum_i f_i w_i loss(y_i, q_i) / sum_i f_i

so rows with w_i = 0 contribute nothing while the mean of
pointwise_score * phi stays the exact directional derivative of risk.
"""

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np
from errors import DimensionError, DomainError, NonFiniteError
from scipy.special import expit

from .dataset import Dataset

logger = logging.getLogger(__name__)

# Predictor bound on the logit scale before expit
DEFAULT_CLAMP = 30.0

# Floor on p(1 - p) in IRLS working weights
MIN_CURVATURE = 1e-5

LossName = Literal["squared_error", "binomial_loglik"]


@dataclass(frozen=True)
class LossKind:
    """
    Which loss to fit and how rows are weighted.

    Attributes:
        name: squared_error (identity link) or binomial_loglik (logit link).
        observation_weight: "treatment" restricts the loss to rows with A = 1.
        clamp: Bound on |q| for the logit link.
    """

    name: LossName = "squared_error"
    observation_weight: Literal["treatment"] | None = None
    clamp: float = DEFAULT_CLAMP

    def __post_init__(self) -> None:
        if self.name not in ("squared_error", "binomial_loglik"):
            raise DomainError(f"Unknown loss {self.name!r}")
        if not self.clamp > 0:
            raise DomainError(f"clamp must be positive, got {self.clamp}")

    @property
    def link(self) -> str:
        return "logit" if self.name == "binomial_loglik" else "identity"

    @property
    def is_binomial(self) -> bool:
        return self.name == "binomial_loglik"

    def to_dict(self) -> dict[str, object]:
        return {"name": self.name, "observation_weight": self.observation_weight, "clamp": self.clamp}


SQUARED_ERROR = LossKind("squared_error")
BINOMIAL = LossKind("binomial_loglik")


# =============================================================================
# ROW WEIGHTS
# =============================================================================


def observation_weights(data: Dataset, loss: LossKind) -> np.ndarray:
    """The w_i of the loss: A for treatment-restricted losses, else ones."""
    if loss.observation_weight == "treatment":
        if data.A is None:
            raise DimensionError("Loss is restricted to treated rows but the dataset has no treatment")
        return data.A
    return np.ones(data.n)


def row_scale(data: Dataset) -> np.ndarray:
    """Frequency weights rescaled to average 1 over rows."""
    if data.frequency is None:
        return np.ones(data.n)
    return data.frequency * (data.n / data.effective_size)


def effective_weights(data: Dataset, loss: LossKind) -> np.ndarray:
    """Product of frequency scale and observation weight for every row."""
    return row_scale(data) * observation_weights(data, loss)


def check_outcome(data: Dataset, loss: LossKind) -> None:
    """Binomial loss needs Y in [0, 1] on the rows it weights."""
    if not loss.is_binomial:
        return
    w = observation_weights(data, loss)
    y = data.Y[w > 0]
    if y.size and (y.min() < 0.0 or y.max() > 1.0):
        raise DomainError("binomial_loglik requires Y in [0, 1] on weighted rows")


# =============================================================================
# LOSS, RISK, SCORE
# =============================================================================


def _checked(fit_values: np.ndarray, data: Dataset) -> np.ndarray:
    q = np.asarray(fit_values, dtype=float).reshape(-1)
    if q.shape[0] != data.n:
        raise DimensionError(f"{q.shape[0]} fit values for {data.n} rows")
    if not np.all(np.isfinite(q)):
        raise NonFiniteError("Fit values contain NaN or infinite entries")
    return q


def clamp_predictor(q: np.ndarray, loss: LossKind) -> np.ndarray:
    """Clip the logit-scale predictor to [-clamp, clamp]; identity link is untouched."""
    if loss.is_binomial:
        return np.clip(q, -loss.clamp, loss.clamp)
    return q


def response(q: np.ndarray, loss: LossKind) -> np.ndarray:
    """Map the linear predictor to the mean scale."""
    if loss.is_binomial:
        return expit(clamp_predictor(np.asarray(q, dtype=float), loss))
    return np.asarray(q, dtype=float)


def pointwise_loss(fit_values: np.ndarray, data: Dataset, loss: LossKind) -> np.ndarray:
    """Unweighted loss of every row."""
    q = _checked(fit_values, data)
    y = data.Y
    if loss.is_binomial:
        qc = clamp_predictor(q, loss)
        # -[y log expit(q) + (1 - y) log(1 - expit(q))]
        return np.logaddexp(0.0, qc) - y * qc
    return 0.5 * (y - q) ** 2


def risk(fit_values: np.ndarray, data: Dataset, loss: LossKind) -> float:
    """
    Empirical risk P_n L(Q).

    Example:
        >>> d = Dataset.from_arrays(np.zeros((1, 1)), np.ones(1))
        >>> round(risk(np.zeros(1), d, BINOMIAL), 4)
        0.6931
    """
    losses = pointwise_loss(fit_values, data, loss)
    return float(np.mean(effective_weights(data, loss) * losses))


def pointwise_score(fit_values: np.ndarray, data: Dataset, loss: LossKind) -> np.ndarray:
    """
    Residual factor r with P_n dL/dQ(phi_j) = mean(r * phi_j(X)).

    r_i = -w_i (y_i - q_i) for squared error and -w_i (y_i - expit(q_i))
    for the binomial log-likelihood.
    """
    q = _checked(fit_values, data)
    return -effective_weights(data, loss) * (data.Y - response(q, loss))


def curvature(fit_values: np.ndarray, data: Dataset, loss: LossKind) -> np.ndarray:
    """Second derivative of each row's weighted loss in q (IRLS weights)."""
    w = effective_weights(data, loss)
    if not loss.is_binomial:
        return w
    p = response(fit_values, loss)
    return w * np.maximum(p * (1.0 - p), MIN_CURVATURE)


def loss_bound(data: Dataset, loss: LossKind) -> float:
    """
    Bound on the pointwise loss for predictors inside the clamp box.

    For the binomial loss this is log(1 + e^clamp); for squared error it is
    (max|y| + clamp)^2 / 2.
    """
    if loss.is_binomial:
        return float(np.logaddexp(0.0, loss.clamp))
    return 0.5 * (float(np.max(np.abs(data.Y))) + loss.clamp) ** 2


def null_predictor(data: Dataset, loss: LossKind) -> float:
    """Weighted-mean predictor of the intercept-only model."""
    w = effective_weights(data, loss)
    total = w.sum()
    if total <= 0:
        return 0.0
    mean = float(np.dot(w, data.Y) / total)
    if not loss.is_binomial:
        return mean
    mean = min(max(mean, 0.0), 1.0)
    if mean in (0.0, 1.0):
        return math.copysign(loss.clamp, mean - 0.5)
    return float(np.clip(math.log(mean / (1.0 - mean)), -loss.clamp, loss.clamp))
