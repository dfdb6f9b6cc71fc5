"""
Data-generating processes of the simulation studies.

Every draw comes from a counter-based stream keyed by (base_seed,
replicate, purpose), so a replicate's data never depend on the order in
which replicates run or on what else consumed random numbers.
"""

from typing import Any

import numpy as np
import oracle
from errors import DomainError
from hal.dataset import Dataset
from schemas.run_config import MIN_STUDY_N, DgpConfig
from scipy.special import expit
from streams import make_stream

# Recorded in config.json next to the resolved parameters
BETA_SAMPLER = "numpy Generator.beta (exact, gamma ratio)"

COVARIATE_NAMES = ("W1", "W2")


def _check_n(n: int) -> None:
    if n < 1:
        raise DomainError(f"Sample size must be positive, got {n}")


def _covariates(n: int, seed: int, replicate: int, cfg: DgpConfig) -> np.ndarray:
    z = make_stream(seed, replicate, "covariates/w1").beta(cfg.beta_shape, cfg.beta_shape, size=n)
    w2 = make_stream(seed, replicate, "covariates/w2").binomial(1, 0.5, size=n).astype(float)
    return np.column_stack([4.0 * z - 2.0, w2])


def qbar0(W: np.ndarray) -> np.ndarray:
    """True outcome regression expit(w1 - 2 w1 w2); the propensity is the same function."""
    return np.asarray(expit(W[:, 0] - 2.0 * W[:, 0] * W[:, 1]), dtype=float)


def gbar0(W: np.ndarray) -> np.ndarray:
    return qbar0(W)


def dgp_ate(n: int, seed: int, replicate: int = 0, cfg: DgpConfig | None = None) -> Dataset:
    """
    Draw the treatment-specific mean study.

    Z ~ Beta(0.85, 0.85), W1 = 4Z - 2, W2 ~ Bernoulli(0.5),
    A ~ Bernoulli(expit(W1 - 2 W1 W2)), Y = expit(W1 - 2 W1 W2) + eps with
    eps ~ N(0, noise_variance).
    """
    _check_n(n)
    cfg = cfg or DgpConfig()
    W = _covariates(n, seed, replicate, cfg)
    p = gbar0(W)
    A = (make_stream(seed, replicate, "treatment").uniform(size=n) < p).astype(float)
    noise = make_stream(seed, replicate, "outcome").normal(0.0, np.sqrt(cfg.noise_variance), size=n)
    return Dataset.from_arrays(W, qbar0(W) + noise, A=A, names=COVARIATE_NAMES)


def dgp_null(n: int, seed: int, replicate: int = 0, cfg: DgpConfig | None = None) -> Dataset:
    """Same covariates, fair-coin treatment, pure-noise outcome with mean 0."""
    _check_n(n)
    cfg = cfg or DgpConfig(kind="custom_null")
    W = _covariates(n, seed, replicate, cfg)
    A = make_stream(seed, replicate, "treatment").binomial(1, 0.5, size=n).astype(float)
    Y = make_stream(seed, replicate, "outcome").normal(0.0, np.sqrt(cfg.noise_variance), size=n)
    return Dataset.from_arrays(W, Y, A=A, names=COVARIATE_NAMES)


def dgp_density(n: int, seed: int, replicate: int = 0, cfg: DgpConfig | None = None) -> np.ndarray:
    """Draw n values from N(density_mean, density_sd^2)."""
    _check_n(n)
    cfg = cfg or DgpConfig(kind="density_sim62")
    return make_stream(seed, replicate, "density").normal(cfg.density_mean, cfg.density_sd, size=n)


def draw(cfg: DgpConfig, n: int, seed: int, replicate: int = 0) -> Dataset | np.ndarray:
    """Dispatch on cfg.kind."""
    if n < MIN_STUDY_N:
        raise DomainError(f"Study sample sizes must be >= {MIN_STUDY_N}, got {n}")
    if cfg.kind == "ate_sim61":
        return dgp_ate(n, seed, replicate, cfg)
    if cfg.kind == "custom_null":
        return dgp_null(n, seed, replicate, cfg)
    return dgp_density(n, seed, replicate, cfg)


def true_propensity(cfg: DgpConfig) -> Any:
    """Known propensity of the DGP, for the oracle-nuisance diagnostic."""
    if cfg.kind == "custom_null":
        return lambda W: np.full(W.shape[0], 0.5)
    return gbar0


def true_values(kind: str, cfg: DgpConfig | None = None) -> dict[str, float]:
    """
    psi0 and efficiency bound of a DGP, from the quadrature oracle.

    Raises:
        DomainError: If the kind is unknown.
    """
    cfg = cfg or DgpConfig()
    if kind == "ate_sim61":
        truth = oracle.ate_truth(cfg.noise_variance, cfg.beta_shape)
    elif kind == "custom_null":
        truth = oracle.null_truth(cfg.noise_variance)
    elif kind == "density_sim62":
        truth = oracle.density_truth(cfg.density_mean, cfg.density_sd)
    else:
        raise DomainError(f"Unknown DGP kind: {kind}")
    return dict(truth)


def describe(cfg: DgpConfig) -> dict[str, Any]:
    """Resolved parameters for the report header."""
    out: dict[str, Any] = {"kind": cfg.kind}
    if cfg.kind == "density_sim62":
        out |= {
            "mean": cfg.density_mean,
            "spread": cfg.density_spread,
            "spread_is": cfg.density_spread_is,
            "sd": cfg.density_sd,
        }
    else:
        out |= {"noise_variance": cfg.noise_variance, "beta_shape": cfg.beta_shape, "beta_sampler": BETA_SAMPLER}
    return out
