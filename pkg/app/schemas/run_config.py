"""
Pydantic schemas for run configuration validation.

Defines the configuration sections for generic HAL fits, the two worked
estimands, and Monte Carlo studies, with defaults matching the desk-scale
studies.
"""

import math
from typing import Annotated, Any, Literal

from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    field_validator,
    model_validator,
)

# =============================================================================
# CONSTANTS
# =============================================================================

# Supported smoothness orders
SUPPORTED_ORDERS = frozenset({0, 1, 2, 3})

# CLI spellings of the undersmoothing rules
RULE_ALIASES = {
    "cv": "cv",
    "global": "global_score",
    "global_score": "global_score",
    "sparse": "sparse_support",
    "sparse_support": "sparse_support",
    "targeted": "targeted_eic",
    "targeted_eic": "targeted_eic",
}

# Smallest sample size a DGP may draw for a study
MIN_STUDY_N = 50

# Propensity truncation bound
DEFAULT_GMIN = 0.01

# Long-format row budget for hazard density fits
MAX_LONG_FORMAT_ROWS = 50_000_000

# Density bins below/above the sample-size cutoff
SMALL_SAMPLE_BINS = 80
LARGE_SAMPLE_BINS = 320
BIN_SWITCH_N = 1000

RuleName = Literal["cv", "global_score", "sparse_support", "targeted_eic"]


def normalize_rule(value: Any) -> Any:
    """Map CLI aliases (global, sparse, targeted) to canonical rule names."""
    if isinstance(value, str):
        key = value.strip().lower()
        if key not in RULE_ALIASES:
            raise ValueError(f"Unknown rule {value!r}. Valid rules: {', '.join(sorted(set(RULE_ALIASES)))}")
        return RULE_ALIASES[key]
    return value


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", str_strip_whitespace=True)


# =============================================================================
# SOLVER AND BASIS
# =============================================================================


class BasisCapsConfig(_Section):
    """Limits on basis enumeration."""

    max_interaction_degree: Annotated[
        int | None,
        Field(default=None, ge=1, description="Largest interaction subset size (None = all covariates)"),
    ]
    max_knots_per_subset: Annotated[
        int | None,
        Field(default=None, ge=1, description="Knot tuples kept per subset (None = every observed value)"),
    ]
    deduplicate: Annotated[bool, Field(default=True, description="Drop duplicate design columns")]

    def to_caps(self) -> Any:
        from hal.basis import BasisCaps

        return BasisCaps(self.max_interaction_degree, self.max_knots_per_subset, self.deduplicate)


class LassoConfig(_Section):
    """Coordinate-descent tolerances."""

    tol: Annotated[float, Field(default=1e-7, gt=0, description="Max coefficient change at convergence")]
    max_iters: Annotated[int, Field(default=100_000, ge=1, description="Coordinate sweep budget")]
    kkt_tol: Annotated[float, Field(default=1e-5, gt=0, description="KKT violation tolerance")]
    penalize_intercept: Annotated[bool, Field(default=False, description="Include the intercept in the L1 norm")]

    def to_settings(self) -> Any:
        from hal.lasso import LassoSettings

        return LassoSettings(
            tol=self.tol,
            max_iters=self.max_iters,
            kkt_tol=self.kkt_tol,
            penalize_intercept=self.penalize_intercept,
        )


# =============================================================================
# SELECTION
# =============================================================================


class CvConfig(_Section):
    """V-fold cross-validation over a lambda grid and smoothness orders."""

    folds: Annotated[int, Field(default=10, ge=2, description="Number of folds V")]
    n_lambda: Annotated[int, Field(default=100, ge=1, description="Grid size when no explicit grid is given")]
    lambda_ratio: Annotated[float, Field(default=1e-4, gt=0, lt=1, description="Smallest lambda / lambda_max")]
    lambda_grid: Annotated[
        list[float] | None,
        Field(default=None, description="Explicit strictly decreasing lambda grid"),
    ]
    m_grid: Annotated[list[int], Field(default_factory=lambda: [0], description="Candidate smoothness orders")]
    seed: Annotated[int, Field(default=0, ge=0, description="Seed of the fold assignment")]
    threads: Annotated[int, Field(default=1, ge=1, description="Worker threads for fold fits")]

    @field_validator("lambda_grid")
    @classmethod
    def validate_grid(cls, v: list[float] | None) -> list[float] | None:
        """Grid must be nonempty, nonnegative and strictly decreasing."""
        if v is None:
            return v
        if not v:
            raise ValueError("lambda_grid must not be empty")
        if any(x < 0 for x in v):
            raise ValueError("lambda_grid values must be >= 0")
        if any(b >= a for a, b in zip(v, v[1:], strict=False)):
            raise ValueError("lambda_grid must be strictly decreasing")
        return v

    @field_validator("m_grid")
    @classmethod
    def validate_m_grid(cls, v: list[int]) -> list[int]:
        """Orders must be a nonempty subset of {0, 1, 2, 3}."""
        if not v:
            raise ValueError("m_grid must not be empty")
        bad = sorted(set(v) - SUPPORTED_ORDERS)
        if bad:
            raise ValueError(f"Unsupported orders {bad}; supported: 0-3")
        return sorted(set(v))


class UndersmoothConfig(_Section):
    """Which selector picks C after cross-validation, and its constants."""

    rule: Annotated[RuleName, Field(default="targeted_eic", description="Selection rule")]
    a: Annotated[
        float | None,
        Field(default=None, gt=0, description="Global-score constant (None = empirical score scale at the CV fit)"),
    ]
    c: Annotated[float, Field(default=1.0, gt=0, description="Sparse-support constant")]
    k1: Annotated[
        int | None,
        Field(default=None, ge=1, description="Dimension in the sparse-support exponent (None = covariate count)"),
    ]

    @field_validator("rule", mode="before")
    @classmethod
    def validate_rule(cls, v: Any) -> Any:
        return normalize_rule(v)

    @property
    def alpha(self) -> float | None:
        """1 / (2 (k1 + 2)) when k1 is fixed."""
        return None if self.k1 is None else 1.0 / (2.0 * (self.k1 + 2))


# =============================================================================
# ESTIMANDS
# =============================================================================


class DataSource(_Section):
    """CSV input and column roles."""

    path: Annotated[str, Field(min_length=1, description="CSV file with a header row")]
    outcome: Annotated[str, Field(default="Y", description="Outcome column")]
    treatment: Annotated[str | None, Field(default=None, description="Treatment column")]
    covariates: Annotated[list[str] | None, Field(default=None, description="Covariate columns (None = the rest)")]


class FitConfig(_Section):
    """Generic HAL regression."""

    data: DataSource | None = None
    loss: Annotated[Literal["squared_error", "binomial_loglik"], Field(default="squared_error")]
    m: Annotated[int | None, Field(default=None, ge=0, le=3, description="Fixed order (None = cross-validate m)")]
    basis: BasisCapsConfig = Field(default_factory=BasisCapsConfig)
    cv: CvConfig = Field(default_factory=CvConfig)
    undersmooth: UndersmoothConfig = Field(default_factory=lambda: UndersmoothConfig(rule="cv"))
    lasso: LassoConfig = Field(default_factory=LassoConfig)


class AteConfig(_Section):
    """Treatment-specific mean E[Q(1, W)]."""

    data: DataSource | None = None
    loss: Annotated[
        Literal["squared_error", "binomial_loglik"],
        Field(default="squared_error", description="Outcome-regression loss"),
    ]
    m: Annotated[int, Field(default=0, ge=0, le=3, description="Order of the outcome regression basis")]
    gmin: Annotated[float, Field(default=DEFAULT_GMIN, gt=0, lt=0.5, description="Propensity truncation bound")]
    max_truncated_fraction: Annotated[
        float,
        Field(default=0.05, ge=0, le=1, description="Share of rows allowed to need truncation"),
    ]
    level: Annotated[float, Field(default=0.95, gt=0, lt=1, description="Confidence level")]
    basis: BasisCapsConfig = Field(default_factory=BasisCapsConfig)
    cv: CvConfig = Field(default_factory=CvConfig)
    undersmooth: UndersmoothConfig = Field(default_factory=UndersmoothConfig)
    lasso: LassoConfig = Field(default_factory=LassoConfig)


class DensityConfig(_Section):
    """Integral of the squared density via a binned hazard fit."""

    data: DataSource | None = None
    bins: Annotated[int | None, Field(default=None, ge=10, description="Number of bins (None = by sample size)")]
    pad_fraction: Annotated[float, Field(default=0.001, ge=0, lt=0.5, description="Range padding on each side")]
    level: Annotated[float, Field(default=0.95, gt=0, lt=1, description="Confidence level")]
    max_long_rows: Annotated[int, Field(default=MAX_LONG_FORMAT_ROWS, ge=1, description="Budget for n * bins")]
    cv: CvConfig = Field(default_factory=CvConfig)
    undersmooth: UndersmoothConfig = Field(default_factory=UndersmoothConfig)
    lasso: LassoConfig = Field(default_factory=LassoConfig)

    def bins_for(self, n: int) -> int:
        if self.bins is not None:
            return self.bins
        return LARGE_SAMPLE_BINS if n >= BIN_SWITCH_N else SMALL_SAMPLE_BINS


# =============================================================================
# SIMULATION
# =============================================================================


class DgpConfig(_Section):
    """Data-generating process and its parameters."""

    kind: Annotated[Literal["ate_sim61", "density_sim62", "custom_null"], Field(default="ate_sim61")]
    noise_variance: Annotated[float, Field(default=0.25, gt=0, description="Outcome noise variance")]
    beta_shape: Annotated[float, Field(default=0.85, gt=0, description="Shape of the symmetric Beta for W1")]
    density_mean: Annotated[float, Field(default=-4.0, description="Mean of the density study normal")]
    density_spread: Annotated[float, Field(default=5.0 / 3.0, gt=0, description="Spread of the density study normal")]
    density_spread_is: Annotated[
        Literal["sd", "variance"],
        Field(default="sd", description="Whether density_spread is a standard deviation or a variance"),
    ]

    @property
    def density_sd(self) -> float:
        if self.density_spread_is == "variance":
            return math.sqrt(self.density_spread)
        return self.density_spread


class SimulationConfig(_Section):
    """Monte Carlo study over a grid of sample sizes."""

    study: Annotated[Literal["ate", "density"], Field(default="ate")]
    dgp: DgpConfig = Field(default_factory=DgpConfig)
    n_grid: Annotated[list[int], Field(default_factory=lambda: [250, 500, 1000, 2000])]
    replicates: Annotated[int, Field(default=200, ge=2, description="Replicates per sample size")]
    base_seed: Annotated[int, Field(default=20240101, ge=0, description="Seed of every replicate stream")]
    estimators: Annotated[
        list[RuleName],
        Field(default_factory=lambda: ["targeted_eic"], description="Selection rules fitted on each dataset"),
    ]
    failure_tolerance: Annotated[float, Field(default=0.05, ge=0, le=1, description="Failed share that flags a run")]
    threads: Annotated[int, Field(default=1, ge=1, description="Worker processes")]
    ate: AteConfig = Field(default_factory=AteConfig)
    density: DensityConfig = Field(default_factory=DensityConfig)

    @field_validator("n_grid")
    @classmethod
    def validate_n_grid(cls, v: list[int]) -> list[int]:
        if not v:
            raise ValueError("n_grid must not be empty")
        small = [n for n in v if n < MIN_STUDY_N]
        if small:
            raise ValueError(f"Sample sizes must be >= {MIN_STUDY_N}, got {small}")
        return sorted(set(v))

    @field_validator("estimators", mode="before")
    @classmethod
    def validate_estimators(cls, v: Any) -> Any:
        if isinstance(v, list):
            if not v:
                raise ValueError("estimators must not be empty")
            return [normalize_rule(r) for r in v]
        return v

    @model_validator(mode="after")
    def match_dgp(self) -> "SimulationConfig":
        """The DGP must produce the data the study fits."""
        wanted = {"ate": ("ate_sim61", "custom_null"), "density": ("density_sim62",)}[self.study]
        if self.dgp.kind not in wanted:
            raise ValueError(f"DGP {self.dgp.kind!r} does not fit study {self.study!r}")
        return self


# =============================================================================
# TOP LEVEL
# =============================================================================


class RunConfig(_Section):
    """Everything a CLI invocation needs."""

    seed: Annotated[int, Field(default=0, ge=0, description="Seed for single-dataset commands")]
    threads: Annotated[int | None, Field(default=None, ge=1, description="Worker count (None = environment)")]
    out: Annotated[str | None, Field(default=None, description="Output directory (None = environment)")]
    fit: FitConfig = Field(default_factory=FitConfig)
    ate: AteConfig = Field(default_factory=AteConfig)
    density: DensityConfig = Field(default_factory=DensityConfig)
    simulation: SimulationConfig = Field(default_factory=SimulationConfig)


# =============================================================================
# VALIDATION HELPERS
# =============================================================================


def _format_errors(e: Exception) -> str:
    """First pydantic error as 'loc -> path: msg', with a count of the rest."""
    if hasattr(e, "errors"):
        errors = e.errors()
        if errors:
            first_error = errors[0]
            loc = " -> ".join(str(x) for x in first_error.get("loc", []))
            msg = first_error.get("msg", str(e))
            error_msg = f"{loc}: {msg}" if loc else msg
            if len(errors) > 1:
                error_msg += f" (and {len(errors) - 1} more error(s))"
            return error_msg
    return str(e)


def validate_run_config(config: dict[str, Any]) -> tuple[bool, str, dict[str, Any] | None]:
    """
    Validate a run configuration dictionary.

    Args:
        config: Raw configuration, e.g. parsed from YAML or JSON.

    Returns:
        Tuple of (is_valid, error_message, validated_config).

    Example:
        >>> ok, err, cfg = validate_run_config({"simulation": {"replicates": 2}})
        >>> ok
        True
    """
    if not isinstance(config, dict):
        return False, f"Expected dictionary, got {type(config).__name__}", None
    try:
        validated = RunConfig.model_validate(config)
    except Exception as e:
        return False, _format_errors(e), None
    return True, "", validated.model_dump()


def get_default_config() -> dict[str, Any]:
    """Fully populated default configuration."""
    return RunConfig().model_dump()
