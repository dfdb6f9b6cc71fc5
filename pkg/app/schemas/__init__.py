"""
Schema definitions for configuration validation.

This package contains the Pydantic models for run configurations.
"""

from .run_config import (
    AteConfig,
    BasisCapsConfig,
    CvConfig,
    DataSource,
    DensityConfig,
    DgpConfig,
    FitConfig,
    LassoConfig,
    RunConfig,
    SimulationConfig,
    UndersmoothConfig,
    get_default_config,
    normalize_rule,
    validate_run_config,
)

__all__ = [
    "AteConfig",
    "BasisCapsConfig",
    "CvConfig",
    "DataSource",
    "DensityConfig",
    "DgpConfig",
    "FitConfig",
    "LassoConfig",
    "RunConfig",
    "SimulationConfig",
    "UndersmoothConfig",
    "get_default_config",
    "normalize_rule",
    "validate_run_config",
]
