"""
Pytest configuration and shared fixtures for tests.

This module provides small datasets, fast solver and selector settings,
and run configurations reused across the test modules.
"""

import sys
from pathlib import Path

import numpy as np
import pytest

# Add the app directory to sys.path so we can import modules
app_dir = Path(__file__).parent.parent / "app"
sys.path.insert(0, str(app_dir))

from hal.dataset import Dataset  # noqa: E402
from schemas.run_config import AteConfig, CvConfig, DensityConfig, UndersmoothConfig  # noqa: E402

# =============================================================================
# FIXTURES - Datasets
# =============================================================================


@pytest.fixture
def rng():
    """Seeded generator for test data."""
    return np.random.default_rng(20240101)


@pytest.fixture
def three_point_data():
    """k=1, X=(0.1, 0.2, 0.3), the smallest worked basis example."""
    return Dataset.from_arrays(np.array([[0.1], [0.2], [0.3]]), np.array([1.0, 0.0, 1.0]))


@pytest.fixture
def step_data(rng):
    """Noisy step function in one covariate; 60 rows."""
    x = rng.uniform(0.0, 1.0, size=60)
    y = (x >= 0.5).astype(float) + rng.normal(0.0, 0.1, size=60)
    return Dataset.from_arrays(x.reshape(-1, 1), y, names=["x"])


@pytest.fixture
def mixed_data(rng):
    """One continuous and one binary covariate; 40 rows."""
    w1 = rng.uniform(-1.0, 1.0, size=40)
    w2 = rng.binomial(1, 0.5, size=40).astype(float)
    y = w1 + w2 + rng.normal(0.0, 0.2, size=40)
    return Dataset.from_arrays(np.column_stack([w1, w2]), y, names=["W1", "W2"])


@pytest.fixture
def binary_outcome_data(rng):
    """Bernoulli outcome with a monotone logit in one covariate; 80 rows."""
    x = rng.uniform(-2.0, 2.0, size=80)
    y = rng.binomial(1, 1.0 / (1.0 + np.exp(-2.0 * x))).astype(float)
    return Dataset.from_arrays(x.reshape(-1, 1), y, names=["x"])


@pytest.fixture
def treatment_data(rng):
    """Small treatment-specific mean dataset with non-degenerate A; 120 rows."""
    w1 = rng.uniform(-2.0, 2.0, size=120)
    w2 = rng.binomial(1, 0.5, size=120).astype(float)
    g = 1.0 / (1.0 + np.exp(-0.5 * w1))
    a = rng.binomial(1, g).astype(float)
    y = 0.5 + 0.3 * np.sign(w1) + rng.normal(0.0, 0.3, size=120)
    return Dataset.from_arrays(np.column_stack([w1, w2]), y, A=a, names=["W1", "W2"])


# =============================================================================
# FIXTURES - Fast Configurations
# =============================================================================


@pytest.fixture
def fast_cv():
    """Few folds and a short grid so selector tests run quickly."""
    return CvConfig(folds=3, n_lambda=12, lambda_ratio=1e-2, seed=7)


@pytest.fixture
def fast_ate_config(fast_cv):
    """ATE settings on the fast grid with a knot cap."""
    return AteConfig(
        cv=fast_cv,
        basis={"max_knots_per_subset": 40},
        undersmooth=UndersmoothConfig(rule="targeted_eic"),
    )


@pytest.fixture
def fast_density_config(fast_cv):
    """Density settings with the smallest allowed bin count."""
    return DensityConfig(bins=20, cv=fast_cv, undersmooth=UndersmoothConfig(rule="targeted_eic"))


# =============================================================================
# FIXTURES - Files
# =============================================================================


@pytest.fixture
def out_dir(tmp_path):
    """Fresh output directory."""
    path = tmp_path / "out"
    path.mkdir()
    return path


@pytest.fixture
def sample_run_config():
    """Small but complete run configuration as a plain dictionary."""
    return {
        "seed": 3,
        "fit": {"m": 0, "cv": {"folds": 3, "n_lambda": 10}},
        "ate": {"cv": {"folds": 3, "n_lambda": 10}},
        "simulation": {"n_grid": [60, 80], "replicates": 2, "base_seed": 11},
    }


@pytest.fixture
def yaml_config_file(tmp_path, sample_run_config):
    """sample_run_config written as YAML."""
    import yaml

    path = tmp_path / "run.yaml"
    with open(path, "w") as f:
        yaml.safe_dump(sample_run_config, f)
    return str(path)


@pytest.fixture
def corrupt_yaml_file(tmp_path):
    """Create a YAML file with invalid syntax."""
    path = tmp_path / "corrupt.yaml"
    with open(path, "w") as f:
        f.write("invalid: yaml: syntax: [[[")
    return str(path)
