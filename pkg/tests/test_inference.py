"""
Unit tests for Wald inference from influence-curve values.
"""

import math

import numpy as np
import pytest
from errors import DegenerateDataError, DimensionError
from targets.inference import Z_95, wald_ci, z_quantile


class TestZQuantile:
    """Tests for z_quantile()."""

    def test_95_percent(self):
        assert z_quantile(0.95) == Z_95

    def test_90_percent(self):
        assert z_quantile(0.90) == pytest.approx(1.6448536269514722, abs=1e-12)

    @pytest.mark.parametrize("level", [0.0, 1.0, -0.5, 1.5])
    def test_level_outside_unit_interval(self, level):
        with pytest.raises(ValueError):
            z_quantile(level)


class TestWaldCi:
    """Tests for wald_ci()."""

    def test_sample_standard_deviation(self):
        eic = np.array([1.0, -1.0, 1.0, -1.0])
        lo, hi, se = wald_ci(0.5, eic)
        expected_se = math.sqrt(4.0 / 3.0) / 2.0
        assert se == pytest.approx(expected_se)
        assert lo == pytest.approx(0.5 - Z_95 * expected_se)
        assert hi == pytest.approx(0.5 + Z_95 * expected_se)

    def test_interval_is_symmetric(self, rng):
        lo, hi, _ = wald_ci(2.0, rng.normal(size=200), level=0.8)
        assert (lo + hi) / 2.0 == pytest.approx(2.0)

    def test_constant_curve(self):
        with pytest.raises(DegenerateDataError):
            wald_ci(0.0, np.full(10, 3.0))

    def test_single_value(self):
        with pytest.raises(DimensionError):
            wald_ci(0.0, np.array([1.0]))
