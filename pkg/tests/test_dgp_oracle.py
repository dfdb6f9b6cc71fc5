"""
Tests for the random streams, the study data-generating processes and the
quadrature oracle of their true values.
"""

import math

import numpy as np
import oracle
import pytest
from errors import DomainError
from schemas.run_config import DgpConfig
from scipy.special import expit
from sim.dgp import describe, dgp_ate, dgp_density, dgp_null, draw, qbar0, true_propensity, true_values
from streams import make_stream, purpose_code

# =============================================================================
# TESTS - Streams
# =============================================================================


class TestStreams:
    """Tests for make_stream()."""

    def test_same_key_same_draws(self):
        first = make_stream(7, 3, "data").normal(size=5)
        np.testing.assert_array_equal(first, make_stream(7, 3, "data").normal(size=5))

    @pytest.mark.parametrize("other", [(8, 3, "data"), (7, 4, "data"), (7, 3, "folds")])
    def test_any_key_change_gives_new_draws(self, other):
        a = make_stream(7, 3, "data").normal(size=5)
        b = make_stream(*other).normal(size=5)
        assert not np.array_equal(a, b)

    def test_purpose_code_is_stable(self):
        assert purpose_code("data") == purpose_code("data")
        assert 0 <= purpose_code("outcome") < 2**64


# =============================================================================
# TESTS - Data-generating processes
# =============================================================================


class TestDgp:
    """Tests for the study draws."""

    def test_ate_draw_shapes_and_ranges(self):
        data = dgp_ate(500, seed=1)
        assert data.n == 500
        assert data.names == ("W1", "W2")
        assert np.all(np.abs(data.X[:, 0]) <= 2.0)
        assert set(np.unique(data.X[:, 1])) <= {0.0, 1.0}
        assert set(np.unique(data.A)) <= {0.0, 1.0}

    def test_ate_draw_is_reproducible(self):
        a, b = dgp_ate(100, 5, 2), dgp_ate(100, 5, 2)
        np.testing.assert_array_equal(a.X, b.X)
        np.testing.assert_array_equal(a.Y, b.Y)
        np.testing.assert_array_equal(a.A, b.A)
        assert not np.array_equal(a.Y, dgp_ate(100, 5, 3).Y)

    def test_smaller_draw_is_a_prefix(self):
        small, large = dgp_ate(60, 9, 1), dgp_ate(120, 9, 1)
        np.testing.assert_array_equal(small.X, large.X[:60])
        np.testing.assert_array_equal(small.A, large.A[:60])
        np.testing.assert_array_equal(small.Y, large.Y[:60])

    def test_outcome_regression(self):
        W = np.array([[1.0, 1.0], [1.0, 0.0], [-0.5, 1.0]])
        np.testing.assert_allclose(qbar0(W), expit(np.array([-1.0, 1.0, 0.5])))

    def test_outcome_noise_variance(self):
        data = dgp_ate(20_000, seed=4)
        residual = data.Y - qbar0(data.X)
        assert np.var(residual) == pytest.approx(0.25, rel=0.05)

    def test_null_draw(self):
        data = dgp_null(20_000, seed=4)
        assert abs(float(np.mean(data.Y))) < 0.02
        assert abs(float(np.mean(data.A)) - 0.5) < 0.02
        np.testing.assert_array_equal(true_propensity(DgpConfig(kind="custom_null"))(data.X[:3]), 0.5)

    def test_density_draw_moments(self):
        o = dgp_density(20_000, seed=2)
        assert float(np.mean(o)) == pytest.approx(-4.0, abs=0.05)
        assert float(np.std(o)) == pytest.approx(5.0 / 3.0, rel=0.03)

    def test_density_variance_reading(self):
        cfg = DgpConfig(kind="density_sim62", density_spread_is="variance")
        assert cfg.density_sd == pytest.approx(math.sqrt(5.0 / 3.0))
        assert describe(cfg)["sd"] == pytest.approx(math.sqrt(5.0 / 3.0))

    def test_draw_dispatch(self):
        assert draw(DgpConfig(kind="density_sim62"), 60, 1).shape == (60,)
        assert draw(DgpConfig(kind="custom_null"), 60, 1).n == 60

    def test_study_sizes_below_minimum(self):
        with pytest.raises(DomainError):
            draw(DgpConfig(), 49, 1)

    def test_nonpositive_size(self):
        with pytest.raises(DomainError):
            dgp_ate(0, 1)


# =============================================================================
# TESTS - Oracle
# =============================================================================


class TestOracle:
    """Tests for the quadrature truths."""

    def test_ate_truth_is_one_half(self):
        assert true_values("ate_sim61")["psi0"] == pytest.approx(0.5, abs=1e-8)

    def test_ate_truth_matches_monte_carlo(self):
        data = dgp_ate(200_000, seed=11)
        assert float(np.mean(qbar0(data.X))) == pytest.approx(0.5, abs=0.005)

    def test_ate_bound_exceeds_noise_variance(self):
        truth = oracle.ate_truth()
        assert math.isfinite(truth["efficiency_bound"])
        assert truth["efficiency_bound"] > 0.25

    def test_null_truth(self):
        truth = true_values("custom_null", DgpConfig(kind="custom_null"))
        assert truth["psi0"] == 0.0
        assert truth["efficiency_bound"] == pytest.approx(0.5)

    @pytest.mark.parametrize("reading", ["sd", "variance"])
    def test_density_quadrature_matches_closed_form(self, reading):
        quad = oracle.density_readings()[reading]
        closed = oracle.density_closed_form(quad["sd"])
        for key in ("psi0", "integral_p3", "efficiency_bound"):
            assert abs(quad[key] - closed[key]) <= 1e-8

    def test_density_truth_value(self):
        truth = true_values("density_sim62", DgpConfig(kind="density_sim62"))
        assert truth["psi0"] == pytest.approx(1.0 / (2.0 * (5.0 / 3.0) * math.sqrt(math.pi)), abs=1e-10)

    def test_unknown_kind(self):
        with pytest.raises(DomainError):
            true_values("ate_sim99")

    def test_oracle_table(self):
        assert set(oracle.oracle_table()) == {"ate", "custom_null", "density"}
