"""
Unit tests for the lasso solver.

Tests penalized and constrained fits against independent oracles
(normal equations, projected gradient), the KKT conditions along paths,
and the score equations solved at converged fits.
"""

import math

import numpy as np
import pytest
from errors import ConvergenceError, DomainError
from hal._kernels import cd_sweep, quadratic_objective
from hal.basis import design_matrix, enumerate_basis
from hal.dataset import Dataset
from hal.lasso import (
    HalFit,
    LassoSettings,
    basis_scores,
    fit_constrained,
    fit_penalized,
    kkt_check,
    lambda_max,
    lasso_path,
)
from hal.loss import BINOMIAL, SQUARED_ERROR

TIGHT = LassoSettings(tol=1e-10)

# =============================================================================
# HELPERS - Random instances and a projected-gradient oracle
# =============================================================================


def _instance(rng, n_range=(8, 21), p_range=(2, 6)):
    """Dense design with an intercept column, and a dataset carrying its outcome."""
    n = int(rng.integers(*n_range))
    p = int(rng.integers(*p_range))
    X = np.column_stack([np.ones(n), rng.normal(size=(n, p - 1))])
    y = X @ rng.normal(size=p) + rng.normal(0.0, 0.5, size=n)
    return X, Dataset.from_arrays(X[:, 1:], y)


def _objective(X, y, beta):
    return 0.5 * float(np.mean((y - X @ beta) ** 2))


def _project_l1(v, C):
    """Euclidean projection onto the L1 ball of radius C."""
    if np.abs(v).sum() <= C:
        return v
    if C <= 0:
        return np.zeros_like(v)
    u = np.sort(np.abs(v))[::-1]
    css = np.cumsum(u)
    rho = np.nonzero(u * np.arange(1, u.size + 1) > css - C)[0][-1]
    theta = (css[rho] - C) / (rho + 1.0)
    return np.sign(v) * np.maximum(np.abs(v) - theta, 0.0)


def _projected_gradient(X, y, C, iters=20_000):
    """Accelerated projected gradient for squared error with an unpenalized first column."""
    n = X.shape[0]
    step = 1.0 / np.linalg.eigvalsh(X.T @ X / n).max()
    beta = np.zeros(X.shape[1])
    z = beta.copy()
    t = 1.0
    for _ in range(iters):
        nxt = z + step * X.T @ (y - X @ z) / n
        nxt[1:] = _project_l1(nxt[1:], C)
        t_next = (1.0 + math.sqrt(1.0 + 4.0 * t * t)) / 2.0
        z = nxt + ((t - 1.0) / t_next) * (nxt - beta)
        beta, t = nxt, t_next
    return beta


# =============================================================================
# TESTS - Penalized fits
# =============================================================================


class TestFitPenalized:
    """Tests for fit_penalized()."""

    def test_null_model_at_lambda_max(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        lmax = lambda_max(design, step_data, SQUARED_ERROR)
        fit = fit_penalized(design, step_data, SQUARED_ERROR, lmax * 1.01)
        assert fit.penalized_active == ()
        assert fit.beta[0] == pytest.approx(step_data.Y.mean())

    def test_zero_lambda_matches_least_squares(self, rng):
        X = np.column_stack([np.ones(50), rng.normal(size=(50, 3))])
        y = X @ np.array([1.0, -2.0, 0.5, 3.0]) + rng.normal(0.0, 0.1, size=50)
        data = Dataset.from_arrays(X[:, 1:], y)
        fit = fit_penalized(X, data, SQUARED_ERROR, 0.0, settings=TIGHT)
        expected, *_ = np.linalg.lstsq(X, y, rcond=None)
        np.testing.assert_allclose(fit.beta, expected, atol=1e-6)

    def test_negative_lambda_rejected(self, step_data):
        with pytest.raises(DomainError):
            fit_penalized(np.ones((step_data.n, 1)), step_data, SQUARED_ERROR, -1.0)

    def test_sweep_budget_exhaustion_carries_trace(self, rng):
        X, data = _instance(rng, (15, 16), (5, 6))
        with pytest.raises(ConvergenceError) as exc:
            fit_penalized(X, data, SQUARED_ERROR, 1e-4, settings=LassoSettings(max_iters=1))
        assert exc.value.trace

    def test_penalized_intercept_is_zero_at_lambda_max(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        settings = LassoSettings(penalize_intercept=True)
        lmax = lambda_max(design, step_data, SQUARED_ERROR, settings=settings)
        fit = fit_penalized(design, step_data, SQUARED_ERROR, lmax, settings=settings)
        assert np.all(fit.beta == 0.0)
        assert fit.C == 0.0

    def test_binomial_fit_satisfies_kkt(self, binary_outcome_data):
        data = binary_outcome_data
        design = design_matrix(data, enumerate_basis(data, 0))
        lmax = lambda_max(design, data, BINOMIAL)
        fit = fit_penalized(design, data, BINOMIAL, 0.05 * lmax)
        assert kkt_check(fit, design, data, tol=1e-4).ok
        assert fit.penalized_active

    def test_fit_json_reload(self, step_data):
        dictionary = enumerate_basis(step_data, 1)
        design = design_matrix(step_data, dictionary)
        fit = fit_penalized(design, step_data, SQUARED_ERROR, 0.01, dictionary=dictionary)
        again = HalFit.from_json(fit.to_json())
        np.testing.assert_array_equal(again.beta, fit.beta)
        assert again.dictionary == dictionary
        assert again.C == fit.C
        np.testing.assert_array_equal(again.predict_data(step_data), fit.predict(design))


# =============================================================================
# TESTS - Constrained fits
# =============================================================================


class TestFitConstrained:
    """Tests for fit_constrained()."""

    def test_zero_bound_is_intercept_only(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        fit = fit_constrained(design, step_data, SQUARED_ERROR, 0.0)
        assert fit.penalized_active == ()

    def test_huge_bound_is_slack(self, rng):
        X, data = _instance(rng, (30, 31), (3, 4))
        fit = fit_constrained(X, data, SQUARED_ERROR, 1e6)
        assert fit.slack

    def test_active_bound_is_reached(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        fit = fit_constrained(design, step_data, SQUARED_ERROR, 0.8)
        assert not fit.slack
        assert abs(fit.C - 0.8) <= max(1e-6, 1e-4 * 0.8)

    def test_negative_bound_rejected(self, step_data):
        with pytest.raises(DomainError):
            fit_constrained(np.ones((step_data.n, 1)), step_data, SQUARED_ERROR, -0.1)

    def test_matches_projected_gradient_oracle(self, rng):
        """Objective within 1e-5 of the oracle on 50 small squared-error instances."""
        for _ in range(50):
            X, data = _instance(rng)
            ols, *_ = np.linalg.lstsq(X, data.Y, rcond=None)
            C = float(rng.uniform(0.1, 0.9)) * float(np.abs(ols[1:]).sum())
            fit = fit_constrained(X, data, SQUARED_ERROR, C)
            oracle = _projected_gradient(X, data.Y, fit.C)
            assert abs(_objective(X, data.Y, fit.beta) - _objective(X, data.Y, oracle)) <= 1e-5


# =============================================================================
# TESTS - Paths
# =============================================================================


class TestLassoPath:
    """Tests for lasso_path()."""

    def test_first_point_is_null_model(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        path = lasso_path(design, step_data, SQUARED_ERROR, n_lambda=20)
        assert path.lambdas[0] == pytest.approx(path.lambda_max)
        assert path.fits[0].penalized_active == ()

    def test_realized_norm_nondecreasing(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        path = lasso_path(design, step_data, SQUARED_ERROR, n_lambda=30)
        assert np.all(np.diff(path.Cs) >= -1e-8)
        assert path.monotonicity_violations == 0

    def test_grid_must_decrease(self, step_data):
        design = np.ones((step_data.n, 1))
        with pytest.raises(DomainError):
            lasso_path(design, step_data, SQUARED_ERROR, [0.1, 0.2])

    def test_constant_outcome_collapses_to_null_fit(self, step_data):
        data = step_data.with_outcome(np.full(step_data.n, 2.5))
        design = design_matrix(data, enumerate_basis(data, 0))
        path = lasso_path(design, data, SQUARED_ERROR)
        assert len(path) == 1
        assert path.lambda_max == 0.0
        assert path.fits[0].predict(design) == pytest.approx(np.full(data.n, 2.5))

    def test_kkt_holds_along_random_paths(self, rng):
        """KKT max violation <= 1e-4 on every path fit of 20 instances."""
        for _ in range(20):
            X, data = _instance(rng)
            path = lasso_path(X, data, SQUARED_ERROR, n_lambda=15, ratio=1e-3)
            for fit in path.fits:
                assert kkt_check(fit, X, data).max_violation <= 1e-4


# =============================================================================
# TESTS - Scores and KKT diagnostics
# =============================================================================


class TestScoresAndKkt:
    """Tests for basis_scores() and kkt_check()."""

    def test_unconstrained_optimum_is_stationary(self, rng):
        X, data = _instance(rng, (40, 41), (4, 5))
        fit = fit_penalized(X, data, SQUARED_ERROR, 0.0, settings=TIGHT)
        assert np.max(np.abs(basis_scores(fit, X, data))) <= 1e-6

    def test_active_scores_equal_lambda(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        fit = fit_penalized(design, step_data, SQUARED_ERROR, 0.02, settings=TIGHT)
        scores = basis_scores(fit, design, step_data)
        active = np.asarray(fit.penalized_active)
        np.testing.assert_allclose(np.abs(scores[active]), 0.02, atol=1e-6)
        inactive = np.setdiff1d(np.arange(1, design.shape[1]), active)
        assert np.all(np.abs(scores[inactive]) <= 0.02 + 1e-6)

    def test_null_model_has_no_violations(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        lmax = lambda_max(design, step_data, SQUARED_ERROR)
        fit = fit_penalized(design, step_data, SQUARED_ERROR, lmax)
        report = kkt_check(fit, design, step_data)
        assert report.ok
        assert set(report.status[1:]) == {"inactive"}

    def test_perturbation_is_detected(self, step_data):
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        fit = fit_penalized(design, step_data, SQUARED_ERROR, 0.02)
        j = fit.penalized_active[0]
        beta = fit.beta.copy()
        beta[j] += 1e-2
        moved = HalFit(beta=beta, loss=fit.loss, lam=fit.lam)
        assert kkt_check(moved, design, step_data).max_violation > 10 * 1e-5

    def test_score_equations_on_active_set(self, step_data, rng):
        """|sum h_j beta_j score_j| <= 1e-6 ||h||_inf C for h with sum h_j |beta_j| = 0."""
        design = design_matrix(step_data, enumerate_basis(step_data, 0))
        fit = fit_penalized(design, step_data, SQUARED_ERROR, 0.01, settings=TIGHT)
        scores = basis_scores(fit, design, step_data)
        active = np.asarray(fit.penalized_active)
        assert active.size >= 2
        weights = np.abs(fit.beta[active])
        for _ in range(100):
            h = rng.normal(size=active.size)
            h -= (h @ weights) / (weights @ weights) * weights
            lhs = abs(float(np.sum(h * fit.beta[active] * scores[active])))
            assert lhs <= 1e-6 * np.max(np.abs(h)) * fit.C


# =============================================================================
# TESTS - Coordinate-descent sweeps
# =============================================================================


class TestDescentSweeps:
    """Tests for the compiled sweep kernel."""

    @pytest.mark.parametrize("weighted", [False, True])
    def test_sweeps_never_raise_the_objective(self, rng, weighted):
        for _ in range(50):
            X, data = _instance(rng, n_range=(20, 61), p_range=(3, 12))
            n, p = X.shape
            v = rng.uniform(0.5, 2.0, size=n) if weighted else np.ones(n)
            beta = np.zeros(p)
            resid = np.array(data.Y, dtype=float)
            col_curv = (v @ X**2) / n
            penalty = np.ones(p)
            penalty[0] = 0.0
            lam = float(rng.uniform(0.001, 0.2))
            coords = np.arange(p, dtype=np.int64)
            before = quadratic_objective(v, resid, beta, penalty, lam)
            for _ in range(25):
                cd_sweep(X, v, resid, beta, col_curv, penalty, lam, coords)
                after = quadratic_objective(v, resid, beta, penalty, lam)
                assert after <= before + 1e-12 * max(1.0, abs(before))
                before = after

    def test_sweep_keeps_residual_in_step(self, rng):
        X, data = _instance(rng)
        n, p = X.shape
        beta = np.zeros(p)
        resid = np.array(data.Y, dtype=float)
        penalty = np.r_[0.0, np.ones(p - 1)]
        cd_sweep(X, np.ones(n), resid, beta, (X**2).mean(axis=0), penalty, 0.05, np.arange(p, dtype=np.int64))
        np.testing.assert_allclose(resid, data.Y - X @ beta, atol=1e-12)
