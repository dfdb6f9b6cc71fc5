"""
Desk-scale acceptance runs of the two simulation studies.

These reproduce the qualitative efficiency claims with 200 replicates per
sample size and take minutes on a multi-core machine. Run them with
``pytest -m slow``; HAL_THREADS sets the worker count.
"""

import math
import os

import numpy as np
import pytest
from hal.dataset import Dataset
from schemas.run_config import DgpConfig, SimulationConfig, UndersmoothConfig
from scipy.stats import norm
from sim.dgp import dgp_ate, dgp_density, gbar0, qbar0, true_values
from sim.runner import run_monte_carlo
from targets.ate import eic_ate
from targets.density import HazardDensity, make_edges, prepare_hazard_fit, select_density

pytestmark = [pytest.mark.slow, pytest.mark.integration]

THREADS = int(os.environ.get("HAL_THREADS", os.cpu_count() or 1))


def _cell(summary, n, estimator):
    rows = summary[(summary["n"] == n) & (summary["estimator"] == estimator)]
    assert len(rows) == 1
    return rows.iloc[0]


# =============================================================================
# TESTS - Influence curves at the truth
# =============================================================================


class TestTrueInfluenceCurves:
    """The canonical gradients have mean zero under the data-generating law."""

    def test_ate_eic_at_truth(self):
        data: Dataset = dgp_ate(100_000, seed=21)
        q1 = qbar0(data.X)
        eic = eic_ate(q1, q1, gbar0(data.X), data.A, data.Y, 0.5)
        assert abs(float(np.mean(eic))) <= 4.0 * float(np.std(eic)) / math.sqrt(data.n)

    def test_density_eic_at_truth(self):
        cfg = DgpConfig(kind="density_sim62")
        o = dgp_density(100_000, seed=22, cfg=cfg)
        psi0 = true_values("density_sim62", cfg)["psi0"]
        eic = 2.0 * (norm.pdf(o, loc=cfg.density_mean, scale=cfg.density_sd) - psi0)
        assert abs(float(np.mean(eic))) <= 4.0 * float(np.std(eic)) / math.sqrt(o.shape[0])


# =============================================================================
# TESTS - Single large fits
# =============================================================================


class TestLargeSampleFits:
    """One large dataset per estimand."""

    def test_density_l1_distance(self):
        cfg = DgpConfig(kind="density_sim62")
        o = dgp_density(5000, seed=23, cfg=cfg)
        d: HazardDensity = select_density(prepare_hazard_fit(o, 320), UndersmoothConfig())
        edges = make_edges(o, 320)
        true_mass = np.diff(norm.cdf(edges, loc=cfg.density_mean, scale=cfg.density_sd))
        distance = float(np.sum(np.abs(d.density * d.binwidth - true_mass)))
        assert distance <= 0.15
        assert d.report is not None
        assert d.report.C_selected >= d.report.C_cv


# =============================================================================
# TESTS - Treatment-specific mean study
# =============================================================================


@pytest.fixture(scope="module")
def ate_report():
    cfg = SimulationConfig(
        study="ate",
        n_grid=[250, 500, 1000, 2000],
        replicates=200,
        base_seed=20240101,
        estimators=["targeted_eic"],
        ate={"basis": {"max_knots_per_subset": 400}},
    )
    return run_monte_carlo(cfg, threads=THREADS)


class TestAteStudy:
    """Treatment-specific mean study with the targeted rule."""

    def test_run_not_failed(self, ate_report):
        assert not ate_report.failed_run

    def test_bias_shrinks_faster_than_root_n(self, ate_report):
        small = _cell(ate_report.summary, 250, "targeted_eic")
        large = _cell(ate_report.summary, 2000, "targeted_eic")
        assert abs(large["sqrt_n_bias"]) <= 0.5 * abs(small["sqrt_n_bias"])
        assert abs(large["sqrt_n_bias"]) <= 0.15

    def test_coverage(self, ate_report):
        assert 0.90 <= _cell(ate_report.summary, 2000, "targeted_eic")["coverage_95"] <= 0.98

    def test_efficiency(self, ate_report):
        cell = _cell(ate_report.summary, 2000, "targeted_eic")
        assert abs(cell["n_mse"] / cell["efficiency_bound"] - 1.0) <= 0.35

    def test_targeted_criterion_met(self, ate_report):
        for n in (250, 500, 1000, 2000):
            assert _cell(ate_report.summary, n, "targeted_eic")["threshold_met_rate"] >= 0.95

    def test_selected_bound_dominates(self, ate_report):
        ok = ate_report.replicates[~ate_report.replicates["failed"]]
        assert (ok["C_selected"] >= ok["C_cv"]).all()


@pytest.fixture(scope="module")
def paired_ate_report():
    cfg = SimulationConfig(
        study="ate",
        n_grid=[500, 1000],
        replicates=100,
        base_seed=20240202,
        estimators=["cv", "targeted_eic"],
        ate={"basis": {"max_knots_per_subset": 200}},
    )
    return run_monte_carlo(cfg, threads=THREADS)


class TestAteUndersmoothingEffect:
    """CV and targeted fits on the same datasets."""

    def test_failures_below_tolerance(self, paired_ate_report):
        assert paired_ate_report.failure_rate < 0.05

    def test_undersmoothing_shrinks_eic_mean(self, paired_ate_report):
        ok = paired_ate_report.replicates[~paired_ate_report.replicates["failed"]]
        wide = ok.pivot_table(index=["n", "replicate"], columns="estimator", values="sqrt_n_PnDstar").dropna()
        worse = (wide["targeted_eic"].abs() > wide["cv"].abs() + 1e-9).mean()
        assert worse < 0.05

    def test_cv_estimate_is_nearly_unbiased(self, paired_ate_report):
        cell = _cell(paired_ate_report.summary, 1000, "cv")
        assert abs(cell["sqrt_n_bias"]) / math.sqrt(1000) <= 0.05


# =============================================================================
# TESTS - Density study
# =============================================================================


@pytest.fixture(scope="module")
def density_report():
    cfg = SimulationConfig(
        study="density",
        dgp={"kind": "density_sim62"},
        n_grid=[250, 1000, 5000],
        replicates=200,
        base_seed=20240101,
        estimators=["targeted_eic"],
    )
    return run_monte_carlo(cfg, threads=THREADS)


class TestDensityStudy:
    """Undersmoothed against cross-validated HAL on paired datasets."""

    def test_run_not_failed(self, density_report):
        assert not density_report.failed_run

    def test_undersmoothing_beats_cv_bias(self, density_report):
        targeted = _cell(density_report.summary, 5000, "targeted_eic")
        cv = _cell(density_report.summary, 5000, "cv")
        assert abs(targeted["sqrt_n_bias"]) < abs(cv["sqrt_n_bias"])

    def test_efficiency(self, density_report):
        cell = _cell(density_report.summary, 5000, "targeted_eic")
        assert abs(cell["n_mse"] / cell["efficiency_bound"] - 1.0) <= 0.5

    def test_normalization_shortfall(self, density_report):
        ok = density_report.replicates[~density_report.replicates["failed"]]
        assert (ok.loc[ok["n"] >= 1000, "shortfall"] < 1e-3).all()

    def test_selected_bound_dominates(self, density_report):
        ok = density_report.replicates[~density_report.replicates["failed"]]
        assert (ok["C_selected"] >= ok["C_cv"]).all()
