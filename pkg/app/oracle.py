#!/usr/bin/env python3
"""
True parameter values and efficiency bounds of the simulation studies.

Computes, by numerical quadrature, the target value and the variance of the
efficient influence curve for each study DGP, and cross-checks them against
the closed forms where one exists. The simulation runner reads its truths
from here.

Checks Performed:
    1. ATE truth: E[Q(1, W)] = 0.5 by quadrature over (W1, W2)
    2. ATE bound: E[sigma^2 / G(W)] + Var(Q(1, W)), finite and positive
    3. Density truth: integral of p^2 against 1 / (2 sigma sqrt(pi))
    4. Density bound: 4 (integral of p^3 - psi0^2) against its closed form,
       under both readings of the spread parameter (sd and variance)

Exit Codes:
    0: Every quadrature value matches its closed form
    1: One or more checks failed

Usage:
    python3 oracle.py [--json]
"""

import argparse
import json
import math
import sys
from functools import lru_cache
from typing import Any

import numpy as np
from scipy import integrate
from scipy.special import beta as beta_function
from scipy.special import expit
from scipy.stats import norm

# =============================================================================
# CONSTANTS
# =============================================================================

# Defaults of the two study DGPs
ATE_NOISE_VARIANCE = 0.25
ATE_BETA_SHAPE = 0.85
DENSITY_MEAN = -4.0
DENSITY_SPREAD = 5.0 / 3.0

# Agreement required between quadrature and closed forms
QUADRATURE_TOL = 1e-8

QUAD_LIMIT = 200

# Half-width of the density integration range, in standard deviations
TAIL_SDS = 40.0


# =============================================================================
# ATE STUDY
# =============================================================================


def _w1(z: float) -> float:
    return 4.0 * z - 2.0


def ate_qbar(w1: np.ndarray | float, w2: np.ndarray | float) -> Any:
    """Q(1, w) = expit(w1 - 2 w1 w2); the propensity shares this form."""
    return expit(w1 - 2.0 * np.multiply(w1, w2))


def _beta_expectation(f: Any, shape: float) -> float:
    """E f(Z) for Z ~ Beta(shape, shape) with the endpoint singularities in the weight."""
    value, _ = integrate.quad(
        f,
        0.0,
        1.0,
        weight="alg",
        wvar=(shape - 1.0, shape - 1.0),
        limit=QUAD_LIMIT,
        epsabs=1e-13,
        epsrel=1e-12,
    )
    return float(value / beta_function(shape, shape))


def _w_expectation(f: Any, shape: float) -> float:
    """E f(W1, W2) with W1 = 4Z - 2 and W2 ~ Bernoulli(0.5) independent."""
    return 0.5 * sum(_beta_expectation(lambda z, w2=w2: f(_w1(z), w2), shape) for w2 in (0.0, 1.0))


@lru_cache(maxsize=32)
def ate_truth(noise_variance: float = ATE_NOISE_VARIANCE, beta_shape: float = ATE_BETA_SHAPE) -> dict[str, float]:
    """
    psi0 and efficiency bound of the treatment-specific mean study.

    The bound is Var D* = E[sigma^2 / G(W)] + Var(Q(1, W)).
    """
    psi0 = _w_expectation(lambda w1, w2: float(ate_qbar(w1, w2)), beta_shape)
    second = _w_expectation(lambda w1, w2: float(ate_qbar(w1, w2)) ** 2, beta_shape)
    inverse_g = _w_expectation(lambda w1, w2: 1.0 / float(ate_qbar(w1, w2)), beta_shape)
    return {
        "psi0": psi0,
        "efficiency_bound": noise_variance * inverse_g + (second - psi0**2),
        "noise_variance": noise_variance,
        "beta_shape": beta_shape,
    }


@lru_cache(maxsize=32)
def null_truth(noise_variance: float = ATE_NOISE_VARIANCE) -> dict[str, float]:
    """Pure-noise outcome with a fair-coin treatment: psi0 = 0, bound = 2 sigma^2."""
    return {"psi0": 0.0, "efficiency_bound": 2.0 * noise_variance, "noise_variance": noise_variance}


# =============================================================================
# DENSITY STUDY
# =============================================================================


def density_closed_form(sd: float) -> dict[str, float]:
    """Gaussian identities: int p^2 = 1 / (2 sd sqrt(pi)), int p^3 = 1 / (2 pi sd^2 sqrt(3))."""
    psi0 = 1.0 / (2.0 * sd * math.sqrt(math.pi))
    cube = 1.0 / (2.0 * math.pi * sd**2 * math.sqrt(3.0))
    return {"psi0": psi0, "integral_p3": cube, "efficiency_bound": 4.0 * (cube - psi0**2)}


@lru_cache(maxsize=32)
def density_truth(mean: float = DENSITY_MEAN, sd: float = DENSITY_SPREAD) -> dict[str, float]:
    """psi0 = int p^2 and bound 4 (int p^3 - psi0^2) for N(mean, sd^2), by quadrature."""

    def power(k: int) -> float:
        value, _ = integrate.quad(
            lambda o: norm.pdf(o, loc=mean, scale=sd) ** k,
            mean - TAIL_SDS * sd,
            mean + TAIL_SDS * sd,
            points=[mean],
            limit=QUAD_LIMIT,
            epsabs=1e-14,
            epsrel=1e-12,
        )
        return float(value)

    psi0 = power(2)
    cube = power(3)
    return {
        "psi0": psi0,
        "integral_p3": cube,
        "efficiency_bound": 4.0 * (cube - psi0**2),
        "mean": mean,
        "sd": sd,
    }


def density_readings(spread: float = DENSITY_SPREAD, mean: float = DENSITY_MEAN) -> dict[str, dict[str, float]]:
    """Truths when the spread is read as a standard deviation and as a variance."""
    return {
        "sd": density_truth(mean, spread),
        "variance": density_truth(mean, math.sqrt(spread)),
    }


# =============================================================================
# CHECKS
# =============================================================================


def check_ate_truth() -> bool:
    """
    psi0 of the ATE study equals 0.5.

    expit(w) + expit(-w) = 1 and W2 is a fair coin independent of W1.
    """
    print("Checking ATE truth...")
    psi0 = ate_truth()["psi0"]
    ok = abs(psi0 - 0.5) <= QUADRATURE_TOL
    print(f"{'✓' if ok else '✗'} psi0 = {psi0:.12f} (closed form 0.5)")
    return ok


def check_ate_bound() -> bool:
    print("\nChecking ATE efficiency bound...")
    truth = ate_truth()
    bound = truth["efficiency_bound"]
    ok = math.isfinite(bound) and bound > truth["noise_variance"]
    print(f"{'✓' if ok else '✗'} bound = {bound:.10f} (noise variance {truth['noise_variance']})")
    return ok


def check_density(reading: str) -> bool:
    print(f"\nChecking density truths ({reading} reading)...")
    quad = density_readings()[reading]
    closed = density_closed_form(quad["sd"])
    ok = True
    for key in ("psi0", "integral_p3", "efficiency_bound"):
        agree = abs(quad[key] - closed[key]) <= QUADRATURE_TOL
        ok = ok and agree
        print(f"{'✓' if agree else '✗'} {key}: quadrature {quad[key]:.12f}, closed form {closed[key]:.12f}")
    return ok


def oracle_table() -> dict[str, Any]:
    """Every truth the studies use, for the report header and --json."""
    return {
        "ate": ate_truth(),
        "custom_null": null_truth(),
        "density": density_readings(),
    }


def main() -> None:
    """
    Run all oracle checks and report results.

    Exit Codes:
        0: All checks passed
        1: One or more checks failed
    """
    parser = argparse.ArgumentParser(description="Quadrature truths of the simulation studies")
    parser.add_argument("--json", action="store_true", help="Print the truth table as JSON and exit")
    args = parser.parse_args()

    if args.json:
        print(json.dumps(oracle_table(), indent=2))
        sys.exit(0)

    print("Simulation Oracle")
    print("=" * 50)

    checks = [
        ("ATE truth", check_ate_truth),
        ("ATE bound", check_ate_bound),
        ("Density (sd reading)", lambda: check_density("sd")),
        ("Density (variance reading)", lambda: check_density("variance")),
    ]

    passed = 0
    for name, check in checks:
        try:
            if check():
                passed += 1
            else:
                print(f"\n❌ {name} check failed")
        except Exception as e:
            print(f"\n❌ {name} check crashed: {e}")

    print("\n" + "=" * 50)
    print(f"Oracle Results: {passed}/{len(checks)} checks passed")
    sys.exit(0 if passed == len(checks) else 1)


if __name__ == "__main__":
    main()
