"""Compiled inner loops for coordinate descent."""

import numpy as np
from numba import njit


@njit(cache=True, nogil=True)
def cd_sweep(
    X: np.ndarray,
    v: np.ndarray,
    resid: np.ndarray,
    beta: np.ndarray,
    col_curv: np.ndarray,
    penalty: np.ndarray,
    lam: float,
    coords: np.ndarray,
) -> float:
    """
    One cyclic pass over coords for the weighted quadratic objective

        (1/2n) sum_i v_i resid_i^2 + lam * sum_j penalty_j |beta_j|

    Updates beta and resid in place and returns the largest coefficient change.
    """
    n = X.shape[0]
    max_change = 0.0
    for t in range(coords.shape[0]):
        j = coords[t]
        cj = col_curv[j]
        if cj <= 0.0:
            continue
        g = 0.0
        for i in range(n):
            g += v[i] * X[i, j] * resid[i]
        g = g / n + cj * beta[j]
        thr = 0.0
        if penalty[j] > 0.0:
            thr = lam * penalty[j]
        if g > thr:
            new = (g - thr) / cj
        elif g < -thr:
            new = (g + thr) / cj
        else:
            new = 0.0
        delta = new - beta[j]
        if delta != 0.0:
            for i in range(n):
                resid[i] -= X[i, j] * delta
            beta[j] = new
            if abs(delta) > max_change:
                max_change = abs(delta)
    return max_change


@njit(cache=True, nogil=True)
def quadratic_objective(v: np.ndarray, resid: np.ndarray, beta: np.ndarray, penalty: np.ndarray, lam: float) -> float:
    n = resid.shape[0]
    total = 0.0
    for i in range(n):
        total += v[i] * resid[i] * resid[i]
    l1 = 0.0
    for j in range(beta.shape[0]):
        if penalty[j] > 0.0:
            l1 += penalty[j] * abs(beta[j])
    return 0.5 * total / n + lam * l1
