"""V-fold sample splits."""

import numpy as np
from errors import DomainError
from streams import make_stream


def vfold_split(n: int, V: int, seed: int) -> np.ndarray:
    """
    Assign each of n rows to one of V folds.

    A seeded permutation deals rows round-robin, so fold sizes differ by at
    most one.

    Returns:
        Integer array of fold labels 0..V-1.

    Raises:
        DomainError: If V < 2 or n < V.
    """
    if V < 2:
        raise DomainError(f"Need at least 2 folds, got {V}")
    if n < V:
        raise DomainError(f"Cannot split {n} rows into {V} folds")
    order = make_stream(seed, 0, "folds").permutation(n)
    folds = np.empty(n, dtype=int)
    folds[order] = np.arange(n) % V
    return folds


def fold_indices(folds: np.ndarray) -> list[tuple[np.ndarray, np.ndarray]]:
    """(train rows, validation rows) for every fold label."""
    out = []
    for v in range(int(folds.max()) + 1):
        out.append((np.flatnonzero(folds != v), np.flatnonzero(folds == v)))
    return out
