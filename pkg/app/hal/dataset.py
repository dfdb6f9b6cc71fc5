"""
Columnar observations for HAL fitting.

A Dataset holds the covariate matrix X, the outcome Y, an optional binary
treatment A, and optional frequency weights (a row with frequency f stands
for f identical observations, which is how pooled hazard data is stored).
Column metadata records each covariate's observed range, whether it is
binary, and the shift that maps its minimum to the origin.
"""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from errors import DimensionError, EmptyDatasetError, NonFiniteError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ColumnMeta:
    """Observed range and role of one covariate column."""

    name: str
    min: float
    max: float
    is_binary: bool

    @property
    def shift(self) -> float:
        """Amount subtracted before basis construction (0 for binary columns)."""
        return 0.0 if self.is_binary else self.min

    def to_dict(self) -> dict[str, Any]:
        return {"name": self.name, "min": self.min, "max": self.max, "is_binary": self.is_binary}


def describe_columns(X: np.ndarray, names: Sequence[str]) -> tuple[ColumnMeta, ...]:
    """Build ColumnMeta for every column of X."""
    metas = []
    for j, name in enumerate(names):
        col = X[:, j]
        values = np.unique(col)
        is_binary = bool(np.all(np.isin(values, (0.0, 1.0))))
        metas.append(ColumnMeta(name=str(name), min=float(col.min()), max=float(col.max()), is_binary=is_binary))
    return tuple(metas)


@dataclass(frozen=True)
class Dataset:
    """
    Immutable n x k observation table.

    Attributes:
        X: Covariates, shape (n, k).
        Y: Outcome, shape (n,).
        A: Optional binary treatment, shape (n,).
        frequency: Optional positive row multiplicities, shape (n,).
        column_meta: Per-covariate metadata.
    """

    X: np.ndarray
    Y: np.ndarray
    A: np.ndarray | None = None
    frequency: np.ndarray | None = None
    column_meta: tuple[ColumnMeta, ...] = field(default=())

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.ndim != 2:
            raise DimensionError(f"X must be two-dimensional, got {X.ndim} dimensions")
        Y = np.asarray(self.Y, dtype=float).reshape(-1)
        n = X.shape[0]
        if n == 0:
            raise EmptyDatasetError("Dataset has no rows")
        if Y.shape[0] != n:
            raise DimensionError(f"Y has {Y.shape[0]} rows but X has {n}")
        if not (np.all(np.isfinite(X)) and np.all(np.isfinite(Y))):
            raise NonFiniteError("Dataset contains NaN or infinite values")

        A = None
        if self.A is not None:
            A = np.asarray(self.A, dtype=float).reshape(-1)
            if A.shape[0] != n:
                raise DimensionError(f"A has {A.shape[0]} rows but X has {n}")
            if not np.all(np.isin(A, (0.0, 1.0))):
                raise NonFiniteError("Treatment A must take values in {0, 1}")

        frequency = None
        if self.frequency is not None:
            frequency = np.asarray(self.frequency, dtype=float).reshape(-1)
            if frequency.shape[0] != n:
                raise DimensionError(f"frequency has {frequency.shape[0]} rows but X has {n}")
            if not (np.all(np.isfinite(frequency)) and np.all(frequency > 0)):
                raise NonFiniteError("frequency weights must be finite and positive")

        meta = self.column_meta or describe_columns(X, [f"X{j + 1}" for j in range(X.shape[1])])
        if len(meta) != X.shape[1]:
            raise DimensionError(f"column_meta has {len(meta)} entries but X has {X.shape[1]} columns")

        # frozen dataclass: normalized arrays are written back through object.__setattr__
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "Y", Y)
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "frequency", frequency)
        object.__setattr__(self, "column_meta", tuple(meta))

    # -------------------------------------------------------------------------
    # Shape and metadata
    # -------------------------------------------------------------------------

    @property
    def n(self) -> int:
        return int(self.X.shape[0])

    @property
    def k(self) -> int:
        return int(self.X.shape[1])

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(m.name for m in self.column_meta)

    @property
    def shifts(self) -> np.ndarray:
        return np.array([m.shift for m in self.column_meta], dtype=float)

    @property
    def effective_size(self) -> float:
        """Number of observations the rows stand for (sum of frequencies)."""
        if self.frequency is None:
            return float(self.n)
        return float(self.frequency.sum())

    # -------------------------------------------------------------------------
    # Derived datasets
    # -------------------------------------------------------------------------

    def subset(self, rows: np.ndarray | Sequence[int]) -> "Dataset":
        """
        Select rows, keeping the parent's column metadata.

        Keeping the parent metadata means fold datasets share the coordinate
        shift of the full data, so one basis dictionary serves every fold.
        """
        idx = np.asarray(rows)
        return Dataset(
            X=self.X[idx],
            Y=self.Y[idx],
            A=None if self.A is None else self.A[idx],
            frequency=None if self.frequency is None else self.frequency[idx],
            column_meta=self.column_meta,
        )

    def with_outcome(self, y: np.ndarray) -> "Dataset":
        """Same covariates and treatment, different outcome."""
        return Dataset(X=self.X, Y=y, A=self.A, frequency=self.frequency, column_meta=self.column_meta)

    def treated(self) -> "Dataset":
        """Rows with A = 1."""
        if self.A is None:
            raise DimensionError("Dataset has no treatment column")
        return self.subset(np.flatnonzero(self.A == 1.0))

    # -------------------------------------------------------------------------
    # Construction
    # -------------------------------------------------------------------------

    @classmethod
    def from_arrays(
        cls,
        X: np.ndarray,
        Y: np.ndarray,
        A: np.ndarray | None = None,
        names: Sequence[str] | None = None,
        frequency: np.ndarray | None = None,
    ) -> "Dataset":
        X = np.asarray(X, dtype=float)
        if X.ndim == 1:
            X = X.reshape(-1, 1)
        if X.size and X.shape[0] > 0 and np.all(np.isfinite(X)):
            names = list(names) if names is not None else [f"X{j + 1}" for j in range(X.shape[1])]
            if len(names) != X.shape[1]:
                raise DimensionError(f"{len(names)} names given for {X.shape[1]} columns")
            meta = describe_columns(X, names)
        else:
            # let __post_init__ raise the appropriate error
            meta = ()
        return cls(X=X, Y=Y, A=A, frequency=frequency, column_meta=meta)

    @classmethod
    def from_frame(
        cls,
        frame: pd.DataFrame,
        outcome: str,
        covariates: Sequence[str] | None = None,
        treatment: str | None = None,
    ) -> "Dataset":
        """
        Build a Dataset from a DataFrame using explicit column roles.

        Args:
            frame: Source table.
            outcome: Outcome column name.
            covariates: Covariate column names; defaults to every column that
                is neither the outcome nor the treatment.
            treatment: Optional treatment column name.

        Raises:
            DimensionError: If a named column is missing.
        """
        missing = [c for c in [outcome, treatment, *(covariates or [])] if c is not None and c not in frame.columns]
        if missing:
            raise DimensionError("Columns not found in data", [f"missing: {', '.join(missing)}"])
        if covariates is None:
            covariates = [c for c in frame.columns if c not in (outcome, treatment)]
        X = frame[list(covariates)].to_numpy(dtype=float)
        A = frame[treatment].to_numpy(dtype=float) if treatment is not None else None
        return cls.from_arrays(X, frame[outcome].to_numpy(dtype=float), A=A, names=list(covariates))

    @classmethod
    def from_csv(
        cls,
        path: str,
        outcome: str,
        covariates: Sequence[str] | None = None,
        treatment: str | None = None,
    ) -> "Dataset":
        """Read a CSV file with a header row."""
        frame = pd.read_csv(path)
        logger.info(f"Read {len(frame)} rows x {len(frame.columns)} columns from {path}")
        return cls.from_frame(frame, outcome, covariates, treatment)

    def to_frame(self, outcome: str = "Y", treatment: str = "A") -> pd.DataFrame:
        frame = pd.DataFrame(self.X, columns=list(self.names))
        if self.A is not None:
            frame[treatment] = self.A
        frame[outcome] = self.Y
        return frame
