"""
Selector reports and criterion traces.
"""

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Any

import numpy as np
import pandas as pd
from hal.lasso import HalFit, PathResult

# Column order of criterion trace CSV files
TRACE_COLUMNS = ["lambda", "C", "cv_risk", "min_active_score", "min_active_Pn_phi", "Pn_Dstar", "Pn_Dstar_sq"]


def _finite_or_none(x: float) -> float | None:
    return None if x is None or not math.isfinite(x) else float(x)


@dataclass(frozen=True)
class CriterionPoint:
    """Diagnostics of one path fit. NaN marks quantities that do not apply."""

    lam: float
    C: float
    cv_risk: float = math.nan
    min_active_score: float = math.nan
    min_active_Pn_phi: float = math.nan
    Pn_Dstar: float = math.nan
    Pn_Dstar_sq: float = math.nan
    satisfied: bool = False

    def row(self) -> dict[str, float]:
        return {
            "lambda": self.lam,
            "C": self.C,
            "cv_risk": self.cv_risk,
            "min_active_score": self.min_active_score,
            "min_active_Pn_phi": self.min_active_Pn_phi,
            "Pn_Dstar": self.Pn_Dstar,
            "Pn_Dstar_sq": self.Pn_Dstar_sq,
        }


@dataclass(frozen=True, eq=False)
class SelectorReport:
    """
    Outcome of cross-validation and (optionally) an undersmoothing rule.

    Attributes:
        rule: Rule that picked C_selected ("cv" when none).
        C_cv: Realized norm of the CV-selected fit.
        C_selected: Realized norm of the chosen fit.
        m_selected: Smoothness order, when the report came from an m search.
        lambdas: Path grid.
        Cs: Realized norm at every grid point.
        cv_risk_curve: Fold-average validation risk per grid point.
        cv_risk_se: Standard error of the fold average.
        index_cv: Grid position of the CV choice.
        index_selected: Grid position of the final choice.
        threshold: Rule threshold, when the rule has one.
        not_met: The rule's criterion held nowhere at or above C_cv.
        criterion_trace: Diagnostics at every path point.
        path: Full-data path the indices refer to.
    """

    rule: str
    C_cv: float
    C_selected: float
    index_cv: int
    index_selected: int
    lambdas: tuple[float, ...]
    Cs: tuple[float, ...]
    cv_risk_curve: tuple[float, ...]
    cv_risk_se: tuple[float, ...] = ()
    m_selected: int | None = None
    threshold: float | None = None
    not_met: bool = False
    criterion_trace: tuple[CriterionPoint, ...] = ()
    path: PathResult | None = field(default=None, repr=False)

    @property
    def lambda_cv(self) -> float:
        return self.lambdas[self.index_cv]

    @property
    def lambda_selected(self) -> float:
        return self.lambdas[self.index_selected]

    @property
    def cv_risk(self) -> float:
        """Fold-average risk at the CV choice."""
        return self.cv_risk_curve[self.index_cv]

    def _fit_at(self, index: int) -> HalFit:
        if self.path is None:
            raise ValueError("Report carries no path")
        fit = self.path.points[index].fit
        if fit is None:
            raise ValueError(f"Path point {index} has no fit")
        return fit

    @property
    def cv_fit(self) -> HalFit:
        return self._fit_at(self.index_cv)

    @property
    def selected_fit(self) -> HalFit:
        return self._fit_at(self.index_selected)

    def replace(self, **changes: Any) -> "SelectorReport":
        return dataclasses.replace(self, **changes)

    def trace_frame(self) -> pd.DataFrame:
        if not self.criterion_trace:
            rows = [
                CriterionPoint(lam, C, cv_risk=r).row()
                for lam, C, r in zip(self.lambdas, self.Cs, self.cv_risk_curve, strict=True)
            ]
        else:
            rows = [p.row() for p in self.criterion_trace]
        return pd.DataFrame(rows, columns=TRACE_COLUMNS)

    def write_trace_csv(self, path: str) -> None:
        self.trace_frame().to_csv(path, index=False, float_format="%.17g")

    def to_json(self) -> dict[str, Any]:
        return {
            "rule": self.rule,
            "C_cv": self.C_cv,
            "C_selected": self.C_selected,
            "m_selected": self.m_selected,
            "lambda_cv": self.lambda_cv,
            "lambda_selected": self.lambda_selected,
            "index_cv": self.index_cv,
            "index_selected": self.index_selected,
            "threshold": _finite_or_none(self.threshold) if self.threshold is not None else None,
            "not_met": self.not_met,
            "lambdas": list(self.lambdas),
            "Cs": [_finite_or_none(c) for c in self.Cs],
            "cv_risk_curve": [_finite_or_none(r) for r in self.cv_risk_curve],
            "cv_risk_se": [_finite_or_none(s) for s in self.cv_risk_se],
            "criterion_trace": [
                {k: _finite_or_none(v) for k, v in p.row().items()} | {"satisfied": p.satisfied}
                for p in self.criterion_trace
            ],
        }


def as_tuple(values: np.ndarray) -> tuple[float, ...]:
    return tuple(float(v) for v in np.asarray(values, dtype=float))
