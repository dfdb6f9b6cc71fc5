"""
Tensor-product spline basis for the Highly Adaptive Lasso.

The univariate piece of order o with knot u is (x - u)_+^o / o!, and the
indicator I(x >= u) for order 0. Repeated integration over the knot variable
raises the order by one each time, which is what integrate_basis does.

A BasisFunction multiplies one univariate piece per active coordinate; the
intercept has no terms and evaluates to 1. A BasisDictionary is the ordered,
deduplicated list of basis functions generated from one Dataset, together
with the coordinate shift used to build it.
"""

import itertools
import logging
import math
from collections.abc import Iterable, Mapping
from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Any

import numpy as np
from errors import DimensionError, DomainError, EmptyDatasetError

from .dataset import Dataset

if TYPE_CHECKING:
    from .lasso import HalFit

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

# Supported smoothness orders m
MIN_ORDER = 0
MAX_ORDER = 3

# Positive level of a binary covariate
BINARY_LEVEL = 1.0


# =============================================================================
# UNIVARIATE PIECES
# =============================================================================


def eval_univariate(order: int, knot: float, x: Any) -> Any:
    """
    Evaluate I(x >= knot) for order 0, else (x - knot)_+^order / order!.

    Accepts scalars or arrays; returns a float for scalar input.

    Example:
        >>> eval_univariate(1, 0.5, 0.7)  # doctest: +ELLIPSIS
        0.19999...
    """
    if order < 0:
        raise DomainError(f"Spline order must be >= 0, got {order}")
    arr = np.asarray(x, dtype=float)
    if order == 0:
        out = (arr >= knot).astype(float)
    else:
        out = np.maximum(arr - knot, 0.0) ** order / math.factorial(order)
    if out.ndim == 0:
        return float(out)
    return out


@dataclass(frozen=True, order=True)
class UnivariateSpline:
    """One (order, knot) pair on a single coordinate."""

    order: int
    knot: float

    def __post_init__(self) -> None:
        if int(self.order) != self.order or self.order < 0:
            raise DomainError(f"Spline order must be a nonnegative integer, got {self.order}")
        if not math.isfinite(self.knot):
            raise DomainError(f"Spline knot must be finite, got {self.knot}")

    def evaluate(self, x: Any) -> Any:
        return eval_univariate(self.order, self.knot, x)


# =============================================================================
# TENSOR-PRODUCT BASIS FUNCTIONS
# =============================================================================


@dataclass(frozen=True)
class BasisFunction:
    """
    Product of univariate splines over a subset of coordinates.

    Attributes:
        terms: (coordinate, spline) pairs in ascending coordinate order.
        id: Position in the owning dictionary (-1 when unattached).
    """

    terms: tuple[tuple[int, UnivariateSpline], ...] = ()
    id: int = -1

    def __post_init__(self) -> None:
        coords = [c for c, _ in self.terms]
        if coords != sorted(set(coords)):
            object.__setattr__(self, "terms", tuple(sorted(dict(self.terms).items())))

    @classmethod
    def from_mapping(
        cls,
        terms: Mapping[int, UnivariateSpline | tuple[int, float]],
        id: int = -1,
    ) -> "BasisFunction":
        """Build from {coordinate: spline or (order, knot)}."""
        pairs = []
        for coord, spec in terms.items():
            spline = spec if isinstance(spec, UnivariateSpline) else UnivariateSpline(int(spec[0]), float(spec[1]))
            pairs.append((int(coord), spline))
        return cls(tuple(sorted(pairs)), id)

    @property
    def subset(self) -> tuple[int, ...]:
        return tuple(c for c, _ in self.terms)

    @property
    def is_intercept(self) -> bool:
        return not self.terms

    def term_map(self) -> dict[int, UnivariateSpline]:
        return dict(self.terms)

    def with_id(self, new_id: int) -> "BasisFunction":
        return BasisFunction(self.terms, new_id)

    def to_dict(self) -> dict[str, Any]:
        return {
            "id": self.id,
            "terms": [{"coord": c, "order": s.order, "knot": s.knot} for c, s in self.terms],
        }

    @classmethod
    def from_dict(cls, raw: Mapping[str, Any]) -> "BasisFunction":
        pairs = tuple((int(t["coord"]), UnivariateSpline(int(t["order"]), float(t["knot"]))) for t in raw["terms"])
        return cls(pairs, int(raw.get("id", -1)))


def eval_basis(b: BasisFunction, x: Any) -> float:
    """
    Evaluate a basis function at one point.

    Multiplies the univariate pieces in ascending coordinate order, so the
    result matches design_matrix entries bit for bit.

    Raises:
        DimensionError: If a term refers to a coordinate outside x.
    """
    point = np.asarray(x, dtype=float).reshape(-1)
    value = 1.0
    for coord, spline in b.terms:
        if coord < 0 or coord >= point.shape[0]:
            raise DimensionError(f"Basis term on coordinate {coord} but x has {point.shape[0]} coordinates")
        value = value * eval_univariate(spline.order, spline.knot, point[coord])
    return float(value)


def integrate_basis(
    b: BasisFunction,
    smooth_set: Iterable[int],
    upper: "Mapping[int, float] | BasisDictionary",
    new_knots: Mapping[int, float] | None = None,
) -> BasisFunction:
    """
    Raise the order of the pieces on smooth_set by one integration.

    Each smoothed piece, read as a function of its knot variable y, is
    integrated over y from the new knot z up to x, which gives the piece of
    one higher order with knot z. Coordinates in new_knots get that value as
    their free knot; the rest of smooth_set gets knot 0. Coordinates outside
    smooth_set keep their spline.

    Args:
        b: Basis function to smooth.
        smooth_set: Coordinates to integrate.
        upper: Column maxima (shifted scale) bounding the knots, or the
            BasisDictionary whose column_max supplies them.
        new_knots: Free knots for a subset of smooth_set.

    Returns:
        A new, unattached BasisFunction.

    Raises:
        DimensionError: If smooth_set or new_knots name inactive coordinates.
        DomainError: If a knot falls outside [0, column max] or a smoothed
            coordinate has no column maximum.
    """
    smooth = set(int(c) for c in smooth_set)
    knots = dict(new_knots or {})
    terms = b.term_map()
    bounds = dict(enumerate(upper.column_max)) if isinstance(upper, BasisDictionary) else upper

    outside = smooth - set(terms)
    if outside:
        raise DimensionError("smooth_set must be a subset of the active coordinates", [f"inactive: {sorted(outside)}"])
    stray = set(knots) - smooth
    if stray:
        raise DimensionError("new_knots names coordinates outside smooth_set", [f"coordinates: {sorted(stray)}"])

    for coord in smooth:
        z = float(knots.get(coord, 0.0))
        limit = bounds.get(coord)
        if limit is None:
            raise DomainError(f"No column maximum for coordinate {coord}")
        if not math.isfinite(z) or z < 0.0 or z > limit:
            raise DomainError(f"Knot {z} on coordinate {coord} outside [0, {limit}]")
        terms[coord] = UnivariateSpline(terms[coord].order + 1, z)

    return BasisFunction(tuple(sorted(terms.items())))


# =============================================================================
# DICTIONARIES
# =============================================================================


@dataclass(frozen=True)
class BasisCaps:
    """
    Limits on basis enumeration.

    Attributes:
        max_interaction_degree: Largest subset size; None means k.
        max_knots_per_subset: Knot tuples kept per (subset, free set); None keeps all.
        deduplicate: Drop columns identical on the generating data.
    """

    max_interaction_degree: int | None = None
    max_knots_per_subset: int | None = None
    deduplicate: bool = True

    def __post_init__(self) -> None:
        if self.max_interaction_degree is not None and self.max_interaction_degree < 1:
            raise DomainError(f"max_interaction_degree must be positive, got {self.max_interaction_degree}")
        if self.max_knots_per_subset is not None and self.max_knots_per_subset < 1:
            raise DomainError(f"max_knots_per_subset must be positive, got {self.max_knots_per_subset}")


@dataclass(frozen=True)
class BasisDictionary:
    """
    Ordered basis list generated from one dataset.

    Attributes:
        basis_list: Basis functions; ids equal positions.
        order: Smoothness order m.
        covariate_count: k.
        knot_source: How the knots were chosen.
        shifts: Per-column shift subtracted from X before evaluation.
        column_max: Per-column maximum on the shifted scale.
    """

    basis_list: tuple[BasisFunction, ...]
    order: int
    covariate_count: int
    knot_source: str = "observed"
    shifts: tuple[float, ...] = field(default=())
    column_max: tuple[float, ...] = field(default=())

    def __post_init__(self) -> None:
        for pos, b in enumerate(self.basis_list):
            if b.id != pos:
                raise DimensionError(f"Basis id {b.id} does not match its position {pos}")
        if not self.shifts:
            object.__setattr__(self, "shifts", (0.0,) * self.covariate_count)
        if len(self.shifts) != self.covariate_count:
            raise DimensionError(f"{len(self.shifts)} shifts for {self.covariate_count} covariates")

    def __len__(self) -> int:
        return len(self.basis_list)

    @property
    def intercept_index(self) -> int | None:
        for b in self.basis_list:
            if b.is_intercept:
                return b.id
        return None

    def to_json(self) -> dict[str, Any]:
        return {
            "order": self.order,
            "covariate_count": self.covariate_count,
            "knot_source": self.knot_source,
            "shifts": list(self.shifts),
            "column_max": list(self.column_max),
            "basis": [b.to_dict() for b in self.basis_list],
        }

    @classmethod
    def from_json(cls, raw: Mapping[str, Any]) -> "BasisDictionary":
        return cls(
            basis_list=tuple(BasisFunction.from_dict(b) for b in raw["basis"]),
            order=int(raw["order"]),
            covariate_count=int(raw["covariate_count"]),
            knot_source=str(raw.get("knot_source", "observed")),
            shifts=tuple(float(s) for s in raw.get("shifts", [])),
            column_max=tuple(float(s) for s in raw.get("column_max", [])),
        )


def _knot_rows(values: np.ndarray, cap: int | None) -> np.ndarray:
    """Unique knot tuples, thinned evenly by lexicographic rank when capped."""
    rows = np.unique(values, axis=0)
    if cap is not None and rows.shape[0] > cap:
        keep = np.unique(np.round(np.linspace(0, rows.shape[0] - 1, cap)).astype(int))
        rows = rows[keep]
    return rows


def _evaluate_columns(Xs: np.ndarray, basis: list[BasisFunction]) -> np.ndarray:
    n = Xs.shape[0]
    out = np.empty((n, len(basis)), dtype=float, order="F")
    for col, b in enumerate(basis):
        values = np.ones(n, dtype=float)
        for coord, spline in b.terms:
            values = values * eval_univariate(spline.order, spline.knot, Xs[:, coord])
        out[:, col] = values
    return out


def _subset_candidates(
    Xs: np.ndarray,
    subset: tuple[int, ...],
    binary: np.ndarray,
    m: int,
    cap: int | None,
) -> list[BasisFunction]:
    """All basis functions of the order-m class supported on one subset."""
    cont = [j for j in subset if not binary[j]]
    fixed = [(j, UnivariateSpline(0, BINARY_LEVEL)) for j in subset if binary[j]]
    out: list[BasisFunction] = []

    if not cont:
        return [BasisFunction(tuple(fixed))]

    if m == 0:
        for row in _knot_rows(Xs[:, cont], cap):
            terms = [(j, UnivariateSpline(0, float(u))) for j, u in zip(cont, row, strict=True)]
            out.append(BasisFunction(tuple(terms + fixed)))
        return out

    # zero-knot pieces: every order vector in {1..m} on the continuous coordinates
    for orders in itertools.product(range(1, m + 1), repeat=len(cont)):
        terms = [(j, UnivariateSpline(o, 0.0)) for j, o in zip(cont, orders, strict=True)]
        out.append(BasisFunction(tuple(terms + fixed)))

    # free-knot pieces: order m on the free set, zero-knot orders elsewhere
    for size in range(1, len(cont) + 1):
        for free in itertools.combinations(cont, size):
            rest = [j for j in cont if j not in free]
            knot_rows = _knot_rows(Xs[:, list(free)], cap)
            for orders in itertools.product(range(1, m + 1), repeat=len(rest)):
                zero_terms = [(j, UnivariateSpline(o, 0.0)) for j, o in zip(rest, orders, strict=True)]
                for row in knot_rows:
                    free_terms = [(j, UnivariateSpline(m, float(u))) for j, u in zip(free, row, strict=True)]
                    out.append(BasisFunction(tuple(free_terms + zero_terms + fixed)))
    return out


def enumerate_basis(
    data: Dataset,
    m: int,
    caps: BasisCaps | None = None,
    center: bool = True,
) -> BasisDictionary:
    """
    Generate the order-m HAL basis with knots at observed values.

    Emits the intercept, then for every nonempty subset s up to the interaction
    cap: the zero-knot pieces and the order-m pieces with free knots at the
    observed X_i(s). Binary columns contribute only the indicator at their
    positive level.

    Args:
        data: Generating dataset.
        m: Smoothness order, 0 to 3.
        caps: Enumeration limits.
        center: Shift each continuous column so its minimum is 0.

    Returns:
        BasisDictionary with ids equal to positions.

    Raises:
        EmptyDatasetError: If data has no rows.
        DomainError: If m is outside 0..3.
    """
    if data.n == 0:
        raise EmptyDatasetError("Cannot enumerate a basis on an empty dataset")
    if int(m) != m or not MIN_ORDER <= m <= MAX_ORDER:
        raise DomainError(f"Order m must be in {MIN_ORDER}..{MAX_ORDER}, got {m}")
    caps = caps or BasisCaps()

    shifts = data.shifts if center else np.zeros(data.k)
    Xs = data.X - shifts
    binary = np.array([meta.is_binary for meta in data.column_meta])
    degree = min(caps.max_interaction_degree or data.k, data.k)

    candidates: list[BasisFunction] = [BasisFunction(())]
    for size in range(1, degree + 1):
        for subset in itertools.combinations(range(data.k), size):
            candidates.extend(_subset_candidates(Xs, subset, binary, int(m), caps.max_knots_per_subset))

    generated = len(candidates)
    if caps.deduplicate:
        columns = _evaluate_columns(Xs, candidates)
        _, first = np.unique(columns, axis=1, return_index=True)
        candidates = [candidates[i] for i in np.sort(first)]

    basis = tuple(b.with_id(i) for i, b in enumerate(candidates))
    source = "observed values"
    if caps.max_knots_per_subset is not None:
        source += f", thinned to {caps.max_knots_per_subset} per subset"
    logger.debug(f"Basis m={m}: {generated} generated, {len(basis)} kept after deduplication")

    return BasisDictionary(
        basis_list=basis,
        order=int(m),
        covariate_count=data.k,
        knot_source=source,
        shifts=tuple(float(s) for s in shifts),
        column_max=tuple(float(v) for v in Xs.max(axis=0)),
    )


def design_matrix(data: Dataset, dictionary: BasisDictionary) -> np.ndarray:
    """
    Evaluate every basis function on every row.

    Returns:
        Column-major (n, p) array; column j is basis id j.

    Raises:
        DimensionError: If the dataset's k differs from the dictionary's.
    """
    if data.k != dictionary.covariate_count:
        raise DimensionError(f"Dataset has {data.k} covariates but dictionary expects {dictionary.covariate_count}")
    Xs = data.X - np.asarray(dictionary.shifts, dtype=float)
    return _evaluate_columns(Xs, list(dictionary.basis_list))


def sectional_variation_norm(fit: "HalFit", exclude_intercept: bool = False) -> float:
    """
    L1 norm of the fit's coefficients.

    The intercept is included, following the norm's Q(0) term, unless
    exclude_intercept is set and the intercept was left unpenalized.
    """
    beta = np.asarray(fit.beta, dtype=float)
    if exclude_intercept and not fit.intercept_penalized and fit.intercept_index is not None:
        beta = np.delete(beta, fit.intercept_index)
    return float(np.abs(beta).sum())
