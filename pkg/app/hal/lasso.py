"""
L1-penalized and L1-constrained HAL fitting.

Coordinate descent solves the penalized problem

    risk(X beta) + lambda * sum_{penalized j} |beta_j|

directly for squared error and inside an IRLS loop for the binomial
log-likelihood. The constrained problem (||beta||_1 <= C) is reached by
bisection on lambda, and whole lambda paths are fitted with warm starts.
Scores and KKT diagnostics feed the undersmoothing selectors.
"""

import logging
import math
from collections import deque
from collections.abc import Sequence
from dataclasses import dataclass, field
from typing import Any, Literal

import numpy as np
from errors import BisectionError, ConvergenceError, DimensionError, DomainError

from . import loss as losses
from ._kernels import cd_sweep, quadratic_objective
from .basis import BasisDictionary, design_matrix
from .dataset import Dataset
from .loss import LossKind

logger = logging.getLogger(__name__)

# =============================================================================
# CONSTANTS
# =============================================================================

# Coefficient-change convergence tolerance
DEFAULT_TOL = 1e-7

# Budget of coordinate sweeps per fit
DEFAULT_MAX_SWEEPS = 100_000

# Budget of IRLS re-weightings per binomial fit
DEFAULT_MAX_IRLS = 100

# KKT tolerance
DEFAULT_KKT_TOL = 1e-5

# Default path: this many lambdas from lambda_max down to ratio * lambda_max
DEFAULT_N_LAMBDA = 100
DEFAULT_LAMBDA_RATIO = 1e-4

# Path monotonicity tolerance on realized C
PATH_MONOTONE_TOL = 1e-8

# Bisection: step budget and the "lambda -> 0" stand-in as a fraction of lambda_max
MAX_BISECTION_STEPS = 200
UNCONSTRAINED_RATIO = 1e-6

# Sweep records kept for ConvergenceError traces
TRACE_LENGTH = 200

# Relative slack allowed before an objective increase counts as a violation
DESCENT_SLACK = 1e-12

# Largest lambda treated as zero when computing lambda_max
LAMBDA_ZERO = 1e-14

# Relative margin on lambda_max so the sweep kernel's own score sums
# cannot exceed it by rounding
LAMBDA_MAX_MARGIN = 1e-10


@dataclass(frozen=True)
class LassoSettings:
    """Solver tolerances and intercept handling."""

    tol: float = DEFAULT_TOL
    max_iters: int = DEFAULT_MAX_SWEEPS
    max_irls: int = DEFAULT_MAX_IRLS
    kkt_tol: float = DEFAULT_KKT_TOL
    penalize_intercept: bool = False


# =============================================================================
# FIT OBJECTS
# =============================================================================


@dataclass(frozen=True, eq=False)
class HalFit:
    """
    A fitted HAL model.

    Attributes:
        beta: Coefficients, one per design column.
        loss: Loss the fit minimizes.
        lam: Penalty level (None for fits not produced by the penalized solver).
        intercept_index: Column of the intercept, if any.
        intercept_penalized: Whether the intercept counts toward the L1 penalty.
        dictionary: Basis the columns came from, if known.
        converged: Solver reached its tolerance.
        sweeps: Coordinate sweeps used.
        slack: The constraint was not active (constrained fits only).
        descent_violations: Sweeps in which the objective increased.
    """

    beta: np.ndarray
    loss: LossKind
    lam: float | None
    intercept_index: int | None = 0
    intercept_penalized: bool = False
    dictionary: BasisDictionary | None = field(default=None, repr=False)
    converged: bool = True
    sweeps: int = 0
    slack: bool = False
    descent_violations: int = 0

    @property
    def penalty_mask(self) -> np.ndarray:
        mask = np.ones(self.beta.shape[0], dtype=bool)
        if self.intercept_index is not None and not self.intercept_penalized:
            mask[self.intercept_index] = False
        return mask

    @property
    def C(self) -> float:
        """Realized L1 norm over penalized coefficients."""
        return float(np.abs(self.beta[self.penalty_mask]).sum())

    @property
    def active_set(self) -> tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta != 0.0))

    @property
    def penalized_active(self) -> tuple[int, ...]:
        """Active ids excluding an unpenalized intercept."""
        return tuple(int(j) for j in np.flatnonzero((self.beta != 0.0) & self.penalty_mask))

    def linear_predictor(self, design: np.ndarray) -> np.ndarray:
        return np.asarray(design, dtype=float) @ self.beta

    def predict(self, design: np.ndarray) -> np.ndarray:
        """Fitted values on the mean scale."""
        return losses.response(self.linear_predictor(design), self.loss)

    def predict_data(self, data: Dataset) -> np.ndarray:
        if self.dictionary is None:
            raise DimensionError("Fit has no basis dictionary to evaluate new data")
        return self.predict(design_matrix(data, self.dictionary))

    def to_json(self) -> dict[str, Any]:
        return {
            "loss": self.loss.to_dict(),
            "beta": [float(b) for b in self.beta],
            "lambda": self.lam,
            "C": self.C,
            "intercept_index": self.intercept_index,
            "intercept_penalized": self.intercept_penalized,
            "converged": self.converged,
            "slack": self.slack,
            "dictionary": None if self.dictionary is None else self.dictionary.to_json(),
        }

    @classmethod
    def from_json(cls, raw: dict[str, Any]) -> "HalFit":
        loss_raw = raw["loss"]
        return cls(
            beta=np.asarray(raw["beta"], dtype=float),
            loss=LossKind(loss_raw["name"], loss_raw.get("observation_weight"), float(loss_raw.get("clamp", 30.0))),
            lam=raw.get("lambda"),
            intercept_index=raw.get("intercept_index"),
            intercept_penalized=bool(raw.get("intercept_penalized", False)),
            dictionary=None if raw.get("dictionary") is None else BasisDictionary.from_json(raw["dictionary"]),
            converged=bool(raw.get("converged", True)),
            slack=bool(raw.get("slack", False)),
        )


@dataclass(frozen=True)
class PathPoint:
    lam: float
    fit: HalFit | None
    error: str | None = None


@dataclass(frozen=True)
class PathResult:
    """
    Warm-started fits along a strictly decreasing lambda grid.

    Points whose fit failed carry ``fit=None`` and the error text.
    """

    points: tuple[PathPoint, ...]
    lambda_max: float
    monotonicity_violations: int = 0

    def __len__(self) -> int:
        return len(self.points)

    @property
    def lambdas(self) -> np.ndarray:
        return np.array([p.lam for p in self.points], dtype=float)

    @property
    def fits(self) -> list[HalFit | None]:
        return [p.fit for p in self.points]

    @property
    def Cs(self) -> np.ndarray:
        return np.array([np.nan if p.fit is None else p.fit.C for p in self.points], dtype=float)


@dataclass(frozen=True)
class KktReport:
    max_violation: float
    status: tuple[str, ...]
    violations: np.ndarray
    tol: float

    @property
    def ok(self) -> bool:
        return self.max_violation <= self.tol


# =============================================================================
# SOLVER INTERNALS
# =============================================================================


@dataclass
class _Problem:
    X: np.ndarray
    X2: np.ndarray
    data: Dataset
    loss: LossKind
    weights: np.ndarray
    penalty: np.ndarray
    intercept: int | None
    settings: LassoSettings

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    def objective(self, beta: np.ndarray, lam: float) -> float:
        l1 = float(np.abs(beta[self.penalty > 0]).sum())
        return losses.risk(self.X @ beta, self.data, self.loss) + (lam * l1 if l1 > 0 else 0.0)


def _prepare(
    design: np.ndarray,
    data: Dataset,
    loss: LossKind,
    intercept: int | None,
    dictionary: BasisDictionary | None,
    settings: LassoSettings | None,
) -> _Problem:
    X = np.asfortranarray(design, dtype=float)
    if X.ndim != 2 or X.shape[0] != data.n:
        raise DimensionError(f"Design has shape {X.shape} but dataset has {data.n} rows")
    if dictionary is not None:
        if len(dictionary) != X.shape[1]:
            raise DimensionError(f"Design has {X.shape[1]} columns but dictionary has {len(dictionary)}")
        intercept = dictionary.intercept_index
    if intercept is not None and not 0 <= intercept < X.shape[1]:
        raise DimensionError(f"Intercept column {intercept} outside design with {X.shape[1]} columns")
    losses.check_outcome(data, loss)
    settings = settings or LassoSettings()
    penalty = np.ones(X.shape[1])
    if intercept is not None and not settings.penalize_intercept:
        penalty[intercept] = 0.0
    return _Problem(
        X=X,
        X2=np.asfortranarray(np.square(X)),
        data=data,
        loss=loss,
        weights=losses.effective_weights(data, loss),
        penalty=penalty,
        intercept=intercept,
        settings=settings,
    )


def _descend(
    prob: _Problem,
    v: np.ndarray,
    resid: np.ndarray,
    beta: np.ndarray,
    lam: float,
    coords: np.ndarray,
    budget: int,
    trace: deque,
) -> tuple[int, int, bool]:
    """
    Active-set cyclic coordinate descent on one weighted quadratic.

    Alternates full passes over coords with passes over the current active
    subset until a full pass moves no coefficient by more than tol.

    Returns:
        (sweeps used, objective increases, converged)
    """
    col_curv = (v @ prob.X2) / prob.n
    tol = prob.settings.tol
    objective = quadratic_objective(v, resid, beta, prob.penalty, lam)
    sweeps = 0
    violations = 0
    full = True
    active = coords
    while sweeps < budget:
        pass_coords = coords if full else active
        change = cd_sweep(prob.X, v, resid, beta, col_curv, prob.penalty, lam, pass_coords)
        sweeps += 1
        new_objective = quadratic_objective(v, resid, beta, prob.penalty, lam)
        if new_objective > objective + DESCENT_SLACK * max(1.0, abs(objective)):
            violations += 1
            logger.warning(f"Objective increased in sweep {sweeps}: {objective:.12g} -> {new_objective:.12g}")
        objective = new_objective
        trace.append({"lambda": float(lam), "max_change": float(change), "objective": float(objective)})
        if change < tol:
            if full:
                return sweeps, violations, True
            full = True
        elif full:
            keep = (beta[coords] != 0.0) | (prob.penalty[coords] == 0.0)
            active = coords[keep]
            full = False
    return sweeps, violations, False


def _solve(
    prob: _Problem,
    lam: float,
    beta0: np.ndarray,
    coords: np.ndarray | None = None,
) -> HalFit:
    """Penalized fit at one lambda from a starting coefficient vector."""
    settings = prob.settings
    beta = np.array(beta0, dtype=float, copy=True)
    coords = np.arange(prob.p, dtype=np.int64) if coords is None else coords.astype(np.int64)
    trace: deque = deque(maxlen=TRACE_LENGTH)
    used = 0
    violations = 0

    if not prob.loss.is_binomial:
        resid = prob.data.Y - prob.X @ beta
        used, violations, converged = _descend(prob, prob.weights, resid, beta, lam, coords, settings.max_iters, trace)
    else:
        converged = False
        objective = prob.objective(beta, lam)
        for _ in range(settings.max_irls):
            eta = prob.X @ beta
            p = losses.response(eta, prob.loss)
            curv = np.maximum(p * (1.0 - p), losses.MIN_CURVATURE)
            v = prob.weights * curv
            resid = (prob.data.Y - p) / curv
            beta_old = beta.copy()
            sweeps, bad, inner_ok = _descend(prob, v, resid, beta, lam, coords, settings.max_iters - used, trace)
            used += sweeps
            violations += bad
            new_objective = prob.objective(beta, lam)
            halvings = 0
            while new_objective > objective + DESCENT_SLACK * max(1.0, abs(objective)) and halvings < 30:
                beta[:] = beta_old + 0.5 * (beta - beta_old)
                new_objective = prob.objective(beta, lam)
                halvings += 1
            if halvings:
                logger.debug(f"IRLS step halved {halvings} time(s) at lambda={lam:.6g}")
            objective = new_objective
            change = float(np.max(np.abs(beta - beta_old))) if beta.size else 0.0
            if not inner_ok or used >= settings.max_iters:
                break
            if change < settings.tol:
                converged = True
                break

    if not converged:
        raise ConvergenceError(
            f"Coordinate descent did not converge at lambda={lam:.6g} within {settings.max_iters} sweeps",
            trace=list(trace),
        )

    return HalFit(
        beta=beta,
        loss=prob.loss,
        lam=float(lam),
        intercept_index=prob.intercept,
        intercept_penalized=settings.penalize_intercept,
        converged=True,
        sweeps=used,
        descent_violations=violations,
    )


def _start(prob: _Problem, warm_start: "HalFit | np.ndarray | None") -> np.ndarray:
    if warm_start is None:
        return _null_beta(prob)
    beta = warm_start.beta if isinstance(warm_start, HalFit) else np.asarray(warm_start, dtype=float)
    if beta.shape != (prob.p,):
        raise DimensionError(f"Warm start has {beta.shape[0]} coefficients, design has {prob.p} columns")
    return beta


def _null_beta(prob: _Problem) -> np.ndarray:
    """Coefficients of the model with only unpenalized columns free."""
    beta = np.zeros(prob.p)
    free = np.flatnonzero(prob.penalty == 0.0)
    if free.size == 0:
        return beta
    if prob.intercept is not None and np.all(prob.X[:, prob.intercept] == 1.0):
        beta[prob.intercept] = losses.null_predictor(prob.data, prob.loss)
    fit = _solve(prob, 0.0, beta, coords=free)
    return fit.beta


def _with_dictionary(fit: HalFit, dictionary: BasisDictionary | None, **changes: Any) -> HalFit:
    return HalFit(
        beta=fit.beta,
        loss=fit.loss,
        lam=changes.get("lam", fit.lam),
        intercept_index=fit.intercept_index,
        intercept_penalized=fit.intercept_penalized,
        dictionary=dictionary,
        converged=fit.converged,
        sweeps=fit.sweeps,
        slack=changes.get("slack", fit.slack),
        descent_violations=fit.descent_violations,
    )


def _lambda_max(prob: _Problem) -> tuple[float, np.ndarray]:
    beta = _null_beta(prob)
    r = losses.pointwise_score(prob.X @ beta, prob.data, prob.loss)
    scores = prob.X.T @ r / prob.n
    penalized = np.abs(scores[prob.penalty > 0])
    lmax = float(penalized.max()) if penalized.size else 0.0
    return (0.0 if lmax < LAMBDA_ZERO else lmax * (1.0 + LAMBDA_MAX_MARGIN)), beta


# =============================================================================
# PUBLIC OPERATIONS
# =============================================================================


def lambda_max(
    design: np.ndarray,
    data: Dataset,
    loss: LossKind,
    intercept: int | None = 0,
    dictionary: BasisDictionary | None = None,
    settings: LassoSettings | None = None,
) -> float:
    """Smallest lambda at which every penalized coefficient is zero."""
    prob = _prepare(design, data, loss, intercept, dictionary, settings)
    return _lambda_max(prob)[0]


def default_lambda_grid(
    lam_max: float, n_lambda: int = DEFAULT_N_LAMBDA, ratio: float = DEFAULT_LAMBDA_RATIO
) -> np.ndarray:
    """Log-spaced grid from lam_max down to ratio * lam_max; [0] when lam_max is 0."""
    if lam_max <= 0.0:
        return np.array([0.0])
    if n_lambda == 1:
        return np.array([lam_max])
    return np.geomspace(lam_max, ratio * lam_max, n_lambda)


def fit_penalized(
    design: np.ndarray,
    data: Dataset,
    loss: LossKind,
    lam: float,
    warm_start: "HalFit | np.ndarray | None" = None,
    *,
    intercept: int | None = 0,
    dictionary: BasisDictionary | None = None,
    settings: LassoSettings | None = None,
) -> HalFit:
    """
    Minimize risk + lam * ||beta_penalized||_1 by coordinate descent.

    Args:
        design: (n, p) design matrix.
        data: Observations (outcome, weights, frequencies).
        loss: Loss to minimize.
        lam: Penalty level, >= 0.
        warm_start: Starting coefficients (defaults to the null model).
        intercept: Column left unpenalized; ignored when dictionary is given.
        dictionary: Basis the columns come from, attached to the result.
        settings: Solver tolerances.

    Returns:
        Converged HalFit.

    Raises:
        DomainError: If lam is negative.
        ConvergenceError: If the sweep budget runs out; carries the trace.
    """
    if not lam >= 0.0 or math.isinf(lam):
        raise DomainError(f"lambda must be finite and >= 0, got {lam}")
    prob = _prepare(design, data, loss, intercept, dictionary, settings)
    fit = _solve(prob, float(lam), _start(prob, warm_start))
    return _with_dictionary(fit, dictionary)


def lasso_path(
    design: np.ndarray,
    data: Dataset,
    loss: LossKind,
    lambda_grid: Sequence[float] | np.ndarray | None = None,
    *,
    n_lambda: int = DEFAULT_N_LAMBDA,
    ratio: float = DEFAULT_LAMBDA_RATIO,
    intercept: int | None = 0,
    dictionary: BasisDictionary | None = None,
    settings: LassoSettings | None = None,
    on_error: Literal["raise", "skip"] = "raise",
) -> PathResult:
    """
    Warm-started penalized fits over a strictly decreasing lambda grid.

    With on_error="skip", a grid point whose fit fails is recorded with
    fit=None and the next point warm-starts from the last good fit.
    """
    prob = _prepare(design, data, loss, intercept, dictionary, settings)
    lam_max, beta = _lambda_max(prob)
    if lambda_grid is None:
        grid = default_lambda_grid(lam_max, n_lambda, ratio)
    else:
        grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise DomainError("lambda grid must be a nonempty sequence")
    if np.any(grid < 0) or np.any(np.diff(grid) >= 0):
        raise DomainError("lambda grid must be nonnegative and strictly decreasing")

    points: list[PathPoint] = []
    violations = 0
    last_C = -math.inf
    for lam in grid:
        try:
            fit = _with_dictionary(_solve(prob, float(lam), beta), dictionary)
        except ConvergenceError as e:
            if on_error == "raise":
                raise
            logger.warning(f"Path fit failed at lambda={lam:.6g}: {e}")
            points.append(PathPoint(float(lam), None, str(e)))
            continue
        if fit.C < last_C - PATH_MONOTONE_TOL:
            violations += 1
            logger.warning(f"Realized C decreased along the path at lambda={lam:.6g}: {last_C:.10g} -> {fit.C:.10g}")
        last_C = max(last_C, fit.C)
        beta = fit.beta
        points.append(PathPoint(float(lam), fit))
        logger.debug(f"lambda={lam:.6g} C={fit.C:.6g} active={len(fit.active_set)} sweeps={fit.sweeps}")

    return PathResult(points=tuple(points), lambda_max=lam_max, monotonicity_violations=violations)


def fit_constrained(
    design: np.ndarray,
    data: Dataset,
    loss: LossKind,
    C: float,
    *,
    intercept: int | None = 0,
    dictionary: BasisDictionary | None = None,
    settings: LassoSettings | None = None,
    rel_tol: float = 1e-4,
    abs_tol: float = 1e-6,
) -> HalFit:
    """
    Minimize risk subject to ||beta_penalized||_1 <= C.

    Bisects log(lambda) until the realized norm is within
    max(abs_tol, rel_tol * C) of C. When even a nearly unpenalized fit has a
    smaller norm, that fit is returned with slack=True.

    Raises:
        DomainError: If C is negative.
        BisectionError: If 200 bisection steps do not reach the tolerance.
    """
    if not C >= 0.0:
        raise DomainError(f"C must be >= 0, got {C}")
    prob = _prepare(design, data, loss, intercept, dictionary, settings)
    lam_max, null_beta = _lambda_max(prob)
    target_tol = max(abs_tol, rel_tol * C)

    null_fit = _solve(prob, lam_max, null_beta)
    if C <= target_tol or lam_max == 0.0:
        slack = lam_max == 0.0 and C > 0.0
        return _with_dictionary(null_fit, dictionary, slack=slack)

    lo = lam_max * UNCONSTRAINED_RATIO
    loose = _solve(prob, lo, null_beta)
    if loose.C <= C + target_tol:
        logger.debug(f"Constraint C={C:.6g} is slack (unconstrained norm {loose.C:.6g})")
        return _with_dictionary(loose, dictionary, slack=True)

    hi = lam_max
    beta = loose.beta
    for step in range(MAX_BISECTION_STEPS):
        mid = math.sqrt(lo * hi)
        fit = _solve(prob, mid, beta)
        if abs(fit.C - C) <= target_tol:
            logger.debug(f"Bisection reached C={fit.C:.8g} (target {C:.8g}) in {step + 1} steps")
            return _with_dictionary(fit, dictionary)
        if fit.C > C:
            lo = mid
        else:
            hi = mid
        beta = fit.beta

    raise BisectionError(
        f"Bisection did not reach C={C:.6g} within {MAX_BISECTION_STEPS} steps",
        [f"bracket lambda in [{lo:.6g}, {hi:.6g}]"],
    )


def basis_scores(fit: HalFit, design: np.ndarray, data: Dataset) -> np.ndarray:
    """Empirical basis scores (1/n) sum_i r_i design_ij."""
    X = np.asarray(design, dtype=float)
    r = losses.pointwise_score(fit.linear_predictor(X), data, fit.loss)
    return X.T @ r / data.n


def kkt_check(fit: HalFit, design: np.ndarray, data: Dataset, tol: float = DEFAULT_KKT_TOL) -> KktReport:
    """
    Check the penalized-problem optimality conditions.

    Active penalized j need score_j = -lambda * sign(beta_j); inactive
    penalized j need |score_j| <= lambda; unpenalized j need score_j = 0.
    """
    scores = basis_scores(fit, design, data)
    lam = 0.0 if fit.lam is None else float(fit.lam)
    mask = fit.penalty_mask
    violations = np.zeros_like(scores)
    status: list[str] = []
    for j, score in enumerate(scores):
        if not mask[j]:
            violations[j] = abs(score)
            kind = "unpenalized"
        elif fit.beta[j] != 0.0:
            violations[j] = abs(score + lam * np.sign(fit.beta[j]))
            kind = "active"
        else:
            violations[j] = max(0.0, abs(score) - lam)
            kind = "inactive"
        status.append("violated" if violations[j] > tol else kind)
    max_violation = float(violations.max()) if violations.size else 0.0
    return KktReport(max_violation=max_violation, status=tuple(status), violations=violations, tol=tol)
