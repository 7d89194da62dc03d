"""Weighted working-model fits: penalized logistic (IRLS) and least squares."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import linalg
from scipy.special import expit

from medexc.exceptions import FitError

logger = logging.getLogger(__name__)

MAX_RIDGE_ESCALATIONS = 5
SEPARATION_NORM = 1e3
CONDITION_LIMIT = 1e12
FALLBACK_RIDGE = 1e-4


def _penalty(p: int, penalize_intercept: bool) -> NDArray[np.float64]:
    d = np.ones(p)
    if not penalize_intercept and p:
        d[0] = 0.0
    return d


def _weights(weights: ArrayLike | None, n: int) -> NDArray[np.float64]:
    if weights is None:
        return np.ones(n)
    w = np.asarray(weights, dtype=float).reshape(-1)
    if w.shape != (n,) or np.any(w < 0) or not np.all(np.isfinite(w)):
        raise FitError("Observation weights must be finite, nonnegative and one per row")
    return w


def _solve_spd(matrix: NDArray, rhs: NDArray) -> NDArray:
    try:
        return linalg.cho_solve(linalg.cho_factor(matrix), rhs)
    except linalg.LinAlgError:
        return linalg.lstsq(matrix, rhs)[0]


@dataclass(frozen=True)
class LogisticFit:
    """Result of :func:`fit_logistic`."""

    coef: NDArray[np.float64]
    converged: bool
    iterations: int
    ridge: float
    gradient_norm: float

    def predict(self, X: ArrayLike) -> NDArray[np.float64]:
        """Fitted probabilities for the rows of ``X``."""
        return expit(np.asarray(X, dtype=float) @ self.coef)


@dataclass(frozen=True)
class LinearFit:
    """Result of :func:`fit_linear`."""

    coef: NDArray[np.float64]
    ridge: float
    residual_norm: float

    def predict(self, X: ArrayLike) -> NDArray[np.float64]:
        """Fitted means for the rows of ``X``."""
        return np.asarray(X, dtype=float) @ self.coef


def _irls(
    X: NDArray, y: NDArray, w: NDArray, d: NDArray, ridge: float, max_iter: int, tol: float
) -> LogisticFit:
    beta = np.zeros(X.shape[1])

    def objective(b: NDArray) -> float:
        eta = X @ b
        # log-likelihood written to stay finite for large |eta|
        loglik = np.sum(w * (y * eta - np.logaddexp(0.0, eta)))
        return float(loglik - 0.5 * ridge * np.sum(d * b**2))

    current = objective(beta)
    gradient_norm = np.inf
    for iteration in range(1, max_iter + 1):
        p = expit(X @ beta)
        gradient = X.T @ (w * (y - p)) - ridge * d * beta
        gradient_norm = float(np.linalg.norm(gradient))
        if gradient_norm < tol:
            return LogisticFit(beta, True, iteration - 1, ridge, gradient_norm)
        info = (X * (w * p * (1 - p))[:, None]).T @ X + np.diag(ridge * d)
        step = _solve_spd(info, gradient)
        scale = 1.0
        for _ in range(30):
            candidate = beta + scale * step
            value = objective(candidate)
            if value >= current - 1e-12 * abs(current):
                break
            scale /= 2
        beta, current = candidate, value
        logger.debug(
            f"IRLS iteration {iteration}: gradient norm {gradient_norm:.3e}, step {scale}"
        )
        if np.linalg.norm(beta) > SEPARATION_NORM:
            break
    p = expit(X @ beta)
    gradient_norm = float(np.linalg.norm(X.T @ (w * (y - p)) - ridge * d * beta))
    return LogisticFit(beta, gradient_norm < tol, iteration, ridge, gradient_norm)


def fit_logistic(
    X: ArrayLike,
    y: ArrayLike,
    weights: ArrayLike | None = None,
    *,
    ridge: float = 0.0,
    max_iter: int = 100,
    tol: float = 1e-8,
    penalize_intercept: bool = False,
) -> LogisticFit:
    """Weighted ridge-penalized logistic regression by Newton-Raphson (IRLS).

    Maximizes sum_i w_i loglik_i - ridge/2 * ||beta[1:]||^2; column 0 of ``X``
    is treated as the intercept and left unpenalized. When the coefficient
    norm diverges (complete or quasi-complete separation) the ridge penalty
    is multiplied by 10 and the fit restarted, at most five times.

    Args:
        X: Design matrix (n, p), intercept in column 0
        y: Binary labels (n,)
        weights: Nonnegative observation weights, default all one
        ridge: Penalty on non-intercept coefficients
        max_iter: Maximum Newton iterations per attempt
        tol: Convergence threshold on the penalized gradient norm
        penalize_intercept: Also penalize column 0

    Returns:
        Fit with the last iterate; ``converged`` is False when the gradient
        threshold was not reached

    Raises:
        FitError: If the weighted labels are all 0 or all 1

    Example:
        >>> fit = fit_logistic(np.ones((4, 1)), [1, 1, 1, 0])
        >>> float(fit.predict([[1.0]])[0])
        0.75
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).reshape(-1)
    n, p = X.shape
    if y.shape != (n,):
        raise FitError(f"Expected {n} labels, got {y.size}")
    if not np.all(np.isin(y, (0.0, 1.0))):
        raise FitError("Logistic labels must be 0 or 1")
    w = _weights(weights, n)
    positive, negative = np.sum(w * y), np.sum(w * (1 - y))
    if positive <= 0 or negative <= 0:
        raise FitError(
            f"Logistic fit needs both labels among weighted rows "
            f"(positive weight {positive:g}, negative weight {negative:g})"
        )
    d = _penalty(p, penalize_intercept)

    fit = _irls(X, y, w, d, ridge, max_iter, tol)
    escalations = 0
    while np.linalg.norm(fit.coef) > SEPARATION_NORM and escalations < MAX_RIDGE_ESCALATIONS:
        escalations += 1
        ridge = ridge * 10 if ridge > 0 else FALLBACK_RIDGE
        logger.warning(f"Separation detected in logistic fit; raising ridge to {ridge:g}")
        fit = _irls(X, y, w, d, ridge, max_iter, tol)
    if not fit.converged:
        logger.warning(
            f"Logistic fit did not converge after {fit.iterations} iterations "
            f"(gradient norm {fit.gradient_norm:.3e})"
        )
    return fit


def fit_linear(
    X: ArrayLike,
    y: ArrayLike,
    weights: ArrayLike | None = None,
    *,
    ridge: float = 0.0,
    penalize_intercept: bool = False,
) -> LinearFit:
    """Weighted (ridge) least squares through the normal equations.

    A singular or ill-conditioned Gram matrix triggers a ridge fallback on
    the non-intercept coefficients, escalated by factors of 10.

    Args:
        X: Design matrix (n, p), intercept in column 0
        y: Responses (n,)
        weights: Nonnegative observation weights, default all one
        ridge: Penalty on non-intercept coefficients
        penalize_intercept: Also penalize column 0

    Returns:
        Fit with coefficients, the ridge actually used and the
        normal-equation residual norm

    Raises:
        FitError: If n < p or the system stays rank deficient after ridge

    Example:
        >>> x = np.arange(1.0, 5.0)[:, None]
        >>> fit_linear(x, 2 * x[:, 0]).coef
        array([2.])
    """
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    y = np.asarray(y, dtype=float).reshape(-1)
    n, p = X.shape
    if y.shape != (n,):
        raise FitError(f"Expected {n} responses, got {y.size}")
    if n < p:
        raise FitError(f"Least squares needs at least {p} rows, got {n}")
    w = _weights(weights, n)
    d = _penalty(p, penalize_intercept)
    gram = (X * w[:, None]).T @ X
    rhs = X.T @ (w * y)
    scale = max(float(np.trace(gram)) / max(p, 1), 1e-300)

    for attempt in range(MAX_RIDGE_ESCALATIONS + 1):
        system = gram + np.diag(ridge * d)
        if np.linalg.cond(system) < CONDITION_LIMIT:
            try:
                coef = linalg.cho_solve(linalg.cho_factor(system), rhs)
            except linalg.LinAlgError:
                coef = None
            if coef is not None and np.all(np.isfinite(coef)):
                residual = float(np.linalg.norm(rhs - system @ coef))
                return LinearFit(coef, ridge, residual)
        if attempt == MAX_RIDGE_ESCALATIONS:
            break
        ridge = ridge * 10 if ridge > 0 else 1e-8 * scale
        logger.warning(f"Singular Gram matrix in least squares; raising ridge to {ridge:g}")
    raise FitError(f"Least-squares system is rank deficient even with ridge {ridge:g}")
