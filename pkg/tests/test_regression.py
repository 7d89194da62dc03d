"""Tests for the logistic (IRLS) and least-squares working-model fits."""

import logging

import numpy as np
import pytest

from medexc.exceptions import FitError
from medexc.nuisance.regression import fit_linear, fit_logistic


def test_logistic_intercept_only():
    """Test that an intercept-only fit reproduces the label frequency."""
    fit = fit_logistic(np.ones((4, 1)), [1, 1, 1, 0])
    assert fit.converged
    assert fit.predict([[1.0]])[0] == pytest.approx(0.75)


def test_logistic_recovers_coefficients():
    """Test recovery of known coefficients on a large sample."""
    rng = np.random.default_rng(0)
    x = rng.normal(size=20_000)
    X = np.column_stack([np.ones_like(x), x])
    y = (rng.uniform(size=x.size) < 1 / (1 + np.exp(-(0.5 - 1.0 * x)))).astype(float)
    fit = fit_logistic(X, y)
    np.testing.assert_allclose(fit.coef, [0.5, -1.0], atol=0.06)


def test_logistic_weights_match_replication():
    """Test that integer weights equal duplicating rows."""
    X = np.column_stack([np.ones(4), [0.0, 1.0, 2.0, 3.0]])
    y = np.array([0.0, 1.0, 0.0, 1.0])
    weighted = fit_logistic(X, y, weights=[2, 1, 1, 2])
    repeated = fit_logistic(np.repeat(X, [2, 1, 1, 2], axis=0), np.repeat(y, [2, 1, 1, 2]))
    np.testing.assert_allclose(weighted.coef, repeated.coef, atol=1e-8)


def test_logistic_needs_both_labels():
    """Test that a stratum with one label cannot be fit."""
    with pytest.raises(FitError, match="both labels"):
        fit_logistic(np.ones((3, 1)), [1, 1, 1])


def test_logistic_rejects_non_binary_labels():
    """Test that labels must be 0 or 1."""
    with pytest.raises(FitError, match="0 or 1"):
        fit_logistic(np.ones((2, 1)), [0, 2])


def test_logistic_separation_raises_ridge(caplog):
    """Test that complete separation is handled by escalating the ridge."""
    X = np.column_stack([np.ones(6), 1e-3 * np.array([-3, -2, -1, 1, 2, 3])])
    y = np.array([0, 0, 0, 1, 1, 1])
    with caplog.at_level(logging.WARNING):
        fit = fit_logistic(X, y)
    assert "Separation detected" in caplog.text
    assert fit.ridge > 0
    assert np.all(np.isfinite(fit.coef))
    assert fit.predict(X[[0]])[0] < 0.5 < fit.predict(X[[-1]])[0]


def test_linear_exact_fit():
    """Test that an exact linear relation is reproduced."""
    X = np.column_stack([np.ones(5), np.arange(5.0)])
    fit = fit_linear(X, 1.0 + 2.0 * np.arange(5.0))
    np.testing.assert_allclose(fit.coef, [1.0, 2.0], atol=1e-10)
    assert fit.ridge == 0.0


def test_linear_collinear_columns_use_ridge(caplog):
    """Test that a singular Gram matrix triggers the ridge fallback."""
    x = np.arange(6.0)
    X = np.column_stack([np.ones(6), x, 2 * x])
    with caplog.at_level(logging.WARNING):
        fit = fit_linear(X, 3 * x)
    assert "raising ridge" in caplog.text
    assert fit.ridge > 0
    np.testing.assert_allclose(fit.predict(X), 3 * x, atol=1e-4)


def test_linear_needs_enough_rows():
    """Test that fewer rows than columns is a fit error."""
    with pytest.raises(FitError, match="at least 3 rows"):
        fit_linear(np.ones((2, 3)), [1.0, 2.0])


def test_invalid_weights():
    """Test that negative observation weights are rejected."""
    with pytest.raises(FitError, match="nonnegative"):
        fit_linear(np.ones((2, 1)), [1.0, 2.0], weights=[1.0, -1.0])
