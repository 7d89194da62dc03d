"""Tests for influence-function terms, the projection solve and cross-fitting."""

import numpy as np
import pytest
from pydantic import ValidationError

from medexc.config import MedexcConfig
from medexc.estimator import (
    ProjectionSystem,
    effect_curves,
    estimate,
    estimate_crossfit,
    estimating_function,
    fold_assignment,
    phi_aa,
    phi_ab,
    phi_table,
    psi_contribution,
    solve_gamma,
)
from medexc.exceptions import ConfigurationError, DegenerateBasisError
from medexc.models.estimand import (
    EstimandConfig,
    FeatureMap,
    HistoryFeatureSpec,
    NuisanceSpec,
    WeightSpec,
)
from medexc.simulation.gm1 import gm1_true_nuisances
from medexc.simulation.truth import true_estimands


def test_phi_aa():
    """Test the single-world term with and without a treatment match."""
    assert phi_aa(y=3.0, indicator=0, p=0.4, eta=2.0) == pytest.approx(2.0)
    assert phi_aa(y=3.0, indicator=1, p=0.5, eta=2.0) == pytest.approx(4.0)


def test_phi_ab():
    """Test the cross-world term on both kinds of rows."""
    kwargs = {"y": 3.0, "p_b": 0.5, "q_a": 0.5, "q_b": 0.25, "mu_a": 2.0, "nu_a": 1.0}
    assert phi_ab(indicator_a=1, indicator_b=0, **kwargs) == pytest.approx(2.0)
    assert phi_ab(indicator_a=0, indicator_b=1, **kwargs) == pytest.approx(3.0)


def test_phi_table_shape(gm1_small):
    """Test the (a, b, participant, t) layout of the table."""
    table = phi_table(gm1_small, gm1_true_nuisances())
    assert table.values.shape == (2, 2, 400, 5)
    assert table.theta_means().shape == (5, 2, 2)
    assert table.weight_ratio_max > 0


def test_solution_zeroes_the_estimating_function(gm1_small):
    """Test that the closed-form root solves the averaged equation."""
    ns = gm1_true_nuisances()
    config = EstimandConfig(feature_map=FeatureMap(kind="linear"))
    gamma = solve_gamma(gm1_small, ns, config)
    psi = estimating_function(gm1_small, ns, config, gamma)
    assert psi.shape == (400, 4)
    assert np.max(np.abs(psi.mean(axis=0))) < 1e-10


def test_estimating_function_is_affine(gm1_small):
    """Test psi at a midpoint equals the mean of psi at the endpoints."""
    ns = gm1_true_nuisances()
    config = EstimandConfig()
    g1, g2 = np.array([0.3, -1.0]), np.array([2.0, 0.5])
    mid = estimating_function(gm1_small, ns, config, (g1 + g2) / 2)
    ends = estimating_function(gm1_small, ns, config, g1) + estimating_function(
        gm1_small, ns, config, g2
    )
    np.testing.assert_allclose(mid, ends / 2, atol=1e-12)


def test_contribution_shape(gm1_small):
    """Test one contribution column per coefficient."""
    U = psi_contribution(gm1_small, gm1_true_nuisances(), EstimandConfig(effect_pair="total"))
    assert U.shape == (400, 1)


def test_estimate_with_exact_nuisances(gm1_small):
    """Test that estimates with exact nuisances cover the closed-form truth."""
    result = estimate(gm1_small, gm1_true_nuisances(), EstimandConfig())
    truth = true_estimands("gm1")
    assert result.names == ["alpha_1", "beta_1"]
    assert result.diagnostics.provenance == "exact-truth"
    assert result.diagnostics.solver_residual < 1e-10
    for name, value, se in zip(result.names, result.gamma_hat, result.se, strict=True):
        assert abs(value - truth.value(name)) < 4 * se


def test_total_is_direct_plus_indirect(gm1_small):
    """Test that both effect pairs decompose the total effect exactly."""
    ns = gm1_true_nuisances()
    total = estimate(gm1_small, ns, EstimandConfig(effect_pair="total"))
    primary = estimate(gm1_small, ns, EstimandConfig())
    swapped = estimate(gm1_small, ns, EstimandConfig(effect_pair="swapped"))
    assert total.names == ["total_1"]
    assert total.alpha.size == 0
    assert primary.alpha + primary.beta == pytest.approx(total.gamma, abs=1e-10)
    assert swapped.alpha + swapped.beta == pytest.approx(total.gamma, abs=1e-10)


def test_intervals_use_the_level(gm1_small):
    """Test Wald intervals at the requested level."""
    result = estimate(gm1_small, gm1_true_nuisances(), EstimandConfig(level=0.9))
    lower, upper = result.ci[0]
    assert (upper - lower) / 2 == pytest.approx(1.6448536 * result.se[0], rel=1e-6)
    assert result.coefficient_table().shape == (2, 5)


def test_effect_curves_constant_map(gm1_small):
    """Test that a constant map gives flat curves with a joint total SE."""
    result = estimate(gm1_small, gm1_true_nuisances(), EstimandConfig())
    frame = result.to_dataframe()
    assert list(frame.index) == [1, 2, 3, 4, 5]
    np.testing.assert_allclose(frame["direct"], result.alpha[0])
    cov = result.covariance
    np.testing.assert_allclose(frame["total_se"], np.sqrt(cov.sum()))


def test_effect_curves_linear_map(gm1_small):
    """Test f(t)'alpha for the linear feature map."""
    config = EstimandConfig(feature_map=FeatureMap(kind="linear"))
    result = estimate(gm1_small, gm1_true_nuisances(), config)
    curves = effect_curves(result, config.feature_map)
    assert curves[0].direct == pytest.approx(result.alpha[0])
    assert curves[2].indirect == pytest.approx(result.beta[0] + 2 * result.beta[1])
    with pytest.raises(ValueError, match="dimension"):
        effect_curves(result, FeatureMap())


def test_degenerate_basis():
    """Test that a point mass cannot identify a linear feature map."""
    config = EstimandConfig(
        feature_map=FeatureMap(kind="linear"), weights=WeightSpec(kind="point-mass", t0=2)
    )
    with pytest.raises(DegenerateBasisError, match="degenerate projection basis"):
        ProjectionSystem.build(config, 5)


def test_point_mass_with_constant_map(gm1_small):
    """Test that a point mass at t0 projects theta at that decision point."""
    config = EstimandConfig(weights=WeightSpec(kind="point-mass", t0=3))
    result = estimate(gm1_small, gm1_true_nuisances(), config)
    theta = result.theta_hat[2]
    assert result.alpha[0] == pytest.approx(theta.theta_10 - theta.theta_00)
    assert result.beta[0] == pytest.approx(theta.theta_11 - theta.theta_10)


def test_folds_must_not_be_one():
    """Test that a single fold is rejected at configuration time."""
    with pytest.raises(ValidationError, match="at least 2"):
        EstimandConfig(folds=1)


def test_fold_assignment_partitions():
    """Test near-equal seeded folds covering everyone once."""
    folds = fold_assignment(10, 3, seed=4)
    assert [f.size for f in folds] == [4, 3, 3]
    np.testing.assert_array_equal(np.sort(np.concatenate(folds)), np.arange(10))
    again = fold_assignment(10, 3, seed=4)
    assert all(np.array_equal(a, b) for a, b in zip(folds, again, strict=True))


def test_crossfit_needs_a_seed(gm1_small):
    """Test that cross-fitting without a seed is a configuration error."""
    with pytest.raises(ConfigurationError, match="needs a seed"):
        estimate(gm1_small, gm1_true_nuisances(), EstimandConfig(folds=2))


def test_crossfit_needs_enough_participants(gm1_small):
    """Test the n >= 2K requirement."""
    with pytest.raises(ConfigurationError, match="needs n >= 4"):
        estimate_crossfit(gm1_small.subset([0, 1, 2]), None, EstimandConfig(folds=2), seed=1)


def test_crossfit_with_fixed_nuisances_matches_full_sample(gm1_small):
    """Test that equal folds with fixed nuisances reproduce the full-sample root."""
    ns = gm1_true_nuisances()
    full = estimate(gm1_small, ns, EstimandConfig())
    crossfit = estimate(gm1_small, ns, EstimandConfig(folds=2), seed=9)
    np.testing.assert_allclose(crossfit.gamma, full.gamma, atol=1e-12)
    assert crossfit.diagnostics.fold_sizes == [200, 200]
    assert len(crossfit.diagnostics.folds) == 400
    assert crossfit.config_echo["seed"] == 9


def test_crossfit_is_deterministic_across_threads(gm1_small):
    """Test that the worker count does not change cross-fitted output."""
    simple = HistoryFeatureSpec.time_only(df=4)
    spec = NuisanceSpec(p=simple, q=simple, eta=simple, mu=simple, nu=simple)
    config = EstimandConfig(folds=3)
    one = estimate(gm1_small, spec, config, seed=2, settings=MedexcConfig(threads=1))
    two = estimate(gm1_small, spec, config, seed=2, settings=MedexcConfig(threads=2))
    assert one.gamma_hat == two.gamma_hat
    assert one.se == two.se
    assert one.diagnostics.provenance == "fitted"
