"""Tests for feature maps, weights and basis expansions."""

import numpy as np
import pytest
from pydantic import ValidationError

from medexc.data.features import (
    SplineBasis,
    TermExpansion,
    evaluate_feature_map,
    feature_matrix,
    make_weights,
    resolve_weights,
)
from medexc.exceptions import ConfigurationError
from medexc.models.estimand import BasisSpec, FeatureMap, WeightSpec, WeightVector


def test_constant_and_linear_feature_maps():
    """Test f(t) = 1 and f(t) = (1, t - 1)."""
    np.testing.assert_array_equal(feature_matrix(FeatureMap(), 4), np.ones((4, 1)))
    F = feature_matrix(FeatureMap(kind="linear"), 3)
    np.testing.assert_array_equal(F, [[1, 0], [1, 1], [1, 2]])
    np.testing.assert_array_equal(
        evaluate_feature_map(FeatureMap(kind="linear"), t=3, T=5), [1.0, 2.0]
    )


def test_polynomial_feature_map():
    """Test the powers of t - 1 up to the degree."""
    F = feature_matrix(FeatureMap(kind="polynomial", degree=2), 3)
    np.testing.assert_array_equal(F, [[1, 0, 0], [1, 1, 1], [1, 2, 4]])


def test_bspline_feature_map_is_a_partition_of_unity():
    """Test that the B-spline rows sum to one and have df columns."""
    F = feature_matrix(FeatureMap(kind="bspline", df=6), 30)
    assert F.shape == (30, 6)
    np.testing.assert_allclose(F.sum(axis=1), 1.0)


def test_bspline_needs_two_decision_points():
    """Test that a B-spline map on T=1 is a configuration error."""
    with pytest.raises(ConfigurationError, match="at least two"):
        feature_matrix(FeatureMap(kind="bspline"), 1)


def test_evaluate_outside_range():
    """Test that f(t) outside 1..T is rejected."""
    with pytest.raises(ConfigurationError, match="outside 1..5"):
        evaluate_feature_map(FeatureMap(), t=6, T=5)


def test_feature_map_parse():
    """Test the textual feature map forms used on the command line."""
    assert FeatureMap.parse("linear").kind == "linear"
    assert FeatureMap.parse("bspline:8").df == 8
    assert FeatureMap.parse("polynomial:3").dimension == 4
    with pytest.raises(ValueError, match="Unknown feature map"):
        FeatureMap.parse("wavelet")


def test_uniform_and_point_mass_weights():
    """Test the two standard weightings."""
    assert make_weights("uniform", 4).w == [0.25] * 4
    assert make_weights("point-mass", 3, t0=2).w == [0.0, 1.0, 0.0]


def test_custom_weights_are_normalized():
    """Test that custom weights are scaled to sum to one."""
    w = make_weights("custom", 3, values=[2, 2, 0])
    assert w.w == [0.5, 0.5, 0.0]


@pytest.mark.parametrize(
    ("kwargs", "match"),
    [
        ({"kind": "point-mass", "T": 3, "t0": 4}, "outside 1..3"),
        ({"kind": "custom", "T": 3, "values": [1, 2]}, "need 3 entries"),
        ({"kind": "custom", "T": 2, "values": [1, -1]}, "nonnegative"),
        ({"kind": "custom", "T": 2, "values": [0, 0]}, "all zero"),
        ({"kind": "triangular", "T": 2}, "Unknown weight kind"),
    ],
)
def test_invalid_weights(kwargs, match):
    """Test that invalid weight recipes raise configuration errors."""
    with pytest.raises(ConfigurationError, match=match):
        make_weights(**kwargs)


def test_weight_vector_must_sum_to_one():
    """Test the normalization invariant of WeightVector."""
    with pytest.raises(ValidationError, match="sum to 1"):
        WeightVector(w=[0.5, 0.6])


def test_weight_spec_parse_and_resolve():
    """Test parsing of weight recipes and their resolution for a given T."""
    assert resolve_weights(WeightSpec.parse("point:2"), 3).w == [0.0, 1.0, 0.0]
    assert WeightSpec.parse("custom:1,3").values == [1.0, 3.0]
    with pytest.raises(ValueError, match="Unknown weighting"):
        WeightSpec.parse("random")


def test_spline_basis_transform_shape():
    """Test that a spline basis without intercept has df columns."""
    values = np.linspace(-2, 2, 200)
    basis = SplineBasis(df=5).fit(values)
    assert basis.n_columns == 5
    assert basis.transform(values).shape == (200, 5)


def test_spline_basis_falls_back_for_few_values():
    """Test that a term with few distinct values uses a polynomial of full rank."""
    basis = SplineBasis(df=5).fit([0, 1, 0, 1])
    assert basis.n_columns == 1
    np.testing.assert_allclose(basis.transform([0.0, 1.0])[:, 0], [-0.5, 0.5])


def test_spline_basis_must_be_fitted():
    """Test that an unfitted basis cannot transform."""
    with pytest.raises(RuntimeError, match="fitted first"):
        SplineBasis().transform([1.0])


def test_term_expansion_kinds():
    """Test the column counts of the scalar expansions."""
    values = np.arange(10.0)
    assert TermExpansion(BasisSpec(kind="none")).fit(values).n_columns == 0
    assert TermExpansion(BasisSpec(kind="linear")).fit(values).n_columns == 1
    poly = TermExpansion(BasisSpec(kind="polynomial", degree=3)).fit(values)
    assert poly.transform(values).shape == (10, 3)
