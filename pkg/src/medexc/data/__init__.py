"""Panel data representation, validation, feature maps, weights and CSV I/O."""

from .dataset import Dataset, require_valid, validate_dataset
from .features import (
    SplineBasis,
    TermExpansion,
    evaluate_feature_map,
    feature_matrix,
    make_weights,
    resolve_weights,
)
from .io import load_csv, save_csv

__all__ = [
    "Dataset",
    "SplineBasis",
    "TermExpansion",
    "evaluate_feature_map",
    "feature_matrix",
    "load_csv",
    "make_weights",
    "require_valid",
    "resolve_weights",
    "save_csv",
    "validate_dataset",
]
