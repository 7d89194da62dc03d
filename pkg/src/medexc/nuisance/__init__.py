"""Nuisance functions p, q, eta, mu, nu: containers, working models and fitting."""

from .base import (
    ArmFn,
    NuisanceSet,
    NuisanceValues,
    PropensityFn,
    arm_indicator,
    clip_probability,
    constant_outcome,
    constant_propensity,
    excursion_propensity,
    zero_outcome,
)
from .design import HistoryDesign
from .fitted import fit_nuisance_set
from .regression import LinearFit, LogisticFit, fit_linear, fit_logistic

__all__ = [
    "ArmFn",
    "HistoryDesign",
    "LinearFit",
    "LogisticFit",
    "NuisanceSet",
    "NuisanceValues",
    "PropensityFn",
    "arm_indicator",
    "clip_probability",
    "constant_outcome",
    "constant_propensity",
    "excursion_propensity",
    "fit_linear",
    "fit_logistic",
    "fit_nuisance_set",
    "zero_outcome",
]
