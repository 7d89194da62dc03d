"""Influence-function estimation of natural direct and indirect excursion effects."""

from .curves import curve_points, effect_curves
from .estimating import (
    ProjectionSystem,
    effect_contrasts,
    estimate,
    estimate_crossfit,
    estimating_function,
    fold_assignment,
    psi_contribution,
    solve_gamma,
)
from .phi import PhiTable, phi_aa, phi_ab, phi_table

__all__ = [
    "PhiTable",
    "ProjectionSystem",
    "curve_points",
    "effect_contrasts",
    "effect_curves",
    "estimate",
    "estimate_crossfit",
    "estimating_function",
    "fold_assignment",
    "phi_aa",
    "phi_ab",
    "phi_table",
    "psi_contribution",
    "solve_gamma",
]
