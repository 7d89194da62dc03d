"""Exact identification checks on small discrete DGPs."""

from medexc.oracle.enumeration import (
    dgp_nuisances,
    enumerate_paths,
    joint,
    outcome_mass,
    random_dgp,
    sample_dgp,
    select_excursion,
    step_factor,
)
from medexc.oracle.identification import (
    AGREEMENT_TOLERANCE,
    check_identification,
    draw_random_dgp,
    random_agreement,
    theta_definition,
    theta_gformula,
    theta_table,
    theta_weighting,
    weight_table,
)
from medexc.oracle.robustness import (
    CROSS_WORLD_CONFIGS,
    SINGLE_WORLD_CONFIGS,
    expected_phi,
    expected_weight,
    mixed_nuisances,
    robustness_checks,
)
from medexc.oracle.verify import verify_estimator_on_dgp

__all__ = [
    "AGREEMENT_TOLERANCE",
    "CROSS_WORLD_CONFIGS",
    "SINGLE_WORLD_CONFIGS",
    "check_identification",
    "dgp_nuisances",
    "draw_random_dgp",
    "enumerate_paths",
    "expected_phi",
    "expected_weight",
    "joint",
    "mixed_nuisances",
    "outcome_mass",
    "random_agreement",
    "random_dgp",
    "robustness_checks",
    "sample_dgp",
    "select_excursion",
    "step_factor",
    "theta_definition",
    "theta_gformula",
    "theta_table",
    "theta_weighting",
    "verify_estimator_on_dgp",
    "weight_table",
]
