"""Generative models, exact nuisances, truths and the Monte Carlo harness."""

from medexc.simulation.experiment import (
    ReplicateOutcome,
    cell_truth,
    replicate_key,
    run_experiment,
    run_replicate,
    summarize,
)
from medexc.simulation.gm1 import (
    gm1_cell_probabilities,
    gm1_coefficients,
    gm1_deltas,
    gm1_discrete_dgp,
    gm1_generate,
    gm1_quadrature,
    gm1_theta,
    gm1_true_nuisances,
)
from medexc.simulation.gm2 import (
    gm2_branch_outcomes,
    gm2_generate,
    gm2_h3,
    gm2_true_propensity,
)
from medexc.simulation.perturbation import perturb_nuisances, perturbation_factors
from medexc.simulation.scenarios import (
    ROBUST_CORRECT,
    gm2_scenario_spec,
    robust_scenario,
    wrong_nuisances,
)
from medexc.simulation.truth import gformula_monte_carlo, project_theta, true_estimands

__all__ = [
    "ROBUST_CORRECT",
    "ReplicateOutcome",
    "cell_truth",
    "gformula_monte_carlo",
    "gm1_cell_probabilities",
    "gm1_coefficients",
    "gm1_deltas",
    "gm1_discrete_dgp",
    "gm1_generate",
    "gm1_quadrature",
    "gm1_theta",
    "gm1_true_nuisances",
    "gm2_branch_outcomes",
    "gm2_generate",
    "gm2_h3",
    "gm2_scenario_spec",
    "gm2_true_propensity",
    "perturb_nuisances",
    "perturbation_factors",
    "project_theta",
    "replicate_key",
    "robust_scenario",
    "run_experiment",
    "run_replicate",
    "summarize",
    "true_estimands",
    "wrong_nuisances",
]
