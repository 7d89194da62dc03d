"""medexc - natural direct and indirect excursion effects for intensive longitudinal data."""

from .config import MedexcConfig, setup_logging
from .data import Dataset, load_csv, save_csv, validate_dataset
from .estimator import estimate, estimate_crossfit, phi_table, solve_gamma
from .exceptions import (
    ConfigurationError,
    DataFormatError,
    DataValidationError,
    DegenerateBasisError,
    FitError,
    IdentificationError,
    MedexcError,
    StratumError,
)
from .models import (
    BasisSpec,
    DiscreteDGP,
    EstimandConfig,
    EstimateResult,
    ExperimentCell,
    ExperimentPlan,
    FeatureMap,
    HistoryFeatureSpec,
    NuisanceSpec,
    WeightSpec,
)
from .nuisance import NuisanceSet, constant_propensity, fit_nuisance_set
from .oracle import (
    check_identification,
    random_agreement,
    robustness_checks,
    theta_table,
    verify_estimator_on_dgp,
)
from .simulation import (
    gm1_generate,
    gm1_true_nuisances,
    gm2_generate,
    perturb_nuisances,
    run_experiment,
    true_estimands,
)

__version__ = "0.1.0"
__all__ = [
    "BasisSpec",
    "ConfigurationError",
    "DataFormatError",
    "DataValidationError",
    "Dataset",
    "DegenerateBasisError",
    "DiscreteDGP",
    "EstimandConfig",
    "EstimateResult",
    "ExperimentCell",
    "ExperimentPlan",
    "FeatureMap",
    "FitError",
    "HistoryFeatureSpec",
    "IdentificationError",
    "MedexcConfig",
    "MedexcError",
    "NuisanceSet",
    "NuisanceSpec",
    "StratumError",
    "WeightSpec",
    "check_identification",
    "constant_propensity",
    "estimate",
    "estimate_crossfit",
    "fit_nuisance_set",
    "gm1_generate",
    "gm1_true_nuisances",
    "gm2_generate",
    "load_csv",
    "perturb_nuisances",
    "phi_table",
    "random_agreement",
    "robustness_checks",
    "run_experiment",
    "save_csv",
    "setup_logging",
    "solve_gamma",
    "theta_table",
    "true_estimands",
    "validate_dataset",
    "verify_estimator_on_dgp",
]
