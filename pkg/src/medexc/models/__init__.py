"""Models module for medexc."""

from .base import MedexcBaseModel, MedexcResult
from .data import TimePointRecord, Trajectory, ValidationReport, Violation
from .dgp import DiscreteDGP
from .estimand import (
    BasisSpec,
    EstimandConfig,
    FeatureMap,
    HistoryFeatureSpec,
    NuisanceSpec,
    WeightSpec,
    WeightVector,
)
from .oracle import (
    AgreementReport,
    IdentificationCheck,
    RobustnessCheck,
    VerificationReport,
)
from .result import Diagnostics, EffectCurvePoint, EstimateResult, ThetaEstimate
from .simulation import (
    METRIC_COLUMNS,
    ExperimentCell,
    ExperimentPlan,
    GM1Params,
    GM2Params,
    MetricsRow,
    MetricsTable,
    PerturbationSpec,
    TruthResult,
)

__all__ = [
    "METRIC_COLUMNS",
    "AgreementReport",
    "BasisSpec",
    "Diagnostics",
    "DiscreteDGP",
    "EffectCurvePoint",
    "EstimandConfig",
    "EstimateResult",
    "ExperimentCell",
    "ExperimentPlan",
    "FeatureMap",
    "GM1Params",
    "GM2Params",
    "HistoryFeatureSpec",
    "IdentificationCheck",
    "MedexcBaseModel",
    "MedexcResult",
    "MetricsRow",
    "MetricsTable",
    "NuisanceSpec",
    "PerturbationSpec",
    "RobustnessCheck",
    "ThetaEstimate",
    "TimePointRecord",
    "Trajectory",
    "TruthResult",
    "ValidationReport",
    "VerificationReport",
    "Violation",
    "WeightSpec",
    "WeightVector",
]
