"""Named nuisance scenarios for the simulation studies."""

from typing import Literal

from medexc.exceptions import ConfigurationError
from medexc.models.estimand import BasisSpec, HistoryFeatureSpec, NuisanceSpec
from medexc.nuisance.base import (
    NuisanceSet,
    constant_propensity,
    zero_outcome,
)

RobustScenario = Literal["robust-i", "robust-ii", "robust-iii", "robust-iv", "all-wrong"]

# Components kept exact in each scenario; the rest are frozen at wrong values
ROBUST_CORRECT: dict[str, frozenset[str]] = {
    "robust-i": frozenset({"p", "q"}),
    "robust-ii": frozenset({"p", "mu"}),
    "robust-iii": frozenset({"eta", "nu", "q"}),
    "robust-iv": frozenset({"eta", "nu", "mu"}),
    "all-wrong": frozenset(),
}


def wrong_nuisances(clip: float = 0.01) -> NuisanceSet:
    """Fixed misspecified functions: propensities 0.5, outcome regressions 0."""
    return NuisanceSet(
        p=constant_propensity(0.5),
        q=constant_propensity(0.5),
        eta=zero_outcome,
        mu=zero_outcome,
        nu=zero_outcome,
        provenance="mixed",
        clip=clip,
    )


def robust_scenario(truth: NuisanceSet, name: str) -> NuisanceSet:
    """Keep the components named by ``name`` exact and freeze the rest wrong.

    Raises:
        ConfigurationError: If ``name`` is not a robustness scenario
    """
    if name not in ROBUST_CORRECT:
        raise ConfigurationError(f"Unknown robustness scenario '{name}'")
    wrong = wrong_nuisances(truth.clip)
    components = {
        key: getattr(truth if key in ROBUST_CORRECT[name] else wrong, key)
        for key in ("p", "q", "eta", "mu", "nu")
    }
    return truth.replace(provenance="mixed", **components)


def gm2_scenario_spec(k: int, df: int = 5) -> NuisanceSpec:
    """Working models of the four GM-2 scenarios (known propensity, eta = nu = 0).

    Scenario 1 specifies q and mu correctly, 2 only mu, 3 only q and 4
    neither. The correct q uses smooth terms in t, M_{t-1}, X_t and M_t plus
    A_{t-1}; the correct mu uses smooth terms in t, X_t and M_t; wrong models
    keep only the smooth term in t.

    Raises:
        ConfigurationError: If k is not 1..4
    """
    if k not in (1, 2, 3, 4):
        raise ConfigurationError(f"GM-2 scenarios are numbered 1..4, got {k}")
    smooth = BasisSpec(kind="bspline", df=df)
    q_correct = HistoryFeatureSpec(
        time_basis=smooth,
        mediator_basis=smooth,
        covariate_basis=smooth,
        lags=["a", "m"],
        x_terms="all",
    )
    mu_correct = HistoryFeatureSpec(
        time_basis=smooth,
        mediator_basis=smooth,
        covariate_basis=smooth,
        lags=[],
        x_terms="all",
    )
    wrong = HistoryFeatureSpec.time_only(df=df)
    return NuisanceSpec(
        p="known",
        q=q_correct if k in (1, 3) else wrong,
        eta="zero",
        mu=mu_correct if k in (1, 2) else wrong,
        nu="zero",
    )
