"""Multiplicative perturbation of exact nuisances at controlled rates."""

import logging

import numpy as np
from numpy.typing import NDArray

from medexc.data.dataset import Dataset
from medexc.models.simulation import PerturbationSpec
from medexc.nuisance.base import ArmFn, NuisanceSet, PropensityFn
from medexc.rng import Stream, make_rng

logger = logging.getLogger(__name__)

COMPONENTS = ("p", "q", "eta", "mu", "nu")


def perturbation_factors(spec: PerturbationSpec) -> dict[str, float]:
    """One U ~ Uniform[1 - n^-r, 1] per nuisance function.

    Example:
        >>> factors = perturbation_factors(PerturbationSpec.from_pair(0.5, 0.5, 10_000, 1))
        >>> all(0.99 <= u <= 1.0 for u in factors.values())
        True
    """
    rng = make_rng(spec.seed, Stream.PERTURBATION, spec.replicate)
    rates = {
        "p": spec.r_p,
        "q": spec.r_q,
        "eta": spec.r_eta,
        "mu": spec.r_mu,
        "nu": spec.r_nu,
    }
    return {
        name: float(rng.uniform(1.0 - spec.n ** (-rates[name]), 1.0)) for name in COMPONENTS
    }


def _scaled_probability(component: PropensityFn, factor: float) -> PropensityFn:
    def perturbed(ds: Dataset) -> NDArray[np.float64]:
        # Scale P(A = 1 | .); the a = 0 branch is its complement on evaluation
        return np.clip(factor * component(ds), 0.0, 1.0)

    return perturbed


def _scaled_outcome(component: ArmFn, factor: float) -> ArmFn:
    def perturbed(ds: Dataset) -> NDArray[np.float64]:
        return factor * component(ds)

    return perturbed


def perturb_nuisances(truth: NuisanceSet, spec: PerturbationSpec) -> NuisanceSet:
    """Scale each exact nuisance function by its own uniform factor.

    With rate r the factor lies in [1 - n^-r, 1], so the perturbed function
    is within O(n^-r) of the truth in every norm.

    Args:
        truth: Exact nuisance set
        spec: Rates per function, sample size and seed

    Returns:
        Nuisance set with provenance ``"perturbed"``
    """
    factors = perturbation_factors(spec)
    logger.debug(f"Perturbation factors: {factors}")
    return NuisanceSet(
        p=_scaled_probability(truth.p, factors["p"]),
        q=_scaled_probability(truth.q, factors["q"]),
        eta=_scaled_outcome(truth.eta, factors["eta"]),
        mu=_scaled_outcome(truth.mu, factors["mu"]),
        nu=_scaled_outcome(truth.nu, factors["nu"]),
        provenance="perturbed",
        clip=truth.clip,
    )
