"""Population-level checks of the robustness of the influence-function terms.

Each check replaces some exact nuisance functions by fixed wrong ones and
computes the exact mean of the influence-function term over the enumerated
path law, using the same code path as the estimator.
"""

import logging

import numpy as np
from numpy.typing import NDArray

from medexc.data.dataset import Dataset
from medexc.estimator.phi import phi_table
from medexc.models.dgp import DiscreteDGP
from medexc.models.oracle import RobustnessCheck
from medexc.nuisance.base import NuisanceSet
from medexc.oracle.enumeration import dgp_nuisances, enumerate_paths
from medexc.oracle.identification import theta_table
from medexc.simulation.scenarios import wrong_nuisances

logger = logging.getLogger(__name__)

COMPONENTS = ("p", "q", "eta", "mu", "nu")

# Exact components under which the mean of phi^{aa} is theta^{aa}
SINGLE_WORLD_CONFIGS: tuple[tuple[str, ...], ...] = (("p",), ("eta",))
# Exact components under which the mean of phi^{ab}, a != b, is theta^{ab}
CROSS_WORLD_CONFIGS: tuple[tuple[str, ...], ...] = (
    ("p", "q"),
    ("p", "mu"),
    ("q", "nu"),
    ("mu", "nu"),
)


def mixed_nuisances(truth: NuisanceSet, correct: tuple[str, ...]) -> NuisanceSet:
    """Keep ``correct`` components of ``truth`` and freeze the others wrong."""
    wrong = wrong_nuisances(truth.clip)
    components = {
        name: getattr(truth if name in correct else wrong, name) for name in COMPONENTS
    }
    return truth.replace(provenance="mixed", **components)


def expected_phi(
    paths: Dataset, probabilities: NDArray[np.float64], nuisances: NuisanceSet
) -> NDArray[np.float64]:
    """Exact E[phi_t^{ab}] over an enumerated path law, shape (T, 2, 2)."""
    values = phi_table(paths, nuisances, weight_ratio_warning=np.inf).values
    return np.einsum("k,abkt->tab", probabilities, values)


def expected_weight(
    paths: Dataset, probabilities: NDArray[np.float64], nuisances: NuisanceSet
) -> NDArray[np.float64]:
    """Exact E[1(A_t = d^a) / P(A_t = d^a | H_t)], shape (T, 2)."""
    values = nuisances.evaluate(paths)
    return np.einsum("k,akt->ta", probabilities, values.indicator / values.p)


def robustness_checks(
    dgp: DiscreteDGP, tolerance: float = 1e-10
) -> list[RobustnessCheck]:
    """Check every robustness configuration at every (t, a, b).

    The single-world term is unbiased when p or eta is exact; the
    cross-world term when (p, q), (p, mu), (q, nu) or (mu, nu) are exact;
    the inverse-propensity weight of the observed treatment has mean one.
    """
    paths, probabilities = enumerate_paths(dgp)
    truth = dgp_nuisances(dgp)
    theta = theta_table(dgp)
    checks = []

    def record(term: str, correct: tuple[str, ...], t: int, a: int, b: int, value, target):
        checks.append(
            RobustnessCheck(
                term=term,
                correct=list(correct),
                t=t + 1,
                a=a,
                b=b,
                expected=float(value),
                target=float(target),
                ok=abs(value - target) < tolerance,
            )
        )

    for correct in SINGLE_WORLD_CONFIGS:
        means = expected_phi(paths, probabilities, mixed_nuisances(truth, correct))
        for t in range(dgp.T):
            for a in (0, 1):
                record("phi_aa", correct, t, a, a, means[t, a, a], theta[t, a, a])
    for correct in CROSS_WORLD_CONFIGS:
        means = expected_phi(paths, probabilities, mixed_nuisances(truth, correct))
        for t in range(dgp.T):
            for a in (0, 1):
                record("phi_ab", correct, t, a, 1 - a, means[t, a, 1 - a], theta[t, a, 1 - a])
    weights = expected_weight(paths, probabilities, truth)
    for t in range(dgp.T):
        for a in (0, 1):
            record("weight", ("p",), t, a, a, weights[t, a], 1.0)
    failed = sum(not c.ok for c in checks)
    if failed:
        logger.warning(f"{failed} of {len(checks)} robustness checks failed")
    return checks
