"""Exact mediation functionals of a discrete DGP by three routes.

The definition route changes the law of the decision point itself: A_t is
set to d^a and M_t is drawn as under d^b, with every later variable following
the behavior law given the realized values. The g-formula and weighting
routes only use the observed-data law and must agree with it.
"""

import logging

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import NDArray

from medexc.exceptions import ConfigurationError, IdentificationError
from medexc.models.dgp import DiscreteDGP
from medexc.models.oracle import AgreementReport, IdentificationCheck
from medexc.oracle.enumeration import joint, outcome_mass, random_dgp, select_excursion
from medexc.rng import Stream, make_rng

logger = logging.getLogger(__name__)

AGREEMENT_TOLERANCE = 1e-10


def _check_cell(dgp: DiscreteDGP, t: int, a: int, b: int) -> None:
    if not 1 <= t <= dgp.T:
        raise ConfigurationError(f"t must be in 1..{dgp.T}, got {t}")
    if a not in (0, 1) or b not in (0, 1):
        raise ConfigurationError(f"arms must be 0 or 1, got a={a}, b={b}")


def _ratio(num: NDArray, den: NDArray) -> NDArray:
    return np.divide(num, den, out=np.zeros(np.broadcast(num, den).shape), where=den > 0)


def theta_definition(dgp: DiscreteDGP, t: int, a: int, b: int) -> float:
    """E[Y] when A_t follows d^a and M_t its law under d^b.

    Example:
        >>> round(theta_definition(tiny, t=1, a=1, b=0), 12)
        1.3
    """
    _check_cell(dgp, t, a, b)
    law = joint(dgp, excursion_at=t - 1, excursion=(a, b))
    return float((law * dgp.table("y_mean")).sum())


def _require_treatment(observed: NDArray, arm_mass: NDArray, t: int, arm: int) -> None:
    if np.any(observed & (arm_mass == 0)):
        raise IdentificationError(
            f"P(A_{t} = d^{arm} | H_{t}) = 0 on a history with positive probability"
        )


def theta_gformula(dgp: DiscreteDGP, t: int, a: int, b: int) -> float:
    """Iterated-expectation form E[E{E(Y | H_t, d^a, M_t) | H_t, d^b}].

    With a = b this is E[E(Y | H_t, A_t = d^a)].

    Raises:
        IdentificationError: If a needed conditional expectation conditions
            on an event of probability zero
    """
    _check_cell(dgp, t, a, b)
    mass = joint(dgp, t)
    G = outcome_mass(dgp, t)
    history = mass.sum(axis=(-2, -1))
    observed = history > 0
    mass_a, outcome_a = select_excursion(mass, a), select_excursion(G, a)
    treated_a = mass_a.sum(axis=-1)
    _require_treatment(observed, treated_a, t, a)
    if a == b:
        eta = _ratio(outcome_a.sum(axis=-1), treated_a)
        return float((history * eta).sum())

    mass_b = select_excursion(mass, b)
    treated_b = mass_b.sum(axis=-1)
    _require_treatment(observed, treated_b, t, b)
    if np.any(observed[..., None] & (mass_b > 0) & (mass_a == 0)):
        raise IdentificationError(
            f"E(Y | H_{t}, A_{t} = d^{a}, M_{t}) is undefined at a mediator value "
            f"with positive probability under d^{b}"
        )
    mu = _ratio(outcome_a, mass_a)
    mediator_law = _ratio(mass_b, treated_b[..., None])
    nu = (mu * mediator_law).sum(axis=-1)
    return float((history * nu).sum())


def weight_table(dgp: DiscreteDGP, t: int, a: int, b: int) -> NDArray[np.float64]:
    """1(A_t = d^a) P(d^b | H_t, M_t) / {P(d^b | H_t) P(d^a | H_t, M_t)}.

    Returned on the axes of the first t decision points; zero wherever
    A_t differs from d^a.

    Raises:
        IdentificationError: If P(A_t = d^b | H_t) vanishes on an observed history
    """
    _check_cell(dgp, t, a, b)
    mass = joint(dgp, t)
    history = mass.sum(axis=(-2, -1))
    with_mediator = mass.sum(axis=-2)
    treated_b = select_excursion(mass, b).sum(axis=-1)
    _require_treatment(history > 0, treated_b, t, b)
    propensity_b = _ratio(treated_b, history)
    q_a = _ratio(select_excursion(mass, a), with_mediator)
    q_b = _ratio(select_excursion(mass, b), with_mediator)
    value = _ratio(q_b, propensity_b[..., None] * q_a)
    weights = np.zeros_like(mass)
    weights[..., 0, 0, :] = value[..., 0, :]
    weights[..., 1, a, :] = value[..., 1, :]
    return weights


def theta_weighting(dgp: DiscreteDGP, t: int, a: int, b: int) -> float:
    """Inverse-probability form E[W_t^{ab} Y] summed over the full path law.

    Raises:
        IdentificationError: If a weight divides by a zero probability
    """
    weights = weight_table(dgp, t, a, b)
    full = joint(dgp) * dgp.table("y_mean")
    full = full.reshape(weights.shape + (-1,))
    return float((full * weights[..., None]).sum())


def theta_table(dgp: DiscreteDGP, method: str = "gformula") -> NDArray[np.float64]:
    """theta_t^{ab} for every (t, a, b), shape (T, 2, 2).

    Raises:
        ConfigurationError: If ``method`` is unknown
    """
    routes = {
        "definition": theta_definition,
        "gformula": theta_gformula,
        "weighting": theta_weighting,
    }
    if method not in routes:
        raise ConfigurationError(f"Unknown identification route '{method}'")
    theta = np.empty((dgp.T, 2, 2))
    for t in range(1, dgp.T + 1):
        for a in (0, 1):
            for b in (0, 1):
                theta[t - 1, a, b] = routes[method](dgp, t, a, b)
    return theta


def check_identification(
    dgp: DiscreteDGP, tolerance: float = AGREEMENT_TOLERANCE
) -> list[IdentificationCheck]:
    """Evaluate every (t, a, b) by all three routes and compare them.

    Raises:
        IdentificationError: If the observed-data routes are undefined
    """
    checks = []
    for t in range(1, dgp.T + 1):
        for a in (0, 1):
            for b in (0, 1):
                values = (
                    theta_definition(dgp, t, a, b),
                    theta_gformula(dgp, t, a, b),
                    theta_weighting(dgp, t, a, b),
                )
                checks.append(
                    IdentificationCheck(
                        t=t,
                        a=a,
                        b=b,
                        definition=values[0],
                        gformula=values[1],
                        weighting=values[2],
                        ok=max(values) - min(values) < tolerance,
                    )
                )
    return checks


def draw_random_dgp(seed: int, index: int, max_T: int = 3, max_support: int = 4) -> DiscreteDGP:
    """The ``index``-th DGP of a seeded agreement run.

    T is uniform on 1..max_T and each support size on 1..max_support.
    """
    rng = make_rng(seed, Stream.DGP, index)
    return random_dgp(
        rng,
        T=int(rng.integers(1, max_T + 1)),
        nx=int(rng.integers(1, max_support + 1)),
        nm=int(rng.integers(1, max_support + 1)),
    )


def _random_case(seed: int, index: int, max_T: int, max_support: int, tolerance: float):
    dgp = draw_random_dgp(seed, index, max_T, max_support)
    try:
        checks = check_identification(dgp, tolerance)
    except IdentificationError as e:
        logger.warning(f"Random DGP {index}: {e}")
        return False, np.inf
    return all(c.ok for c in checks), max(c.gap for c in checks)


def random_agreement(
    count: int,
    seed: int,
    *,
    max_T: int = 3,
    max_support: int = 4,
    tolerance: float = AGREEMENT_TOLERANCE,
    threads: int = 1,
) -> AgreementReport:
    """Three-way agreement over ``count`` random DGPs with a 0.05 positivity floor.

    Example:
        >>> random_agreement(20, seed=3).summary()
        '20/20 agree'
    """
    if count < 0:
        raise ConfigurationError(f"count must be nonnegative, got {count}")
    logger.info(f"Checking identification on {count} random DGPs")
    outcomes = Parallel(n_jobs=threads)(
        delayed(_random_case)(seed, k, max_T, max_support, tolerance) for k in range(count)
    )
    failures = [k for k, (ok, _) in enumerate(outcomes) if not ok]
    return AgreementReport(
        total=count,
        agreed=count - len(failures),
        max_gap=max((gap for _, gap in outcomes), default=0.0),
        tolerance=tolerance,
        failures=failures,
    )
