"""Reference values of the projection coefficients for the generative models."""

import logging
from typing import Literal

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import NDArray

from medexc.data.dataset import Dataset
from medexc.estimator.estimating import ProjectionSystem
from medexc.exceptions import ConfigurationError
from medexc.models.estimand import EstimandConfig
from medexc.models.result import ThetaEstimate
from medexc.models.simulation import GM1Params, GM2Params, TruthResult
from medexc.nuisance.base import NuisanceSet
from medexc.rng import Stream, make_rng
from medexc.simulation.gm1 import gm1_quadrature, gm1_theta
from medexc.simulation.gm2 import gm2_branch_outcomes

logger = logging.getLogger(__name__)


def _theta_records(theta: NDArray) -> list[ThetaEstimate]:
    return [
        ThetaEstimate(
            t=t + 1,
            theta_00=float(theta[t, 0, 0]),
            theta_01=float(theta[t, 0, 1]),
            theta_10=float(theta[t, 1, 0]),
            theta_11=float(theta[t, 1, 1]),
        )
        for t in range(theta.shape[0])
    ]


def project_theta(theta: NDArray[np.float64], config: EstimandConfig) -> NDArray[np.float64]:
    """Project per-t mediation functionals onto the feature map.

    Args:
        theta: Array (T, 2, 2) indexed [t, a, b]
        config: Feature map, weights and effect pair

    Returns:
        Coefficient vector ordered as ``config.parameter_names()``

    Example:
        >>> theta = gm1_theta()
        >>> project_theta(theta, EstimandConfig()).shape
        (2,)
    """
    theta = np.asarray(theta, dtype=float)
    system = ProjectionSystem.build(config, theta.shape[0])
    # one pseudo-participant whose phi equals theta
    phi = theta.transpose(1, 2, 0)[:, :, None, :]
    return system.solve(system.contributions(phi, config.effect_pair)[0])


def gformula_monte_carlo(ds: Dataset, nuisances: NuisanceSet) -> NDArray[np.float64]:
    """Plug-in g-formula: theta^{aa}_t = P_n eta_a and theta^{a,1-a}_t = P_n nu_a.

    Returns:
        Array (T, 2, 2) indexed [t, a, b]
    """
    values = nuisances.evaluate(ds)
    theta = np.empty((ds.T, 2, 2))
    for arm in (0, 1):
        theta[:, arm, arm] = values.eta[arm].mean(axis=0)
        theta[:, arm, 1 - arm] = values.nu[arm].mean(axis=0)
    return theta


def _gm2_chunk(
    params: GM2Params, config: EstimandConfig, size: int, seed: int, chunk: int
) -> tuple[NDArray, NDArray, NDArray]:
    rng = make_rng(seed, Stream.TRUTH, chunk)
    outcomes = gm2_branch_outcomes(params, size, rng)
    system = ProjectionSystem.build(config, params.T)
    contributions = system.contributions(outcomes.transpose(1, 2, 3, 0), config.effect_pair)
    return (
        outcomes.sum(axis=3),
        contributions.sum(axis=0),
        contributions.T @ contributions,
    )


def _gm2_truth(
    params: GM2Params,
    config: EstimandConfig,
    n_mc: int,
    seed: int,
    threads: int,
    chunk: int,
) -> TruthResult:
    sizes = [chunk] * (n_mc // chunk) + ([n_mc % chunk] if n_mc % chunk else [])
    logger.info(f"GM-2 truth by Monte Carlo: n_mc={n_mc} in {len(sizes)} chunks")
    parts = Parallel(n_jobs=threads)(
        delayed(_gm2_chunk)(params, config, size, seed, k) for k, size in enumerate(sizes)
    )
    theta = sum(part[0] for part in parts) / n_mc
    mean_u = sum(part[1] for part in parts) / n_mc
    second = sum(part[2] for part in parts) / n_mc
    cov_u = (second - np.outer(mean_u, mean_u)) * n_mc / max(n_mc - 1, 1)

    system = ProjectionSystem.build(config, params.T)
    gamma = system.solve(mean_u)
    inverse = np.linalg.inv(system.slope)
    cov = inverse @ cov_u @ inverse.T / n_mc
    return TruthResult(
        names=config.parameter_names(),
        values=gamma.tolist(),
        se=np.sqrt(np.clip(np.diag(cov), 0.0, None)).tolist(),
        theta=_theta_records(theta),
        method="monte-carlo",
        n_mc=n_mc,
    )


def true_estimands(
    generator: Literal["gm1", "gm2"],
    config: EstimandConfig | None = None,
    params: GM1Params | GM2Params | None = None,
    *,
    n_mc: int = 10_000_000,
    seed: int = 0,
    threads: int = 1,
    chunk: int = 100_000,
) -> TruthResult:
    """Reference coefficients of the projected direct and indirect effects.

    GM-1 uses the closed-form mediation functionals with Gauss-Hermite
    quadrature. GM-2 has no closed form: every excursion is simulated
    forward from shared noise on ``n_mc`` draws and the outcome's
    conditional mean is averaged, with Monte Carlo standard errors from the
    per-draw projected contributions.

    Args:
        generator: ``"gm1"`` or ``"gm2"``
        config: Estimand whose coefficients are wanted
        params: Generator parameters; defaults per generator
        n_mc: Monte Carlo size for GM-2
        seed: Master seed for GM-2
        threads: Parallel workers for GM-2 chunks
        chunk: Draws per chunk

    Returns:
        Coefficients, their Monte Carlo SEs and the per-t functionals

    Raises:
        ConfigurationError: If the generator and params do not match

    Example:
        >>> truth = true_estimands("gm1")
        >>> truth.names
        ['alpha_1', 'beta_1']
    """
    config = config or EstimandConfig()
    if generator == "gm1":
        params = params or GM1Params()
        if not isinstance(params, GM1Params):
            raise ConfigurationError("gm1 truths need GM1Params")
        theta = gm1_theta(params, gm1_quadrature(params))
        gamma = project_theta(theta, config)
        return TruthResult(
            names=config.parameter_names(),
            values=gamma.tolist(),
            se=[0.0] * gamma.size,
            theta=_theta_records(theta),
            method="closed-form",
        )
    if generator == "gm2":
        params = params or GM2Params()
        if not isinstance(params, GM2Params):
            raise ConfigurationError("gm2 truths need GM2Params")
        if n_mc < 2 or chunk < 1:
            raise ConfigurationError(f"n_mc must be at least 2, got {n_mc}")
        return _gm2_truth(params, config, n_mc, seed, threads, chunk)
    raise ConfigurationError(f"Unknown generator '{generator}'")
