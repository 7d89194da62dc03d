"""Efficient influence function terms for the mediation functionals."""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import ArrayLike, NDArray

from medexc.data.dataset import Dataset
from medexc.nuisance.base import NuisanceSet, NuisanceValues

logger = logging.getLogger(__name__)


def phi_aa(y: ArrayLike, indicator: ArrayLike, p: ArrayLike, eta: ArrayLike) -> NDArray:
    """Influence-function term for theta^{aa}.

    1(A = d^a) / p(a|H) * Y - {1(A = d^a) - p(a|H)} / p(a|H) * eta(a, H)

    Example:
        >>> phi_aa(y=3.0, indicator=0, p=0.4, eta=2.0)  # indicator zero returns eta
        2.0
    """
    y, indicator, p, eta = (np.asarray(v, dtype=float) for v in (y, indicator, p, eta))
    out = indicator / p * y - (indicator - p) / p * eta
    return out.item() if out.ndim == 0 else out


def phi_ab(
    y: ArrayLike,
    indicator_a: ArrayLike,
    indicator_b: ArrayLike,
    p_b: ArrayLike,
    q_a: ArrayLike,
    q_b: ArrayLike,
    mu_a: ArrayLike,
    nu_a: ArrayLike,
) -> NDArray:
    """Influence-function term for the cross-world functional theta^{ab}.

    1(A = d^a) q(b|H,M) / {p(b|H) q(a|H,M)} * {Y - mu(a,H,M)}
    + 1(A = d^b) / p(b|H) * {mu(a,H,M) - nu(a,H)} + nu(a,H)

    Rows with 1(A = d^a) = 0 contribute nothing to the first term, whatever
    the propensity ratio.
    """
    y, ind_a, ind_b, p_b, q_a, q_b, mu_a, nu_a = (
        np.asarray(v, dtype=float)
        for v in (y, indicator_a, indicator_b, p_b, q_a, q_b, mu_a, nu_a)
    )
    weight = np.where(ind_a > 0, ind_a * q_b / (p_b * q_a), 0.0)
    out = weight * (y - mu_a) + ind_b / p_b * (mu_a - nu_a) + nu_a
    return out.item() if out.ndim == 0 else out


@dataclass(frozen=True)
class PhiTable:
    """phi^{ab} for every participant and decision point.

    Attributes:
        values: Array (2, 2, n, T) indexed as [a, b, participant, t]
        clip_activations: Probability values moved by clipping
        weight_ratio_max: Largest q(b)/q(a) among rows with 1(A = d^a) = 1
        weight_ratio_exceedances: Rows whose ratio exceeds the threshold
    """

    values: NDArray[np.float64]
    clip_activations: int = 0
    weight_ratio_max: float = 0.0
    weight_ratio_exceedances: int = 0

    def theta_means(self) -> NDArray[np.float64]:
        """Sample means over participants, shape (T, 2, 2)."""
        return self.values.mean(axis=2).transpose(2, 0, 1)


def phi_table(
    ds: Dataset,
    nuisances: NuisanceSet | NuisanceValues,
    weight_ratio_warning: float = 100.0,
) -> PhiTable:
    """Evaluate phi^{00}, phi^{01}, phi^{10}, phi^{11} in one pass.

    Args:
        ds: Data on which to evaluate
        nuisances: Nuisance set, or its values already evaluated on ``ds``
        weight_ratio_warning: Threshold for reporting extreme cross-world
            weights

    Returns:
        Table of influence-function terms with numerical diagnostics
    """
    values = nuisances.evaluate(ds) if isinstance(nuisances, NuisanceSet) else nuisances
    y = np.broadcast_to(ds.y[:, None], (ds.n, ds.T))
    phi = np.empty((2, 2, ds.n, ds.T))
    ratio_max, exceedances = 0.0, 0
    for a in (0, 1):
        phi[a, a] = phi_aa(y, values.indicator[a], values.p[a], values.eta[a])
        b = 1 - a
        phi[a, b] = phi_ab(
            y,
            values.indicator[a],
            values.indicator[b],
            values.p[b],
            values.q[a],
            values.q[b],
            values.mu[a],
            values.nu[a],
        )
        active = values.indicator[a] > 0
        if np.any(active):
            ratio = values.q[b][active] / values.q[a][active]
            ratio_max = max(ratio_max, float(ratio.max()))
            exceedances += int(np.sum(ratio > weight_ratio_warning))
    if exceedances:
        logger.warning(
            f"{exceedances} cross-world weight ratios exceed {weight_ratio_warning:g} "
            f"(max {ratio_max:.3g})"
        )
    return PhiTable(
        values=phi,
        clip_activations=values.clip_activations,
        weight_ratio_max=ratio_max,
        weight_ratio_exceedances=exceedances,
    )
