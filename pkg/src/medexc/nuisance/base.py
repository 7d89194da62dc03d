"""Nuisance function containers and the excursion-policy bookkeeping."""

import logging
from collections.abc import Callable
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Literal

import numpy as np
from numpy.typing import ArrayLike, NDArray

if TYPE_CHECKING:
    from medexc.data.dataset import Dataset

logger = logging.getLogger(__name__)

Provenance = Literal["fitted", "known-propensity", "exact-truth", "perturbed", "mixed"]

# P(A_t = 1 | H_t, I_t = 1), or with M_t appended for the mediator-conditional
# propensity; returns an (n, T) array evaluated at the observed history.
PropensityFn = Callable[["Dataset"], NDArray[np.float64]]
# Outcome regression per arm; returns (2, n, T) with index 0 for arm 0.
ArmFn = Callable[["Dataset"], NDArray[np.float64]]


def _scalar_or_array(value: NDArray) -> NDArray | float:
    return value.item() if value.ndim == 0 else value


def arm_indicator(i: ArrayLike, a: ArrayLike, arm: int) -> NDArray | int:
    """1(A_t = d_t^arm(H_t)) with d^1(H) = I and d^0(H) = 0.

    Example:
        >>> arm_indicator(i=0, a=0, arm=1)
        1
    """
    i, a = np.asarray(i, dtype=float), np.asarray(a, dtype=float)
    out = (a == arm * i).astype(int)
    return out.item() if out.ndim == 0 else out


def excursion_propensity(pi: ArrayLike, i: ArrayLike, arm: int) -> NDArray | float:
    """P(A_t = d_t^arm | H_t) from pi = P(A_t = 1 | H_t, I_t = 1).

    Ineligible points follow both policies with certainty.

    Example:
        >>> excursion_propensity(0.6, i=0, arm=1)
        1.0
    """
    pi, i = np.asarray(pi, dtype=float), np.asarray(i, dtype=float)
    value = i * pi + (1 - i) if arm == 1 else 1 - i * pi
    return _scalar_or_array(np.asarray(value, dtype=float))


def clip_probability(v: ArrayLike, clip: float = 0.01) -> NDArray | float:
    """Clamp probabilities into [clip, 1 - clip].

    Structural certainties from ineligible points are composed after
    clipping (see :func:`excursion_propensity`) and are never clipped.
    """
    return _scalar_or_array(np.clip(np.asarray(v, dtype=float), clip, 1 - clip))


def zero_outcome(ds: "Dataset") -> NDArray[np.float64]:
    """Outcome regression that is identically zero."""
    return np.zeros((2, ds.n, ds.T))


def constant_outcome(value: float) -> ArmFn:
    """Outcome regression equal to ``value`` for both arms."""

    def component(ds: "Dataset") -> NDArray[np.float64]:
        return np.full((2, ds.n, ds.T), float(value))

    return component


def constant_propensity(value: float) -> PropensityFn:
    """Propensity equal to ``value`` at every eligible point."""

    def component(ds: "Dataset") -> NDArray[np.float64]:
        return np.full((ds.n, ds.T), float(value))

    return component


@dataclass(frozen=True)
class NuisanceValues:
    """The five nuisance functions evaluated on a dataset.

    Arrays have shape (2, n, T) with the first axis indexing the arm;
    ``p`` and ``q`` already include the ineligibility composition.
    """

    indicator: NDArray[np.float64]
    p: NDArray[np.float64]
    q: NDArray[np.float64]
    eta: NDArray[np.float64]
    mu: NDArray[np.float64]
    nu: NDArray[np.float64]
    clip_activations: int = 0


@dataclass(frozen=True)
class NuisanceSet:
    """Evaluable nuisance functions p, q, eta, mu, nu.

    Components are functions of a :class:`~medexc.data.Dataset`, so a set fit
    on one sample can be evaluated on another (cross-fitting) and exact
    truths may depend on the whole observed history.

    Attributes:
        p: Treatment propensity among eligible points, (n, T)
        q: Treatment propensity given the current mediator, (n, T)
        eta: E(Y | A_t = d^a, H_t), (2, n, T)
        mu: E(Y | A_t = d^a, H_t, M_t), (2, n, T)
        nu: E{mu(a, H_t, M_t) | A_t = d^(1-a), H_t}, (2, n, T)
        provenance: How the functions were obtained
        clip: Probability clip applied on evaluation
    """

    p: PropensityFn
    q: PropensityFn
    eta: ArmFn
    mu: ArmFn
    nu: ArmFn
    provenance: Provenance
    clip: float = 0.01

    def replace(self, provenance: Provenance = "mixed", **components) -> "NuisanceSet":
        """Swap individual components, e.g. to freeze some at wrong values."""
        return replace(self, provenance=provenance, **components)

    def evaluate(self, ds: "Dataset") -> NuisanceValues:
        """Evaluate every component on ``ds``.

        Raises:
            ValueError: If a component returns an array of the wrong shape
        """
        n, T = ds.n, ds.T
        eligible = ds.i == 1
        probabilities = {}
        activations = 0
        for name in ("p", "q"):
            raw = np.asarray(getattr(self, name)(ds), dtype=float)
            if raw.shape != (n, T):
                raise ValueError(f"{name} returned shape {raw.shape}, expected {(n, T)}")
            clipped = clip_probability(raw, self.clip)
            moved = int(np.sum(eligible & (clipped != raw)))
            if moved:
                logger.warning(
                    f"Clipped {moved} of {int(eligible.sum())} eligible {name} values "
                    f"to [{self.clip}, {1 - self.clip}]"
                )
            activations += moved
            probabilities[name] = np.stack(
                [excursion_propensity(clipped, ds.i, arm) for arm in (0, 1)]
            )
        outcomes = {}
        for name in ("eta", "mu", "nu"):
            value = np.asarray(getattr(self, name)(ds), dtype=float)
            if value.shape != (2, n, T):
                raise ValueError(
                    f"{name} returned shape {value.shape}, expected {(2, n, T)}"
                )
            outcomes[name] = value
        indicator = np.stack([arm_indicator(ds.i, ds.a, arm) for arm in (0, 1)]).astype(
            float
        )
        return NuisanceValues(
            indicator=indicator,
            p=probabilities["p"],
            q=probabilities["q"],
            clip_activations=activations,
            **outcomes,
        )
