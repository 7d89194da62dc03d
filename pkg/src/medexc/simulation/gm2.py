"""Second generative model: time-varying eligibility and a continuous mediator.

Variables are generated sequentially from zero initial values:

- X_t ~ N(0.3 X_{t-1} + 0.2 A_{t-1} + 0.2 M_{t-1}, 1)
- I_t ~ Bern(expit(1.5 - 0.3 A_{t-1} - 0.3 M_{t-1} + 0.3 X_t))
- A_t ~ Bern(I_t expit(0.2 A_{t-1} + 0.2 h3(t, M_{t-1}) + 0.3 h3(t, X_t)))
- M_t ~ N(0.4 A_{t-1} + 0.4 h3(t, M_{t-1}) + 0.3 h3(t, X_t) + 0.6 A_t, 1)
- Y ~ N(sum_t 0.3 h3(t, X_t) + 0.4 h3(t, M_t) + 0.2 A_t + 0.1 A_t h3(t, M_t), 1)

with h3(t, z) = tanh(3 (2t - T) / T) + sin(z).
"""

import logging
from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray
from scipy.special import expit

from medexc.data.dataset import Dataset
from medexc.exceptions import ConfigurationError
from medexc.models.simulation import GM2Params
from medexc.nuisance.base import PropensityFn
from medexc.rng import Stream, make_rng

logger = logging.getLogger(__name__)


def gm2_h3(t: NDArray | int, z: NDArray | float, T: int) -> NDArray:
    """h3(t, z) = tanh(3 (2t - T) / T) + sin(z)."""
    return np.tanh(3 * (2 * np.asarray(t, dtype=float) - T) / T) + np.sin(z)


@dataclass
class _Noise:
    """Standardized draws shared by the factual and counterfactual paths."""

    x: NDArray
    i: NDArray
    a: NDArray
    m: NDArray

    @classmethod
    def draw(cls, rng: np.random.Generator, n: int, T: int) -> "_Noise":
        return cls(
            x=rng.standard_normal((T, n)),
            i=rng.uniform(size=(T, n)),
            a=rng.uniform(size=(T, n)),
            m=rng.standard_normal((T, n)),
        )


def _covariate(params: GM2Params, x_prev, a_prev, m_prev, noise):
    return (
        params.x_x_lag * x_prev
        + params.x_a_lag * a_prev
        + params.x_m_lag * m_prev
        + params.x_sd * noise
    )


def _eligibility(params: GM2Params, a_prev, m_prev, x, uniform):
    logit = (
        params.i_intercept + params.i_a_lag * a_prev + params.i_m_lag * m_prev + params.i_x * x
    )
    return (uniform < expit(logit)).astype(float)


def _propensity(params: GM2Params, t, a_prev, m_prev, x):
    return expit(
        params.a_a_lag * a_prev
        + params.a_m_lag * gm2_h3(t, m_prev, params.T)
        + params.a_x * gm2_h3(t, x, params.T)
    )


def _mediator(params: GM2Params, t, a_prev, m_prev, x, a, noise):
    return (
        params.m_a_lag * a_prev
        + params.m_m_lag * gm2_h3(t, m_prev, params.T)
        + params.m_x * gm2_h3(t, x, params.T)
        + params.m_a * a
        + params.m_sd * noise
    )


def _outcome_term(params: GM2Params, t, x, a, m):
    hm = gm2_h3(t, m, params.T)
    return (
        params.y_x * gm2_h3(t, x, params.T)
        + params.y_m * hm
        + params.y_a * a
        + params.y_am * a * hm
    )


def gm2_generate(
    n: int,
    seed: int,
    params: GM2Params | None = None,
    *,
    stream_keys: tuple[int, ...] = (),
) -> Dataset:
    """Draw n trajectories from the second generative model.

    Args:
        n: Number of participants
        seed: Master seed
        params: Model parameters; defaults to :class:`GM2Params`
        stream_keys: Extra keys selecting an independent data stream

    Returns:
        Dataset with one covariate; A_t = 0 wherever I_t = 0

    Example:
        >>> ds = gm2_generate(50, seed=1)
        >>> ds.n, ds.T
        (50, 30)
    """
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    params = params or GM2Params()
    T = params.T
    rng = make_rng(seed, Stream.DATA, *stream_keys)
    noise = _Noise.draw(rng, n, T)
    x, i, a, m = (np.zeros((T, n)) for _ in range(4))
    y = np.zeros(n)
    x_prev = a_prev = m_prev = np.zeros(n)
    for s in range(T):
        t = s + 1
        x[s] = _covariate(params, x_prev, a_prev, m_prev, noise.x[s])
        i[s] = _eligibility(params, a_prev, m_prev, x[s], noise.i[s])
        pi = _propensity(params, t, a_prev, m_prev, x[s])
        a[s] = i[s] * (noise.a[s] < pi)
        m[s] = _mediator(params, t, a_prev, m_prev, x[s], a[s], noise.m[s])
        y += _outcome_term(params, t, x[s], a[s], m[s])
        x_prev, a_prev, m_prev = x[s], a[s], m[s]
    y += params.y_sd * rng.standard_normal(n)
    return Dataset(x=x.T[:, :, None], i=i.T, a=a.T, m=m.T, y=y)


def gm2_true_propensity(params: GM2Params | None = None) -> PropensityFn:
    """Known P(A_t = 1 | H_t, I_t = 1) of the second generative model."""
    params = params or GM2Params()

    def propensity(ds: Dataset) -> NDArray[np.float64]:
        if ds.T != params.T:
            raise ConfigurationError(f"GM-2 propensity expects T={params.T}, got {ds.T}")
        t = np.arange(1, ds.T + 1)[None, :]
        return _propensity(params, t, ds.lagged("a"), ds.lagged("m"), ds.x[:, :, 0])

    return propensity


def gm2_branch_outcomes(
    params: GM2Params, n: int, rng: np.random.Generator
) -> NDArray[np.float64]:
    """Conditional mean outcomes under every excursion, shape (T, 2, 2, n).

    Entry [t, a, b] follows the behavior policy except that A_t is set to
    d^a = a I_t while M_t is drawn as if A_t were d^b = b I_t; later
    variables respond to A_t = d^a and the realized M_t. All branches share
    the factual noise, and the outcome noise is integrated out.
    """
    T = params.T
    noise = _Noise.draw(rng, n, T)
    x, i, a, m = (np.zeros((T, n)) for _ in range(4))
    terms = np.zeros((T, n))
    x_prev = a_prev = m_prev = np.zeros(n)
    for s in range(T):
        t = s + 1
        x[s] = _covariate(params, x_prev, a_prev, m_prev, noise.x[s])
        i[s] = _eligibility(params, a_prev, m_prev, x[s], noise.i[s])
        a[s] = i[s] * (noise.a[s] < _propensity(params, t, a_prev, m_prev, x[s]))
        m[s] = _mediator(params, t, a_prev, m_prev, x[s], a[s], noise.m[s])
        terms[s] = _outcome_term(params, t, x[s], a[s], m[s])
        x_prev, a_prev, m_prev = x[s], a[s], m[s]
    before = np.cumsum(terms, axis=0) - terms

    out = np.empty((T, 2, 2, n))
    zero = np.zeros(n)
    for s in range(T):
        xs, i_s = x[s], i[s]
        a_prev = a[s - 1] if s else zero
        m_prev = m[s - 1] if s else zero
        for arm_a in (0, 1):
            for arm_b in (0, 1):
                a_t = arm_a * i_s
                m_t = _mediator(params, s + 1, a_prev, m_prev, xs, arm_b * i_s, noise.m[s])
                total = before[s] + _outcome_term(params, s + 1, xs, a_t, m_t)
                xp, ap, mp = xs, a_t, m_t
                for r in range(s + 1, T):
                    t = r + 1
                    xr = _covariate(params, xp, ap, mp, noise.x[r])
                    ir = _eligibility(params, ap, mp, xr, noise.i[r])
                    ar = ir * (noise.a[r] < _propensity(params, t, ap, mp, xr))
                    mr = _mediator(params, t, ap, mp, xr, ar, noise.m[r])
                    total = total + _outcome_term(params, t, xr, ar, mr)
                    xp, ap, mp = xr, ar, mr
                out[s, arm_a, arm_b] = total
    return out
