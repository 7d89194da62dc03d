"""First generative model: always eligible, binary mediator, closed-form nuisances.

At every decision point X_t ~ N(0, sigma_x^2), I_t = 1 and (A_t, M_t) is
drawn jointly with P(A_t = a, M_t = m | X_t) proportional to s_am, where
s_00 = 1, s_10 = exp(k1 + h1), s_01 = exp(k2 + h2) and
s_11 = exp(k0 + k1 + k2 + h1 + h2). The outcome is normal with mean
sum_t c_t (X_t + M_t + A_t + A_t M_t).
"""

import logging

import numpy as np
from numpy.polynomial.hermite_e import hermegauss
from numpy.typing import NDArray
from scipy.special import expit, softmax
from scipy.stats import beta

from medexc.data.dataset import Dataset
from medexc.exceptions import ConfigurationError
from medexc.models.dgp import DiscreteDGP
from medexc.models.simulation import GM1Params
from medexc.nuisance.base import NuisanceSet
from medexc.rng import Stream, make_rng

logger = logging.getLogger(__name__)

Quadrature = tuple[NDArray[np.float64], NDArray[np.float64]]


def gm1_coefficients(params: GM1Params) -> NDArray[np.float64]:
    """Outcome coefficients c_t (= xi_t = rho_t = lambda_t = tau_t) for t = 1..T."""
    steps = np.arange(params.T, dtype=float)
    if params.coef_scale == "horizon":
        steps = steps / params.T
    return params.coef_base + params.coef_slope * steps


def gm1_quadrature(params: GM1Params, nodes: int | None = None) -> Quadrature:
    """Gauss-Hermite nodes and probability weights for X_t ~ N(0, sigma_x^2)."""
    x, w = hermegauss(nodes or params.quadrature_nodes)
    return params.sigma_x * x, w / np.sqrt(2 * np.pi)


def gm1_h(params: GM1Params, t: NDArray, x: NDArray) -> tuple[NDArray, NDArray]:
    """h1 and h2 from Beta(2,5) and Beta(5,2) densities of t/T and expit(x)."""
    u, v = np.asarray(t, dtype=float) / params.T, expit(x)
    h1 = (beta.pdf(u, 2, 5) + beta.pdf(v, 2, 5)) / 2
    h2 = (beta.pdf(u, 5, 2) + beta.pdf(v, 5, 2)) / 2
    return h1, h2


def gm1_cell_probabilities(params: GM1Params, t: NDArray, x: NDArray) -> NDArray:
    """P(A_t = a, M_t = m | X_t) stacked last as (00, 10, 01, 11)."""
    h1, h2 = gm1_h(params, t, x)
    k0, k1, k2 = params.kappa0, params.kappa1, params.kappa2
    logits = np.stack(
        np.broadcast_arrays(0.0, k1 + h1, k2 + h2, k0 + k1 + k2 + h1 + h2), axis=-1
    )
    return softmax(logits, axis=-1)


def gm1_mediator_probability(params: GM1Params, t: NDArray, x: NDArray, a: NDArray) -> NDArray:
    """P(M_t = 1 | A_t = a, X_t) = expit(k0 a + k2 + h2)."""
    _, h2 = gm1_h(params, t, x)
    return expit(params.kappa0 * np.asarray(a, dtype=float) + params.kappa2 + h2)


def gm1_generate(
    n: int,
    seed: int,
    params: GM1Params | None = None,
    *,
    stream_keys: tuple[int, ...] = (),
) -> Dataset:
    """Draw n trajectories from the first generative model.

    Args:
        n: Number of participants
        seed: Master seed
        params: Model parameters; defaults to :class:`GM1Params`
        stream_keys: Extra keys selecting an independent data stream

    Returns:
        Dataset with one covariate and I_t = 1 everywhere

    Example:
        >>> ds = gm1_generate(100, seed=7)
        >>> ds.n, ds.T
        (100, 5)
    """
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    params = params or GM1Params()
    rng = make_rng(seed, Stream.DATA, *stream_keys)
    T = params.T
    t = np.arange(1, T + 1)
    x = rng.normal(0.0, params.sigma_x, size=(n, T))
    cells = gm1_cell_probabilities(params, t[None, :], x)
    u = rng.uniform(size=(n, T))
    cell = (u[..., None] > np.cumsum(cells, axis=-1)[..., :-1]).sum(axis=-1)
    a = (cell % 2).astype(float)
    m = (cell // 2).astype(float)
    c = gm1_coefficients(params)
    y = (c * (x + m + a + a * m)).sum(axis=1) + params.sigma_y * rng.standard_normal(n)
    return Dataset(x=x[:, :, None], i=np.ones((n, T)), a=a, m=m, y=y)


def gm1_deltas(params: GM1Params, quadrature: Quadrature | None = None) -> NDArray:
    """delta_t = E(c_t (X_t + M_t + A_t + A_t M_t)) under the behavior law."""
    nodes, weights = quadrature or gm1_quadrature(params)
    t = np.arange(1, params.T + 1)[:, None]
    cells = gm1_cell_probabilities(params, t, nodes[None, :])
    per_node = nodes[None, :] + cells[..., 1] + cells[..., 2] + 3 * cells[..., 3]
    return gm1_coefficients(params) * (per_node @ weights)


def gm1_theta(params: GM1Params | None = None, quadrature: Quadrature | None = None) -> NDArray:
    """Closed-form theta_t^{ab}, shape (T, 2, 2) indexed [t, a, b].

    theta_t^{ab} = sum_{s != t} delta_s + c_t {E X + a + (1 + a) E P(M = 1 | A = b, X)}.
    """
    params = params or GM1Params()
    nodes, weights = quadrature or gm1_quadrature(params)
    deltas = gm1_deltas(params, (nodes, weights))
    c = gm1_coefficients(params)
    t = np.arange(1, params.T + 1)[:, None]
    mean_x = float(nodes @ weights)
    theta = np.empty((params.T, 2, 2))
    for b in (0, 1):
        mediator = gm1_mediator_probability(params, t, nodes[None, :], b) @ weights
        for a in (0, 1):
            theta[:, a, b] = (
                deltas.sum() - deltas + c * (mean_x + a + (1 + a) * mediator)
            )
    return theta


def gm1_true_nuisances(
    params: GM1Params | None = None,
    quadrature: Quadrature | None = None,
    clip: float = 0.01,
) -> NuisanceSet:
    """Exact p, q, eta, mu and nu of the first generative model.

    mu_s(a) = sum_{t<s} c_t (X_t + M_t + A_t + A_t M_t)
    + c_s (X_s + M_s + a + a M_s) + sum_{t>s} delta_t; eta and nu replace
    M_s by P(M_s = 1 | A_s = a, X_s) and P(M_s = 1 | A_s = 1 - a, X_s).
    """
    params = params or GM1Params()
    deltas = gm1_deltas(params, quadrature)
    tail = deltas[::-1].cumsum()[::-1] - deltas
    c = gm1_coefficients(params)

    def grid(ds: Dataset) -> tuple[NDArray, NDArray]:
        if ds.T != params.T:
            raise ConfigurationError(f"GM-1 nuisances expect T={params.T}, got {ds.T}")
        return np.arange(1, ds.T + 1)[None, :], ds.x[:, :, 0]

    def before(ds: Dataset) -> NDArray:
        terms = c * (ds.x[:, :, 0] + ds.m + ds.a + ds.a * ds.m)
        return np.cumsum(terms, axis=1) - terms

    def p(ds: Dataset) -> NDArray:
        t, x = grid(ds)
        cells = gm1_cell_probabilities(params, t, x)
        return cells[..., 1] + cells[..., 3]

    def q(ds: Dataset) -> NDArray:
        t, x = grid(ds)
        h1, _ = gm1_h(params, t, x)
        return expit(params.kappa0 * ds.m + params.kappa1 + h1)

    def mu(ds: Dataset) -> NDArray:
        t, x = grid(ds)
        base = before(ds) + tail
        return np.stack(
            [base + c * (x + ds.m + arm + arm * ds.m) for arm in (0, 1)]
        )

    def averaged(ds: Dataset, mediator_arm: int, arm: int) -> NDArray:
        t, x = grid(ds)
        mediator = gm1_mediator_probability(params, t, x, mediator_arm)
        return before(ds) + tail + c * (x + arm + (1 + arm) * mediator)

    def eta(ds: Dataset) -> NDArray:
        return np.stack([averaged(ds, arm, arm) for arm in (0, 1)])

    def nu(ds: Dataset) -> NDArray:
        return np.stack([averaged(ds, 1 - arm, arm) for arm in (0, 1)])

    return NuisanceSet(p=p, q=q, eta=eta, mu=mu, nu=nu, provenance="exact-truth", clip=clip)


def gm1_discrete_dgp(params: GM1Params | None = None, nodes: int = 3) -> DiscreteDGP:
    """The first generative model with X_t on a Gauss-Hermite grid.

    The covariate takes the quadrature nodes with the quadrature weights as
    probabilities, so enumeration over this DGP and :func:`gm1_theta` with
    the same quadrature describe the same law.

    Raises:
        ConfigurationError: If T > 3 or nodes > 4
    """
    params = params or GM1Params(T=3)
    if params.T > 3 or nodes > 4:
        raise ConfigurationError("Enumerable GM-1 needs T <= 3 and at most 4 nodes")
    x_nodes, weights = gm1_quadrature(params, nodes)
    T, nx = params.T, nodes
    t = np.arange(1, T + 1)[:, None]
    cells = gm1_cell_probabilities(params, t, x_nodes[None, :])
    propensity = cells[..., 1] + cells[..., 3]

    x_cpt = np.broadcast_to(weights, (T, 2, 2, nx))
    i_cpt = np.ones((T, 2, 2, nx))
    a_cpt = np.broadcast_to(propensity[:, None, None, :], (T, 2, 2, nx))
    m1 = np.stack(
        [gm1_mediator_probability(params, t, x_nodes[None, :], a) for a in (0, 1)],
        axis=-1,
    )
    m_cpt = np.empty((T, 2, 2, nx, 2, 2, 2))
    m_cpt[..., 1] = m1[:, None, None, :, None, :]
    m_cpt[..., 0] = 1 - m_cpt[..., 1]

    c = gm1_coefficients(params)
    x_axis = x_nodes[:, None, None, None]
    a_axis = np.arange(2.0)[None, None, :, None]
    m_axis = np.arange(2.0)[None, None, None, :]
    y_mean = np.zeros((nx, 2, 2, 2) * T)
    for s in range(T):
        step = np.broadcast_to(
            c[s] * (x_axis + m_axis + a_axis + a_axis * m_axis), (nx, 2, 2, 2)
        )
        shape = [1] * (4 * T)
        shape[4 * s : 4 * s + 4] = step.shape
        y_mean = y_mean + step.reshape(shape)
    return DiscreteDGP.from_arrays(
        x_support=x_nodes.tolist(),
        m_support=[0.0, 1.0],
        x_cpt=x_cpt,
        i_cpt=i_cpt,
        a_cpt=a_cpt,
        m_cpt=m_cpt,
        y_mean=y_mean,
        y_sd=params.sigma_y,
    )
