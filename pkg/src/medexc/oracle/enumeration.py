"""Joint path laws of a discrete DGP, sampling and exact nuisances.

A path is the sequence (X_t, I_t, A_t, M_t) for t = 1..T. Joint arrays have
the axes (x, i, a, m) repeated per decision point, with value and mediator
axes indexing the supports of the DGP.
"""

import logging

import numpy as np
from numpy.typing import NDArray

from medexc.data.dataset import Dataset
from medexc.exceptions import ConfigurationError
from medexc.models.dgp import DiscreteDGP
from medexc.nuisance.base import NuisanceSet
from medexc.rng import Stream, make_rng

logger = logging.getLogger(__name__)

Excursion = tuple[int, int]


def select_excursion(array: NDArray, arm: int) -> NDArray:
    """Slice (..., i, a, m) at A = d^arm(i), giving (..., i, m).

    Ineligible points take A = 0 under both policies.
    """
    return np.stack([array[..., 0, 0, :], array[..., 1, arm, :]], axis=-2)


def step_factor(dgp: DiscreteDGP, s: int, excursion: Excursion | None = None) -> NDArray:
    """P(X, I, A, M at step s | previous A, M), shape (2, nm, nx, 2, 2, nm).

    With ``excursion = (a, b)`` treatment is set to d^a and the mediator is
    drawn from its law under d^b.
    """
    px = dgp.table("x_cpt")[s]
    pi = dgp.table("i_cpt")[s]
    pa = dgp.table("a_cpt")[s]
    pm = dgp.table("m_cpt")[s]
    p_i = np.stack([1 - pi, pi], axis=-1)
    if excursion is None:
        ineligible = np.stack([np.ones_like(pa), np.zeros_like(pa)], axis=-1)
        p_a = np.stack([ineligible, np.stack([1 - pa, pa], axis=-1)], axis=-2)
        mediator = pm
    else:
        a, b = excursion
        p_a = np.zeros((2, 2))
        p_a[0, 0] = 1.0
        p_a[1, a] = 1.0
        mediator = select_excursion(pm, b)[..., None, :]
    return px[..., None, None, None] * p_i[..., None, None] * p_a[..., None] * mediator


def joint(
    dgp: DiscreteDGP,
    steps: int | None = None,
    *,
    excursion_at: int | None = None,
    excursion: Excursion | None = None,
) -> NDArray[np.float64]:
    """Joint probability of the first ``steps`` decision points.

    Args:
        dgp: Discrete DGP
        steps: Number of decision points; defaults to T
        excursion_at: 0-based step at which ``excursion`` replaces the behavior law
        excursion: Treatment and mediator arms (a, b)

    Returns:
        Array with axes (x, i, a, m) repeated ``steps`` times
    """
    steps = dgp.T if steps is None else steps
    J = np.ones(())
    for s in range(steps):
        L = step_factor(dgp, s, excursion if s == excursion_at else None)
        J = L[0, 0] if s == 0 else J[..., None, None, None, None] * L
    return J


def outcome_mass(dgp: DiscreteDGP, steps: int) -> NDArray[np.float64]:
    """sum over later steps of P(path) E[Y | path], on the first ``steps`` axes."""
    full = joint(dgp) * dgp.table("y_mean")
    return full.reshape(dgp.step_shape * steps + (-1,)).sum(axis=-1)


def enumerate_paths(dgp: DiscreteDGP) -> tuple[Dataset, NDArray[np.float64]]:
    """Every positive-probability path as one participant, with its probability.

    The outcome of each participant is E[Y | path], so probability-weighted
    sums of estimating-function terms are exact population expectations.
    """
    J = joint(dgp)
    index = np.argwhere(J > 0)
    T = dgp.T
    x_support, m_support = np.asarray(dgp.x_support), np.asarray(dgp.m_support)
    xi, ii, ai, mi = (index[:, k::4] for k in range(4))
    ds = Dataset(
        x=x_support[xi][:, :, None],
        i=ii.astype(float),
        a=ai.astype(float),
        m=m_support[mi],
        y=dgp.table("y_mean")[tuple(index.T)],
    )
    logger.debug(f"Enumerated {ds.n} positive-probability paths over T={T}")
    return ds, J[tuple(index.T)]


def _categorical(rng: np.random.Generator, probabilities: NDArray) -> NDArray[np.int_]:
    u = rng.uniform(size=probabilities.shape[0])
    return (u[:, None] > np.cumsum(probabilities, axis=1)[:, :-1]).sum(axis=1)


def sample_dgp(
    dgp: DiscreteDGP, n: int, seed: int, *, stream_keys: tuple[int, ...] = ()
) -> Dataset:
    """Draw n trajectories; Y is E[Y | path] plus N(0, y_sd^2) noise.

    Example:
        >>> ds = sample_dgp(dgp, 1000, seed=5)
        >>> ds.T == dgp.T
        True
    """
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    rng = make_rng(seed, Stream.DGP, *stream_keys)
    x_cpt, i_cpt = dgp.table("x_cpt"), dgp.table("i_cpt")
    a_cpt, m_cpt = dgp.table("a_cpt"), dgp.table("m_cpt")
    pa = np.zeros(n, dtype=int)
    pm = np.zeros(n, dtype=int)
    path = []
    for s in range(dgp.T):
        xi = _categorical(rng, x_cpt[s, pa, pm])
        ii = (rng.uniform(size=n) < i_cpt[s, pa, pm, xi]).astype(int)
        ai = ii * (rng.uniform(size=n) < a_cpt[s, pa, pm, xi])
        mi = _categorical(rng, m_cpt[s, pa, pm, xi, ii, ai])
        path.append((xi, ii, ai, mi))
        pa, pm = ai, mi
    flat = [column for step in path for column in step]
    y = dgp.table("y_mean")[tuple(flat)] + dgp.y_sd * rng.standard_normal(n)
    x_support, m_support = np.asarray(dgp.x_support), np.asarray(dgp.m_support)
    return Dataset(
        x=np.stack([x_support[step[0]] for step in path], axis=1)[:, :, None],
        i=np.stack([step[1] for step in path], axis=1).astype(float),
        a=np.stack([step[2] for step in path], axis=1).astype(float),
        m=np.stack([m_support[step[3]] for step in path], axis=1),
        y=y,
    )


def _support_index(values: NDArray, support: list[float], name: str) -> NDArray[np.int_]:
    gap = np.abs(values[..., None] - np.asarray(support))
    if np.any(gap.min(axis=-1) > 1e-9):
        raise ConfigurationError(f"{name} value outside the DGP support")
    return gap.argmin(axis=-1)


def dgp_nuisances(dgp: DiscreteDGP, clip: float = 1e-9) -> NuisanceSet:
    """Exact p, q, eta, mu and nu of a discrete DGP.

    Outcome regressions come from the enumerated joint law;
    mu at a counterfactual (A, M) of zero probability is set to 0.

    Raises:
        ConfigurationError: On evaluation, if the dataset leaves the DGP
            supports or has a different horizon
    """
    a_cpt, m_cpt = dgp.table("a_cpt"), dgp.table("m_cpt")
    mean_outcome = []
    for s in range(dgp.T):
        mass = joint(dgp, s + 1)
        G = outcome_mass(dgp, s + 1)
        mean_outcome.append(np.divide(G, mass, out=np.zeros_like(G), where=mass > 0))

    def indices(ds: Dataset) -> tuple[NDArray, ...]:
        if ds.T != dgp.T or ds.d != 1:
            raise ConfigurationError(f"DGP nuisances expect T={dgp.T} and one covariate")
        xi = _support_index(ds.x[:, :, 0], dgp.x_support, "covariate")
        mi = _support_index(ds.m, dgp.m_support, "mediator")
        ii, ai = ds.i.astype(int), ds.a.astype(int)
        pa = np.hstack([np.zeros((ds.n, 1), dtype=int), ai[:, :-1]])
        pm = np.hstack([np.zeros((ds.n, 1), dtype=int), mi[:, :-1]])
        return xi, ii, ai, mi, pa, pm

    def p(ds: Dataset) -> NDArray[np.float64]:
        xi, _, _, _, pa, pm = indices(ds)
        return np.stack([a_cpt[s, pa[:, s], pm[:, s], xi[:, s]] for s in range(ds.T)], axis=1)

    def q(ds: Dataset) -> NDArray[np.float64]:
        xi, _, _, mi, pa, pm = indices(ds)
        out = np.empty((ds.n, ds.T))
        for s in range(ds.T):
            prev = (s, pa[:, s], pm[:, s], xi[:, s])
            treated = a_cpt[prev] * m_cpt[(*prev, 1, 1, mi[:, s])]
            untreated = (1 - a_cpt[prev]) * m_cpt[(*prev, 1, 0, mi[:, s])]
            out[:, s] = np.divide(
                treated,
                treated + untreated,
                out=np.zeros(ds.n),
                where=treated + untreated > 0,
            )
        return out

    def regression(ds: Dataset, s: int, arm: int, idx: tuple) -> NDArray:
        """mu(H_s, d^arm, m) for every mediator value m, shape (n, nm)."""
        xi, ii, ai, mi, _, _ = idx
        prefix = [col[:, r] for r in range(s) for col in (xi, ii, ai, mi)]
        return mean_outcome[s][(*prefix, xi[:, s], ii[:, s], arm * ii[:, s])]

    def mediator_law(s: int, arm: int, idx: tuple) -> NDArray:
        xi, ii, _, _, pa, pm = idx
        return m_cpt[s, pa[:, s], pm[:, s], xi[:, s], ii[:, s], arm * ii[:, s]]

    def mu(ds: Dataset) -> NDArray[np.float64]:
        idx = indices(ds)
        mi = idx[3]
        out = np.empty((2, ds.n, ds.T))
        for s in range(ds.T):
            for arm in (0, 1):
                out[arm, :, s] = np.take_along_axis(
                    regression(ds, s, arm, idx), mi[:, s, None], axis=1
                )[:, 0]
        return out

    def averaged(ds: Dataset, swap: bool) -> NDArray[np.float64]:
        idx = indices(ds)
        out = np.empty((2, ds.n, ds.T))
        for s in range(ds.T):
            for arm in (0, 1):
                law = mediator_law(s, 1 - arm if swap else arm, idx)
                out[arm, :, s] = (regression(ds, s, arm, idx) * law).sum(axis=1)
        return out

    def eta(ds: Dataset) -> NDArray[np.float64]:
        return averaged(ds, swap=False)

    def nu(ds: Dataset) -> NDArray[np.float64]:
        return averaged(ds, swap=True)

    return NuisanceSet(p=p, q=q, eta=eta, mu=mu, nu=nu, provenance="exact-truth", clip=clip)


def random_dgp(
    rng: np.random.Generator,
    T: int = 2,
    nx: int = 2,
    nm: int = 2,
    floor: float = 0.05,
) -> DiscreteDGP:
    """Random DGP whose probabilities all stay at least ``floor`` from 0 and 1.

    Categorical rows are floor + (1 - k floor) Dirichlet(1, ..., 1);
    outcome means are standard normal.
    """
    if not 0 <= floor < 1 / max(nx, nm, 2):
        raise ConfigurationError(f"floor {floor} leaves no room for a probability row")

    def rows(shape: tuple[int, ...], k: int) -> NDArray:
        return floor + (1 - k * floor) * rng.dirichlet(np.ones(k), size=shape)

    prev = (T, 2, nm)
    return DiscreteDGP.from_arrays(
        x_support=list(range(nx)),
        m_support=list(range(nm)),
        x_cpt=rows(prev, nx),
        i_cpt=rows((*prev, nx), 2)[..., 1],
        a_cpt=rows((*prev, nx), 2)[..., 1],
        m_cpt=rows((*prev, nx, 2, 2), nm),
        y_mean=rng.standard_normal((nx, 2, 2, nm) * T),
    )
