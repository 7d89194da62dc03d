"""Stage-one fitting of the nuisance set from pooled working models."""

import logging
from typing import Literal

import numpy as np
from numpy.typing import NDArray

from medexc.config import MedexcConfig
from medexc.data.dataset import Dataset
from medexc.exceptions import ConfigurationError, StratumError
from medexc.models.estimand import HistoryFeatureSpec, NuisanceSpec
from medexc.nuisance.base import (
    ArmFn,
    NuisanceSet,
    PropensityFn,
    arm_indicator,
    zero_outcome,
)
from medexc.nuisance.design import HistoryDesign
from medexc.nuisance.regression import fit_linear, fit_logistic

logger = logging.getLogger(__name__)

Mode = Literal["fitted", "known-propensity", "exact-truth"]


def _require_rows(stratum: str, rows: NDArray[np.bool_], columns: int) -> None:
    size = int(rows.sum())
    if size < columns:
        raise StratumError(stratum, size, columns)


def _fit_propensity(
    ds: Dataset,
    spec: HistoryFeatureSpec,
    with_mediator: bool,
    stratum: str,
    settings: MedexcConfig,
) -> PropensityFn:
    eligible = ds.i == 1
    design = HistoryDesign(spec, with_mediator=with_mediator).fit(ds, eligible)
    rows = eligible.reshape(-1)
    _require_rows(stratum, rows, design.n_columns)
    fit = fit_logistic(
        design.matrix(ds)[rows],
        ds.a.reshape(-1)[rows],
        ridge=settings.ridge if spec.ridge is None else spec.ridge,
        max_iter=settings.max_iter,
        tol=settings.tolerance,
    )
    logger.debug(
        f"{stratum}: {int(rows.sum())} rows, {design.n_columns} columns, "
        f"{fit.iterations} iterations"
    )

    def component(new: Dataset) -> NDArray[np.float64]:
        return fit.predict(design.matrix(new)).reshape(new.n, new.T)

    return component


def _fit_by_arm(
    ds: Dataset,
    spec: HistoryFeatureSpec,
    with_mediator: bool,
    response: NDArray[np.float64],
    strata: list[NDArray[np.bool_]],
    names: list[str],
    settings: MedexcConfig,
) -> ArmFn:
    """Least squares per stratum; ``strata[k]`` selects the rows named ``names[k]``."""
    fits = []
    for stratum, name in zip(strata, names, strict=True):
        mixed = bool(np.any(ds.i[stratum] == 0) and np.any(ds.i[stratum] == 1))
        design = HistoryDesign(spec, with_mediator=with_mediator, eligibility=mixed)
        design.fit(ds, stratum)
        rows = stratum.reshape(-1)
        _require_rows(name, rows, design.n_columns)
        fit = fit_linear(
            design.matrix(ds)[rows],
            response.reshape(-1)[rows],
            ridge=settings.ridge if spec.ridge is None else spec.ridge,
        )
        logger.debug(f"{name}: {int(rows.sum())} rows, {design.n_columns} columns")
        fits.append((design, fit))

    def component(new: Dataset) -> NDArray[np.float64]:
        return np.stack(
            [fit.predict(design.matrix(new)).reshape(new.n, new.T) for design, fit in fits]
        )

    return component


def fit_nuisance_set(
    ds: Dataset,
    spec: NuisanceSpec | None = None,
    *,
    mode: Mode | None = None,
    known_propensity: PropensityFn | None = None,
    truth: NuisanceSet | None = None,
    settings: MedexcConfig | None = None,
) -> NuisanceSet:
    """Fit p, q, eta, mu and nu by pooled working models (stage one).

    Propensity models are logistic regressions of A_t on history features
    among eligible rows; outcome models are least-squares fits stratified by
    1(A_t = d_t^a). nu is the regression of the pseudo-outcome
    mu_hat(a, H_t, M_t) on history features among rows following the other
    arm.

    Args:
        ds: Training data
        spec: Working models; defaults to :class:`NuisanceSpec` defaults
        mode: ``"fitted"``, ``"known-propensity"`` or ``"exact-truth"``;
            defaults to the mode implied by ``spec``
        known_propensity: P(A_t = 1 | H_t, I_t = 1) for known-propensity mode
        truth: Externally supplied functions for exact-truth mode
        settings: Ridge, clip and IRLS settings

    Returns:
        Immutable nuisance set evaluable on any dataset with the same layout

    Raises:
        ConfigurationError: If the mode's inputs are missing
        StratumError: If a fitting stratum has fewer rows than columns
        FitError: If a working-model fit fails

    Example:
        >>> spec = NuisanceSpec(p="known", eta="zero", nu="zero")
        >>> ns = fit_nuisance_set(ds, spec, known_propensity=gm2_true_propensity())
        >>> ns.provenance
        'known-propensity'
    """
    spec = spec or NuisanceSpec()
    settings = settings or MedexcConfig()
    mode = mode or spec.mode

    if mode == "exact-truth":
        if truth is None:
            raise ConfigurationError("exact-truth mode needs the true nuisance set")
        return truth.replace(provenance="exact-truth")

    clip = next(
        (s.clip for s in (spec.p, spec.q) if isinstance(s, HistoryFeatureSpec) and s.clip),
        settings.clip,
    )
    logger.info(f"Fitting nuisance set ({mode}) on n={ds.n}, T={ds.T}")

    if mode == "known-propensity":
        if known_propensity is None:
            raise ConfigurationError("known-propensity mode needs a propensity function")
        p = known_propensity
    else:
        if not isinstance(spec.p, HistoryFeatureSpec):
            raise ConfigurationError("fitted mode needs a propensity working model")
        p = _fit_propensity(ds, spec.p, False, "propensity (eligible rows)", settings)
    q = _fit_propensity(ds, spec.q, True, "mediator propensity (eligible rows)", settings)

    y = np.broadcast_to(ds.y[:, None], (ds.n, ds.T))
    follows = [arm_indicator(ds.i, ds.a, arm).astype(bool) for arm in (0, 1)]

    eta: ArmFn = zero_outcome
    if isinstance(spec.eta, HistoryFeatureSpec):
        eta = _fit_by_arm(
            ds, spec.eta, False, y, follows, ["eta arm 0", "eta arm 1"], settings
        )

    mu: ArmFn = zero_outcome
    if isinstance(spec.mu, HistoryFeatureSpec):
        mu = _fit_by_arm(
            ds, spec.mu, True, y, follows, ["mu arm 0", "mu arm 1"], settings
        )

    nu: ArmFn = zero_outcome
    if isinstance(spec.nu, HistoryFeatureSpec):
        pseudo = mu(ds)
        fits = [
            _fit_by_arm(
                ds, spec.nu, False, pseudo[arm], [follows[1 - arm]], [f"nu arm {arm}"], settings
            )
            for arm in (0, 1)
        ]

        def fitted_nu(new: Dataset) -> NDArray[np.float64]:
            return np.concatenate([fit(new) for fit in fits])

        nu = fitted_nu

    return NuisanceSet(p=p, q=q, eta=eta, mu=mu, nu=nu, provenance=mode, clip=clip)
