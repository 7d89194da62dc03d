"""Estimating function, closed-form solve and sandwich variance."""

import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import NDArray
from scipy import linalg
from scipy.stats import norm

from medexc.config import MedexcConfig
from medexc.data.dataset import Dataset, require_valid
from medexc.data.features import feature_matrix, resolve_weights
from medexc.estimator.curves import curve_points
from medexc.estimator.phi import PhiTable, phi_table
from medexc.exceptions import ConfigurationError, DegenerateBasisError
from medexc.models.estimand import EffectPair, EstimandConfig, NuisanceSpec
from medexc.models.result import Diagnostics, EstimateResult, ThetaEstimate
from medexc.nuisance.base import NuisanceSet, PropensityFn
from medexc.nuisance.fitted import fit_nuisance_set
from medexc.rng import Stream, make_rng

logger = logging.getLogger(__name__)

CONDITION_LIMIT = 1e12


def effect_contrasts(phi: NDArray[np.float64], effect_pair: EffectPair) -> list[NDArray]:
    """Per-(participant, t) contrasts of phi whose projections are estimated.

    primary: (phi10 - phi00, phi11 - phi10); swapped: (phi11 - phi01,
    phi01 - phi00); total: (phi11 - phi00,).
    """
    if effect_pair == "primary":
        return [phi[1, 0] - phi[0, 0], phi[1, 1] - phi[1, 0]]
    if effect_pair == "swapped":
        return [phi[1, 1] - phi[0, 1], phi[0, 1] - phi[0, 0]]
    return [phi[1, 1] - phi[0, 0]]


@dataclass(frozen=True)
class ProjectionSystem:
    """Features, weights and the data-free slope of the estimating function.

    The estimating function is affine in gamma:
    psi_i(gamma) = U_i - blockdiag(M, ..., M) gamma with M = F' diag(w) F.
    """

    F: NDArray[np.float64]
    w: NDArray[np.float64]
    M: NDArray[np.float64]
    blocks: int
    condition_number: float

    @classmethod
    def build(cls, config: EstimandConfig, T: int) -> "ProjectionSystem":
        """Assemble the system for T decision points.

        Raises:
            DegenerateBasisError: If M is singular or numerically so
        """
        F = feature_matrix(config.feature_map, T)
        w = np.asarray(resolve_weights(config.weights, T).w)
        M = F.T @ (w[:, None] * F)
        eigenvalues = np.linalg.eigvalsh(M)
        condition = (
            float(eigenvalues[-1] / eigenvalues[0]) if eigenvalues[0] > 0 else np.inf
        )
        if not condition < CONDITION_LIMIT:
            raise DegenerateBasisError(
                f"degenerate projection basis: {config.feature_map.kind} features with "
                f"p={F.shape[1]} are not identified by the weights over T={T} "
                f"(condition number {condition:.3g})"
            )
        blocks = 1 if config.effect_pair == "total" else 2
        return cls(F=F, w=w, M=M, blocks=blocks, condition_number=condition)

    @property
    def slope(self) -> NDArray[np.float64]:
        """blockdiag(M, ..., M); the Jacobian of psi is its negative."""
        return linalg.block_diag(*([self.M] * self.blocks))

    def contributions(self, phi: NDArray[np.float64], effect_pair: EffectPair) -> NDArray:
        """U_i = sum_t w(t) [contrast_k(t) f(t)]_k, shape (n, blocks * p)."""
        return np.hstack(
            [(c * self.w[None, :]) @ self.F for c in effect_contrasts(phi, effect_pair)]
        )

    def solve(self, mean_contribution: NDArray[np.float64]) -> NDArray[np.float64]:
        """Root of the averaged estimating function."""
        factor = linalg.cho_factor(self.M)
        p = self.M.shape[0]
        return np.concatenate(
            [
                linalg.cho_solve(factor, mean_contribution[k * p : (k + 1) * p])
                for k in range(self.blocks)
            ]
        )

    def psi(self, contributions: NDArray, gamma: NDArray) -> NDArray[np.float64]:
        """psi_i(gamma) for every participant, shape (n, blocks * p)."""
        return contributions - (self.slope @ gamma)[None, :]

    def sandwich(self, meat: NDArray[np.float64], n: int) -> NDArray[np.float64]:
        """bread^-1 meat bread^-T / n with bread = -slope."""
        inverse = np.linalg.inv(self.slope)
        cov = inverse @ meat @ inverse.T / n
        return (cov + cov.T) / 2


def _resolve_nuisances(
    ds: Dataset,
    nuisance: NuisanceSpec | NuisanceSet | None,
    known_propensity: PropensityFn | None,
    settings: MedexcConfig,
) -> NuisanceSet:
    if isinstance(nuisance, NuisanceSet):
        return nuisance
    return fit_nuisance_set(
        ds, nuisance, known_propensity=known_propensity, settings=settings
    )


def psi_contribution(
    ds: Dataset, nuisances: NuisanceSet, config: EstimandConfig | None = None
) -> NDArray[np.float64]:
    """gamma-free part of the estimating function for every participant.

    Returns:
        Array (n, 2p) for effect pairs, (n, p) for the total effect

    Example:
        >>> U = psi_contribution(ds, gm1_true_nuisances(), EstimandConfig())
        >>> U.shape
        (ds.n, 2)
    """
    config = config or EstimandConfig()
    system = ProjectionSystem.build(config, ds.T)
    return system.contributions(phi_table(ds, nuisances).values, config.effect_pair)


def estimating_function(
    ds: Dataset,
    nuisances: NuisanceSet,
    config: EstimandConfig,
    gamma: NDArray[np.float64],
) -> NDArray[np.float64]:
    """psi_i(gamma; nuisances) for every participant."""
    system = ProjectionSystem.build(config, ds.T)
    contributions = system.contributions(
        phi_table(ds, nuisances).values, config.effect_pair
    )
    return system.psi(contributions, np.asarray(gamma, dtype=float))


def solve_gamma(
    ds: Dataset, nuisances: NuisanceSet, config: EstimandConfig | None = None
) -> NDArray[np.float64]:
    """Solve P_n psi(gamma; nuisances) = 0 in closed form.

    Raises:
        DegenerateBasisError: If sum_t w(t) f(t) f(t)' is singular
    """
    config = config or EstimandConfig()
    system = ProjectionSystem.build(config, ds.T)
    contributions = system.contributions(
        phi_table(ds, nuisances).values, config.effect_pair
    )
    return system.solve(contributions.mean(axis=0))


def _result(
    config: EstimandConfig,
    system: ProjectionSystem,
    gamma: NDArray,
    cov: NDArray,
    theta: NDArray,
    diagnostics: Diagnostics,
    echo: dict,
) -> EstimateResult:
    se = np.sqrt(np.clip(np.diag(cov), 0.0, None))
    z = float(norm.ppf(0.5 + config.level / 2))
    return EstimateResult(
        names=config.parameter_names(),
        gamma_hat=gamma.tolist(),
        cov=cov.tolist(),
        se=se.tolist(),
        ci=[(float(g - z * s), float(g + z * s)) for g, s in zip(gamma, se, strict=True)],
        level=config.level,
        effect_pair=config.effect_pair,
        effect_curves=curve_points(gamma, cov, system.F, config.effect_pair, config.level),
        theta_hat=[
            ThetaEstimate(
                t=t + 1,
                theta_00=float(theta[t, 0, 0]),
                theta_01=float(theta[t, 0, 1]),
                theta_10=float(theta[t, 1, 0]),
                theta_11=float(theta[t, 1, 1]),
            )
            for t in range(theta.shape[0])
        ],
        diagnostics=diagnostics,
        config_echo=echo,
    )


def _echo(config: EstimandConfig, nuisance: NuisanceSpec | NuisanceSet | None) -> dict:
    echo = {"estimand": config.model_dump()}
    if isinstance(nuisance, NuisanceSet):
        echo["nuisance"] = nuisance.provenance
    else:
        echo["nuisance"] = (nuisance or NuisanceSpec()).model_dump()
    return echo


def estimate(
    ds: Dataset,
    nuisance: NuisanceSpec | NuisanceSet | None = None,
    config: EstimandConfig | None = None,
    *,
    known_propensity: PropensityFn | None = None,
    settings: MedexcConfig | None = None,
    seed: int | None = None,
) -> EstimateResult:
    """Two-stage estimator without sample splitting.

    Stage one fits the nuisance set on the full sample (or uses the given
    set); stage two solves the projection estimating equation. The sandwich
    uses the data-free bread -blockdiag(M, M) and the empirical meat of psi
    at the solution. A config with ``folds >= 2`` is routed to
    :func:`estimate_crossfit`, which then needs ``seed``.

    Args:
        ds: Validated dataset
        nuisance: Working-model spec, or a ready nuisance set
        config: Estimand and inference settings
        known_propensity: Propensity for known-propensity specs
        settings: Numerical settings
        seed: Fold seed, only used with cross-fitting

    Returns:
        Coefficients, covariance, Wald intervals and effect curves

    Raises:
        DataValidationError: If ``ds`` breaks a structural invariant
        DegenerateBasisError: If the projection basis is singular
        FitError: If a working model cannot be fit

    Example:
        >>> ds = gm1_generate(3000, seed=1)
        >>> result = estimate(ds, gm1_true_nuisances(), EstimandConfig())
        >>> result.names
        ['alpha_1', 'beta_1']
    """
    config = config or EstimandConfig()
    settings = settings or MedexcConfig()
    if config.folds >= 2:
        if seed is None:
            raise ConfigurationError("cross-fitting needs a seed")
        return estimate_crossfit(
            ds,
            nuisance,
            config,
            seed,
            known_propensity=known_propensity,
            settings=settings,
        )
    require_valid(ds)
    system = ProjectionSystem.build(config, ds.T)
    nuisances = _resolve_nuisances(ds, nuisance, known_propensity, settings)

    logger.info(f"Solving projection estimating equation on n={ds.n}, T={ds.T}")
    table = phi_table(ds, nuisances, settings.weight_ratio_warning)
    contributions = system.contributions(table.values, config.effect_pair)
    gamma = system.solve(contributions.mean(axis=0))
    psi = system.psi(contributions, gamma)
    meat = psi.T @ psi / ds.n
    cov = system.sandwich(meat, ds.n)

    diagnostics = Diagnostics(
        n=ds.n,
        T=ds.T,
        provenance=nuisances.provenance,
        clip_activations=table.clip_activations,
        weight_ratio_max=table.weight_ratio_max,
        weight_ratio_exceedances=table.weight_ratio_exceedances,
        condition_number=system.condition_number,
        solver_residual=float(np.max(np.abs(psi.mean(axis=0)))),
    )
    return _result(
        config, system, gamma, cov, table.theta_means(), diagnostics, _echo(config, nuisance)
    )


def fold_assignment(n: int, folds: int, seed: int) -> list[NDArray[np.int_]]:
    """Seeded random partition into near-equal folds.

    The first ``n % folds`` folds hold one extra participant.
    """
    order = make_rng(seed, Stream.FOLDS).permutation(n)
    return [np.sort(part) for part in np.array_split(order, folds)]


def _fold_terms(
    ds: Dataset,
    train: NDArray,
    held_out: NDArray,
    nuisance: NuisanceSpec | NuisanceSet | None,
    known_propensity: PropensityFn | None,
    settings: MedexcConfig,
) -> tuple[PhiTable, str]:
    nuisances = _resolve_nuisances(ds.subset(train), nuisance, known_propensity, settings)
    table = phi_table(ds.subset(held_out), nuisances, settings.weight_ratio_warning)
    return table, nuisances.provenance


def estimate_crossfit(
    ds: Dataset,
    nuisance: NuisanceSpec | NuisanceSet | None,
    config: EstimandConfig,
    seed: int,
    *,
    known_propensity: PropensityFn | None = None,
    settings: MedexcConfig | None = None,
) -> EstimateResult:
    """Cross-fitted two-stage estimator.

    Participants are split into K near-equal folds by a seeded shuffle. The
    nuisance set for fold k is fit on the other folds and evaluated on fold
    k; the solution averages the fold-wise estimating functions, and the
    meat of the sandwich averages the fold-wise meats. Folds run on
    ``settings.threads`` worker threads without affecting the output.

    Raises:
        ConfigurationError: If K < 2 or n < 2K
        StratumError: If a training complement leaves a stratum too small
    """
    settings = settings or MedexcConfig()
    K = config.folds
    if K < 2:
        raise ConfigurationError(f"cross-fitting needs at least 2 folds, got {K}")
    if ds.n < 2 * K:
        raise ConfigurationError(f"cross-fitting with K={K} needs n >= {2 * K}, got {ds.n}")
    require_valid(ds)
    system = ProjectionSystem.build(config, ds.T)
    folds = fold_assignment(ds.n, K, seed)
    everyone = np.arange(ds.n)
    logger.info(f"Cross-fitting over {K} folds of sizes {[f.size for f in folds]}")

    results = Parallel(n_jobs=settings.threads, backend="threading")(
        delayed(_fold_terms)(
            ds,
            np.setdiff1d(everyone, held_out),
            held_out,
            nuisance,
            known_propensity,
            settings,
        )
        for held_out in folds
    )
    contributions = [
        system.contributions(table.values, config.effect_pair) for table, _ in results
    ]
    gamma = system.solve(np.mean([u.mean(axis=0) for u in contributions], axis=0))
    psis = [system.psi(u, gamma) for u in contributions]
    meat = np.mean([psi.T @ psi / psi.shape[0] for psi in psis], axis=0)
    cov = system.sandwich(meat, ds.n)
    residual = np.mean([psi.mean(axis=0) for psi in psis], axis=0)
    theta = np.mean([table.theta_means() for table, _ in results], axis=0)

    assignment = np.empty(ds.n, dtype=int)
    for k, held_out in enumerate(folds):
        assignment[held_out] = k
    diagnostics = Diagnostics(
        n=ds.n,
        T=ds.T,
        provenance=results[0][1],
        clip_activations=sum(table.clip_activations for table, _ in results),
        weight_ratio_max=max(table.weight_ratio_max for table, _ in results),
        weight_ratio_exceedances=sum(table.weight_ratio_exceedances for table, _ in results),
        condition_number=system.condition_number,
        solver_residual=float(np.max(np.abs(residual))),
        fold_sizes=[int(f.size) for f in folds],
        folds=assignment.tolist(),
    )
    echo = _echo(config, nuisance) | {"seed": seed}
    return _result(config, system, gamma, cov, theta, diagnostics, echo)
