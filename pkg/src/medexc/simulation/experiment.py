"""Monte Carlo harness: replicate, estimate and summarize against the truth."""

import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed
from numpy.typing import NDArray

from medexc.config import MedexcConfig
from medexc.data.dataset import Dataset
from medexc.estimator.estimating import estimate
from medexc.exceptions import MedexcError
from medexc.models.estimand import NuisanceSpec
from medexc.models.simulation import (
    ExperimentCell,
    ExperimentPlan,
    MetricsRow,
    MetricsTable,
    PerturbationSpec,
    TruthResult,
)
from medexc.nuisance.base import NuisanceSet, PropensityFn
from medexc.simulation.gm1 import gm1_generate, gm1_true_nuisances
from medexc.simulation.gm2 import gm2_generate, gm2_true_propensity
from medexc.simulation.perturbation import perturb_nuisances
from medexc.simulation.scenarios import gm2_scenario_spec, robust_scenario
from medexc.simulation.truth import true_estimands

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ReplicateOutcome:
    """Estimates of one replicate, or the reason it failed."""

    key: int
    gamma: NDArray[np.float64] | None = None
    se: NDArray[np.float64] | None = None
    lower: NDArray[np.float64] | None = None
    upper: NDArray[np.float64] | None = None
    error: str | None = None


def replicate_key(cell_index: int, n: int, replicate: int) -> int:
    """Stream key unique to (cell, sample size, replicate)."""
    return (cell_index << 40) | (n << 20) | replicate


def _generate(cell: ExperimentCell, n: int, seed: int, key: int) -> Dataset:
    if cell.generator == "gm1":
        return gm1_generate(n, seed, cell.gm1_params, stream_keys=(key,))
    return gm2_generate(n, seed, cell.gm2_params, stream_keys=(key,))


def _nuisance(
    cell: ExperimentCell, n: int, seed: int, key: int, clip: float
) -> tuple[NuisanceSpec | NuisanceSet | None, PropensityFn | None]:
    scenario = cell.scenario
    if cell.generator == "gm2":
        known = gm2_true_propensity(cell.gm2_params)
        if scenario == "fitted":
            return cell.nuisance, known
        return gm2_scenario_spec(int(scenario.removeprefix("scenario-"))), known
    if scenario == "fitted":
        return cell.nuisance, None
    truth = gm1_true_nuisances(cell.gm1_params, clip=clip)
    if scenario == "exact":
        return truth, None
    if scenario == "perturbed":
        spec = PerturbationSpec.from_pair(cell.r1, cell.r2, n, seed, replicate=key)
        return perturb_nuisances(truth, spec), None
    return robust_scenario(truth, scenario), None


def run_replicate(
    cell: ExperimentCell,
    cell_index: int,
    n: int,
    replicate: int,
    seed: int,
    settings: MedexcConfig,
) -> ReplicateOutcome:
    """Generate, estimate and report one replicate; failures are recorded."""
    key = replicate_key(cell_index, n, replicate)
    try:
        ds = _generate(cell, n, seed, key)
        nuisance, known = _nuisance(cell, n, seed, key, settings.clip)
        result = estimate(
            ds,
            nuisance,
            cell.estimand,
            known_propensity=known,
            settings=settings,
            seed=(seed + key) % 2**64,
        )
    except MedexcError as e:
        logger.warning(f"Replicate {replicate} of cell {cell_index} at n={n} failed: {e}")
        return ReplicateOutcome(key=key, error=str(e))
    ci = np.asarray(result.ci)
    return ReplicateOutcome(
        key=key,
        gamma=result.gamma,
        se=np.asarray(result.se),
        lower=ci[:, 0],
        upper=ci[:, 1],
    )


def summarize(
    cell: ExperimentCell, n: int, truth: TruthResult, outcomes: list[ReplicateOutcome]
) -> list[MetricsRow]:
    """Bias, RMSE, ASE/SD and coverage per parameter for one sample size.

    Returns no rows when no replicate was requested.
    """
    done = [o for o in outcomes if o.error is None]
    failed = len(outcomes) - len(done)
    if not outcomes:
        return []
    rows = []
    for k, name in enumerate(truth.names):
        target = truth.values[k]
        if done:
            est = np.array([o.gamma[k] for o in done])
            se = np.array([o.se[k] for o in done])
            hits = np.array([o.lower[k] <= target <= o.upper[k] for o in done])
            bias = float(est.mean() - target)
            rmse = float(np.sqrt(np.mean((est - target) ** 2)))
            sd = float(est.std(ddof=1)) if est.size > 1 else np.nan
            ase_sd = float(se.mean() / sd) if sd and np.isfinite(sd) else np.nan
            coverage = float(hits.mean())
            mc_se = float(np.sqrt(coverage * (1 - coverage) / hits.size))
        else:
            bias = rmse = ase_sd = coverage = mc_se = np.nan
        rows.append(
            MetricsRow(
                generator=cell.generator,
                scenario=cell.scenario,
                n=n,
                r1=cell.r1,
                r2=cell.r2,
                param=name,
                bias=bias,
                rootn_abs_bias=float(np.sqrt(n) * abs(bias)),
                rmse=rmse,
                ase_sd=ase_sd,
                coverage=coverage,
                mc_se_coverage=mc_se,
                replicates=len(done),
                failed=failed,
            )
        )
    return rows


def cell_truth(cell: ExperimentCell, seed: int, threads: int = 1) -> TruthResult:
    """Reference coefficients for a cell's generator and estimand."""
    if cell.generator == "gm1":
        return true_estimands("gm1", cell.estimand, cell.gm1_params)
    return true_estimands(
        "gm2", cell.estimand, cell.gm2_params, n_mc=cell.truth_mc, seed=seed, threads=threads
    )


def run_experiment(
    plan: ExperimentPlan, settings: MedexcConfig | None = None
) -> MetricsTable:
    """Run every cell of a Monte Carlo plan.

    Replicates are independent tasks spread over ``settings.threads``
    workers; each draws its data, perturbation and folds from streams keyed
    by (cell, n, replicate), so the table does not depend on the worker
    count. A replicate raising a :class:`~medexc.exceptions.MedexcError` is
    logged and counted in ``failed``.

    Args:
        plan: Cells and master seed
        settings: Numerical and runtime settings

    Returns:
        Metrics table in cell, n and parameter order

    Example:
        >>> plan = ExperimentPlan(cells=[ExperimentCell(generator="gm1", n=[500], replicates=20)])
        >>> run_experiment(plan).to_dataframe().shape[0]
        2
    """
    settings = settings or MedexcConfig()
    inner = settings.model_copy(update={"threads": 1})
    rows: list[MetricsRow] = []
    for index, cell in enumerate(plan.cells):
        if cell.replicates == 0:
            logger.info(f"Cell {index} has no replicates; skipping")
            continue
        truth = cell_truth(cell, plan.seed, settings.threads)
        for n in cell.n:
            logger.info(
                f"Cell {index} ({cell.generator}, {cell.scenario}): "
                f"{cell.replicates} replicates at n={n}"
            )
            outcomes = Parallel(n_jobs=settings.threads)(
                delayed(run_replicate)(cell, index, n, rep, plan.seed, inner)
                for rep in range(cell.replicates)
            )
            rows.extend(summarize(cell, n, truth, outcomes))
    return MetricsTable(rows=rows)
