"""Tests for the generative models, truths, perturbations and the Monte Carlo harness."""

import numpy as np
import pandas as pd
import pytest
from pydantic import ValidationError

from medexc.config import MedexcConfig
from medexc.exceptions import ConfigurationError
from medexc.models.estimand import EstimandConfig, FeatureMap, HistoryFeatureSpec
from medexc.models.simulation import (
    METRIC_COLUMNS,
    ExperimentCell,
    ExperimentPlan,
    GM1Params,
    GM2Params,
    PerturbationSpec,
)
from medexc.nuisance.base import zero_outcome
from medexc.oracle.identification import theta_table
from medexc.simulation import (
    ReplicateOutcome,
    gformula_monte_carlo,
    gm1_discrete_dgp,
    gm1_generate,
    gm1_quadrature,
    gm1_theta,
    gm1_true_nuisances,
    gm2_generate,
    gm2_h3,
    gm2_scenario_spec,
    perturb_nuisances,
    perturbation_factors,
    project_theta,
    replicate_key,
    robust_scenario,
    run_experiment,
    summarize,
    true_estimands,
)


def test_gm1_generate_layout(gm1_small):
    """Test that GM-1 data is always eligible with binary treatment and mediator."""
    assert (gm1_small.n, gm1_small.T, gm1_small.d) == (400, 5, 1)
    np.testing.assert_array_equal(gm1_small.i, 1.0)
    assert set(np.unique(gm1_small.a)) <= {0.0, 1.0}
    assert set(np.unique(gm1_small.m)) <= {0.0, 1.0}


def test_generators_are_seeded():
    """Test that seeds and stream keys select reproducible, distinct data."""
    first = gm1_generate(50, seed=3)
    np.testing.assert_array_equal(first.y, gm1_generate(50, seed=3).y)
    assert not np.array_equal(first.y, gm1_generate(50, seed=3, stream_keys=(1,)).y)


def test_gm2_treats_only_eligible_points(gm2_small):
    """Test that A_t = 0 wherever I_t = 0 and that eligibility varies."""
    assert np.all(gm2_small.a[gm2_small.i == 0] == 0)
    assert 0.0 < gm2_small.eligibility_rate < 1.0
    assert gm2_small.T == 6


def test_gm2_h3_is_centered_at_half_horizon():
    """Test h3(T/2, 0) = 0 and its range at the ends."""
    assert gm2_h3(15, 0.0, 30) == pytest.approx(0.0)
    assert gm2_h3(30, 0.0, 30) == pytest.approx(np.tanh(3.0))


def test_generators_need_participants():
    """Test that n must be positive."""
    with pytest.raises(ConfigurationError, match="n must be positive"):
        gm2_generate(0, seed=1)


@pytest.mark.parametrize("T", [1, 2, 3])
def test_gm1_theta_matches_enumeration(T):
    """Test the closed form against enumeration of the discretized model."""
    params = GM1Params(T=T)
    quadrature = gm1_quadrature(params, 3)
    dgp = gm1_discrete_dgp(params, nodes=3)
    np.testing.assert_allclose(theta_table(dgp), gm1_theta(params, quadrature), atol=1e-10)


def test_gm1_gformula_matches_closed_form():
    """Test that averaging the exact eta and nu over data recovers theta."""
    params = GM1Params(T=3)
    ds = gm1_generate(20_000, seed=2, params=params)
    theta = gformula_monte_carlo(ds, gm1_true_nuisances(params))
    np.testing.assert_allclose(theta, gm1_theta(params), atol=0.15)


def test_gm1_nuisances_check_horizon(gm1_small):
    """Test that exact GM-1 nuisances refuse data with another T."""
    with pytest.raises(ConfigurationError, match="expect T=3"):
        gm1_true_nuisances(GM1Params(T=3)).p(gm1_small)


def test_project_theta_constant_map():
    """Test that a constant map averages the per-t contrasts."""
    theta = gm1_theta()
    alpha, beta = project_theta(theta, EstimandConfig())
    assert alpha == pytest.approx(np.mean(theta[:, 1, 0] - theta[:, 0, 0]))
    assert beta == pytest.approx(np.mean(theta[:, 1, 1] - theta[:, 1, 0]))


def test_gm1_truth_record():
    """Test the closed-form truth record."""
    config = EstimandConfig(feature_map=FeatureMap(kind="linear"))
    truth = true_estimands("gm1", config)
    assert truth.method == "closed-form"
    assert truth.names == ["alpha_1", "alpha_2", "beta_1", "beta_2"]
    assert truth.se == [0.0] * 4
    assert len(truth.theta) == 5
    assert truth.to_dataframe().shape == (4, 3)


@pytest.mark.parametrize(
    ("generator", "params", "kwargs", "match"),
    [
        ("gm1", GM2Params(), {}, "need GM1Params"),
        ("gm2", GM1Params(), {}, "need GM2Params"),
        ("gm2", None, {"n_mc": 1}, "at least 2"),
        ("gm3", None, {}, "Unknown generator"),
    ],
)
def test_truth_arguments(generator, params, kwargs, match):
    """Test the argument checks of true_estimands."""
    with pytest.raises(ConfigurationError, match=match):
        true_estimands(generator, params=params, **kwargs)


def test_gm2_truth_by_monte_carlo(gm2_short_params):
    """Test a small seeded Monte Carlo truth."""
    kwargs = {"params": gm2_short_params, "n_mc": 3000, "seed": 4, "chunk": 1000}
    truth = true_estimands("gm2", **kwargs)
    assert truth.method == "monte-carlo"
    assert truth.n_mc == 3000
    assert all(se > 0 for se in truth.se)
    assert truth.values == true_estimands("gm2", **kwargs).values


def test_perturbation_factors_range():
    """Test that rate 0.5 at n = 10^4 keeps factors in [0.99, 1]."""
    factors = perturbation_factors(PerturbationSpec.from_pair(0.5, 0.5, 10_000, seed=1))
    assert set(factors) == {"p", "q", "eta", "mu", "nu"}
    assert all(0.99 <= u <= 1.0 for u in factors.values())


def test_perturbation_streams_differ_by_replicate():
    """Test that replicates draw independent factors reproducibly."""
    spec = PerturbationSpec.from_pair(0.1, 0.3, 500, seed=1)
    assert perturbation_factors(spec) == perturbation_factors(spec)
    other = spec.model_copy(update={"replicate": 1})
    assert perturbation_factors(spec) != perturbation_factors(other)


def test_perturbed_nuisances_scale_the_truth(gm1_small):
    """Test that every perturbed function is the truth times its factor."""
    truth = gm1_true_nuisances()
    spec = PerturbationSpec.from_pair(0.2, 0.4, 400, seed=8)
    factors = perturbation_factors(spec)
    perturbed = perturb_nuisances(truth, spec)
    assert perturbed.provenance == "perturbed"
    np.testing.assert_allclose(perturbed.mu(gm1_small), factors["mu"] * truth.mu(gm1_small))
    np.testing.assert_allclose(perturbed.p(gm1_small), factors["p"] * truth.p(gm1_small))


def test_robust_scenarios_keep_named_components():
    """Test which components stay exact in the robustness scenarios."""
    truth = gm1_true_nuisances()
    robust = robust_scenario(truth, "robust-i")
    assert robust.p is truth.p and robust.q is truth.q
    assert robust.eta is zero_outcome and robust.mu is zero_outcome
    assert robust_scenario(truth, "robust-iv").mu is truth.mu
    with pytest.raises(ConfigurationError, match="Unknown robustness scenario"):
        robust_scenario(truth, "robust-v")


def test_gm2_scenario_specs():
    """Test the correct and wrong working models of the GM-2 scenarios."""
    wrong = HistoryFeatureSpec.time_only()
    first, fourth = gm2_scenario_spec(1), gm2_scenario_spec(4)
    assert first.mode == "known-propensity"
    assert first.q.lags == ["a", "m"]
    assert first.mu.lags == []
    assert fourth.q == wrong and fourth.mu == wrong
    assert gm2_scenario_spec(2).q == wrong and gm2_scenario_spec(3).mu == wrong
    with pytest.raises(ConfigurationError, match="1..4"):
        gm2_scenario_spec(5)


def test_experiment_cell_validation():
    """Test scenario checks per generator."""
    with pytest.raises(ValidationError, match="needs r1 and r2"):
        ExperimentCell(generator="gm1", scenario="perturbed", n=[100])
    with pytest.raises(ValidationError, match="not available for gm2"):
        ExperimentCell(generator="gm2", scenario="exact", n=[100])
    with pytest.raises(ValidationError, match="not available for gm1"):
        ExperimentCell(generator="gm1", scenario="scenario-1", n=[100])


def test_perturbation_grid_pairs_every_rate():
    """Test that the grid plan covers every (r1, r2) pair."""
    plan = ExperimentPlan.perturbation_grid([0.1, 0.3], n=[100], replicates=2, seed=5)
    assert [(c.r1, c.r2) for c in plan.cells] == [(0.1, 0.1), (0.1, 0.3), (0.3, 0.1), (0.3, 0.3)]


def test_replicate_keys_are_distinct():
    """Test that cell, n and replicate map to different keys."""
    keys = {replicate_key(c, n, r) for c in range(3) for n in (100, 200) for r in range(5)}
    assert len(keys) == 30


def test_summarize_all_failed():
    """Test that a sample size where every replicate failed reports NaN."""
    cell = ExperimentCell(generator="gm1", n=[100], replicates=2)
    truth = true_estimands("gm1")
    rows = summarize(cell, 100, truth, [ReplicateOutcome(key=k, error="boom") for k in (1, 2)])
    assert [row.param for row in rows] == ["alpha_1", "beta_1"]
    assert all(np.isnan(row.bias) and row.failed == 2 and row.replicates == 0 for row in rows)
    assert summarize(cell, 100, truth, []) == []


def test_empty_experiment():
    """Test that a cell without replicates produces no rows."""
    plan = ExperimentPlan(cells=[ExperimentCell(generator="gm1", n=[100], replicates=0)])
    frame = run_experiment(plan).to_dataframe()
    assert frame.empty
    assert list(frame.columns) == METRIC_COLUMNS


def test_small_experiment_is_reproducible_across_workers():
    """Test a short GM-1 run and its independence from the worker count."""
    plan = ExperimentPlan(
        cells=[
            ExperimentCell(generator="gm1", scenario="exact", n=[200], replicates=3),
            ExperimentCell(
                generator="gm1", scenario="perturbed", n=[200], replicates=2, r1=0.3, r2=0.3
            ),
        ],
        seed=12,
    )
    one = run_experiment(plan, MedexcConfig(threads=1)).to_dataframe()
    two = run_experiment(plan, MedexcConfig(threads=2)).to_dataframe()
    assert one.shape == (4, len(METRIC_COLUMNS))
    assert list(one["replicates"]) == [3, 3, 2, 2]
    assert list(one["failed"]) == [0, 0, 0, 0]
    pd.testing.assert_frame_equal(one, two, check_exact=False, rtol=1e-10)


@pytest.mark.slow
def test_gm1_reference_values():
    """Test the GM-1 marginal direct and indirect effects."""
    truth = true_estimands("gm1")
    assert truth.value("alpha_1") == pytest.approx(1.381, abs=0.01)
    assert truth.value("beta_1") == pytest.approx(0.822, abs=0.01)


@pytest.mark.slow
def test_gm2_reference_values():
    """Test the GM-2 marginal direct and indirect effects by Monte Carlo."""
    truth = true_estimands("gm2", n_mc=1_000_000, seed=0)
    assert truth.value("alpha_1") == pytest.approx(0.285, abs=0.01)
    assert truth.value("beta_1") == pytest.approx(0.121, abs=0.01)


def test_perturbation_error_is_bounded_by_the_rate(gm1_small):
    """Test |perturbed - exact| <= n^-r |exact| pointwise for every component."""
    truth = gm1_true_nuisances()
    exact = {name: getattr(truth, name)(gm1_small) for name in ("p", "q", "eta", "mu", "nu")}
    for n in (100, 1000, 10_000, 100_000):
        for replicate in range(5):
            spec = PerturbationSpec.from_pair(0.1, 0.4, n, seed=2, replicate=replicate)
            perturbed = perturb_nuisances(truth, spec)
            rates = {"p": 0.1, "eta": 0.1, "nu": 0.1, "q": 0.4, "mu": 0.4}
            for name, value in exact.items():
                gap = np.abs(getattr(perturbed, name)(gm1_small) - value)
                assert np.all(gap <= n ** (-rates[name]) * np.abs(value) + 1e-12), (name, n)


def _metrics(cells: list[ExperimentCell], seed: int) -> pd.DataFrame:
    plan = ExperimentPlan(cells=cells, seed=seed)
    return run_experiment(plan, MedexcConfig(threads=4)).to_dataframe()


def _mc_sd(rows):
    """Standard deviation of the estimates behind a metrics row or frame."""
    return np.sqrt(np.maximum(rows["rmse"] ** 2 - rows["bias"] ** 2, 0.0))


@pytest.mark.slow
def test_gm1_exact_nuisance_coverage():
    """Test near-nominal coverage and a calibrated sandwich at n = 3000."""
    frame = _metrics(
        [ExperimentCell(generator="gm1", scenario="exact", n=[3000], replicates=500)], seed=1
    )
    assert frame["coverage"].between(0.92, 0.97).all()
    assert frame["ase_sd"].between(0.9, 1.1).all()
    assert (frame["bias"].abs() < 3 * _mc_sd(frame) / np.sqrt(500)).all()


@pytest.mark.slow
def test_gm1_perturbation_grid_pattern():
    """Test coverage and root-n bias across perturbation rates."""
    plan = ExperimentPlan.perturbation_grid([0.1, 0.3, 0.5], n=[500, 2000], replicates=500, seed=4)
    frame = run_experiment(plan, MedexcConfig(threads=4)).to_dataframe()

    fast = frame[(frame["r1"] == 0.5) & (frame["r2"] == 0.5)]
    assert fast["coverage"].between(0.92, 0.98).all()

    slow_cell = frame[(frame["r1"] == 0.1) & (frame["r2"] == 0.1) & (frame["n"] == 2000)]
    assert slow_cell["coverage"].min() < 0.90

    fast_rates = frame[(frame["r1"] >= 0.3) & (frame["r2"] >= 0.3)]
    for _, rows in fast_rates.groupby(["r1", "r2", "param"]):
        small, large = rows[rows["n"] == 500].iloc[0], rows[rows["n"] == 2000].iloc[0]
        # root-n times the Monte Carlo standard error of each bias, 500 replicates
        noise = np.hypot(*(np.sqrt(r["n"]) * _mc_sd(r) for r in (small, large))) / np.sqrt(500)
        assert large["rootn_abs_bias"] <= small["rootn_abs_bias"] + 3 * noise


@pytest.mark.slow
def test_gm1_multiple_robustness():
    """Test that the error shrinks when one nuisance configuration is exact."""
    scenarios = ["robust-i", "robust-ii", "robust-iii", "robust-iv", "all-wrong"]
    frame = _metrics(
        [
            ExperimentCell(generator="gm1", scenario=s, n=[500, 8000], replicates=300)
            for s in scenarios
        ],
        seed=5,
    )
    for (scenario, _), rows in frame.groupby(["scenario", "param"]):
        small = rows[rows["n"] == 500].iloc[0]
        large = rows[rows["n"] == 8000].iloc[0]
        if scenario == "all-wrong":
            assert abs(large["bias"]) > 0.6 * abs(small["bias"])
        else:
            assert large["rmse"] < 0.6 * small["rmse"], scenario


@pytest.mark.slow
def test_gm2_working_model_scenarios():
    """Test coverage of the GM-2 scenarios and their ordering."""
    frame = _metrics(
        [
            ExperimentCell(
                generator="gm2",
                scenario=f"scenario-{k}",
                n=[1000],
                replicates=300,
                truth_mc=500_000,
            )
            for k in (1, 2, 3, 4)
        ],
        seed=6,
    )
    by_scenario = {name: rows for name, rows in frame.groupby("scenario")}
    for name in ("scenario-1", "scenario-3"):
        rows = by_scenario[name]
        assert rows["coverage"].between(0.91, 0.98).all(), name
        assert rows["ase_sd"].between(0.85, 1.15).all(), name
    assert by_scenario["scenario-4"]["coverage"].min() < 0.85

    def worst(name: str) -> tuple[float, float]:
        rows = by_scenario[name]
        k = rows["coverage"].idxmin()
        return rows.loc[k, "coverage"], rows.loc[k, "mc_se_coverage"]

    second, second_se = worst("scenario-2")
    for name in ("scenario-1", "scenario-3"):
        best, best_se = worst(name)
        assert best >= second - 2 * np.hypot(best_se, second_se), name
    assert second > worst("scenario-4")[0]


@pytest.mark.slow
def test_gm1_crossfit_matches_full_sample():
    """Test that two-fold cross-fitting agrees with the full-sample estimator."""
    cells = [
        ExperimentCell(
            generator="gm1",
            scenario="exact",
            n=[4000],
            replicates=300,
            estimand=EstimandConfig(folds=folds),
        )
        for folds in (0, 2)
    ]
    frame = _metrics(cells, seed=7)
    full, crossfit = frame.iloc[:2].reset_index(), frame.iloc[2:].reset_index()
    assert list(full["param"]) == list(crossfit["param"])
    gap = (crossfit["bias"] - full["bias"]).abs()
    noise = np.hypot(_mc_sd(full), _mc_sd(crossfit)) / np.sqrt(300)
    assert (gap < 3 * noise).all()
    assert crossfit["coverage"].between(0.92, 0.97).all()


@pytest.mark.slow
def test_gm2_known_propensity_is_consistent():
    """Test that known p with eta = nu = 0 still converges (scenario 1)."""
    frame = _metrics(
        [
            ExperimentCell(
                generator="gm2",
                scenario="scenario-1",
                n=[500, 4000],
                replicates=200,
                truth_mc=500_000,
            )
        ],
        seed=8,
    )
    for _, rows in frame.groupby("param"):
        small = rows[rows["n"] == 500].iloc[0]
        large = rows[rows["n"] == 4000].iloc[0]
        assert large["rmse"] < 0.6 * small["rmse"]
