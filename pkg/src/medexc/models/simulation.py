"""Parameter records for the generative models and the Monte Carlo harness."""

from pathlib import Path
from typing import Literal

import pandas as pd
from pydantic import Field, model_validator

from medexc.models.base import MedexcBaseModel, MedexcResult
from medexc.models.estimand import EstimandConfig, NuisanceSpec
from medexc.models.result import ThetaEstimate

Scenario = Literal[
    "exact",
    "perturbed",
    "fitted",
    "robust-i",
    "robust-ii",
    "robust-iii",
    "robust-iv",
    "all-wrong",
    "scenario-1",
    "scenario-2",
    "scenario-3",
    "scenario-4",
]

METRIC_COLUMNS = [
    "generator",
    "scenario",
    "n",
    "r1",
    "r2",
    "param",
    "bias",
    "rootn_abs_bias",
    "rmse",
    "ase_sd",
    "coverage",
    "mc_se_coverage",
    "replicates",
    "failed",
]


class GM1Params(MedexcBaseModel):
    """Parameters of the first generative model (always-eligible, binary mediator).

    The outcome coefficients xi_t = rho_t = lambda_t = tau_t share one linear
    schedule ``coef_base + coef_slope * (t - 1)`` when ``coef_scale`` is
    ``"step"``; ``"horizon"`` divides the slope term by T.
    """

    T: int = Field(default=5, ge=1)
    sigma_x: float = Field(default=2.0, gt=0.0)
    sigma_y: float = Field(default=2.0, gt=0.0)
    kappa0: float = 2.0
    kappa1: float = -1.5
    kappa2: float = -1.5
    coef_base: float = 0.5
    coef_slope: float = 0.25
    coef_scale: Literal["step", "horizon"] = "step"
    quadrature_nodes: int = Field(default=50, ge=2, le=200)


class GM2Params(MedexcBaseModel):
    """Parameters of the second generative model (eligibility, continuous mediator).

    Each coefficient is named ``<target>_<source>``; ``*_lag`` terms refer to
    the previous decision point, whose values start at zero.
    """

    T: int = Field(default=30, ge=2)

    x_x_lag: float = 0.3
    x_a_lag: float = 0.2
    x_m_lag: float = 0.2
    x_sd: float = Field(default=1.0, gt=0.0)

    i_intercept: float = 1.5
    i_a_lag: float = -0.3
    i_m_lag: float = -0.3
    i_x: float = 0.3

    a_a_lag: float = 0.2
    a_m_lag: float = 0.2
    a_x: float = 0.3

    m_a_lag: float = 0.4
    m_m_lag: float = 0.4
    m_x: float = 0.3
    m_a: float = 0.6
    m_sd: float = Field(default=1.0, gt=0.0)

    y_x: float = 0.3
    y_m: float = 0.4
    y_a: float = 0.2
    y_am: float = 0.1
    y_sd: float = Field(default=1.0, gt=0.0)


class PerturbationSpec(MedexcBaseModel):
    """Rates of the multiplicative perturbation applied to exact nuisances."""

    r_p: float = Field(..., gt=0.0, le=0.5)
    r_q: float = Field(..., gt=0.0, le=0.5)
    r_eta: float = Field(..., gt=0.0, le=0.5)
    r_mu: float = Field(..., gt=0.0, le=0.5)
    r_nu: float = Field(..., gt=0.0, le=0.5)
    n: int = Field(..., ge=1)
    seed: int = Field(..., ge=0, lt=2**64)
    replicate: int = Field(default=0, ge=0)

    @classmethod
    def from_pair(
        cls, r1: float, r2: float, n: int, seed: int, replicate: int = 0
    ) -> "PerturbationSpec":
        """Pair rates as r_p = r_eta = r_nu = r1 and r_q = r_mu = r2."""
        return cls(
            r_p=r1,
            r_eta=r1,
            r_nu=r1,
            r_q=r2,
            r_mu=r2,
            n=n,
            seed=seed,
            replicate=replicate,
        )


class ExperimentCell(MedexcBaseModel):
    """One generator/scenario combination swept over a grid of sample sizes."""

    generator: Literal["gm1", "gm2"]
    scenario: Scenario = "exact"
    n: list[int] = Field(..., min_length=1)
    replicates: int = Field(default=100, ge=0)
    r1: float | None = Field(default=None, gt=0.0, le=0.5)
    r2: float | None = Field(default=None, gt=0.0, le=0.5)
    estimand: EstimandConfig = Field(default_factory=EstimandConfig)
    nuisance: NuisanceSpec | None = Field(
        default=None, description="Working models for the 'fitted' scenario"
    )
    truth_mc: int = Field(
        default=200_000, ge=1000, description="Monte Carlo size for GM-2 truths"
    )
    gm1_params: GM1Params = Field(default_factory=GM1Params)
    gm2_params: GM2Params = Field(default_factory=GM2Params)

    @model_validator(mode="after")
    def check_scenario(self) -> "ExperimentCell":
        """Scenario arguments match the generator."""
        if self.scenario == "perturbed" and (self.r1 is None or self.r2 is None):
            raise ValueError("perturbed scenario needs r1 and r2")
        if self.generator == "gm2" and not (
            self.scenario.startswith("scenario-") or self.scenario == "fitted"
        ):
            raise ValueError(f"scenario '{self.scenario}' is not available for gm2")
        if self.generator == "gm1" and self.scenario.startswith("scenario-"):
            raise ValueError(f"scenario '{self.scenario}' is not available for gm1")
        return self


class ExperimentPlan(MedexcBaseModel):
    """A Monte Carlo study: a list of cells and a master seed."""

    cells: list[ExperimentCell] = Field(default_factory=list)
    seed: int = Field(default=0, ge=0, lt=2**64)

    @classmethod
    def perturbation_grid(
        cls,
        rates: list[float],
        n: list[int],
        replicates: int,
        seed: int = 0,
        estimand: EstimandConfig | None = None,
    ) -> "ExperimentPlan":
        """GM-1 cells for every (r1, r2) pair of ``rates``."""
        estimand = estimand or EstimandConfig()
        cells = [
            ExperimentCell(
                generator="gm1",
                scenario="perturbed",
                n=n,
                replicates=replicates,
                r1=r1,
                r2=r2,
                estimand=estimand,
            )
            for r1 in rates
            for r2 in rates
        ]
        return cls(cells=cells, seed=seed)

    @classmethod
    def from_file(cls, path: str | Path) -> "ExperimentPlan":
        """Read a plan from a JSON file."""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


class MetricsRow(MedexcBaseModel):
    """Summary of one parameter in one experiment cell at one sample size."""

    generator: str
    scenario: str
    n: int
    r1: float | None = None
    r2: float | None = None
    param: str
    bias: float
    rootn_abs_bias: float
    rmse: float
    ase_sd: float
    coverage: float
    mc_se_coverage: float
    replicates: int
    failed: int


class MetricsTable(MedexcResult):
    """Rows of the Monte Carlo metrics table."""

    rows: list[MetricsRow] = Field(default_factory=list)

    def to_dataframe(self) -> pd.DataFrame:
        """Convert to a DataFrame with the fixed metrics column order."""
        return pd.DataFrame(
            [row.model_dump() for row in self.rows], columns=METRIC_COLUMNS
        )

    def to_csv(self, path: str | Path) -> None:
        """Write the table as CSV (header only when empty)."""
        self.to_dataframe().to_csv(path, index=False, lineterminator="\n")


class TruthResult(MedexcResult):
    """Reference values of the projection coefficients for a generative model."""

    names: list[str]
    values: list[float]
    se: list[float] = Field(..., description="Monte Carlo SEs; zero for closed forms")
    theta: list[ThetaEstimate]
    method: Literal["closed-form", "monte-carlo"]
    n_mc: int = 0

    def to_dataframe(self) -> pd.DataFrame:
        """Coefficient table with one row per parameter."""
        return pd.DataFrame({"param": self.names, "value": self.values, "se": self.se})

    def value(self, name: str) -> float:
        """Reference value of one named coefficient."""
        return self.values[self.names.index(name)]
