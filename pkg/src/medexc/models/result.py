"""Result models for estimation runs."""

from typing import TYPE_CHECKING, Any

import numpy as np
import pandas as pd
from pydantic import Field

from medexc.models.base import MedexcBaseModel, MedexcResult

if TYPE_CHECKING:
    from numpy.typing import NDArray


class EffectCurvePoint(MedexcBaseModel):
    """Pointwise effect estimates at one decision point."""

    t: int = Field(..., ge=1)
    direct: float | None = None
    direct_se: float | None = None
    direct_lower: float | None = None
    direct_upper: float | None = None
    indirect: float | None = None
    indirect_se: float | None = None
    indirect_lower: float | None = None
    indirect_upper: float | None = None
    total: float
    total_se: float
    total_lower: float
    total_upper: float


class ThetaEstimate(MedexcBaseModel):
    """Sample means of the four influence-function terms at one decision point."""

    t: int = Field(..., ge=1)
    theta_00: float
    theta_01: float
    theta_10: float
    theta_11: float


class Diagnostics(MedexcBaseModel):
    """Numerical bookkeeping collected while estimating."""

    n: int
    T: int
    provenance: str = Field(..., description="How the nuisance functions were obtained")
    clip_activations: int = Field(
        default=0, description="Probability evaluations moved onto the clip bounds"
    )
    weight_ratio_max: float = Field(
        default=0.0, description="Largest cross-world weight ratio q(b)/q(a) seen"
    )
    weight_ratio_exceedances: int = Field(
        default=0, description="Cross-world ratios above the warning threshold"
    )
    condition_number: float = Field(..., description="Condition number of M")
    solver_residual: float = Field(
        ..., description="Sup norm of the averaged estimating function at the solution"
    )
    fold_sizes: list[int] = Field(default_factory=list)
    folds: list[int] = Field(
        default_factory=list, description="Fold index per participant (cross-fit)"
    )


class EstimateResult(MedexcResult):
    """Projection coefficients with sandwich covariance and effect curves.

    Coefficients are ordered as alpha (direct) then beta (indirect), each of
    length p; with ``effect_pair="total"`` only the total-effect block is
    present.
    """

    names: list[str]
    gamma_hat: list[float]
    cov: list[list[float]]
    se: list[float]
    ci: list[tuple[float, float]]
    level: float
    effect_pair: str
    effect_curves: list[EffectCurvePoint] = Field(default_factory=list)
    theta_hat: list[ThetaEstimate] = Field(default_factory=list)
    diagnostics: Diagnostics
    config_echo: dict[str, Any] = Field(default_factory=dict)

    @property
    def gamma(self) -> "NDArray[np.float64]":
        """Coefficient vector as an array."""
        return np.asarray(self.gamma_hat, dtype=float)

    @property
    def covariance(self) -> "NDArray[np.float64]":
        """Covariance matrix as an array."""
        return np.asarray(self.cov, dtype=float)

    @property
    def p(self) -> int:
        """Dimension of each coefficient block."""
        return len(self.gamma_hat) if self.effect_pair == "total" else len(self.gamma_hat) // 2

    @property
    def alpha(self) -> "NDArray[np.float64]":
        """Direct-effect coefficients (empty for total-only fits)."""
        return np.array([]) if self.effect_pair == "total" else self.gamma[: self.p]

    @property
    def beta(self) -> "NDArray[np.float64]":
        """Indirect-effect coefficients (empty for total-only fits)."""
        return np.array([]) if self.effect_pair == "total" else self.gamma[self.p :]

    def coefficient_table(self) -> pd.DataFrame:
        """Coefficients with standard errors and interval bounds."""
        return pd.DataFrame(
            {
                "param": self.names,
                "estimate": self.gamma_hat,
                "se": self.se,
                "lower": [lo for lo, _ in self.ci],
                "upper": [hi for _, hi in self.ci],
            }
        )

    def to_dataframe(self) -> pd.DataFrame:
        """Convert the effect curves to a DataFrame, one row per decision point.

        Returns:
            DataFrame indexed by ``t`` with estimate, SE and bounds per effect

        Example:
            >>> result = estimate(dataset, NuisanceSpec(), EstimandConfig())
            >>> result.to_dataframe()[["direct", "indirect", "total"]]
        """
        df = pd.DataFrame([point.model_dump() for point in self.effect_curves])
        if df.empty:
            return df
        return df.dropna(axis=1, how="all").set_index("t")
