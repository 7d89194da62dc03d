"""Reports produced by the identification oracle."""

import pandas as pd
from pydantic import Field

from medexc.models.base import MedexcBaseModel, MedexcResult


class IdentificationCheck(MedexcBaseModel):
    """The three evaluations of one mediation functional theta_t^{ab}."""

    t: int = Field(..., ge=1)
    a: int = Field(..., ge=0, le=1)
    b: int = Field(..., ge=0, le=1)
    definition: float
    gformula: float
    weighting: float
    ok: bool

    @property
    def gap(self) -> float:
        """Largest pairwise disagreement."""
        values = (self.definition, self.gformula, self.weighting)
        return max(values) - min(values)


class AgreementReport(MedexcResult):
    """Outcome of the three-way agreement check over many DGPs."""

    total: int = Field(..., ge=0)
    agreed: int = Field(..., ge=0)
    max_gap: float = 0.0
    tolerance: float
    failures: list[int] = Field(
        default_factory=list, description="Indices of DGPs with a disagreement or error"
    )

    @property
    def ok(self) -> bool:
        """All DGPs agreed."""
        return self.agreed == self.total

    def summary(self) -> str:
        """One-line pass/fail summary such as ``200/200 agree``."""
        return f"{self.agreed}/{self.total} agree"

    def to_dataframe(self) -> pd.DataFrame:
        """Single-row table of the counts."""
        return pd.DataFrame(
            [{"total": self.total, "agreed": self.agreed, "max_gap": self.max_gap}]
        )


class RobustnessCheck(MedexcBaseModel):
    """Population mean of an influence-function term under one nuisance mix."""

    term: str = Field(..., description="phi_aa, phi_ab or weight")
    correct: list[str] = Field(..., description="Nuisance components kept exact")
    t: int = Field(..., ge=1)
    a: int = Field(..., ge=0, le=1)
    b: int = Field(..., ge=0, le=1)
    expected: float
    target: float
    ok: bool


class VerificationReport(MedexcResult):
    """Estimator output on a sample from a discrete DGP against oracle truths."""

    names: list[str]
    estimate: list[float]
    se: list[float]
    truth: list[float]
    n: int
    seed: int

    @property
    def bias(self) -> list[float]:
        """Estimate minus truth per coefficient."""
        return [e - t for e, t in zip(self.estimate, self.truth, strict=True)]

    @property
    def z(self) -> list[float]:
        """Bias in units of the estimated standard error."""
        return [b / s if s > 0 else float("inf") for b, s in zip(self.bias, self.se, strict=True)]

    def within(self, k: float = 3.0) -> bool:
        """Every coefficient lies within k standard errors of its truth."""
        return all(abs(z) < k for z in self.z)

    def to_dataframe(self) -> pd.DataFrame:
        """One row per coefficient with estimate, SE, truth, bias and z."""
        return pd.DataFrame(
            {
                "param": self.names,
                "estimate": self.estimate,
                "se": self.se,
                "truth": self.truth,
                "bias": self.bias,
                "z": self.z,
            }
        )
