"""Configuration documents for nuisance working models and projection estimands."""

from typing import Literal

from pydantic import Field, field_validator, model_validator

from medexc.models.base import MedexcBaseModel

EffectPair = Literal["primary", "swapped", "total"]


class BasisSpec(MedexcBaseModel):
    """Expansion used for a single scalar term of a working model.

    ``none`` drops the term, ``linear`` keeps the raw value, ``polynomial``
    adds powers up to ``degree`` and ``bspline`` uses a cubic B-spline with
    ``df`` columns (one fewer once an intercept is present).
    """

    kind: Literal["none", "linear", "polynomial", "bspline"] = Field(
        default="bspline", description="Basis family"
    )
    degree: int = Field(default=3, ge=1, le=8, description="Polynomial degree")
    df: int = Field(default=5, ge=4, le=20, description="B-spline degrees of freedom")


class HistoryFeatureSpec(MedexcBaseModel):
    """Feature construction for one pooled working model.

    Rows are pooled over decision points; ``time_basis`` carries the
    dependence on t. ``mediator_basis`` only enters the models that condition
    on the current mediator (q and mu).
    """

    time_basis: BasisSpec = Field(default_factory=BasisSpec)
    mediator_basis: BasisSpec = Field(default_factory=BasisSpec)
    covariate_basis: BasisSpec = Field(
        default_factory=BasisSpec,
        description="Expansion for current covariates and the lagged mediator",
    )
    lags: list[Literal["a", "m"]] = Field(
        default_factory=lambda: ["a", "m"],
        description="Lagged terms: previous treatment and/or previous mediator",
    )
    x_terms: Literal["all"] | list[int] = Field(
        default="all", description="Current covariate components (0-based)"
    )
    interactions: bool = Field(
        default=False,
        description="Add products of the current mediator with covariates and lags",
    )
    ridge: float | None = Field(
        default=None, ge=0.0, description="Ridge penalty; None uses the global setting"
    )
    clip: float | None = Field(
        default=None,
        gt=0.0,
        lt=0.5,
        description="Probability clip; None uses the global setting",
    )

    @field_validator("lags")
    @classmethod
    def unique_lags(cls, v: list[str]) -> list[str]:
        """Drop repeated lag flags while keeping order."""
        return list(dict.fromkeys(v))

    @classmethod
    def time_only(cls, df: int = 5) -> "HistoryFeatureSpec":
        """A working model with a smooth term in t and nothing else."""
        return cls(
            time_basis=BasisSpec(kind="bspline", df=df),
            mediator_basis=BasisSpec(kind="none"),
            lags=[],
            x_terms=[],
        )


class NuisanceSpec(MedexcBaseModel):
    """Working models for the five nuisance functions.

    ``p="known"`` switches to known-propensity mode, in which the propensity
    is supplied by the caller. Outcome models may be replaced by the constant
    zero function.

    Example:
        >>> spec = NuisanceSpec(p="known", eta="zero", nu="zero")
        >>> spec.mode
        'known-propensity'
    """

    p: HistoryFeatureSpec | Literal["known"] = Field(default_factory=HistoryFeatureSpec)
    q: HistoryFeatureSpec = Field(default_factory=HistoryFeatureSpec)
    eta: HistoryFeatureSpec | Literal["zero"] = Field(
        default_factory=HistoryFeatureSpec
    )
    mu: HistoryFeatureSpec | Literal["zero"] = Field(default_factory=HistoryFeatureSpec)
    nu: HistoryFeatureSpec | Literal["zero"] = Field(default_factory=HistoryFeatureSpec)

    @property
    def mode(self) -> Literal["fitted", "known-propensity"]:
        """Fitting mode implied by the propensity entry."""
        return "known-propensity" if self.p == "known" else "fitted"


class FeatureMap(MedexcBaseModel):
    """Feature vector f(t) of the projection estimand.

    ``constant`` is [1]; ``linear`` is [1, t-1]; ``polynomial`` is
    [1, (t-1), ..., (t-1)^degree]; ``bspline`` is a cubic B-spline basis on
    [1, T] with ``df`` columns that already spans the constant.
    """

    kind: Literal["constant", "linear", "polynomial", "bspline"] = "constant"
    degree: int = Field(default=2, ge=1, le=8)
    df: int = Field(default=6, ge=4, le=20)

    @property
    def dimension(self) -> int:
        """Number of features p."""
        if self.kind == "constant":
            return 1
        if self.kind == "linear":
            return 2
        if self.kind == "polynomial":
            return self.degree + 1
        return self.df

    @classmethod
    def parse(cls, text: str) -> "FeatureMap":
        """Parse ``constant``, ``linear``, ``polynomial:K`` or ``bspline:DF``.

        Raises:
            ValueError: If the text names no known feature map
        """
        kind, _, arg = text.strip().lower().partition(":")
        if kind == "polynomial":
            return cls(kind="polynomial", degree=int(arg or 2))
        if kind == "bspline":
            return cls(kind="bspline", df=int(arg or 6))
        if kind in ("constant", "linear") and not arg:
            return cls(kind=kind)
        raise ValueError(f"Unknown feature map '{text}'")

    def labels(self) -> list[str]:
        """Short coefficient labels, 1-based."""
        return [str(k + 1) for k in range(self.dimension)]


class WeightVector(MedexcBaseModel):
    """Normalized nonnegative weights omega(t) over decision points."""

    w: list[float] = Field(..., min_length=1)

    @field_validator("w")
    @classmethod
    def check_normalized(cls, v: list[float]) -> list[float]:
        """Weights are nonnegative and sum to one."""
        if any(value < 0 for value in v):
            raise ValueError("weights must be nonnegative")
        if abs(sum(v) - 1.0) > 1e-12:
            raise ValueError(f"weights must sum to 1, got {sum(v)!r}")
        return v

    @property
    def T(self) -> int:
        """Number of decision points covered."""
        return len(self.w)


class WeightSpec(MedexcBaseModel):
    """Recipe for omega(t), resolved once the number of decision points is known."""

    kind: Literal["uniform", "point-mass", "custom"] = "uniform"
    t0: int | None = Field(default=None, ge=1, description="Point-mass location")
    values: list[float] | None = Field(default=None, description="Custom weights")

    @model_validator(mode="after")
    def check_arguments(self) -> "WeightSpec":
        """Point mass needs t0 and custom needs values."""
        if self.kind == "point-mass" and self.t0 is None:
            raise ValueError("point-mass weights need t0")
        if self.kind == "custom" and not self.values:
            raise ValueError("custom weights need values")
        return self

    @classmethod
    def parse(cls, text: str) -> "WeightSpec":
        """Parse ``uniform``, ``point:T0`` or ``custom:w1,w2,...``.

        Raises:
            ValueError: If the text names no known weighting
        """
        kind, _, arg = text.strip().lower().partition(":")
        if kind == "uniform" and not arg:
            return cls()
        if kind in ("point", "point-mass"):
            return cls(kind="point-mass", t0=int(arg))
        if kind == "custom":
            return cls(kind="custom", values=[float(v) for v in arg.split(",")])
        raise ValueError(f"Unknown weighting '{text}'")


class EstimandConfig(MedexcBaseModel):
    """Projection estimand and inference settings."""

    feature_map: FeatureMap = Field(default_factory=FeatureMap)
    weights: WeightSpec = Field(default_factory=WeightSpec)
    effect_pair: EffectPair = Field(
        default="primary",
        description="primary: (NDEE0, NIEE1); swapped: (NDEE1, NIEE0); total: TEE only",
    )
    folds: int = Field(default=0, ge=0, description="Cross-fitting folds; 0 disables")
    level: float = Field(default=0.95, gt=0.0, lt=1.0, description="Confidence level")

    @field_validator("folds")
    @classmethod
    def check_folds(cls, v: int) -> int:
        """Cross-fitting needs at least two folds."""
        if v == 1:
            raise ValueError("folds must be 0 (no cross-fitting) or at least 2")
        return v

    def parameter_names(self) -> list[str]:
        """Names of the reported coefficients in order."""
        labels = self.feature_map.labels()
        if self.effect_pair == "total":
            return [f"total_{k}" for k in labels]
        return [f"alpha_{k}" for k in labels] + [f"beta_{k}" for k in labels]
