"""Feature maps f(t), weights omega(t) and scalar basis expansions."""

import logging
from collections.abc import Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.interpolate import BSpline

from medexc.exceptions import ConfigurationError
from medexc.models.estimand import BasisSpec, FeatureMap, WeightSpec, WeightVector

logger = logging.getLogger(__name__)

SPLINE_DEGREE = 3


def _augmented_knots(lo: float, hi: float, interior: NDArray, degree: int) -> NDArray:
    return np.concatenate([[lo] * (degree + 1), interior, [hi] * (degree + 1)])


def bspline_design(
    values: ArrayLike, knots: NDArray, degree: int = SPLINE_DEGREE
) -> NDArray[np.float64]:
    """Evaluate every B-spline of an augmented knot vector at ``values``.

    Values are clamped to the boundary knots, so each row sums to one.
    """
    x = np.clip(np.asarray(values, dtype=float).reshape(-1), knots[0], knots[-1])
    return BSpline.design_matrix(x, knots, degree).toarray()


def feature_matrix(feature_map: FeatureMap, T: int) -> NDArray[np.float64]:
    """Rows f(1), ..., f(T) stacked into a (T, p) matrix.

    Raises:
        ConfigurationError: If a B-spline map is requested with T < 2
    """
    t = np.arange(1, T + 1, dtype=float)
    if feature_map.kind == "constant":
        return np.ones((T, 1))
    if feature_map.kind == "linear":
        return np.column_stack([np.ones(T), t - 1])
    if feature_map.kind == "polynomial":
        return np.vander(t - 1, feature_map.degree + 1, increasing=True)
    if T < 2:
        raise ConfigurationError("A B-spline feature map needs at least two decision points")
    n_interior = feature_map.df - SPLINE_DEGREE - 1
    probs = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
    interior = np.quantile(t, probs)
    knots = _augmented_knots(1.0, float(T), interior, SPLINE_DEGREE)
    return bspline_design(t, knots)


def evaluate_feature_map(feature_map: FeatureMap, t: int, T: int) -> NDArray[np.float64]:
    """f(t) for a single decision point ``t`` in 1..T.

    Example:
        >>> evaluate_feature_map(FeatureMap(kind="linear"), t=3, T=5)
        array([1., 2.])
    """
    if not 1 <= t <= T:
        raise ConfigurationError(f"Decision point {t} outside 1..{T}")
    return feature_matrix(feature_map, T)[t - 1]


def make_weights(
    kind: str,
    T: int,
    t0: int | None = None,
    values: Sequence[float] | None = None,
) -> WeightVector:
    """Build normalized weights omega(t).

    Args:
        kind: ``"uniform"``, ``"point-mass"`` or ``"custom"``
        T: Number of decision points
        t0: Location of the point mass (1-based)
        values: Unnormalized custom weights of length T

    Returns:
        Weights summing to one

    Raises:
        ConfigurationError: For an unknown kind, t0 outside 1..T, or custom
            values that are negative, all zero or of the wrong length

    Example:
        >>> make_weights("custom", T=3, values=[2, 2, 0]).w
        [0.5, 0.5, 0.0]
    """
    if T < 1:
        raise ConfigurationError(f"T must be positive, got {T}")
    if kind == "uniform":
        w = np.full(T, 1.0 / T)
    elif kind == "point-mass":
        if t0 is None or not 1 <= t0 <= T:
            raise ConfigurationError(f"Point mass t0={t0} outside 1..{T}")
        w = np.zeros(T)
        w[t0 - 1] = 1.0
    elif kind == "custom":
        raw = np.asarray(values if values is not None else [], dtype=float)
        if raw.shape != (T,):
            raise ConfigurationError(f"Custom weights need {T} entries, got {raw.size}")
        if np.any(raw < 0) or not np.all(np.isfinite(raw)):
            raise ConfigurationError("Custom weights must be finite and nonnegative")
        total = raw.sum()
        if total <= 0:
            raise ConfigurationError("Custom weights are all zero")
        w = raw / total
        # Absorb rounding so the sum is exactly representable as one
        w[np.argmax(w)] += 1.0 - w.sum()
    else:
        raise ConfigurationError(f"Unknown weight kind '{kind}'")
    return WeightVector(w=w.tolist())


def resolve_weights(spec: WeightSpec, T: int) -> WeightVector:
    """Resolve a weight recipe once T is known."""
    return make_weights(spec.kind, T, t0=spec.t0, values=spec.values)


class SplineBasis:
    """Cubic B-spline expansion of one scalar term, learned from training values.

    Boundary knots sit at the training range and interior knots at its
    quantiles; new values are clamped to the training range. Without an
    intercept the first basis function is dropped so the expansion can sit
    next to a model intercept. Terms with too few distinct values fall back
    to standardized powers.

    Example:
        >>> basis = SplineBasis(df=5).fit(train_values)
        >>> basis.transform(new_values).shape
        (len(new_values), basis.n_columns)
    """

    def __init__(self, df: int = 5, intercept: bool = False):
        self.df = df
        self.intercept = intercept
        self.knots: NDArray | None = None
        self.power_degree = 0
        self.center = 0.0
        self.scale = 1.0
        self._fitted = False

    def fit(self, values: ArrayLike) -> "SplineBasis":
        """Place knots from the training values."""
        v = np.asarray(values, dtype=float).reshape(-1)
        v = v[np.isfinite(v)]
        unique = np.unique(v)
        n_basis = self.df + (0 if self.intercept else 1)
        n_interior = n_basis - SPLINE_DEGREE - 1
        self.knots = None
        if unique.size > SPLINE_DEGREE + 1:
            probs = np.linspace(0.0, 1.0, n_interior + 2)[1:-1]
            lo, hi = float(unique[0]), float(unique[-1])
            interior = np.unique(np.quantile(v, probs))
            interior = interior[(interior > lo) & (interior < hi)]
            self.knots = _augmented_knots(lo, hi, interior, SPLINE_DEGREE)
        else:
            # Few distinct values: a polynomial of full rank on the support
            self.power_degree = max(0, min(self.df, unique.size - 1))
            if unique.size:
                self.center = float(unique.mean())
                self.scale = float(np.ptp(unique)) or 1.0
            logger.debug(
                f"Spline fallback to degree-{self.power_degree} polynomial "
                f"({unique.size} distinct values)"
            )
        self._fitted = True
        return self

    @property
    def n_columns(self) -> int:
        """Number of columns produced by :meth:`transform`."""
        if not self._fitted:
            raise RuntimeError("SplineBasis must be fitted first")
        if self.knots is not None:
            n_basis = self.knots.size - SPLINE_DEGREE - 1
            return n_basis if self.intercept else n_basis - 1
        return self.power_degree + (1 if self.intercept else 0)

    def transform(self, values: ArrayLike) -> NDArray[np.float64]:
        """Expand values into a (len(values), n_columns) matrix."""
        if not self._fitted:
            raise RuntimeError("SplineBasis must be fitted first")
        v = np.asarray(values, dtype=float).reshape(-1)
        if self.knots is not None:
            design = bspline_design(v, self.knots)
            return design if self.intercept else design[:, 1:]
        z = (v - self.center) / self.scale
        start = 0 if self.intercept else 1
        return np.vander(z, self.power_degree + 1, increasing=True)[:, start:]


class TermExpansion:
    """Apply a :class:`BasisSpec` to one scalar term (no intercept column)."""

    def __init__(self, spec: BasisSpec):
        self.spec = spec
        self._spline: SplineBasis | None = None
        self.center = 0.0
        self.scale = 1.0

    def fit(self, values: ArrayLike) -> "TermExpansion":
        """Learn knots or standardization from training values."""
        v = np.asarray(values, dtype=float).reshape(-1)
        if self.spec.kind == "bspline":
            self._spline = SplineBasis(df=self.spec.df).fit(v)
        elif self.spec.kind == "polynomial" and v.size:
            self.center = float(v.mean())
            self.scale = float(v.std()) or 1.0
        return self

    @property
    def n_columns(self) -> int:
        """Number of columns produced."""
        if self.spec.kind == "none":
            return 0
        if self.spec.kind == "linear":
            return 1
        if self.spec.kind == "polynomial":
            return self.spec.degree
        assert self._spline is not None
        return self._spline.n_columns

    def transform(self, values: ArrayLike) -> NDArray[np.float64]:
        """Expand values into a (len(values), n_columns) matrix."""
        v = np.asarray(values, dtype=float).reshape(-1)
        if self.spec.kind == "none":
            return np.empty((v.size, 0))
        if self.spec.kind == "linear":
            return v[:, None]
        if self.spec.kind == "polynomial":
            z = (v - self.center) / self.scale
            return np.vander(z, self.spec.degree + 1, increasing=True)[:, 1:]
        assert self._spline is not None
        return self._spline.transform(v)
