"""Pointwise effect curves f(t)'alpha and f(t)'beta with Wald bands."""

import numpy as np
from numpy.typing import NDArray
from scipy.stats import norm

from medexc.data.features import feature_matrix
from medexc.models.estimand import EffectPair, FeatureMap
from medexc.models.result import EffectCurvePoint, EstimateResult


def _linear_curve(
    G: NDArray, gamma: NDArray, cov: NDArray, z: float
) -> tuple[NDArray, NDArray, NDArray, NDArray]:
    value = G @ gamma
    se = np.sqrt(np.clip(np.einsum("tj,jk,tk->t", G, cov, G), 0.0, None))
    return value, se, value - z * se, value + z * se


def curve_points(
    gamma: NDArray[np.float64],
    cov: NDArray[np.float64],
    F: NDArray[np.float64],
    effect_pair: EffectPair,
    level: float,
) -> list[EffectCurvePoint]:
    """Evaluate the effect curves at every decision point.

    The total curve uses [F, F] on the joint coefficient vector, so its
    standard error accounts for the covariance between the two blocks.
    """
    T, p = F.shape
    z = float(norm.ppf(0.5 + level / 2))
    zeros = np.zeros_like(F)
    if effect_pair == "total":
        total = _linear_curve(F, gamma, cov, z)
        curves = {}
    else:
        curves = {
            "direct": _linear_curve(np.hstack([F, zeros]), gamma, cov, z),
            "indirect": _linear_curve(np.hstack([zeros, F]), gamma, cov, z),
        }
        total = _linear_curve(np.hstack([F, F]), gamma, cov, z)
    points = []
    for t in range(T):
        fields = {
            f"{name}{suffix}": float(values[k][t])
            for name, values in curves.items()
            for k, suffix in enumerate(("", "_se", "_lower", "_upper"))
        }
        points.append(
            EffectCurvePoint(
                t=t + 1,
                total=float(total[0][t]),
                total_se=float(total[1][t]),
                total_lower=float(total[2][t]),
                total_upper=float(total[3][t]),
                **fields,
            )
        )
    return points


def effect_curves(
    result: EstimateResult, feature_map: FeatureMap, level: float | None = None
) -> list[EffectCurvePoint]:
    """Recompute effect curves of a result, optionally at another level.

    Example:
        >>> curves = effect_curves(result, FeatureMap(kind="linear"), level=0.9)
        >>> curves[0].direct == result.alpha[0]
        True
    """
    F = feature_matrix(feature_map, result.diagnostics.T)
    if F.shape[1] != result.p:
        raise ValueError(
            f"Feature map has dimension {F.shape[1]}, result has {result.p} per block"
        )
    return curve_points(
        result.gamma,
        result.covariance,
        F,
        result.effect_pair,  # type: ignore[arg-type]
        result.level if level is None else level,
    )
