"""Immutable panel dataset and structural validation."""

import logging
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import pandas as pd
from numpy.typing import NDArray

from medexc.exceptions import DataValidationError
from medexc.models.data import TimePointRecord, Trajectory, ValidationReport, Violation

logger = logging.getLogger(__name__)


def _readonly(array: NDArray, dtype: type = float) -> NDArray:
    out = np.array(array, dtype=dtype, copy=True)
    out.flags.writeable = False
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """n participants observed at the same T decision points.

    Arrays are copied on construction and marked read-only, so a dataset can
    be shared between worker threads.

    Attributes:
        x: Covariates, shape (n, T, d)
        i: Eligibility indicators, shape (n, T)
        a: Treatment indicators, shape (n, T)
        m: Mediators, shape (n, T)
        y: Distal outcomes, shape (n,)
        ids: Participant keys
    """

    x: NDArray[np.float64]
    i: NDArray[np.float64]
    a: NDArray[np.float64]
    m: NDArray[np.float64]
    y: NDArray[np.float64]
    ids: tuple[str, ...] = field(default=())

    def __post_init__(self) -> None:
        x = np.asarray(self.x, dtype=float)
        if x.ndim == 2:
            x = x[:, :, None]
        i, a, m = (np.asarray(v, dtype=float) for v in (self.i, self.a, self.m))
        y = np.asarray(self.y, dtype=float)
        if i.ndim != 2:
            raise DataValidationError(f"eligibility must be 2-dimensional, got {i.shape}")
        n, T = i.shape
        if a.shape != (n, T) or m.shape != (n, T) or x.shape[:2] != (n, T):
            raise DataValidationError("x, i, a, m must share the (n, T) shape")
        if y.shape != (n,):
            raise DataValidationError(f"y must have shape ({n},), got {y.shape}")
        ids = tuple(self.ids) if self.ids else tuple(str(k + 1) for k in range(n))
        if len(ids) != n:
            raise DataValidationError(f"expected {n} ids, got {len(ids)}")
        object.__setattr__(self, "x", _readonly(x))
        object.__setattr__(self, "i", _readonly(i))
        object.__setattr__(self, "a", _readonly(a))
        object.__setattr__(self, "m", _readonly(m))
        object.__setattr__(self, "y", _readonly(y))
        object.__setattr__(self, "ids", ids)

    @property
    def n(self) -> int:
        """Number of participants."""
        return self.i.shape[0]

    @property
    def T(self) -> int:
        """Number of decision points."""
        return self.i.shape[1]

    @property
    def d(self) -> int:
        """Covariate dimension."""
        return self.x.shape[2]

    def __len__(self) -> int:
        return self.n

    def __repr__(self) -> str:
        return f"Dataset(n={self.n}, T={self.T}, d={self.d})"

    def lagged(self, name: str) -> NDArray[np.float64]:
        """Previous-decision-point values of ``a`` or ``m``, zero at t=1."""
        values = getattr(self, name)
        out = np.zeros_like(values)
        out[:, 1:] = values[:, :-1]
        return out

    def subset(self, index: Sequence[int] | NDArray) -> "Dataset":
        """Participants selected by position."""
        index = np.asarray(index, dtype=int)
        return Dataset(
            x=self.x[index],
            i=self.i[index],
            a=self.a[index],
            m=self.m[index],
            y=self.y[index],
            ids=tuple(self.ids[k] for k in index),
        )

    @property
    def eligibility_rate(self) -> float:
        """Fraction of decision points with I_t = 1."""
        return float(self.i.mean())

    @classmethod
    def from_trajectories(cls, trajectories: Sequence[Trajectory]) -> "Dataset":
        """Stack trajectories that share T and covariate dimension.

        Raises:
            DataValidationError: If the trajectories cannot form a panel
        """
        report = validate_dataset(trajectories)
        structural = [
            v
            for v in report.violations
            if v.message in ("common-T breach", "covariate dimension breach")
            or v.message.startswith("fewer than")
        ]
        if structural:
            raise DataValidationError(
                f"Trajectories do not form a panel: {ValidationReport(violations=structural).summary()}",
                report=report,
            )
        return cls(
            x=[[p.x for p in tr.points] for tr in trajectories],
            i=[[p.i for p in tr.points] for tr in trajectories],
            a=[[p.a for p in tr.points] for tr in trajectories],
            m=[[p.m for p in tr.points] for tr in trajectories],
            y=[tr.y for tr in trajectories],
            ids=tuple(tr.id or str(k + 1) for k, tr in enumerate(trajectories)),
        )

    def trajectories(self) -> list[Trajectory]:
        """Per-participant records."""
        return [
            Trajectory(
                id=self.ids[k],
                points=[
                    TimePointRecord(
                        x=self.x[k, t].tolist(),
                        i=int(self.i[k, t]),
                        a=int(self.a[k, t]),
                        m=float(self.m[k, t]),
                    )
                    for t in range(self.T)
                ],
                y=float(self.y[k]),
            )
            for k in range(self.n)
        ]

    def to_dataframe(self) -> pd.DataFrame:
        """Long-format frame with columns ``id,t,I,A,M,Y,X1..Xd``."""
        n, T = self.n, self.T
        frame = pd.DataFrame(
            {
                "id": np.repeat(np.asarray(self.ids, dtype=object), T),
                "t": np.tile(np.arange(1, T + 1), n),
                "I": self.i.reshape(-1).astype(int),
                "A": self.a.reshape(-1).astype(int),
                "M": self.m.reshape(-1),
                "Y": np.repeat(self.y, T),
            }
        )
        for j in range(self.d):
            frame[f"X{j + 1}"] = self.x[:, :, j].reshape(-1)
        return frame


def _validate_arrays(ds: Dataset) -> list[Violation]:
    violations: list[Violation] = []

    def report(mask: NDArray[np.bool_], message: str) -> None:
        for k, t in np.argwhere(mask):
            violations.append(
                Violation(participant=int(k), t=int(t) + 1, message=f"{message} at t={t + 1}")
            )

    report(~np.isin(ds.i, (0.0, 1.0)), "eligibility not binary")
    report(~np.isin(ds.a, (0.0, 1.0)), "treatment not binary")
    report((ds.i == 0) & (ds.a == 1), "ineligible treated")
    report(~np.isfinite(ds.m), "non-finite mediator")
    report(~np.all(np.isfinite(ds.x), axis=2), "non-finite covariate")
    for k in np.flatnonzero(~np.isfinite(ds.y)):
        violations.append(Violation(participant=int(k), message="non-finite distal outcome"))
    return violations


def _validate_trajectories(trajectories: Sequence[Trajectory]) -> list[Violation]:
    violations: list[Violation] = []
    T = trajectories[0].T if trajectories else 0
    d = len(trajectories[0].points[0].x) if trajectories else 0
    for k, tr in enumerate(trajectories):
        if tr.T != T:
            violations.append(Violation(participant=k, message="common-T breach"))
        if not np.isfinite(tr.y):
            violations.append(Violation(participant=k, message="non-finite distal outcome"))
        for t, point in enumerate(tr.points, start=1):
            if len(point.x) != d:
                violations.append(
                    Violation(participant=k, t=t, message="covariate dimension breach")
                )
            if point.i == 0 and point.a == 1:
                violations.append(
                    Violation(participant=k, t=t, message=f"ineligible treated at t={t}")
                )
            if not np.isfinite(point.m):
                violations.append(
                    Violation(participant=k, t=t, message=f"non-finite mediator at t={t}")
                )
            if not np.all(np.isfinite(point.x)):
                violations.append(
                    Violation(participant=k, t=t, message=f"non-finite covariate at t={t}")
                )
    return violations


def validate_dataset(data: Dataset | Sequence[Trajectory]) -> ValidationReport:
    """Report every violated structural invariant.

    Accepts either an assembled :class:`Dataset` or the raw trajectories that
    would form one; only the latter can exhibit ragged lengths.

    Args:
        data: Dataset or sequence of trajectories

    Returns:
        Report listing violations with participant index and decision point

    Example:
        >>> report = validate_dataset(dataset)
        >>> report.ok
        True
    """
    if isinstance(data, Dataset):
        n = data.n
        violations = _validate_arrays(data)
    else:
        n = len(data)
        violations = _validate_trajectories(data)
    if n < 2:
        violations.insert(0, Violation(message=f"fewer than 2 participants (n={n})"))
    report = ValidationReport(violations=violations)
    if not report.ok:
        logger.debug(f"Validation found {len(violations)} violations")
    return report


def require_valid(ds: Dataset) -> None:
    """Raise if ``ds`` violates any structural invariant.

    Raises:
        DataValidationError: Carrying the full report
    """
    report = validate_dataset(ds)
    if not report.ok:
        raise DataValidationError(f"Invalid dataset: {report.summary()}", report=report)
