"""Pooled history design matrices for the working models."""

import logging

import numpy as np
from numpy.typing import NDArray

from medexc.data.dataset import Dataset
from medexc.data.features import TermExpansion
from medexc.exceptions import ConfigurationError
from medexc.models.estimand import HistoryFeatureSpec

logger = logging.getLogger(__name__)


class HistoryDesign:
    """Feature rows for every (participant, t), pooled over decision points.

    Columns are: intercept, time basis in t, lagged treatment, expanded
    lagged mediator, expanded current covariates, then (for mediator
    models) the expanded current mediator and optional products of the
    current mediator with the covariates and lags. Outcome models fit on
    strata that mix eligible and ineligible rows also get an eligibility
    column. Bases are learned once in :meth:`fit` so that evaluation on other
    datasets (held-out folds) uses the same columns.

    Args:
        spec: Feature recipe
        with_mediator: Include terms in the current mediator
        eligibility: Include the eligibility indicator as a column
    """

    def __init__(
        self, spec: HistoryFeatureSpec, with_mediator: bool, eligibility: bool = False
    ):
        self.spec = spec
        self.with_mediator = with_mediator
        self.eligibility = eligibility
        self.x_columns: list[int] = []
        self._time = TermExpansion(spec.time_basis)
        self._lag_m = TermExpansion(spec.covariate_basis)
        self._x: list[TermExpansion] = []
        self._m = TermExpansion(spec.mediator_basis)
        self._fitted = False

    def fit(self, ds: Dataset, rows: NDArray[np.bool_] | None = None) -> "HistoryDesign":
        """Learn basis knots from the training rows (all rows by default).

        Raises:
            ConfigurationError: If ``x_terms`` names a missing covariate
        """
        rows = np.ones((ds.n, ds.T), dtype=bool) if rows is None else rows
        if self.spec.x_terms == "all":
            self.x_columns = list(range(ds.d))
        else:
            bad = [j for j in self.spec.x_terms if not 0 <= j < ds.d]
            if bad:
                raise ConfigurationError(
                    f"x_terms {bad} out of range for {ds.d} covariates"
                )
            self.x_columns = list(self.spec.x_terms)
        t = np.broadcast_to(np.arange(1, ds.T + 1), (ds.n, ds.T))
        self._time.fit(t[rows])
        self._lag_m.fit(ds.lagged("m")[rows])
        self._x = [
            TermExpansion(self.spec.covariate_basis).fit(ds.x[:, :, j][rows])
            for j in self.x_columns
        ]
        self._m.fit(ds.m[rows])
        self._fitted = True
        logger.debug(
            f"History design with {self.n_columns} columns "
            f"(mediator={self.with_mediator}, eligibility={self.eligibility})"
        )
        return self

    @property
    def n_columns(self) -> int:
        """Number of design columns."""
        if not self._fitted:
            raise RuntimeError("HistoryDesign must be fitted first")
        k = 1 + self._time.n_columns + sum(e.n_columns for e in self._x)
        k += int("a" in self.spec.lags)
        k += self._lag_m.n_columns if "m" in self.spec.lags else 0
        k += int(self.eligibility)
        if self.with_mediator:
            k += self._m.n_columns
            if self.spec.interactions:
                k += len(self.x_columns) + len(self.spec.lags)
        return k

    def matrix(self, ds: Dataset) -> NDArray[np.float64]:
        """Design rows for all (participant, t), shape (n * T, n_columns).

        Rows are participant-major, matching ``array.reshape(-1)`` of an
        (n, T) array.
        """
        if not self._fitted:
            raise RuntimeError("HistoryDesign must be fitted first")
        size = ds.n * ds.T
        t = np.broadcast_to(np.arange(1, ds.T + 1), (ds.n, ds.T)).reshape(-1)
        lag_a = ds.lagged("a").reshape(-1)
        lag_m = ds.lagged("m").reshape(-1)
        m = ds.m.reshape(-1)
        blocks = [np.ones((size, 1)), self._time.transform(t)]
        if "a" in self.spec.lags:
            blocks.append(lag_a[:, None])
        if "m" in self.spec.lags:
            blocks.append(self._lag_m.transform(lag_m))
        for j, expansion in zip(self.x_columns, self._x, strict=True):
            blocks.append(expansion.transform(ds.x[:, :, j].reshape(-1)))
        if self.eligibility:
            blocks.append(ds.i.reshape(-1)[:, None])
        if self.with_mediator:
            blocks.append(self._m.transform(m))
            if self.spec.interactions:
                for j in self.x_columns:
                    blocks.append((m * ds.x[:, :, j].reshape(-1))[:, None])
                for lag in self.spec.lags:
                    blocks.append((m * (lag_a if lag == "a" else lag_m))[:, None])
        return np.hstack(blocks)
