"""Finite-support sequential generative model used for exact enumeration."""

from pathlib import Path
from typing import Any

import numpy as np
from pydantic import Field, model_validator

from medexc.models.base import MedexcBaseModel

ROW_TOLERANCE = 1e-12


class DiscreteDGP(MedexcBaseModel):
    """Conditional probability tables of a small discrete trajectory law.

    Every table is indexed first by the decision point, then by the previous
    treatment and the index of the previous mediator value (both zero at the
    first decision point), then by the current variables:

    - ``x_cpt[t, pa, pm, x]``: P(X_t = x | prev)
    - ``i_cpt[t, pa, pm, x]``: P(I_t = 1 | prev, X_t)
    - ``a_cpt[t, pa, pm, x]``: P(A_t = 1 | prev, X_t, I_t = 1); ineligible
      points are never treated
    - ``m_cpt[t, pa, pm, x, i, a, m]``: P(M_t = m | prev, X_t, I_t, A_t)

    ``y_mean`` holds E[Y | path] with axes (x, i, a, m) repeated T times.
    Since the mediator law only depends on the observed history and the
    current treatment, cross-world mediator draws are well defined.
    """

    T: int = Field(..., ge=1, le=3)
    x_support: list[float] = Field(..., min_length=1, max_length=4)
    m_support: list[float] = Field(..., min_length=1, max_length=4)
    x_cpt: list[Any]
    i_cpt: list[Any]
    a_cpt: list[Any]
    m_cpt: list[Any]
    y_mean: list[Any]
    y_sd: float = Field(default=1.0, ge=0.0, description="Outcome noise when sampling")

    @property
    def nx(self) -> int:
        """Size of the covariate support."""
        return len(self.x_support)

    @property
    def nm(self) -> int:
        """Size of the mediator support."""
        return len(self.m_support)

    @property
    def step_shape(self) -> tuple[int, int, int, int]:
        """Axes (x, i, a, m) contributed by one decision point."""
        return (self.nx, 2, 2, self.nm)

    def table(self, name: str) -> np.ndarray:
        """A conditional table as a float array."""
        return np.asarray(getattr(self, name), dtype=float)

    @model_validator(mode="after")
    def check_tables(self) -> "DiscreteDGP":
        """Tables have matching shapes and valid probability rows."""
        if len(set(self.x_support)) != self.nx or len(set(self.m_support)) != self.nm:
            raise ValueError("supports must not repeat values")
        prev = (self.T, 2, self.nm)
        expected = {
            "x_cpt": (*prev, self.nx),
            "i_cpt": (*prev, self.nx),
            "a_cpt": (*prev, self.nx),
            "m_cpt": (*prev, self.nx, 2, 2, self.nm),
            "y_mean": self.step_shape * self.T,
        }
        for name, shape in expected.items():
            try:
                array = self.table(name)
            except ValueError as err:
                raise ValueError(f"{name} is not a rectangular array") from err
            if array.shape != shape:
                raise ValueError(f"{name} has shape {array.shape}, expected {shape}")
            if not np.all(np.isfinite(array)):
                raise ValueError(f"{name} has non-finite entries")
        for name in ("x_cpt", "i_cpt", "a_cpt", "m_cpt"):
            array = self.table(name)
            if np.any(array < 0) or np.any(array > 1):
                raise ValueError(f"{name} has entries outside [0, 1]")
        for name in ("x_cpt", "m_cpt"):
            sums = self.table(name).sum(axis=-1)
            if np.max(np.abs(sums - 1.0)) > ROW_TOLERANCE:
                raise ValueError(f"{name} rows must sum to 1")
        return self

    @classmethod
    def from_file(cls, path: str | Path) -> "DiscreteDGP":
        """Read a DGP from a JSON file."""
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))

    @classmethod
    def from_arrays(
        cls,
        x_support: list[float],
        m_support: list[float],
        x_cpt: np.ndarray,
        i_cpt: np.ndarray,
        a_cpt: np.ndarray,
        m_cpt: np.ndarray,
        y_mean: np.ndarray,
        y_sd: float = 1.0,
    ) -> "DiscreteDGP":
        """Build a DGP from numpy tables."""
        return cls(
            T=np.asarray(x_cpt).shape[0],
            x_support=list(map(float, x_support)),
            m_support=list(map(float, m_support)),
            x_cpt=np.asarray(x_cpt, dtype=float).tolist(),
            i_cpt=np.asarray(i_cpt, dtype=float).tolist(),
            a_cpt=np.asarray(a_cpt, dtype=float).tolist(),
            m_cpt=np.asarray(m_cpt, dtype=float).tolist(),
            y_mean=np.asarray(y_mean, dtype=float).tolist(),
            y_sd=y_sd,
        )
