"""CSV ingestion and emission in long format (``id,t,I,A,M,Y,X1..Xd``)."""

import logging
import re
from pathlib import Path

import numpy as np
import pandas as pd

from medexc.data.dataset import Dataset
from medexc.exceptions import DataFormatError

logger = logging.getLogger(__name__)

FIXED_COLUMNS = ["id", "t", "I", "A", "M", "Y"]
_COVARIATE = re.compile(r"^X(\d+)$")


def _check_header(columns: list[str]) -> int:
    if columns[: len(FIXED_COLUMNS)] != FIXED_COLUMNS:
        raise DataFormatError(
            f"malformed header: expected {','.join(FIXED_COLUMNS)},X1,...,Xd; "
            f"got {','.join(columns)}",
            line=1,
        )
    extra = columns[len(FIXED_COLUMNS) :]
    for j, name in enumerate(extra, start=1):
        match = _COVARIATE.match(name)
        if match is None or int(match.group(1)) != j:
            raise DataFormatError(
                f"malformed header: column '{name}' should be 'X{j}'", line=1
            )
    return len(extra)


def _numeric(frame: pd.DataFrame, column: str) -> np.ndarray:
    cells = frame[column].str.strip()
    bad = pd.to_numeric(cells, errors="coerce").isna().to_numpy()
    if bad.any():
        row = int(np.flatnonzero(bad)[0])
        raise DataFormatError(
            f"non-numeric cell in column '{column}': {frame[column].iloc[row]!r}",
            line=row + 2,
            participant=str(frame["id"].iloc[row]),
        )
    # pandas' fast parser is not correctly rounded; str -> float is
    return cells.to_numpy(dtype=object).astype(float)


def load_csv(path: str | Path) -> Dataset:
    """Read a long-format panel file.

    Participants keep the order of their first appearance; rows of one
    participant may come in any order but must cover t = 1..T exactly once,
    with the same distal outcome on every row.

    Args:
        path: CSV file, UTF-8, comma separated, LF or CRLF line endings

    Returns:
        Dataset with n participants and T decision points

    Raises:
        DataFormatError: For a malformed header, a non-numeric cell, an
            inconsistent distal outcome, or a missing or duplicate time point

    Example:
        >>> ds = load_csv("trial.csv")
        >>> ds.n, ds.T
        (2, 3)
    """
    frame = pd.read_csv(
        path, dtype=str, keep_default_na=False, encoding="utf-8", skipinitialspace=True
    )
    frame.columns = [str(c).strip() for c in frame.columns]
    d = _check_header(list(frame.columns))
    if frame.empty:
        raise DataFormatError("file contains no rows", line=2)
    frame["id"] = frame["id"].str.strip()

    numeric = {c: _numeric(frame, c) for c in frame.columns if c != "id"}
    t = numeric["t"]
    if np.any(t != np.round(t)) or np.any(t < 1):
        row = int(np.flatnonzero((t != np.round(t)) | (t < 1))[0])
        raise DataFormatError(
            f"time index must be a positive integer, got {frame['t'].iloc[row]!r}",
            line=row + 2,
        )
    t = t.astype(int)

    ids = list(dict.fromkeys(frame["id"]))
    position = {key: k for k, key in enumerate(ids)}
    rows = frame["id"].map(position).to_numpy()
    n, T = len(ids), int(t.max())

    seen = np.full((n, T), -1, dtype=int)
    for line, (k, tt) in enumerate(zip(rows, t, strict=True)):
        if seen[k, tt - 1] >= 0:
            raise DataFormatError(
                f"duplicate time point (id={ids[k]}, t={tt})",
                line=line + 2,
                participant=ids[k],
            )
        seen[k, tt - 1] = line
    missing = np.argwhere(seen < 0)
    if missing.size:
        k, tt = missing[0]
        raise DataFormatError(
            f"missing time point (id={ids[k]}, t={tt + 1})", participant=ids[k]
        )

    y = numeric["Y"]
    y_first = y[seen[:, 0]]
    inconsistent = np.flatnonzero(y != y_first[rows])
    if inconsistent.size:
        line = int(inconsistent[0])
        raise DataFormatError(
            f"inconsistent distal outcome for participant '{ids[rows[line]]}'",
            line=line + 2,
            participant=ids[rows[line]],
        )

    def panel(column: str) -> np.ndarray:
        return numeric[column][seen]

    x = np.stack([panel(f"X{j}") for j in range(1, d + 1)], axis=2) if d else np.zeros((n, T, 0))
    dataset = Dataset(
        x=x, i=panel("I"), a=panel("A"), m=panel("M"), y=y_first, ids=tuple(ids)
    )
    logger.info(f"Loaded {dataset!r} from {path}")
    return dataset


def save_csv(ds: Dataset, path: str | Path) -> None:
    """Write a dataset in long format.

    Floats are written with 17 significant digits so a reload reproduces
    every value exactly.
    """
    ds.to_dataframe().to_csv(path, index=False, float_format="%.17g", lineterminator="\n")
    logger.info(f"Wrote {ds!r} to {path}")
