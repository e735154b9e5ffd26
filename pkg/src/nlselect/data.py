"""Dataset container, CSV ingestion and column utilities."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

STD_TOL = 1e-10


class DataError(ValueError):
    """Raised for malformed or invalid input data."""


@dataclass(frozen=True)
class Dataset:
    """Binary-outcome design: X is (n, p), y is {0, 1} of length n.

    Instances are validated on construction and treated as immutable;
    the arrays are flagged read-only.
    """

    X: np.ndarray
    y: np.ndarray
    names: tuple = field(default=())
    standardized: bool = False

    def __post_init__(self):
        X = np.array(self.X, dtype=float)
        y = np.asarray(self.y)
        if X.ndim != 2:
            raise DataError("X must be a 2-d matrix")
        n, p = X.shape
        if n < 2 or p < 1:
            raise DataError(f"need n >= 2 and p >= 1, got n={n}, p={p}")
        if y.ndim != 1 or y.shape[0] != n:
            raise DataError(
                f"dimension mismatch: X has {n} rows but y has length {y.shape[0] if y.ndim else 0}"
            )
        if not np.all(np.isin(y, (0, 1))):
            raise DataError("non-binary outcome: y values must be 0 or 1")
        y = y.astype(float)
        if y.min() == y.max():
            raise DataError("non-binary outcome: both classes must be present")
        names = tuple(self.names) if len(self.names) else tuple(f"V{j}" for j in range(p))
        if len(names) != p:
            raise DataError(f"got {len(names)} column names for {p} columns")
        bad = ~np.isfinite(X).all(axis=0)
        if bad.any():
            raise DataError(f"non-finite value in column {names[int(np.argmax(bad))]!r}")
        const = np.ptp(X, axis=0) == 0
        if const.any():
            raise DataError(f"constant column {names[int(np.argmax(const))]!r}")
        if self.standardized:
            mu = X.mean(axis=0)
            sd = X.std(axis=0, ddof=1)
            if np.abs(mu).max() > STD_TOL or np.abs(sd - 1).max() > STD_TOL:
                raise DataError("standardized flag set but columns are not standardized")
        X.flags.writeable = False
        y.flags.writeable = False
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "names", names)

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]


def variable_set(indices: Sequence[int], p: int | None = None) -> tuple:
    """Canonical variable set: sorted tuple of unique in-range column indices."""
    idx = [int(i) for i in indices]
    if len(set(idx)) != len(idx):
        raise ValueError(f"duplicate indices in variable set: {idx}")
    if p is not None and any(i < 0 or i >= p for i in idx):
        raise ValueError(f"variable index out of range [0, {p})")
    return tuple(sorted(idx))


def _read_csv(path) -> tuple[list[str], list[list[str]]]:
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise DataError(f"{path}: empty file")
    header = [h.strip() for h in rows[0]]
    body = [r for r in rows[1:] if r]
    for k, r in enumerate(body, start=2):
        if len(r) != len(header):
            raise DataError(f"{path}: line {k} has {len(r)} fields, expected {len(header)}")
    return header, body


def _to_float(cells, names, path) -> np.ndarray:
    out = np.empty((len(cells), len(names)))
    for i, row in enumerate(cells):
        for j, c in enumerate(row):
            try:
                out[i, j] = float(c)
            except ValueError:
                raise DataError(
                    f"{path}: unparseable cell {c!r} in column {names[j]!r}, row {i + 1}"
                ) from None
    return out


def _parse_outcome(values, path) -> np.ndarray:
    y = []
    for v in values:
        try:
            f = float(v)
        except ValueError:
            raise DataError(f"{path}: unparseable outcome value {v!r}") from None
        if f not in (0.0, 1.0):
            raise DataError(f"{path}: non-binary outcome value {v!r}")
        y.append(f)
    return np.array(y)


def load_dataset(x_path, y_path_or_column) -> Dataset:
    """Load predictors and outcome from CSV.

    ``y_path_or_column`` is either a single-column CSV file or the name of
    a column in the X file, which is then dropped from the predictors.
    """
    header, body = _read_csv(x_path)
    ycol = str(y_path_or_column)
    if ycol in header and not Path(ycol).is_file():
        k = header.index(ycol)
        yvals = [r[k] for r in body]
        header = header[:k] + header[k + 1:]
        body = [r[:k] + r[k + 1:] for r in body]
        y = _parse_outcome(yvals, x_path)
    else:
        yh, yb = _read_csv(ycol)
        if len(yh) != 1:
            raise DataError(f"{ycol}: outcome file must have exactly one column")
        y = _parse_outcome([r[0] for r in yb], ycol)
    X = _to_float(body, header, x_path)
    if X.shape[0] != y.shape[0]:
        raise DataError(
            f"dimension mismatch: X has {X.shape[0]} rows but y has {y.shape[0]} values"
        )
    return Dataset(X, y, tuple(header))


def write_dataset(ds: Dataset, x_path, y_path) -> None:
    """Write X and y in the format read by :func:`load_dataset`."""
    with open(x_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(ds.names)
        for row in ds.X:
            w.writerow([repr(float(v)) for v in row])
    with open(y_path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["y"])
        for v in ds.y:
            w.writerow([int(v)])


def standardize(ds: Dataset) -> Dataset:
    """Center each column and scale to unit sample sd (divisor n - 1)."""
    if ds.standardized:
        return ds
    X = ds.X - ds.X.mean(axis=0)
    X = X / X.std(axis=0, ddof=1)
    return Dataset(X, ds.y, ds.names, standardized=True)


def pearson_correlation(ds: Dataset, j: int, l: int) -> float:
    """Sample Pearson correlation of columns j and l."""
    if j == l:
        return 1.0
    a, b = (j, l) if j < l else (l, j)
    return float(np.clip(_corr_to(ds.X, a, np.array([b]))[0], -1.0, 1.0))


def _corr_to(X: np.ndarray, j: int, cols: np.ndarray) -> np.ndarray:
    xj = X[:, j] - X[:, j].mean()
    Z = X[:, cols] - X[:, cols].mean(axis=0)
    num = Z.T @ xj
    den = np.sqrt((Z * Z).sum(axis=0) * (xj @ xj))
    return num / den


def correlations_with(ds: Dataset, j: int, cols) -> np.ndarray:
    """Vector of Pearson correlations between column j and each of ``cols``.

    Self-correlation entries are exactly 1.
    """
    cols = np.asarray(cols, dtype=int)
    out = np.clip(_corr_to(ds.X, j, cols), -1.0, 1.0)
    out[cols == j] = 1.0
    return out
