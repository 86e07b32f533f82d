"""Datasets: paired samples, labelled data, CSV ingestion, standardization, splits."""
from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from kacim._rng import stream

#: Columns whose population std falls below this are treated as constant.
DEGENERATE_STD = 1e-12


class DataError(ValueError):
    """Invalid dataset contents or arguments."""


class CsvFormatError(DataError):
    """A CSV file could not be parsed; ``row``/``column`` locate the problem (1-based)."""

    def __init__(self, message: str, row: int | None = None, column: int | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column}")
        prefix = f"{', '.join(where)}: " if where else ""
        super().__init__(prefix + message)
        self.row = row
        self.column = column


def _as_matrix(a, name: str) -> np.ndarray:
    m = np.array(a, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.ndim != 2:
        raise DataError(f"{name} must be a 2-D matrix, got shape {m.shape}")
    m.setflags(write=False)
    return m


@dataclass(frozen=True)
class PairedSample:
    """Row-aligned input matrix ``x`` (n x d_x) and output matrix ``y`` (n x d_y).

    One-dimensional inputs are promoted to single-column matrices.  Arrays are
    stored read-only so a sample can be shared freely.
    """

    x: np.ndarray
    y: np.ndarray

    def __post_init__(self):
        x = _as_matrix(self.x, "x")
        y = _as_matrix(self.y, "y")
        if x.shape[0] != y.shape[0]:
            raise DataError(f"x has {x.shape[0]} rows but y has {y.shape[0]}")
        if x.shape[0] < 1:
            raise DataError("a sample needs at least one row")
        if not (np.isfinite(x).all() and np.isfinite(y).all()):
            raise DataError("sample contains NaN or Inf")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "y", y)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d_x(self) -> int:
        return self.x.shape[1]

    @property
    def d_y(self) -> int:
        return self.y.shape[1]

    def take(self, rows) -> "PairedSample":
        return PairedSample(self.x[rows], self.y[rows])


@dataclass(frozen=True)
class LabeledDataset:
    """Feature matrix with dense integer class labels ``0..n_c-1``."""

    x: np.ndarray
    labels: np.ndarray
    n_c: int
    class_names: tuple = field(default=(), compare=False)

    def __post_init__(self):
        x = _as_matrix(self.x, "x")
        labels = np.asarray(self.labels)
        if labels.ndim != 1 or labels.shape[0] != x.shape[0]:
            raise DataError(f"labels must be a vector of length {x.shape[0]}")
        if labels.size and not np.issubdtype(labels.dtype, np.integer):
            if not np.all(labels == np.round(labels)):
                raise DataError("labels must be integers")
        labels = labels.astype(np.int64)
        labels.setflags(write=False)
        if self.n_c < 2:
            raise DataError(f"need at least 2 classes, got n_c={self.n_c}")
        if labels.size and (labels.min() < 0 or labels.max() >= self.n_c):
            raise DataError(f"labels must lie in 0..{self.n_c - 1}")
        if not np.isfinite(x).all():
            raise DataError("features contain NaN or Inf")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "labels", labels)

    @property
    def n(self) -> int:
        return self.x.shape[0]

    @property
    def d_x(self) -> int:
        return self.x.shape[1]

    def take(self, rows) -> "LabeledDataset":
        return LabeledDataset(self.x[rows], self.labels[rows], self.n_c, self.class_names)

    def as_paired(self) -> PairedSample:
        """Pair the features with one-hot encoded labels."""
        return PairedSample(self.x, one_hot(self.labels, self.n_c))


@dataclass(frozen=True)
class StandardizationStats:
    mean: np.ndarray
    std: np.ndarray
    degenerate: np.ndarray  # bool per column; std recorded as 1 there

    def apply(self, m: np.ndarray) -> np.ndarray:
        return (np.asarray(m, dtype=np.float64) - self.mean) / self.std


def standardize(m) -> tuple[np.ndarray, StandardizationStats]:
    """Center each column and scale it to unit population variance.

    Columns with std below ``DEGENERATE_STD`` are only centered and flagged.
    """
    m = np.asarray(m, dtype=np.float64)
    if m.ndim == 1:
        m = m[:, None]
    if m.shape[0] < 1:
        raise DataError("cannot standardize an empty matrix")
    mean = m.mean(axis=0)
    centered = m - mean
    std = np.sqrt((centered * centered).mean(axis=0))
    degenerate = std < DEGENERATE_STD
    std = np.where(degenerate, 1.0, std)
    return centered / std, StandardizationStats(mean, std, degenerate)


@dataclass(frozen=True)
class SplitSpec:
    proportions: tuple[float, float, float] = (0.48, 0.12, 0.4)
    seed: int = 0

    def __post_init__(self):
        p = tuple(float(v) for v in self.proportions)
        if len(p) != 3:
            raise DataError("split needs exactly three proportions")
        if any(not (0.0 < v < 1.0) for v in p):
            raise DataError(f"proportions must lie in (0, 1), got {p}")
        if abs(sum(p) - 1.0) > 1e-9:
            raise DataError(f"proportions must sum to 1, got {sum(p)!r}")
        if self.seed < 0:
            raise DataError("seed must be non-negative")
        object.__setattr__(self, "proportions", p)


def split_sizes(n: int, proportions) -> tuple[int, int, int]:
    """Part sizes by largest remainder, so they always sum to ``n``."""
    raw = [p * n for p in proportions]
    sizes = [math.floor(r + 1e-9) for r in raw]
    order = sorted(range(3), key=lambda i: (-(raw[i] - sizes[i]), i))
    for i in order[: n - sum(sizes)]:
        sizes[i] += 1
    return tuple(sizes)


def split_indices(n: int, spec: SplitSpec) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    sizes = split_sizes(n, spec.proportions)
    if min(sizes) < 1:
        raise DataError(f"n={n} is too small for proportions {spec.proportions} (sizes {sizes})")
    perm = stream(spec.seed, "split").permutation(n)
    a, b = sizes[0], sizes[0] + sizes[1]
    return perm[:a], perm[a:b], perm[b:]


def split(d, spec: SplitSpec):
    """Random train/validation/test partition (no stratification)."""
    return tuple(d.take(idx) for idx in split_indices(d.n, spec))


def one_hot(labels, n_c: int) -> np.ndarray:
    labels = np.asarray(labels)
    if n_c < 2:
        raise DataError(f"one-hot encoding needs n_c >= 2, got {n_c}")
    if labels.size and (labels.min() < 0 or labels.max() >= n_c):
        raise DataError(f"label out of range 0..{n_c - 1}")
    out = np.zeros((labels.shape[0], n_c))
    out[np.arange(labels.shape[0]), labels.astype(np.int64)] = 1.0
    return out


def _parse_float(cell: str, row: int, col: int) -> float:
    try:
        v = float(cell)
    except ValueError:
        raise CsvFormatError(f"non-numeric cell {cell!r}", row, col) from None
    if not math.isfinite(v):
        raise CsvFormatError(f"non-finite cell {cell!r}", row, col)
    return v


def _looks_numeric(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def load_csv(path, label_column: str | None = None, y_columns=None):
    """Read a comma-separated numeric table.

    A first row containing any non-numeric cell is taken as the header.  With
    ``label_column`` the named column is encoded to class indices in order of
    first appearance and a :class:`LabeledDataset` is returned.  With
    ``y_columns`` (names) those columns form ``y`` of a :class:`PairedSample`;
    otherwise every column goes to ``x`` and ``y`` has zero columns.
    """
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh)]
    # csv yields [] for blank lines; keep line numbers by remembering them
    numbered = [(i + 1, r) for i, r in enumerate(rows) if r and any(c.strip() for c in r)]
    if not numbered:
        raise CsvFormatError(f"{path} is empty")

    header = None
    first_line, first = numbered[0]
    if not all(_looks_numeric(c) for c in first):
        header = [c.strip() for c in first]
        numbered = numbered[1:]
        if not numbered:
            raise CsvFormatError(f"{path} has a header but no data rows")
    width = len(header) if header is not None else len(numbered[0][1])

    def index_of(name: str) -> int:
        if header is None:
            raise DataError(f"column {name!r} requested but {path} has no header row")
        if name not in header:
            raise DataError(f"column {name!r} not found in header {header}")
        return header.index(name)

    label_idx = index_of(label_column) if label_column is not None else None
    y_idx = [index_of(c) for c in (y_columns or [])]
    x_idx = [j for j in range(width) if j != label_idx and j not in y_idx]

    xs, ys, raw_labels = [], [], []
    for line, r in numbered:
        if len(r) != width:
            raise CsvFormatError(f"expected {width} cells, found {len(r)}", row=line)
        xs.append([_parse_float(r[j], line, j + 1) for j in x_idx])
        ys.append([_parse_float(r[j], line, j + 1) for j in y_idx])
        if label_idx is not None:
            raw_labels.append(r[label_idx].strip())

    x = np.array(xs, dtype=np.float64).reshape(len(xs), len(x_idx))
    if label_idx is not None:
        codes: dict[str, int] = {}
        labels = np.array([codes.setdefault(v, len(codes)) for v in raw_labels], dtype=np.int64)
        names = tuple(codes)
        return LabeledDataset(x, labels, len(codes), names)
    y = np.array(ys, dtype=np.float64).reshape(len(ys), len(y_idx))
    return PairedSample(x, y)


def write_csv(path, m, header=None) -> None:
    m = np.asarray(m)
    if m.ndim == 1:
        m = m[:, None]
    with Path(path).open("w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        if header is not None:
            w.writerow(header)
        for row in m:
            w.writerow([repr(float(v)) for v in row])
