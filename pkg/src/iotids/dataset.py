"""CSV ingestion, label encoding and stratified train/test splitting."""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .errors import DataError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class RawTable:
    header: list[str]
    rows: list[list[str]]

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> list[str]:
        j = self.header.index(name)
        return [r[j] for r in self.rows]


@dataclass(frozen=True)
class LabelEncoder:
    """Maps distinct strings to ordinals in lexicographic order."""

    categories: tuple[str, ...]

    @classmethod
    def fit(cls, values: Sequence[str]) -> "LabelEncoder":
        return cls(tuple(sorted(set(values))))

    @property
    def index_of(self) -> dict[str, int]:
        return {c: i for i, c in enumerate(self.categories)}

    def encode(self, values: Sequence[str]) -> np.ndarray:
        lookup = self.index_of
        try:
            return np.array([lookup[v] for v in values], dtype=np.int64)
        except KeyError as exc:
            raise DataError(f"unknown category {exc.args[0]!r}") from None

    def decode(self, codes) -> list[str]:
        return [self.categories[int(c)] for c in codes]

    def to_dict(self) -> dict:
        return {"categories": list(self.categories)}

    @classmethod
    def from_dict(cls, d: dict) -> "LabelEncoder":
        return cls(tuple(d["categories"]))


@dataclass(frozen=True)
class Dataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: list[str]
    class_names: list[str]

    def __post_init__(self):
        X = np.asarray(self.X, dtype=np.float64)
        y = np.asarray(self.y, dtype=np.int64)
        if X.ndim != 2:
            raise DataError(f"X must be 2-D, got shape {X.shape}")
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "feature_names", list(self.feature_names))
        object.__setattr__(self, "class_names", list(self.class_names))
        self.check()

    def check(self) -> None:
        """Raise :class:`DataError` if any dataset invariant is violated."""
        n, d = self.X.shape
        if n < 1 or d < 1:
            raise DataError(f"dataset needs at least one row and one feature, got {n}x{d}")
        if self.y.shape != (n,):
            raise DataError(f"y has shape {self.y.shape}, expected ({n},)")
        if len(self.feature_names) != d:
            raise DataError("feature_names length does not match X")
        if not np.isfinite(self.X).all():
            raise DataError("X contains NaN or Inf")
        if (self.y.min() < 0 or self.y.max() >= len(self.class_names)):
            raise DataError("label out of range of class_names")

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def d(self) -> int:
        return self.X.shape[1]

    @property
    def n_classes(self) -> int:
        return len(self.class_names)

    def class_counts(self) -> np.ndarray:
        return np.bincount(self.y, minlength=self.n_classes)

    def histogram(self) -> dict[str, int]:
        return {name: int(c) for name, c in zip(self.class_names, self.class_counts())}

    def take(self, rows) -> "Dataset":
        return Dataset(self.X[rows], self.y[rows], self.feature_names, self.class_names)

    def select_features(self, columns: Sequence[int]) -> "Dataset":
        cols = list(columns)
        return Dataset(
            self.X[:, cols], self.y, [self.feature_names[j] for j in cols], self.class_names
        )

    def with_rows(self, X: np.ndarray, y: np.ndarray) -> "Dataset":
        return Dataset(X, y, self.feature_names, self.class_names)

    def compact_classes(self) -> "Dataset":
        """Drop classes with no rows and renumber the survivors in order."""
        present = np.flatnonzero(self.class_counts())
        remap = np.full(self.n_classes, -1, dtype=np.int64)
        remap[present] = np.arange(len(present))
        return Dataset(self.X, remap[self.y], self.feature_names,
                       [self.class_names[c] for c in present])


@dataclass(frozen=True)
class SplitPair:
    train: Dataset
    test: Dataset
    test_fraction: float
    seed: int
    train_index: np.ndarray = field(repr=False)
    test_index: np.ndarray = field(repr=False)


def read_csv(path) -> RawTable:
    """Read a comma-delimited UTF-8 CSV with a header row.

    Data rows are numbered from 1 (the header is not counted) in error messages.
    """
    path = Path(path)
    if not path.is_file():
        raise DataError(f"data file not found: {path}")
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DataError(f"empty file: {path}") from None
        width = len(header)
        rows = []
        for i, row in enumerate(reader, start=1):
            if len(row) != width:
                if not row:
                    continue
                raise DataError(
                    f"row {i} has {len(row)} cells, expected {width} (file line {i + 1})"
                )
            rows.append(row)
    if len(set(header)) != len(header):
        dupes = sorted({h for h in header if header.count(h) > 1})
        raise DataError(f"duplicate column names: {dupes}")
    if not rows:
        raise DataError(f"no data rows in {path}")
    return RawTable(header, rows)


def load_dataset(path, target_column: str, categorical_columns: Sequence[str] = ()) -> RawTable:
    """:func:`read_csv` plus a check that the named columns exist."""
    table = read_csv(path)
    for name in [target_column, *categorical_columns]:
        if name not in table.header:
            raise DataError(f"column {name!r} not in header")
    return table


def _parse_numeric(name: str, cells: Sequence[str]) -> np.ndarray:
    try:
        values = np.asarray(cells, dtype=np.float64)
    except ValueError:
        values = None
    if values is not None and np.isfinite(values).all():
        return values
    for i, cell in enumerate(cells, start=1):
        try:
            v = float(cell)
        except ValueError:
            raise DataError(f"row {i}, column {name!r}: cannot parse {cell!r} as a number") from None
        if not np.isfinite(v):
            raise DataError(f"row {i}, column {name!r}: non-finite value {cell!r}")
    raise AssertionError("unreachable")


def _require_cells(name: str, cells: Sequence[str]) -> None:
    if not any(cells):
        raise DataError(f"column {name!r} is empty")
    for i, cell in enumerate(cells, start=1):
        if not cell.strip():
            raise DataError(f"row {i}, column {name!r}: empty cell")


def encode(
    table: RawTable,
    target_column: str,
    categorical_columns: Sequence[str] = (),
    drop_columns: Sequence[str] = (),
) -> tuple[Dataset, dict[str, LabelEncoder], LabelEncoder]:
    """Turn a raw table into a numeric dataset.

    Categorical feature columns and the target are label-encoded with
    lexicographically ordered categories; every other column must parse as
    a finite real. Columns listed in ``drop_columns`` are ignored (absent ones with a
    warning).

    Returns:
        The dataset, a mapping of categorical column name to its encoder,
        and the target encoder.
    """
    categorical = set(categorical_columns)
    skip = {target_column, *drop_columns}
    absent = [c for c in drop_columns if c not in table.header]
    if absent:
        log.warning("drop columns not present in header: %s", absent)
    columns = list(zip(*table.rows))
    feature_names, feature_cols = [], []
    encoders: dict[str, LabelEncoder] = {}
    for j, name in enumerate(table.header):
        if name in skip:
            continue
        cells = columns[j]
        if name in categorical:
            _require_cells(name, cells)
            enc = LabelEncoder.fit(cells)
            encoders[name] = enc
            feature_cols.append(enc.encode(cells).astype(np.float64))
        else:
            feature_cols.append(_parse_numeric(name, cells))
        feature_names.append(name)
    if not feature_cols:
        raise DataError("no feature columns left after removing target and drops")
    target_cells = columns[table.header.index(target_column)]
    _require_cells(target_column, target_cells)
    target_enc = LabelEncoder.fit(target_cells)
    X = np.column_stack(feature_cols)
    ds = Dataset(X, target_enc.encode(target_cells), feature_names, list(target_enc.categories))
    return ds, encoders, target_enc


def stratified_split(ds: Dataset, test_fraction: float, seed: int) -> SplitPair:
    """Seeded per-class split.

    Class ``c`` sends ``floor(n_c * test_fraction)`` shuffled rows to the test
    side; the remainder (including rounding leftovers) goes to train. Classes
    are visited in index order, all drawing from one generator seeded with
    ``seed``. Both sides keep the original row order.
    """
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    rng = np.random.default_rng(seed)
    test_parts = []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.y == c)
        if members.size == 0:
            continue
        n_test = int(np.floor(members.size * test_fraction))
        test_parts.append(rng.permutation(members)[:n_test])
    test_mask = np.zeros(ds.n, dtype=bool)
    test_mask[np.concatenate(test_parts)] = True
    if not test_mask.any():
        raise DataError(f"test fraction {test_fraction} leaves the test split empty")
    test_index = np.flatnonzero(test_mask)
    train_index = np.flatnonzero(~test_mask)
    return SplitPair(ds.take(train_index), ds.take(test_index), test_fraction, seed,
                     train_index, test_index)


def stratified_subsample(ds: Dataset, fraction: float, seed: int) -> Dataset:
    """Keep ``max(1, floor(n_c * fraction))`` seeded rows of every class.

    ``fraction >= 1`` returns ``ds`` itself.
    """
    if fraction >= 1.0:
        return ds
    rng = np.random.default_rng(seed)
    keep = []
    for c in range(ds.n_classes):
        members = np.flatnonzero(ds.y == c)
        if members.size == 0:
            continue
        m = max(1, int(np.floor(members.size * fraction)))
        keep.append(rng.permutation(members)[:m])
    return ds.take(np.sort(np.concatenate(keep)))


def feature_matrix(table: RawTable, feature_names: Sequence[str],
                   encoders: dict[str, LabelEncoder]) -> np.ndarray:
    """Numeric matrix of ``feature_names`` from ``table`` using fitted encoders."""
    missing = [f for f in feature_names if f not in table.header]
    if missing:
        raise DataError(f"input lacks feature columns {missing}")
    cols = []
    for name in feature_names:
        cells = table.column(name)
        if name in encoders:
            _require_cells(name, cells)
            cols.append(encoders[name].encode(cells).astype(np.float64))
        else:
            cols.append(_parse_numeric(name, cells))
    return np.column_stack(cols)
