"""Z-score outlier filtering and per-feature standardization.

Both steps use the population standard deviation (divide by n).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import Dataset
from .errors import DataError


@dataclass(frozen=True)
class Standardizer:
    mean: np.ndarray
    std: np.ndarray

    @property
    def d(self) -> int:
        return self.mean.shape[0]

    def to_dict(self) -> dict:
        return {"mean": self.mean.tolist(), "std": self.std.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardizer":
        return cls(np.asarray(d["mean"], dtype=np.float64), np.asarray(d["std"], dtype=np.float64))


@dataclass(frozen=True)
class OutlierReport:
    threshold: float
    rows_removed: int
    removed_per_class: dict[str, int]

    def to_dict(self) -> dict:
        return {
            "threshold": self.threshold,
            "rows_removed": self.rows_removed,
            "removed_per_class": dict(self.removed_per_class),
        }


def _column_stats(X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    mean = X.mean(axis=0)
    std = np.sqrt(((X - mean) ** 2).mean(axis=0))
    return mean, std


def outlier_mask(X: np.ndarray, threshold: float, mean=None, std=None) -> np.ndarray:
    """True for rows where some feature deviates by more than ``threshold`` stds.

    Zero-variance columns never flag a row.
    """
    if mean is None or std is None:
        mean, std = _column_stats(X)
    flagged = (np.abs(X - mean) > threshold * std) & (std > 0)
    return flagged.any(axis=1)


def remove_outliers_zscore(ds: Dataset, threshold: float = 3.0) -> tuple[Dataset, OutlierReport]:
    if threshold <= 0:
        raise ValueError(f"threshold must be positive, got {threshold}")
    drop = outlier_mask(ds.X, threshold)
    if drop.all():
        raise DataError(f"z-score threshold {threshold} removed every row")
    removed = np.bincount(ds.y[drop], minlength=ds.n_classes)
    report = OutlierReport(
        threshold=float(threshold),
        rows_removed=int(drop.sum()),
        removed_per_class={name: int(k) for name, k in zip(ds.class_names, removed)},
    )
    return ds.take(np.flatnonzero(~drop)), report


def fit_standardizer(ds: Dataset) -> Standardizer:
    mean, std = _column_stats(ds.X)
    return Standardizer(mean, std)


def apply_standardizer(s: Standardizer, ds: Dataset) -> Dataset:
    """Return ``(x - mean) / std`` per column; zero-variance columns map to 0."""
    if ds.d != s.d:
        raise DataError(f"standardizer fitted on {s.d} features, data has {ds.d}")
    return ds.with_rows(transform(s, ds.X), ds.y)


def transform(s: Standardizer, X: np.ndarray) -> np.ndarray:
    safe = np.where(s.std > 0, s.std, 1.0)
    out = (X - s.mean) / safe
    out[:, s.std == 0] = 0.0
    return out
