"""Hybrid rebalancing: random undersampling plus SMOTE interpolation."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._rng import derive_rng
from .dataset import Dataset
from .errors import DataError

_UNDER_STREAM = 11
_SMOTE_STREAM = 12
_BLOCK_CELLS = 1 << 22


@dataclass(frozen=True)
class SamplingPlan:
    target_per_class: int = 10_000
    k_neighbors: int = 5
    seed: int = 42

    def __post_init__(self):
        if self.target_per_class < 1 or self.k_neighbors < 1:
            raise ValueError("target_per_class and k_neighbors must be >= 1")


@dataclass(frozen=True)
class Provenance:
    """Synthetic row ``i`` equals ``X[base[i]] + u[i] * (X[neighbor[i]] - X[base[i]])``.

    Indices refer to rows of the dataset passed to :func:`smote_oversample`.
    """

    label: int
    base: np.ndarray
    neighbor: np.ndarray
    u: np.ndarray


def undersample(ds: Dataset, c: int, m: int, seed: int) -> Dataset:
    """Keep ``m`` uniformly drawn rows of class ``c``; other rows are untouched.

    Surviving rows keep their original relative order.
    """
    members = np.flatnonzero(ds.y == c)
    if m > members.size:
        raise DataError(f"cannot undersample class {c} to {m}: only {members.size} rows")
    chosen = derive_rng(seed, _UNDER_STREAM, c).choice(members, size=m, replace=False)
    keep = ds.y != c
    keep[chosen] = True
    return ds.take(np.flatnonzero(keep))


def nearest_within(X: np.ndarray, rows: np.ndarray, k: int) -> np.ndarray:
    """The ``k`` nearest other rows of ``X`` for each index in ``rows``.

    Exact squared Euclidean distance; equal distances prefer the lower index.
    """
    n, d = X.shape
    out = np.empty((len(rows), k), dtype=np.int64)
    step = max(1, _BLOCK_CELLS // max(n * d, 1))
    for lo in range(0, len(rows), step):
        r = rows[lo:lo + step]
        diff = X[None, :, :] - X[r][:, None, :]
        dist = np.einsum("ijk,ijk->ij", diff, diff)
        dist[np.arange(len(r)), r] = np.inf
        out[lo:lo + step] = np.argsort(dist, axis=1, kind="stable")[:, :k]
    return out


def smote_oversample(ds: Dataset, c: int, m: int, k: int = 5, seed: int = 42,
                     provenance: list | None = None) -> Dataset:
    """Append ``m - n_c`` synthetic class-``c`` rows.

    Each synthetic row interpolates between a random class-``c`` row and one
    of its ``min(k, n_c - 1)`` nearest class-``c`` neighbours, at a uniform
    position in [0, 1). A lone instance is duplicated instead. If
    ``provenance`` is a list, a :class:`Provenance` record is appended.
    """
    members = np.flatnonzero(ds.y == c)
    n_c = members.size
    if n_c == 0:
        raise DataError(f"class {c} has no rows to oversample")
    if m < n_c:
        raise DataError(f"oversampling target {m} is below class {c} count {n_c}")
    n_new = m - n_c
    if n_new == 0:
        return ds
    rng = derive_rng(seed, _SMOTE_STREAM, c)
    Xc = ds.X[members]
    base = rng.integers(0, n_c, size=n_new)
    kk = min(k, n_c - 1)
    if kk == 0:
        nb = base.copy()
        u = np.zeros(n_new)
    else:
        pick = rng.integers(0, kk, size=n_new)
        u = rng.random(n_new)
        uniq, inverse = np.unique(base, return_inverse=True)
        neigh = nearest_within(Xc, uniq, kk)
        nb = neigh[inverse, pick]
    synth = Xc[base] + u[:, None] * (Xc[nb] - Xc[base])
    if provenance is not None:
        provenance.append(Provenance(c, members[base], members[nb], u))
    X = np.vstack([ds.X, synth])
    y = np.concatenate([ds.y, np.full(n_new, c, dtype=np.int64)])
    return ds.with_rows(X, y)


def hybrid_resample(train: Dataset, plan: SamplingPlan = SamplingPlan(),
                    provenance: list | None = None) -> Dataset:
    """Bring every class present in ``train`` to exactly ``plan.target_per_class`` rows.

    Larger classes are undersampled, smaller ones SMOTE-oversampled; classes
    with no rows are left absent. Each class draws from its own stream of
    ``plan.seed``. Provenance indices refer to rows of ``train``.
    """
    target = plan.target_per_class
    counts = train.class_counts()
    # oversampling only appends, so indices into `train` stay valid for provenance
    out = train
    for c in np.flatnonzero((counts > 0) & (counts < target)):
        out = smote_oversample(out, int(c), target, plan.k_neighbors, plan.seed, provenance)
    for c in np.flatnonzero(counts > target):
        out = undersample(out, int(c), target, plan.seed)
    return out
