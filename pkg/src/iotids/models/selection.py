"""Stratified k-fold cross-validation, grid search and learning curves."""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .._rng import derive_rng, derive_seed
from ..dataset import Dataset, stratified_subsample
from ..errors import DataError
from . import ModelSpec, fit_classifier

log = logging.getLogger(__name__)

_FOLD_STREAM = 7


@dataclass(frozen=True)
class CVResult:
    scores: list[float]
    undersized_classes: list[int] = field(default_factory=list)

    @property
    def mean(self) -> float:
        return float(np.mean(self.scores))


def stratified_folds(y: np.ndarray, n_classes: int, folds: int, seed: int) -> tuple[np.ndarray, list[int]]:
    """Assign every row a fold id.

    Each class is shuffled with its own seeded stream and dealt round-robin,
    continuing the deal where the previous class stopped so total fold sizes
    stay within one of each other. Per class, fold sizes differ by at most 1.

    Returns:
        The fold id array and the classes with fewer than ``folds`` rows.
    """
    assign = np.empty(len(y), dtype=np.int64)
    undersized = []
    offset = 0
    for c in range(n_classes):
        members = np.flatnonzero(y == c)
        if members.size == 0:
            continue
        if members.size < folds:
            undersized.append(c)
        members = derive_rng(seed, _FOLD_STREAM, c).permutation(members)
        assign[members] = (offset + np.arange(members.size)) % folds
        offset = (offset + members.size) % folds
    return assign, undersized


def cross_validate(spec: ModelSpec, ds: Dataset, folds: int = 5, seed: int = 42) -> CVResult:
    """Accuracy on each held-out fold of a stratified seeded k-fold split."""
    if folds < 2:
        raise ValueError("folds must be >= 2")
    if folds > ds.n:
        raise DataError(f"{folds} folds requested for {ds.n} rows")
    assign, undersized = stratified_folds(ds.y, ds.n_classes, folds, seed)
    if undersized:
        log.warning("classes %s have fewer than %d rows; folds are best-effort", undersized, folds)
    scores = []
    for k in range(folds):
        held = assign == k
        model = fit_classifier(spec, ds.take(np.flatnonzero(~held)), derive_seed(seed, k))
        pred = model.predict(ds.X[held])
        scores.append(float(np.mean(pred == ds.y[held])))
    return CVResult(scores, undersized)


def grid_search(grid: Sequence[ModelSpec], ds: Dataset, folds: int = 5, seed: int = 42,
                results: list | None = None) -> tuple[ModelSpec, float]:
    """Best spec by mean CV accuracy; ties keep the earliest spec.

    If ``results`` is a list, ``(spec, CVResult)`` pairs are appended to it.
    """
    if not grid:
        raise ValueError("empty grid")
    best, best_score = None, -np.inf
    for spec in grid:
        cv = cross_validate(spec, ds, folds, seed)
        log.info("cv %s: %.6f", spec, cv.mean)
        if results is not None:
            results.append((spec, cv))
        if cv.mean > best_score:
            best, best_score = spec, cv.mean
    return best, float(best_score)


@dataclass(frozen=True)
class CurvePoint:
    fraction: float
    n_rows: int
    train_accuracy: float
    cv_accuracy: float


DEFAULT_FRACTIONS = tuple(round(0.1 * i, 1) for i in range(1, 11))


def learning_curve(spec: ModelSpec, ds: Dataset, fractions: Sequence[float] = DEFAULT_FRACTIONS,
                   folds: int = 5, seed: int = 42) -> list[CurvePoint]:
    """Training and CV accuracy on growing stratified subsamples of ``ds``.

    The subsample at fraction 1.0 is ``ds`` itself, so that entry equals a
    direct :func:`cross_validate` run with the same seed.
    """
    fractions = list(fractions)
    if any(not 0 < f <= 1 for f in fractions) or fractions != sorted(fractions):
        raise ValueError("fractions must be ascending and lie in (0, 1]")
    points = []
    for i, f in enumerate(fractions):
        sub = stratified_subsample(ds, f, derive_seed(seed, 100 + i))
        if sub.n < folds:
            raise DataError(f"subsample at fraction {f} has {sub.n} rows, fewer than {folds} folds")
        model = fit_classifier(spec, sub, seed)
        train_acc = float(np.mean(model.predict(sub.X) == sub.y))
        cv = cross_validate(spec, sub, folds, seed)
        points.append(CurvePoint(float(f), sub.n, train_acc, cv.mean))
    return points
