"""From-scratch classifiers behind one fit/predict surface."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .._rng import derive_seed
from ..dataset import Dataset
from ..errors import DataError, FeatureMismatchError
from .forest import RandomForest
from .knn import KNearestNeighbors
from .linear import LogisticRegression
from .mlp import Mlp
from .specs import (
    KnnSpec,
    LogRegSpec,
    MlpSpec,
    ModelSpec,
    RandomForestSpec,
    RfHyperParams,
    SoftVotingSpec,
    default_grids,
    spec_from_dict,
    spec_to_dict,
)

__all__ = [
    "KnnSpec", "LogRegSpec", "MlpSpec", "ModelSpec", "RandomForestSpec", "RfHyperParams",
    "SoftVotingSpec", "SoftVoting", "TrainedModel", "default_grids", "fit_classifier",
    "predict", "predict_proba", "spec_from_dict", "spec_to_dict",
]


class SoftVoting:
    """Equal-weight average of member probability rows."""

    def __init__(self, spec: SoftVotingSpec, n_classes: int, members: list | None = None):
        self.spec = spec
        self.n_classes = n_classes
        self.members = members or []

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int) -> "SoftVoting":
        self.members = [
            _fit_estimator(m, X, y, self.n_classes, derive_seed(seed, i))
            for i, m in enumerate(self.spec.members)
        ]
        return self

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        total = np.zeros((X.shape[0], self.n_classes))
        for m in self.members:
            total += m.predict_proba(X)
        return total / len(self.members)

    def state(self) -> dict:
        return {"members": [m.state() for m in self.members]}

    @classmethod
    def from_state(cls, spec: SoftVotingSpec, n_classes: int, state: dict) -> "SoftVoting":
        members = [_estimator_from_state(s, n_classes, st)
                   for s, st in zip(spec.members, state["members"])]
        return cls(spec, n_classes, members)


def _new_estimator(spec: ModelSpec, n_classes: int):
    if isinstance(spec, RandomForestSpec):
        return RandomForest(spec.params, n_classes)
    if isinstance(spec, KnnSpec):
        return KNearestNeighbors(spec.k, n_classes)
    if isinstance(spec, LogRegSpec):
        return LogisticRegression(spec, n_classes)
    if isinstance(spec, MlpSpec):
        return Mlp(spec, n_classes)
    if isinstance(spec, SoftVotingSpec):
        return SoftVoting(spec, n_classes)
    raise TypeError(f"unknown model spec {spec!r}")


def _needs_two_classes(spec: ModelSpec) -> bool:
    if isinstance(spec, SoftVotingSpec):
        return any(_needs_two_classes(m) for m in spec.members)
    return isinstance(spec, (LogRegSpec, MlpSpec))


def _fit_estimator(spec, X, y, n_classes, seed):
    return _new_estimator(spec, n_classes).fit(X, y, seed)


def _estimator_from_state(spec, n_classes, state):
    if isinstance(spec, RandomForestSpec):
        return RandomForest.from_state(spec.params, n_classes, state)
    if isinstance(spec, KnnSpec):
        return KNearestNeighbors.from_state(spec.k, n_classes, state)
    if isinstance(spec, LogRegSpec):
        return LogisticRegression.from_state(spec, n_classes, state)
    if isinstance(spec, MlpSpec):
        return Mlp.from_state(spec, n_classes, state)
    return SoftVoting.from_state(spec, n_classes, state)


@dataclass(frozen=True)
class TrainedModel:
    spec: ModelSpec
    estimator: object = field(repr=False)
    n_classes: int
    expected_features: list[str]
    class_names: list[str]
    training_time_s: float | None = None

    def _check(self, X) -> np.ndarray:
        if isinstance(X, Dataset):
            if X.feature_names != self.expected_features:
                missing = [f for f in self.expected_features if f not in X.feature_names]
                raise FeatureMismatchError(
                    f"model expects features {self.expected_features}; missing {missing}"
                    if missing else "feature order differs from the model's expected order"
                )
            X = X.X
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(self.expected_features):
            raise FeatureMismatchError(
                f"model expects {len(self.expected_features)} features, got shape {X.shape}"
            )
        return X

    def predict_proba(self, X) -> np.ndarray:
        return self.estimator.predict_proba(self._check(X))

    def predict(self, X) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)


def fit_classifier(spec: ModelSpec, train: Dataset, seed: int) -> TrainedModel:
    """Fit ``spec`` on ``train``; deterministic given ``(spec, train, seed)``."""
    if train.n < 2:
        raise DataError(f"need at least 2 training rows, got {train.n}")
    if train.n_classes < 2 and _needs_two_classes(spec):
        raise DataError(f"{spec.kind} needs at least 2 classes")
    t0 = time.perf_counter()
    est = _fit_estimator(spec, train.X, train.y, train.n_classes, seed)
    elapsed = time.perf_counter() - t0
    return TrainedModel(spec, est, train.n_classes, list(train.feature_names),
                        list(train.class_names), elapsed)


def predict_proba(m: TrainedModel, X) -> np.ndarray:
    return m.predict_proba(X)


def predict(m: TrainedModel, X) -> np.ndarray:
    """Argmax of :func:`predict_proba`; ties go to the lowest class index."""
    return m.predict(X)
