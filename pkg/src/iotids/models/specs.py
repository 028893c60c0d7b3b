"""Model specs: immutable, hashable hyperparameter records."""

from __future__ import annotations

from dataclasses import asdict, dataclass, fields
from typing import Union


@dataclass(frozen=True)
class RfHyperParams:
    n_estimators: int = 100
    max_depth: int = 10
    min_samples_split: int = 5
    min_samples_leaf: int = 2
    seed: int = 42

    def __post_init__(self):
        if self.n_estimators < 1 or self.max_depth < 1:
            raise ValueError("n_estimators and max_depth must be >= 1")
        if self.min_samples_split < 2 or self.min_samples_leaf < 1:
            raise ValueError("min_samples_split must be >= 2 and min_samples_leaf >= 1")


@dataclass(frozen=True)
class RandomForestSpec:
    params: RfHyperParams = RfHyperParams()
    kind = "rf"


@dataclass(frozen=True)
class KnnSpec:
    k: int = 5
    kind = "knn"

    def __post_init__(self):
        if self.k < 1:
            raise ValueError("k must be >= 1")


@dataclass(frozen=True)
class LogRegSpec:
    l2: float = 1e-4
    lr: float = 0.1
    max_iter: int = 500
    tol: float = 1e-6
    kind = "lr"

    def __post_init__(self):
        if min(self.l2, self.lr, self.max_iter, self.tol) <= 0:
            raise ValueError("logistic regression settings must be positive")


@dataclass(frozen=True)
class MlpSpec:
    hidden: int = 100
    lr: float = 0.001
    momentum: float = 0.9
    batch: int = 200
    max_epochs: int = 200
    patience: int = 10
    kind = "mlp"

    def __post_init__(self):
        if min(self.hidden, self.lr, self.momentum, self.batch, self.max_epochs, self.patience) <= 0:
            raise ValueError("MLP settings must be positive")


@dataclass(frozen=True)
class SoftVotingSpec:
    members: tuple = ()
    kind = "voting"

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise ValueError("soft voting needs at least one member")
        for m in self.members:
            if not isinstance(m, (RandomForestSpec, KnnSpec, LogRegSpec, MlpSpec, SoftVotingSpec)):
                raise TypeError(f"invalid voting member {m!r}")


ModelSpec = Union[RandomForestSpec, KnnSpec, LogRegSpec, MlpSpec, SoftVotingSpec]

_BY_KIND = {cls.kind: cls for cls in (RandomForestSpec, KnnSpec, LogRegSpec, MlpSpec, SoftVotingSpec)}


def spec_to_dict(spec: ModelSpec) -> dict:
    if isinstance(spec, SoftVotingSpec):
        return {"kind": spec.kind, "members": [spec_to_dict(m) for m in spec.members]}
    if isinstance(spec, RandomForestSpec):
        return {"kind": spec.kind, **asdict(spec.params)}
    return {"kind": spec.kind, **asdict(spec)}


def spec_from_dict(d: dict) -> ModelSpec:
    d = dict(d)
    kind = d.pop("kind")
    if kind not in _BY_KIND:
        raise ValueError(f"unknown model kind {kind!r}")
    if kind == "voting":
        return SoftVotingSpec(tuple(spec_from_dict(m) for m in d["members"]))
    if kind == "rf":
        return RandomForestSpec(RfHyperParams(**d))
    cls = _BY_KIND[kind]
    allowed = {f.name for f in fields(cls)}
    unknown = set(d) - allowed
    if unknown:
        raise ValueError(f"unknown {kind} settings: {sorted(unknown)}")
    return cls(**d)


def default_grids() -> dict[str, list[ModelSpec]]:
    """Search grids per family; the forest is fixed at its published settings."""
    return {
        "rf": [RandomForestSpec()],
        "knn": [KnnSpec(k) for k in (3, 5, 7, 9)],
        "lr": [LogRegSpec(l2=l2, lr=0.1, max_iter=500, tol=1e-6) for l2 in (1e-4, 1e-2)],
        "mlp": [MlpSpec(hidden=h, lr=0.001, momentum=0.9, batch=200, max_epochs=200, patience=10)
                for h in (50, 100)],
    }
