"""Pipeline configuration: a flat JSON document mapped onto a dataclass."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .models.specs import ModelSpec, default_grids, spec_from_dict

DATA_DIR_ENV = "IOTIDS_DATA_DIR"
MODES = ("paper-order", "leak-free")
FAMILIES = ("rf", "knn", "lr", "mlp", "voting")


@dataclass
class PipelineConfig:
    data_path: str = "RT_IOT2022.csv"
    target_column: str = "Attack_type"
    categorical_columns: list[str] = field(default_factory=lambda: ["proto", "service"])
    drop_columns: list[str] = field(default_factory=list)
    mode: str = "paper-order"
    z_threshold: float = 3.0
    test_fraction: float = 0.2
    rfe_k: int = 20
    rfe_step: int = 1
    rfe_max_rows: int | None = 20_000
    resample_target: int = 10_000
    k_neighbors: int = 5
    cv_folds: int = 5
    models: list[str] = field(default_factory=lambda: list(FAMILIES))
    # family -> list of spec dicts; families not listed use the default grid
    grids: dict[str, list[dict]] = field(default_factory=dict)
    voting_members: list[str] = field(default_factory=lambda: ["rf", "knn", "lr", "mlp"])
    curve_fractions: list[float] = field(default_factory=lambda: [round(0.1 * i, 1) for i in range(1, 11)])
    curve_folds: int = 5
    curve_max_rows: int | None = 5_000
    seed: int = 42
    output_dir: str = "runs/latest"

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not 0 < self.test_fraction < 1:
            raise ValueError("test_fraction must lie in (0, 1)")
        if self.z_threshold <= 0:
            raise ValueError("z_threshold must be positive")
        for name in ("rfe_k", "rfe_step", "resample_target", "k_neighbors", "curve_folds"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be positive")
        if self.cv_folds < 2 or self.curve_folds < 2:
            raise ValueError("cv_folds and curve_folds must be >= 2")
        for name in ("rfe_max_rows", "curve_max_rows"):
            v = getattr(self, name)
            if v is not None and v < 1:
                raise ValueError(f"{name} must be positive or null")
        unknown = set(self.models) - set(FAMILIES)
        if unknown:
            raise ValueError(f"unknown model families {sorted(unknown)}")
        if set(self.voting_members) - set(FAMILIES[:-1]) or not self.voting_members:
            raise ValueError("voting_members must be a non-empty subset of rf, knn, lr, mlp")
        if not self.curve_fractions or any(not 0 < f <= 1 for f in self.curve_fractions):
            raise ValueError("curve_fractions must lie in (0, 1]")
        if list(self.curve_fractions) != sorted(self.curve_fractions):
            raise ValueError("curve_fractions must be ascending")
        for family, grid in self.grids.items():
            if family not in FAMILIES[:-1]:
                raise ValueError(f"no grid for family {family!r}")
            if not grid:
                raise ValueError(f"grid for {family!r} is empty")
            for d in grid:
                spec_from_dict({"kind": family, **d})

    def grid_for(self, family: str) -> list[ModelSpec]:
        if family in self.grids:
            return [spec_from_dict({"kind": family, **d}) for d in self.grids[family]]
        return default_grids()[family]

    def resolved_data_path(self) -> Path:
        p = Path(self.data_path)
        if not p.is_absolute() and not p.exists() and os.environ.get(DATA_DIR_ENV):
            return Path(os.environ[DATA_DIR_ENV]) / p
        return p

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config fields {sorted(unknown)}")
        return cls(**d)

    @classmethod
    def load(cls, path) -> "PipelineConfig":
        with open(path, encoding="utf-8") as fh:
            return cls.from_dict(json.load(fh))

    def replace(self, **changes) -> "PipelineConfig":
        d = self.to_dict()
        d.update({k: v for k, v in changes.items() if v is not None})
        return PipelineConfig.from_dict(d)
