"""Recursive feature elimination ranked by random-forest Gini importance."""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .dataset import Dataset, stratified_subsample
from .models.forest import RandomForest
from .models.specs import RfHyperParams

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class FeatureSubset:
    """Surviving columns plus the elimination ranking.

    ``ranking[j]`` is 1 for every selected column; eliminated columns are
    numbered 2, 3, ... in the order they were dropped.
    """

    selected: list[int]
    ranking: dict[int, int]
    feature_names: list[str]

    @property
    def selected_names(self) -> list[str]:
        return [self.feature_names[j] for j in self.selected]

    @property
    def elimination_order(self) -> list[int]:
        dropped = [j for j, r in self.ranking.items() if r > 1]
        return sorted(dropped, key=self.ranking.__getitem__)

    def to_dict(self) -> dict:
        return {
            "selected": list(self.selected),
            "selected_names": self.selected_names,
            "ranking": {self.feature_names[j]: r for j, r in sorted(self.ranking.items())},
        }


def rfe_select(
    ds: Dataset,
    k: int,
    seed: int = 42,
    *,
    step: int = 1,
    max_rows: int | None = None,
    params: RfHyperParams = RfHyperParams(),
) -> FeatureSubset:
    """Drop the least important features until ``k`` remain.

    Each round refits a forest on the surviving columns and removes ``step``
    features (never more than needed) in ascending importance order; equal
    importances drop the highest column index first. ``max_rows`` caps the
    rows used for the ranking fits with a seeded stratified subsample.
    """
    if not 1 <= k <= ds.d:
        raise ValueError(f"k must lie in [1, {ds.d}], got {k}")
    if step < 1:
        raise ValueError("step must be >= 1")
    work = ds
    if max_rows is not None and ds.n > max_rows:
        work = stratified_subsample(ds, max_rows / ds.n, seed)
    surviving = list(range(ds.d))
    ranking = {}
    next_rank = 2
    while len(surviving) > k:
        forest = RandomForest(params, ds.n_classes).fit(work.X[:, surviving], work.y, seed)
        imp = forest.feature_importances
        # ascending importance, then descending column index
        order = sorted(range(len(surviving)), key=lambda i: (imp[i], -surviving[i]))
        n_drop = min(step, len(surviving) - k)
        dropped = [surviving[i] for i in order[:n_drop]]
        for j in dropped:
            ranking[j] = next_rank
            next_rank += 1
        log.debug("rfe dropped %s", [ds.feature_names[j] for j in dropped])
        surviving = [j for j in surviving if j not in dropped]
    for j in surviving:
        ranking[j] = 1
    return FeatureSubset(surviving, ranking, list(ds.feature_names))
