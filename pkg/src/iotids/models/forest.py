from __future__ import annotations

import math

import numpy as np

from .._rng import derive_rng
from .specs import RfHyperParams
from .tree import Tree, build_tree, presort


class RandomForest:
    """Bagged Gini CART trees with ``floor(sqrt(d))`` candidate features per node.

    Every tree draws its bootstrap and its feature-sampling seed from the
    stream ``(params.seed, seed, tree_index)``, so the fitted forest does not
    depend on the order in which trees are grown.
    """

    def __init__(self, params: RfHyperParams, n_classes: int, trees: list[Tree] | None = None,
                 importances: np.ndarray | None = None):
        self.params = params
        self.n_classes = n_classes
        self.trees = trees or []
        self.feature_importances = importances

    def fit(self, X: np.ndarray, y: np.ndarray, seed: int) -> "RandomForest":
        p = self.params
        n, d = X.shape
        max_features = max(1, int(math.floor(math.sqrt(d))))
        XT = np.ascontiguousarray(X.T)
        order = presort(X)
        trees, total = [], np.zeros(d)
        for t in range(p.n_estimators):
            rng = derive_rng(p.seed, seed, t)
            sample = rng.integers(0, n, size=n)
            tree_seed = int(rng.integers(0, 2**63 - 1))
            tree, imp = build_tree(
                X, y, sample, self.n_classes,
                max_depth=p.max_depth,
                min_samples_split=p.min_samples_split,
                min_samples_leaf=p.min_samples_leaf,
                max_features=max_features,
                seed=tree_seed,
                order=order,
                XT=XT,
            )
            trees.append(tree)
            total += imp
        self.trees = trees
        total /= p.n_estimators
        s = total.sum()
        self.feature_importances = total / s if s > 0 else total
        return self

    def tree_probas(self, X: np.ndarray) -> list[np.ndarray]:
        return [t.predict_proba(X) for t in self.trees]

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(X, dtype=np.float64)
        acc = np.zeros((X.shape[0], self.n_classes))
        for t in self.trees:
            acc += t.predict_proba(X)
        return acc / len(self.trees)

    def state(self) -> dict:
        return {
            "trees": [t.to_dict() for t in self.trees],
            "feature_importances": self.feature_importances.tolist(),
        }

    @classmethod
    def from_state(cls, params: RfHyperParams, n_classes: int, state: dict) -> "RandomForest":
        trees = [Tree.from_dict(t, n_classes) for t in state["trees"]]
        return cls(params, n_classes, trees, np.asarray(state["feature_importances"]))
