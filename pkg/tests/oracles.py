"""Brute-force reference implementations of the classification metrics.

Deliberately naive: plain Python loops over samples and pairs, no shared code
with ``iotids.metrics``.
"""

from __future__ import annotations

import numpy as np


def tally(y_true, y_pred, C):
    cm = [[0] * C for _ in range(C)]
    for t, p in zip(y_true, y_pred):
        cm[int(t)][int(p)] += 1
    return cm


def prf(cm):
    C = len(cm)
    N = sum(map(sum, cm))
    out = {"precision": [], "recall": [], "f1": [], "support": []}
    for c in range(C):
        tp = cm[c][c]
        pred = sum(cm[r][c] for r in range(C))
        sup = sum(cm[c])
        p = tp / pred if pred else 0.0
        r = tp / sup if sup else 0.0
        f = 2 * p * r / (p + r) if p + r else 0.0
        out["precision"].append(p)
        out["recall"].append(r)
        out["f1"].append(f)
        out["support"].append(sup)
    present = [c for c in range(C) if out["support"][c] > 0]
    for key in ("precision", "recall", "f1"):
        out[f"macro_{key}"] = sum(out[key][c] for c in present) / len(present)
        out[f"weighted_{key}"] = sum(out[key][c] * out["support"][c] for c in range(C)) / N
    out["accuracy"] = sum(cm[c][c] for c in range(C)) / N
    return out


def kappa(cm):
    C = len(cm)
    N = sum(map(sum, cm))
    p_o = sum(cm[c][c] for c in range(C)) / N
    p_e = sum(sum(cm[c]) * sum(cm[r][c] for r in range(C)) for c in range(C)) / (N * N)
    if p_e == 1:
        return 1.0
    return (p_o - p_e) / (1 - p_e)


def pair_auc(scores, positive):
    pos = [s for s, p in zip(scores, positive) if p]
    neg = [s for s, p in zip(scores, positive) if not p]
    wins = 0.0
    for a in pos:
        for b in neg:
            wins += 1.0 if a > b else 0.5 if a == b else 0.0
    return wins / (len(pos) * len(neg))


def ovr_macro_auc(y_true, proba):
    C = proba.shape[1]
    aucs = []
    for c in range(C):
        positive = [int(t) == c for t in y_true]
        if all(positive) or not any(positive):
            continue
        aucs.append(pair_auc(list(proba[:, c]), positive))
    return sum(aucs) / len(aucs)


def random_instance(rng: np.random.Generator):
    """Labels, predictions and probabilities for one random multiclass problem.

    Probabilities are rounded to two decimals so that score ties occur.
    """
    C = int(rng.integers(2, 7))
    n = int(rng.integers(2, 201))
    y_true = rng.integers(0, C, n)
    while len(set(y_true.tolist())) < 2:
        y_true = rng.integers(0, C, n)
    raw = np.round(rng.dirichlet(np.ones(C), n), 2) + 1e-3
    proba = raw / raw.sum(1, keepdims=True)
    # predictions agree with truth more often than chance
    y_pred = np.where(rng.random(n) < 0.6, y_true, rng.integers(0, C, n))
    return y_true, y_pred, proba, C
