"""Confusion matrix, precision/recall/F1, Cohen's kappa and one-vs-rest AUC."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.stats import rankdata

from .errors import DataError


@dataclass(frozen=True)
class ConfusionMatrix:
    """Rows are true classes, columns predicted classes."""

    counts: np.ndarray

    @property
    def n_classes(self) -> int:
        return self.counts.shape[0]

    @property
    def total(self) -> int:
        return int(self.counts.sum())

    def to_csv(self, path, class_names) -> None:
        with Path(path).open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["true\\pred", *class_names])
            for name, row in zip(class_names, self.counts):
                w.writerow([name, *map(int, row)])

    @classmethod
    def from_csv(cls, path) -> tuple["ConfusionMatrix", list[str]]:
        with Path(path).open(newline="", encoding="utf-8") as fh:
            rows = list(csv.reader(fh))
        names = rows[0][1:]
        counts = np.array([[int(v) for v in r[1:]] for r in rows[1:]], dtype=np.int64)
        return cls(counts), names


@dataclass
class MetricReport:
    accuracy: float
    precision: list[float]
    recall: list[float]
    f1: list[float]
    support: list[int]
    macro_precision: float
    weighted_precision: float
    macro_recall: float
    weighted_recall: float
    macro_f1: float
    weighted_f1: float
    precision_zero_division: list[int] = field(default_factory=list)
    recall_zero_division: list[int] = field(default_factory=list)
    kappa: float | None = None
    auc_ovr_macro: float | None = None
    auc_per_class: dict[int, float] = field(default_factory=dict)
    auc_skipped_classes: list[int] = field(default_factory=list)

    def to_dict(self, class_names=None) -> dict:
        def name(c):
            return class_names[c] if class_names else str(c)

        return {
            "accuracy": self.accuracy,
            "macro_precision": self.macro_precision,
            "weighted_precision": self.weighted_precision,
            "macro_recall": self.macro_recall,
            "weighted_recall": self.weighted_recall,
            "macro_f1": self.macro_f1,
            "weighted_f1": self.weighted_f1,
            "kappa": self.kappa,
            "auc_ovr_macro": self.auc_ovr_macro,
            "per_class": {
                name(c): {
                    "precision": self.precision[c],
                    "recall": self.recall[c],
                    "f1": self.f1[c],
                    "support": self.support[c],
                    "auc": self.auc_per_class.get(c),
                }
                for c in range(len(self.precision))
            },
            "precision_zero_division": [name(c) for c in self.precision_zero_division],
            "recall_zero_division": [name(c) for c in self.recall_zero_division],
            "auc_skipped_classes": [name(c) for c in self.auc_skipped_classes],
        }


def confusion_matrix(y_true, y_pred, n_classes: int) -> ConfusionMatrix:
    y_true = np.asarray(y_true, dtype=np.int64)
    y_pred = np.asarray(y_pred, dtype=np.int64)
    if y_true.shape != y_pred.shape:
        raise DataError("y_true and y_pred differ in length")
    for arr in (y_true, y_pred):
        if arr.size and (arr.min() < 0 or arr.max() >= n_classes):
            raise DataError(f"label outside [0, {n_classes})")
    flat = np.bincount(y_true * n_classes + y_pred, minlength=n_classes * n_classes)
    return ConfusionMatrix(flat.reshape(n_classes, n_classes))


def _safe_div(num: np.ndarray, den: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    zero = den == 0
    out = np.divide(num, den, out=np.zeros(num.shape, dtype=np.float64), where=~zero)
    return out, zero


def classification_report(cm: ConfusionMatrix) -> MetricReport:
    """Per-class and averaged precision, recall and F1 plus accuracy.

    Zero denominators give 0 and are listed in the ``*_zero_division``
    fields. Macro averages run over classes that occur in the truth;
    weighted averages use true-class support as weights.
    """
    counts = cm.counts.astype(np.float64)
    total = counts.sum()
    if counts.size == 0 or total == 0:
        raise DataError("empty confusion matrix")
    tp = np.diag(counts)
    support = counts.sum(axis=1)
    predicted = counts.sum(axis=0)
    precision, p_zero = _safe_div(tp, predicted)
    recall, r_zero = _safe_div(tp, support)
    f1, _ = _safe_div(2 * precision * recall, precision + recall)
    present = support > 0
    w = support / total
    return MetricReport(
        accuracy=float(tp.sum() / total),
        precision=precision.tolist(),
        recall=recall.tolist(),
        f1=f1.tolist(),
        support=[int(s) for s in support],
        macro_precision=float(precision[present].mean()),
        weighted_precision=float(w @ precision),
        macro_recall=float(recall[present].mean()),
        weighted_recall=float(w @ recall),
        macro_f1=float(f1[present].mean()),
        weighted_f1=float(w @ f1),
        precision_zero_division=np.flatnonzero(p_zero).tolist(),
        recall_zero_division=np.flatnonzero(r_zero).tolist(),
    )


def cohen_kappa(cm: ConfusionMatrix) -> float:
    counts = cm.counts.astype(np.float64)
    N = counts.sum()
    if N == 0:
        raise DataError("empty confusion matrix")
    p_o = np.trace(counts) / N
    p_e = float(counts.sum(axis=1) @ counts.sum(axis=0)) / (N * N)
    if p_e == 1.0:
        # all mass in a single cell
        return 1.0 if p_o == 1.0 else 0.0
    return float((p_o - p_e) / (1.0 - p_e))


def binary_auc(scores: np.ndarray, positive: np.ndarray) -> float:
    """P(score of random positive > random negative), ties counted one half."""
    ranks = rankdata(scores)
    n_pos = int(positive.sum())
    n_neg = positive.size - n_pos
    return float((ranks[positive].sum() - n_pos * (n_pos + 1) / 2.0) / (n_pos * n_neg))


def roc_auc_ovr(y_true, proba) -> tuple[float, dict[int, float], list[int]]:
    """One-vs-rest AUC per eligible class and their unweighted mean.

    A class is eligible when it has at least one positive and one negative
    in ``y_true``.

    Returns:
        (macro AUC, per-class AUC, skipped classes)
    """
    y_true = np.asarray(y_true, dtype=np.int64)
    proba = np.asarray(proba, dtype=np.float64)
    if proba.ndim != 2 or proba.shape[0] != y_true.shape[0]:
        raise DataError("probability matrix does not match y_true")
    if not np.allclose(proba.sum(axis=1), 1.0, atol=1e-6, rtol=0):
        raise DataError("probability rows must sum to 1")
    per_class, skipped = {}, []
    for c in range(proba.shape[1]):
        pos = y_true == c
        if pos.all() or not pos.any():
            skipped.append(c)
            continue
        per_class[c] = binary_auc(proba[:, c], pos)
    if not per_class:
        raise DataError("no class has both positives and negatives; AUC undefined")
    return float(np.mean(list(per_class.values()))), per_class, skipped


def roc_auc_ovr_macro(y_true, proba) -> float:
    return roc_auc_ovr(y_true, proba)[0]


def roc_curve(scores: np.ndarray, positive: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """(fpr, tpr, thresholds) at every distinct score, highest threshold first."""
    order = np.argsort(-scores, kind="stable")
    s = scores[order]
    p = positive[order].astype(np.float64)
    tps = np.cumsum(p)
    fps = np.cumsum(1.0 - p)
    last = np.r_[np.flatnonzero(np.diff(s)), s.size - 1]
    tpr = np.r_[0.0, tps[last] / max(tps[-1], 1)]
    fpr = np.r_[0.0, fps[last] / max(fps[-1], 1)]
    return fpr, tpr, np.r_[np.inf, s[last]]


def evaluate(y_true, y_pred, proba, n_classes: int) -> tuple[MetricReport, ConfusionMatrix]:
    """Full metric report for one model's predictions."""
    cm = confusion_matrix(y_true, y_pred, n_classes)
    rep = classification_report(cm)
    rep.kappa = cohen_kappa(cm)
    rep.auc_ovr_macro, rep.auc_per_class, rep.auc_skipped_classes = roc_auc_ovr(y_true, proba)
    return rep, cm
