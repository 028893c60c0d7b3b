from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import oracles
from iotids.errors import DataError
from iotids.metrics import (
    ConfusionMatrix,
    binary_auc,
    classification_report,
    cohen_kappa,
    confusion_matrix,
    evaluate,
    roc_auc_ovr,
    roc_curve,
)

CM_HAND = np.array([[20, 5], [10, 15]])


def test_confusion_small_example():
    assert confusion_matrix([0, 1, 1], [0, 1, 0], 2).counts.tolist() == [[1, 0], [1, 1]]


def test_confusion_perfect_is_diagonal():
    y = np.array([0, 2, 2, 1, 2, 0])
    assert confusion_matrix(y, y, 4).counts.tolist() == np.diag([2, 1, 3, 0]).tolist()


def test_confusion_matches_tally():
    rng = np.random.default_rng(0)
    y_true, y_pred = rng.integers(0, 5, 1000), rng.integers(0, 5, 1000)
    cm = confusion_matrix(y_true, y_pred, 5)
    assert cm.counts.tolist() == oracles.tally(y_true, y_pred, 5)
    assert cm.total == 1000


def test_confusion_rejects_bad_labels():
    with pytest.raises(DataError):
        confusion_matrix([0, 3], [0, 1], 3)
    with pytest.raises(DataError):
        confusion_matrix([0, 1], [0], 3)


def test_report_diagonal_all_ones():
    rep = classification_report(ConfusionMatrix(np.diag([3, 4, 5])))
    for v in (rep.accuracy, rep.macro_precision, rep.weighted_precision, rep.macro_recall,
              rep.weighted_recall, rep.macro_f1, rep.weighted_f1):
        assert v == 1.0


def test_report_hand_example():
    rep = classification_report(ConfusionMatrix(CM_HAND))
    assert rep.accuracy == pytest.approx(0.7, abs=1e-15)
    np.testing.assert_allclose(rep.precision, [2 / 3, 3 / 4], rtol=1e-15)
    np.testing.assert_allclose(rep.recall, [0.8, 0.6], rtol=1e-15)
    ref = oracles.prf(CM_HAND.tolist())
    assert rep.macro_f1 == pytest.approx(ref["macro_f1"], abs=1e-15)


def test_zero_division_flag():
    # class 1 is never predicted
    rep = classification_report(ConfusionMatrix(np.array([[3, 0], [2, 0]])))
    assert rep.precision[1] == 0.0
    assert rep.precision_zero_division == [1]
    assert not np.isnan(rep.macro_precision)


def test_absent_class_excluded_from_macro():
    # class 2 present in truth with recall 0: counted in the macro mean
    cm = ConfusionMatrix(np.array([[2, 0, 0], [0, 2, 0], [0, 1, 0]]))
    rep = classification_report(cm)
    # class 2 absent from truth: left out of the macro mean
    cm2 = ConfusionMatrix(np.array([[2, 0, 0], [0, 2, 0], [0, 0, 0]]))
    rep2 = classification_report(cm2)
    assert rep2.macro_recall == 1.0 and rep2.recall_zero_division == [2]
    assert rep.macro_recall == pytest.approx(2 / 3)


def test_kappa_examples():
    assert cohen_kappa(ConfusionMatrix(np.diag([4, 6]))) == 1.0
    assert cohen_kappa(ConfusionMatrix(np.array([[25, 25], [25, 25]]))) == 0.0
    assert cohen_kappa(ConfusionMatrix(CM_HAND)) == pytest.approx(0.4, abs=1e-12)
    assert cohen_kappa(ConfusionMatrix(np.array([[7, 0], [0, 0]]))) == 1.0


def test_auc_examples():
    pos = np.array([True, True, False, False])
    assert binary_auc(np.array([0.9, 0.8, 0.2, 0.1]), pos) == 1.0
    assert binary_auc(np.full(4, 0.3), pos) == 0.5


def test_auc_matches_pairs():
    rng = np.random.default_rng(1)
    scores = np.round(rng.random(50), 1)
    pos = rng.random(50) < 0.4
    assert binary_auc(scores, pos) == pytest.approx(oracles.pair_auc(scores, pos), abs=1e-12)


def test_auc_skips_ineligible_classes():
    y = np.array([0, 0, 1, 1])
    P = np.array([[0.9, 0.1, 0.0], [0.6, 0.4, 0.0], [0.3, 0.7, 0.0], [0.2, 0.8, 0.0]])
    macro, per, skipped = roc_auc_ovr(y, P)
    assert skipped == [2] and macro == 1.0 and set(per) == {0, 1}
    with pytest.raises(DataError):
        roc_auc_ovr(np.zeros(3, dtype=int), np.array([[1.0, 0.0]] * 3))


def test_roc_curve_endpoints():
    rng = np.random.default_rng(2)
    s, pos = rng.random(30), rng.random(30) < 0.5
    fpr, tpr, thr = roc_curve(s, pos)
    assert (fpr[0], tpr[0], fpr[-1], tpr[-1]) == (0.0, 0.0, 1.0, 1.0)
    assert np.all(np.diff(fpr) >= 0) and np.all(np.diff(tpr) >= 0)
    assert np.trapezoid(tpr, fpr) == pytest.approx(binary_auc(s, pos), abs=1e-12)


def test_cm_csv_roundtrip(tmp_path):
    cm = ConfusionMatrix(CM_HAND)
    cm.to_csv(tmp_path / "cm.csv", ["a", "b"])
    back, names = ConfusionMatrix.from_csv(tmp_path / "cm.csv")
    assert names == ["a", "b"]
    np.testing.assert_array_equal(back.counts, CM_HAND)
    assert (tmp_path / "cm.csv").read_text().splitlines()[0] == "true\\pred,a,b"


def _compare_with_oracles(y_true, y_pred, proba, C):
    rep, cm = evaluate(y_true, y_pred, proba, C)
    ref_cm = oracles.tally(y_true, y_pred, C)
    assert cm.counts.tolist() == ref_cm
    ref = oracles.prf(ref_cm)
    for key in ("accuracy", "macro_precision", "weighted_precision", "macro_recall",
                "weighted_recall", "macro_f1", "weighted_f1"):
        assert getattr(rep, key) == pytest.approx(ref[key], abs=1e-9), key
    for key in ("precision", "recall", "f1"):
        np.testing.assert_allclose(getattr(rep, key), ref[key], atol=1e-9)
    assert rep.kappa == pytest.approx(oracles.kappa(ref_cm), abs=1e-9)
    assert rep.auc_ovr_macro == pytest.approx(oracles.ovr_macro_auc(y_true, proba), abs=1e-9)
    return rep


@settings(max_examples=150, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_random_instances_match_oracles(seed):
    _compare_with_oracles(*oracles.random_instance(np.random.default_rng(seed)))


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_metric_invariants(seed):
    rng = np.random.default_rng(seed)
    y_true, y_pred, proba, C = oracles.random_instance(rng)
    rep, cm = evaluate(y_true, y_pred, proba, C)
    for v in (rep.accuracy, rep.macro_precision, rep.weighted_precision, rep.macro_recall,
              rep.weighted_recall, rep.macro_f1, rep.weighted_f1, rep.auc_ovr_macro):
        assert 0.0 <= v <= 1.0
    assert -1.0 <= rep.kappa <= 1.0
    assert rep.accuracy == np.trace(cm.counts) / cm.total
    for key in ("precision", "recall", "f1"):
        vals = getattr(rep, key)
        assert min(vals) - 1e-12 <= getattr(rep, f"weighted_{key}") <= max(vals) + 1e-12
    if np.all(cm.counts.sum(1) > 0):
        assert rep.weighted_recall == pytest.approx(rep.accuracy, abs=1e-12)
    diagonal = np.count_nonzero(cm.counts - np.diag(np.diag(cm.counts))) == 0
    assert (rep.kappa == 1.0) == diagonal

    # strictly increasing transform of one score column leaves its AUC unchanged;
    # grid-valued scores keep the transform strictly increasing in floating point
    c = int(rng.integers(0, C))
    scores = rng.integers(0, 20, len(y_true)) / 20
    pos = y_true == c
    if pos.any() and not pos.all():
        assert binary_auc(np.exp(3 * scores) - 7, pos) == pytest.approx(binary_auc(scores, pos), abs=1e-12)

    # consistent relabelling permutes per-class values, aggregates unchanged
    perm = rng.permutation(C)
    rep2, _ = evaluate(perm[y_true], perm[y_pred], proba[:, np.argsort(perm)], C)
    for key in ("precision", "recall", "f1", "support"):
        np.testing.assert_allclose(np.asarray(getattr(rep2, key))[perm], getattr(rep, key), atol=1e-12)
    for key in ("accuracy", "macro_precision", "weighted_precision", "macro_recall", "weighted_recall",
                "macro_f1", "weighted_f1", "kappa", "auc_ovr_macro"):
        assert getattr(rep2, key) == pytest.approx(getattr(rep, key), abs=1e-12), key


def test_kappa_one_iff_diagonal_single_cell():
    assert cohen_kappa(ConfusionMatrix(np.array([[0, 0], [0, 5]]))) == 1.0
    assert cohen_kappa(ConfusionMatrix(np.array([[0, 1], [0, 5]]))) < 1.0
