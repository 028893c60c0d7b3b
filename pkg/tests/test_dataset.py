from __future__ import annotations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from iotids.dataset import (
    Dataset,
    LabelEncoder,
    encode,
    load_dataset,
    read_csv,
    stratified_split,
    stratified_subsample,
)
from iotids.errors import DataError


def _write(path, text):
    path.write_text(text, encoding="utf-8")
    return path


def _ds(counts, d=2, seed=0):
    rng = np.random.default_rng(seed)
    y = np.concatenate([np.full(n, c) for c, n in enumerate(counts)])
    rng.shuffle(y)
    X = rng.standard_normal((len(y), d))
    return Dataset(X, y, [f"f{j}" for j in range(d)], [f"c{c}" for c in range(len(counts))])


# ingestion

def test_one_row_csv(tmp_path):
    t = read_csv(_write(tmp_path / "a.csv", "x,y,label\n1,2,a\n"))
    assert t.n_rows == 1
    assert t.header == ["x", "y", "label"]


def test_missing_cell_names_the_row(tmp_path):
    lines = ["x,y,label"] + [f"{i},{i},a" for i in range(1, 11)]
    lines[7] = "7,a"
    p = _write(tmp_path / "a.csv", "\n".join(lines) + "\n")
    with pytest.raises(DataError, match=r"row 7\b"):
        read_csv(p)


def test_empty_numeric_cell_names_the_row(tmp_path):
    lines = ["x,y,label"] + [f"{i},{i},a" for i in range(1, 11)]
    lines[7] = "7,,a"
    t = read_csv(_write(tmp_path / "a.csv", "\n".join(lines) + "\n"))
    with pytest.raises(DataError, match=r"row 7, column 'y'"):
        encode(t, "label")


@pytest.mark.parametrize("cell", ["nan", "inf", "-inf", "abc"])
def test_non_finite_or_garbage_rejected(tmp_path, cell):
    t = read_csv(_write(tmp_path / "a.csv", f"x,label\n1,a\n{cell},b\n"))
    with pytest.raises(DataError, match="row 2"):
        encode(t, "label")


def test_missing_file(tmp_path):
    with pytest.raises(DataError, match="not found"):
        read_csv(tmp_path / "nope.csv")


def test_empty_file(tmp_path):
    with pytest.raises(DataError, match="empty"):
        read_csv(_write(tmp_path / "a.csv", ""))


def test_header_only(tmp_path):
    with pytest.raises(DataError, match="no data rows"):
        read_csv(_write(tmp_path / "a.csv", "x,label\n"))


def test_duplicate_header(tmp_path):
    with pytest.raises(DataError, match="duplicate"):
        read_csv(_write(tmp_path / "a.csv", "x,x,label\n1,2,a\n"))


def test_load_dataset_checks_columns(tmp_path):
    p = _write(tmp_path / "a.csv", "x,label\n1,a\n")
    with pytest.raises(DataError, match="'target'"):
        load_dataset(p, "target")
    with pytest.raises(DataError, match="'proto'"):
        load_dataset(p, "label", ["proto"])


# encoding

def test_categorical_codes_lexicographic(tmp_path):
    t = read_csv(_write(tmp_path / "a.csv", "proto,x,label\nb,1,u\na,2,v\nb,3,u\n"))
    ds, encoders, target = encode(t, "label", ["proto"])
    np.testing.assert_array_equal(ds.X[:, 0], [1.0, 0.0, 1.0])
    assert encoders["proto"].categories == ("a", "b")
    np.testing.assert_array_equal(ds.y, [0, 1, 0])
    assert ds.feature_names == ["proto", "x"]
    assert ds.class_names == ["u", "v"]


def test_single_class_target(tmp_path):
    t = read_csv(_write(tmp_path / "a.csv", "x,label\n1,only\n2,only\n3,only\n"))
    ds, _, target = encode(t, "label")
    assert ds.n_classes == 1
    assert set(ds.y.tolist()) == {0}


def test_drop_columns(tmp_path):
    t = read_csv(_write(tmp_path / "a.csv", "idx,x,label\n0,1,a\n1,2,b\n"))
    ds, _, _ = encode(t, "label", drop_columns=["idx", "absent"])
    assert ds.feature_names == ["x"]


def test_unknown_category_rejected():
    with pytest.raises(DataError, match="unknown category"):
        LabelEncoder.fit(["a", "b"]).encode(["c"])


@given(st.lists(st.text(min_size=1, max_size=6), min_size=1, max_size=40))
def test_label_roundtrip(values):
    enc = LabelEncoder.fit(values)
    codes = enc.encode(values)
    assert enc.decode(codes) == list(values)
    assert list(enc.categories) == sorted(set(values))
    assert sorted(set(codes.tolist())) == list(range(len(enc.categories)))
    assert LabelEncoder.from_dict(enc.to_dict()) == enc


def test_dataset_invariants_enforced():
    with pytest.raises(DataError):
        Dataset(np.array([[np.nan]]), np.array([0]), ["f"], ["a"])
    with pytest.raises(DataError):
        Dataset(np.array([[1.0]]), np.array([1]), ["f"], ["a"])
    with pytest.raises(DataError):
        Dataset(np.zeros((0, 1)), np.zeros(0, dtype=int), ["f"], ["a"])


# splitting

def _split_oracle(y, n_classes, fraction, seed):
    """Independent re-derivation: one generator, classes in order, floor(n_c * f) to test."""
    rng = np.random.default_rng(seed)
    test = set()
    for c in range(n_classes):
        members = [i for i in range(len(y)) if y[i] == c]
        if not members:
            continue
        shuffled = rng.permutation(np.array(members))
        test.update(int(i) for i in shuffled[: int(len(members) * fraction)])
    return sorted(test)


def test_ten_per_class_gives_two_each():
    sp = stratified_split(_ds([10, 10, 10]), 0.2, 1)
    assert sp.test.class_counts().tolist() == [2, 2, 2]
    assert sp.train.class_counts().tolist() == [8, 8, 8]


def test_four_rows_all_to_train():
    sp = stratified_split(_ds([4, 10]), 0.2, 1)
    assert sp.test.class_counts().tolist() == [0, 2]
    assert sp.train.class_counts().tolist() == [4, 8]


def test_split_counts_and_oracle():
    ds = _ds([100, 10, 3])
    sp = stratified_split(ds, 0.2, 42)
    assert sp.test.class_counts().tolist() == [20, 2, 0]
    assert sp.test_index.tolist() == _split_oracle(ds.y, 3, 0.2, 42)
    again = stratified_split(ds, 0.2, 42)
    np.testing.assert_array_equal(sp.test_index, again.test_index)
    np.testing.assert_array_equal(sp.train_index, again.train_index)


@settings(max_examples=60, deadline=None)
@given(
    st.lists(st.integers(1, 40), min_size=1, max_size=5),
    st.floats(0.05, 0.95),
    st.integers(0, 2**31 - 1),
)
def test_split_properties(counts, fraction, seed):
    ds = _ds(counts, seed=seed % 1000)
    if all(int(n * fraction) == 0 for n in counts):
        with pytest.raises(DataError, match="empty"):
            stratified_split(ds, fraction, seed)
        return
    sp = stratified_split(ds, fraction, seed)
    assert sp.train.n + sp.test.n == ds.n
    assert not set(sp.train_index.tolist()) & set(sp.test_index.tolist())
    assert sp.train.feature_names == sp.test.feature_names == ds.feature_names
    for c, n_c in enumerate(counts):
        tr, te = sp.train.class_counts()[c], sp.test.class_counts()[c]
        assert tr + te == n_c
        assert abs(te - n_c * fraction) < 1
        assert tr >= 1
    np.testing.assert_array_equal(ds.X[sp.test_index], sp.test.X)
    sp.train.check()
    sp.test.check()


def test_subsample_keeps_every_class():
    ds = _ds([100, 10, 3])
    sub = stratified_subsample(ds, 0.1, 0)
    assert sub.class_counts().tolist() == [10, 1, 1]
    assert stratified_subsample(ds, 1.0, 0) is ds
