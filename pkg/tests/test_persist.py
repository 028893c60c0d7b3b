from __future__ import annotations

import json

import numpy as np
import pytest

from iotids.dataset import Dataset
from iotids.errors import FeatureMismatchError, ModelFormatError
from iotids.models import (
    KnnSpec,
    LogRegSpec,
    MlpSpec,
    RandomForestSpec,
    RfHyperParams,
    SoftVotingSpec,
    fit_classifier,
)
from iotids.models.persist import load_model, save_model

RF = RandomForestSpec(RfHyperParams(n_estimators=8, max_depth=5))
SPECS = [
    RF,
    KnnSpec(3),
    LogRegSpec(max_iter=50),
    MlpSpec(hidden=8, max_epochs=10),
    SoftVotingSpec((RF, KnnSpec(3), LogRegSpec(max_iter=50))),
]


@pytest.fixture(scope="module")
def train():
    rng = np.random.default_rng(0)
    X = rng.standard_normal((200, 4))
    y = (X[:, 0] > 0).astype(int) + (X[:, 1] > 0.5)
    return Dataset(X, y, ["a", "b", "c", "d"], ["x", "y", "z"])


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.kind)
def test_roundtrip_bit_exact(tmp_path, train, spec):
    m = fit_classifier(spec, train, 5)
    path = save_model(m, tmp_path / "m.json")
    back = load_model(path, train.feature_names)
    Q = np.random.default_rng(1).standard_normal((100, 4)) * 2
    np.testing.assert_array_equal(back.predict_proba(Q), m.predict_proba(Q))
    np.testing.assert_array_equal(back.predict(Q), m.predict(Q))
    assert back.spec == m.spec and back.class_names == m.class_names


def test_identical_fits_identical_files(tmp_path, train):
    a = save_model(fit_classifier(RF, train, 1), tmp_path / "a.json")
    b = save_model(fit_classifier(RF, train, 1), tmp_path / "b.json")
    assert a.read_bytes() == b.read_bytes()


def test_truncated_file(tmp_path, train):
    path = save_model(fit_classifier(KnnSpec(3), train, 0), tmp_path / "m.json")
    data = path.read_bytes()
    path.write_bytes(data[: len(data) // 2])
    with pytest.raises(ModelFormatError, match="checksum"):
        load_model(path)


def test_tampered_payload(tmp_path, train):
    path = save_model(fit_classifier(KnnSpec(3), train, 0), tmp_path / "m.json")
    doc = json.loads(path.read_text())
    doc["payload"]["state"]["y"][0] = (doc["payload"]["state"]["y"][0] + 1) % 3
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="checksum mismatch"):
        load_model(path)


def test_version_and_format(tmp_path, train):
    path = save_model(fit_classifier(KnnSpec(3), train, 0), tmp_path / "m.json")
    doc = json.loads(path.read_text())
    doc["version"] = 99
    path.write_text(json.dumps(doc))
    with pytest.raises(ModelFormatError, match="version"):
        load_model(path)
    path.write_text(json.dumps({"hello": 1}))
    with pytest.raises(ModelFormatError, match="not a model file"):
        load_model(path)
    with pytest.raises(ModelFormatError, match="not found"):
        load_model(tmp_path / "missing.json")


def test_feature_mismatch(tmp_path, train):
    path = save_model(fit_classifier(KnnSpec(3), train, 0), tmp_path / "m.json")
    with pytest.raises(FeatureMismatchError):
        load_model(path, ["a", "b", "c", "e"])
    with pytest.raises(FeatureMismatchError):
        load_model(path, ["b", "a", "c", "d"])
