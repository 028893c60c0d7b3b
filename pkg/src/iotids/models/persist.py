"""Versioned, checksummed JSON model files.

Floats are written with Python's shortest round-trip repr, so a loaded model
reproduces the saved model's predictions bit for bit. Training time is not
stored: two fits of the same spec on the same data yield identical files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path

from ..errors import FeatureMismatchError, ModelFormatError
from . import TrainedModel, _estimator_from_state, spec_from_dict, spec_to_dict

FORMAT = "iotids-model"
VERSION = 1


def _canonical(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def model_payload(m: TrainedModel) -> dict:
    return {
        "spec": spec_to_dict(m.spec),
        "n_classes": m.n_classes,
        "expected_features": list(m.expected_features),
        "class_names": list(m.class_names),
        "state": m.estimator.state(),
    }


def save_model(m: TrainedModel, path) -> Path:
    payload = model_payload(m)
    body = _canonical(payload)
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "checksum": hashlib.sha256(body.encode()).hexdigest(),
        "payload": payload,
    }
    path = Path(path)
    path.write_text(_canonical(doc) + "\n", encoding="utf-8")
    return path


def load_model(path, feature_names=None) -> TrainedModel:
    """Load a model file, validating format, version and checksum.

    If ``feature_names`` is given it must equal the model's expected features.
    """
    path = Path(path)
    if not path.is_file():
        raise ModelFormatError(f"model file not found: {path}")
    try:
        doc = json.loads(path.read_text(encoding="utf-8"))
    except (UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise ModelFormatError(f"corrupt model file {path}: checksum cannot be verified ({exc})") from None
    if not isinstance(doc, dict) or doc.get("format") != FORMAT:
        raise ModelFormatError(f"{path} is not a model file")
    if doc.get("version") != VERSION:
        raise ModelFormatError(f"{path}: model format version {doc.get('version')} unsupported (expected {VERSION})")
    payload = doc.get("payload")
    if hashlib.sha256(_canonical(payload).encode()).hexdigest() != doc.get("checksum"):
        raise ModelFormatError(f"{path}: checksum mismatch")
    spec = spec_from_dict(payload["spec"])
    n_classes = int(payload["n_classes"])
    model = TrainedModel(
        spec,
        _estimator_from_state(spec, n_classes, payload["state"]),
        n_classes,
        list(payload["expected_features"]),
        list(payload["class_names"]),
    )
    if feature_names is not None and list(feature_names) != model.expected_features:
        raise FeatureMismatchError(
            f"model expects features {model.expected_features}, data has {list(feature_names)}"
        )
    return model
