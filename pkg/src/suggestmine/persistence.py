"""Versioned model files.

A model file is UTF-8 JSON. Parameters are stored as base64 little-endian
float64 blobs with their shapes, so files are compact and byte-reproducible.
"""

from __future__ import annotations

import base64
import json
import os
from dataclasses import dataclass, field

import numpy as np

from .linear_models import Hyperparameters, LinearModel, NBModel
from .neural import LSTMClassifier, LSTMHyperparameters
from .normalize import NormalizerConfig

FORMAT = "suggestmine-model"
VERSION = 1
FEATURES_OF_KIND = {"nb": "count", "logreg": "count", "svm": "tfidf", "lstm": "embeddings"}


class FingerprintError(ValueError):
    pass


class ModelFileError(ValueError):
    pass


@dataclass
class ModelBundle:
    """A trained model with everything needed to reproduce its inputs."""

    model: NBModel | LinearModel | LSTMClassifier
    normalizer: NormalizerConfig
    feature_fingerprint: str
    features: str = ""
    hyperparameters: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.features:
            self.features = FEATURES_OF_KIND[self.kind]

    @property
    def kind(self) -> str:
        return self.model.kind

    def check_features(self, fingerprint: str, what: str = "vocabulary") -> None:
        if fingerprint != self.feature_fingerprint:
            raise FingerprintError(
                f"{what} fingerprint {fingerprint[:12]} does not match the model's {self.feature_fingerprint[:12]}"
            )

    def check_normalizer(self, cfg: NormalizerConfig) -> None:
        if cfg.fingerprint() != self.normalizer.fingerprint():
            raise FingerprintError("normalizer configuration differs from the one the model was trained with")


def _pack(a) -> dict:
    # not ascontiguousarray: it would turn 0-d scalars into shape (1,)
    arr = np.array(a, dtype="<f8", order="C")
    return {"shape": list(arr.shape), "dtype": "<f8", "data": base64.b64encode(arr.tobytes()).decode("ascii")}


def _unpack(d: dict) -> np.ndarray:
    if d.get("dtype") != "<f8":
        raise ModelFileError(f"unsupported dtype {d.get('dtype')!r}")
    arr = np.frombuffer(base64.b64decode(d["data"]), dtype="<f8").astype(float)
    shape = tuple(d["shape"])
    if arr.size != int(np.prod(shape, dtype=np.int64)):
        raise ModelFileError("parameter blob size does not match its shape")
    return arr.reshape(shape)


def dumps(bundle: ModelBundle) -> str:
    m = bundle.model
    meta: dict = {}
    if isinstance(m, NBModel):
        arrays = {"log_prior": m.log_prior, "log_likelihood": m.log_likelihood}
        hp = {"alpha": m.alpha}
    elif isinstance(m, LinearModel):
        arrays = {"weights": m.weights, "bias": np.array(m.bias)}
        hp = m.hyperparameters.to_dict()
        meta["loss_kind"] = m.loss_kind
        meta["loss_history"] = list(m.loss_history)
    elif isinstance(m, LSTMClassifier):
        arrays = dict(m.params)
        hp = dict(bundle.hyperparameters)
        meta.update(input_dim=m.input_dim, hidden_units=m.hidden_units, max_seq_len=m.max_seq_len, seed=m.seed,
                    loss_history=list(m.loss_history))
    else:
        raise TypeError(f"cannot serialize {type(m).__name__}")
    doc = {
        "format": FORMAT,
        "version": VERSION,
        "kind": bundle.kind,
        "features": bundle.features,
        "feature_fingerprint": bundle.feature_fingerprint,
        "normalizer_fingerprint": bundle.normalizer.fingerprint(),
        "normalizer": bundle.normalizer.to_dict(),
        "hyperparameters": hp,
        "meta": meta,
        "arrays": {k: _pack(v) for k, v in sorted(arrays.items())},
    }
    return json.dumps(doc, indent=1, sort_keys=True, ensure_ascii=False) + "\n"


def loads(text: str) -> ModelBundle:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFileError(f"not a model file: {exc}") from None
    if doc.get("format") != FORMAT:
        raise ModelFileError("not a suggestmine model file")
    if doc.get("version") != VERSION:
        raise ModelFileError(f"unsupported model file version {doc.get('version')!r}")
    normalizer = NormalizerConfig.from_dict(doc["normalizer"])
    if normalizer.fingerprint() != doc["normalizer_fingerprint"]:
        raise FingerprintError("embedded normalizer configuration does not match its fingerprint")
    arrays = {k: _unpack(v) for k, v in doc["arrays"].items()}
    kind, meta, hp = doc["kind"], doc["meta"], doc["hyperparameters"]
    if kind == "nb":
        model = NBModel(arrays["log_prior"], arrays["log_likelihood"], float(hp["alpha"]))
    elif kind in ("logreg", "svm"):
        model = LinearModel(arrays["weights"], float(arrays["bias"]), meta["loss_kind"], Hyperparameters(**hp),
                            tuple(meta["loss_history"]))
    elif kind == "lstm":
        model = LSTMClassifier(arrays, meta["input_dim"], meta["hidden_units"], meta["max_seq_len"], meta["seed"],
                               tuple(meta["loss_history"]))
        LSTMHyperparameters(**hp)
    else:
        raise ModelFileError(f"unknown model kind {kind!r}")
    return ModelBundle(model, normalizer, doc["feature_fingerprint"], doc["features"], hp)


def save_model(bundle: ModelBundle, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps(bundle))


def load_model(path: str | os.PathLike, feature_fingerprint: str | None = None) -> ModelBundle:
    """Read a model file; if ``feature_fingerprint`` is given it must match."""
    with open(path, encoding="utf-8") as fh:
        bundle = loads(fh.read())
    if feature_fingerprint is not None:
        bundle.check_features(feature_fingerprint)
    return bundle
