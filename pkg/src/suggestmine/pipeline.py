"""Glue between normalization, features and models, shared by the CLI and tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .corpus import Dataset, Label
from .features import Vocabulary, count_matrix, fit_vocabulary, tfidf_matrix
from .linear_models import Hyperparameters, decision_values, logistic_fit, nb_fit, svm_fit
from .neural import EmbeddingTable, LSTMHyperparameters, init_lstm, lstm_fit, lstm_logits
from .normalize import NormalizerConfig, default_config, preprocess, preprocess_tokens
from .persistence import ModelBundle

MODEL_KINDS = ("nb", "logreg", "svm", "lstm")


@dataclass(frozen=True)
class FeatureOptions:
    min_df: int = 1
    ngram_range: tuple[int, int] = (1, 1)
    lowercase: bool = True


@dataclass(frozen=True)
class LSTMOptions:
    hidden_units: int = 128
    max_seq_len: int = 64
    hp: LSTMHyperparameters = field(default_factory=LSTMHyperparameters)


def normalize_dataset(d: Dataset, cfg: NormalizerConfig | None = None) -> Dataset:
    """Apply ``preprocess`` to every record. Records that normalize to nothing keep their raw text."""
    cfg = cfg or default_config()
    texts = []
    for rec in d.records:
        out = preprocess(rec.text, cfg)
        texts.append(out if out else rec.text.strip())
    return d.with_texts(texts)


def tokenize_all(texts: Sequence[str], cfg: NormalizerConfig) -> list[list[str]]:
    return [preprocess_tokens(t, cfg) for t in texts]


def _matrix(bundle_features: str, docs, vocab: Vocabulary):
    return count_matrix(docs, vocab) if bundle_features == "count" else tfidf_matrix(docs, vocab)


def train(
    kind: str,
    data: Dataset,
    cfg: NormalizerConfig | None = None,
    hp: Hyperparameters | None = None,
    features: FeatureOptions | None = None,
    embeddings: EmbeddingTable | None = None,
    lstm: LSTMOptions | None = None,
) -> tuple[ModelBundle, Vocabulary | None]:
    """Fit one model kind on ``data``; returns the bundle and (for sparse models) its vocabulary."""
    if kind not in MODEL_KINDS:
        raise ValueError(f"unknown model kind {kind!r}; expected one of {MODEL_KINDS}")
    cfg = cfg or default_config()
    hp = hp or Hyperparameters()
    docs = tokenize_all(data.texts, cfg)
    labels = data.labels
    if kind == "lstm":
        if embeddings is None:
            raise ValueError("the lstm model needs word embeddings")
        lstm = lstm or LSTMOptions()
        model = init_lstm(embeddings.dim, lstm.hidden_units, lstm.max_seq_len, lstm.hp.seed)
        model = lstm_fit(model, docs, labels, embeddings, lstm.hp)
        return ModelBundle(model, cfg, embeddings.fingerprint(), "embeddings", lstm.hp.to_dict()), None

    features = features or FeatureOptions()
    vocab = fit_vocabulary(docs, features.min_df, features.ngram_range, features.lowercase)
    feature_kind = "tfidf" if kind == "svm" else "count"
    X = _matrix(feature_kind, docs, vocab)
    if kind == "nb":
        model = nb_fit(X, labels, hp.alpha)
    elif kind == "logreg":
        model = logistic_fit(X, labels, hp)
    else:
        model = svm_fit(X, labels, hp)
    return ModelBundle(model, cfg, vocab.fingerprint(), feature_kind, hp.to_dict()), vocab


def score(
    bundle: ModelBundle,
    texts: Sequence[str],
    vocab: Vocabulary | None = None,
    embeddings: EmbeddingTable | None = None,
) -> np.ndarray:
    """Decision values (positive means Suggestion) for raw or normalized texts."""
    docs = tokenize_all(texts, bundle.normalizer)
    if bundle.kind == "lstm":
        if embeddings is None:
            raise ValueError("the lstm model needs word embeddings")
        bundle.check_features(embeddings.fingerprint(), "embedding table")
        return lstm_logits(bundle.model, docs, embeddings)
    if vocab is None:
        raise ValueError(f"the {bundle.kind} model needs its vocabulary")
    bundle.check_features(vocab.fingerprint())
    if not docs:
        return np.zeros(0)
    return decision_values(bundle.model, _matrix(bundle.features, docs, vocab))


def labels_of(values: np.ndarray) -> list[Label]:
    return [Label.SUGGESTION if v > 0 else Label.NON_SUGGESTION for v in values]
