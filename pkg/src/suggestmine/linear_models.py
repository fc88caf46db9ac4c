"""Multinomial naive Bayes, logistic regression and linear SVM on sparse features.

All three share one contract: ``decision_value(model, x) > 0`` means
Suggestion. A value of exactly zero predicts NonSuggestion, the majority class.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence, Union

import numpy as np
import scipy.sparse as sp
from scipy.special import expit

from .corpus import Label
from .features import SparseVector, stack

logger = logging.getLogger(__name__)

__all__ = [
    "Hyperparameters",
    "NBModel",
    "LinearModel",
    "DivergenceError",
    "nb_fit",
    "logistic_fit",
    "svm_fit",
    "decision_value",
    "decision_values",
    "predict",
    "predict_many",
    "logistic_objective",
    "hinge_objective",
]

Features = Union[sp.spmatrix, Sequence[SparseVector], np.ndarray]


class DivergenceError(RuntimeError):
    def __init__(self, epoch: int, value: float):
        self.epoch = epoch
        super().__init__(f"training diverged at epoch {epoch}: loss = {value}")


@dataclass(frozen=True)
class Hyperparameters:
    alpha: float = 1.0
    l2: float = 1e-4
    lr: float = 0.1
    decay: float = 0.01
    epochs: int = 50
    seed: int = 42

    def rate(self, epoch: int) -> float:
        return self.lr / (1.0 + self.decay * epoch)

    def to_dict(self) -> dict:
        return asdict(self)


@dataclass(frozen=True)
class NBModel:
    """Row 0 of each array is NonSuggestion, row 1 Suggestion."""

    log_prior: np.ndarray
    log_likelihood: np.ndarray
    alpha: float

    kind = "nb"

    @property
    def n_features(self) -> int:
        return self.log_likelihood.shape[1]

    def coef(self) -> tuple[np.ndarray, float]:
        """Decision function as a linear model: log odds = x . w + b."""
        w = self.log_likelihood[1] - self.log_likelihood[0]
        b = float(self.log_prior[1] - self.log_prior[0])
        return w, b


@dataclass(frozen=True)
class LinearModel:
    weights: np.ndarray
    bias: float
    loss_kind: str
    hyperparameters: Hyperparameters = field(default_factory=Hyperparameters)
    loss_history: tuple[float, ...] = ()

    @property
    def kind(self) -> str:
        return "logreg" if self.loss_kind == "logistic" else "svm"

    @property
    def n_features(self) -> int:
        return self.weights.shape[0]

    def coef(self) -> tuple[np.ndarray, float]:
        return self.weights, self.bias


def _as_matrix(features: Features, n_features: int | None = None) -> sp.csr_matrix:
    if sp.issparse(features):
        X = sp.csr_matrix(features, dtype=float)
    elif isinstance(features, np.ndarray):
        X = sp.csr_matrix(np.atleast_2d(features).astype(float))
    else:
        vecs = list(features)
        if n_features is None:
            n_features = max((int(v.indices[-1]) + 1 for v in vecs if len(v)), default=0)
        X = stack(vecs, n_features)
    if n_features is not None and X.shape[1] != n_features:
        raise ValueError(f"feature dimension {X.shape[1]} does not match model dimension {n_features}")
    return X


def _as_binary(labels) -> np.ndarray:
    y = np.array([l.to_int() if isinstance(l, Label) else int(l) for l in labels], dtype=float)
    if y.size and not np.all((y == 0) | (y == 1)):
        raise ValueError("labels must be 0/1 or Label values")
    return y


def _check_classes(y: np.ndarray) -> None:
    if not (np.any(y == 1) and np.any(y == 0)):
        raise ValueError("a class absent from labels: both Suggestion and NonSuggestion are required")


def nb_fit(features: Features, labels, alpha: float = 1.0, n_features: int | None = None) -> NBModel:
    """Multinomial naive Bayes with additive (Laplace) smoothing."""
    if not alpha > 0:
        raise ValueError("alpha must be > 0")
    X = _as_matrix(features, n_features)
    y = _as_binary(labels)
    if X.shape[0] != y.shape[0]:
        raise ValueError("features and labels differ in length")
    _check_classes(y)
    if X.nnz and X.data.min() < 0:
        raise ValueError("naive Bayes needs non-negative counts")
    V = X.shape[1]
    counts = np.vstack([np.asarray(X[y == c].sum(axis=0)).ravel() for c in (0, 1)])
    log_prior = np.log(np.array([np.sum(y == 0), np.sum(y == 1)], dtype=float) / y.size)
    totals = counts.sum(axis=1, keepdims=True)
    log_likelihood = np.log(counts + alpha) - np.log(totals + alpha * V)
    return NBModel(log_prior, log_likelihood, float(alpha))


def logistic_objective(w: np.ndarray, b: float, X, y: np.ndarray, l2: float) -> tuple[float, np.ndarray, float]:
    """Mean cross-entropy plus ``l2/2 * |w|^2``, with its gradient."""
    z = X @ w + b
    # log(1 + e^z) - y z, computed stably
    loss = np.mean(np.logaddexp(0.0, z) - y * z) + 0.5 * l2 * float(w @ w)
    r = expit(z) - y
    gw = X.T @ r / y.size + l2 * w
    gb = float(np.mean(r))
    return float(loss), np.asarray(gw).ravel(), gb


def hinge_objective(w: np.ndarray, b: float, X, y: np.ndarray, l2: float) -> tuple[float, np.ndarray, float]:
    """Mean hinge loss plus ``l2/2 * |w|^2`` and a subgradient. ``y`` is 0/1."""
    s = 2.0 * y - 1.0
    margin = s * (X @ w + b)
    active = (margin < 1.0).astype(float)
    loss = np.mean(np.maximum(0.0, 1.0 - margin)) + 0.5 * l2 * float(w @ w)
    gw = -(X.T @ (active * s)) / y.size + l2 * w
    gb = -float(np.mean(active * s))
    return float(loss), np.asarray(gw).ravel(), gb


def logistic_fit(features: Features, labels, hp: Hyperparameters | None = None, n_features: int | None = None) -> LinearModel:
    """Full-batch gradient descent on the L2-regularized logistic loss."""
    hp = hp or Hyperparameters()
    if hp.epochs < 1:
        raise ValueError("epochs must be >= 1")
    X = _as_matrix(features, n_features)
    y = _as_binary(labels)
    _check_classes(y)
    w = np.zeros(X.shape[1])
    b = 0.0
    loss, gw, gb = logistic_objective(w, b, X, y, hp.l2)
    history = [loss]
    for epoch in range(hp.epochs):
        eta = hp.rate(epoch)
        w = w - eta * gw
        b = b - eta * gb
        loss, gw, gb = logistic_objective(w, b, X, y, hp.l2)
        if not np.isfinite(loss):
            raise DivergenceError(epoch + 1, loss)
        history.append(loss)
        logger.debug("logreg epoch %d loss %.6f", epoch + 1, loss)
    return LinearModel(w, b, "logistic", hp, tuple(history))


def svm_fit(features: Features, labels, hp: Hyperparameters | None = None, n_features: int | None = None) -> LinearModel:
    """Per-example subgradient descent on the L2-regularized hinge loss.

    Examples are visited in an order drawn from ``hp.seed`` each epoch. The
    weight vector is kept as ``scale * v`` so the shrinkage step is O(1).
    """
    hp = hp or Hyperparameters()
    if hp.epochs < 1:
        raise ValueError("epochs must be >= 1")
    X = _as_matrix(features, n_features)
    y = _as_binary(labels)
    _check_classes(y)
    s = 2.0 * y - 1.0
    n, d = X.shape
    indptr, indices, data = X.indptr, X.indices, X.data
    v = np.zeros(d)
    scale = 1.0
    b = 0.0
    rng = np.random.default_rng(hp.seed)
    history = [hinge_objective(v, b, X, y, hp.l2)[0]]
    for epoch in range(hp.epochs):
        eta = hp.rate(epoch)
        shrink = 1.0 - eta * hp.l2
        if shrink <= 0:
            raise DivergenceError(epoch + 1, float("inf"))
        for i in rng.permutation(n):
            lo, hi = indptr[i], indptr[i + 1]
            idx, val = indices[lo:hi], data[lo:hi]
            margin = s[i] * (scale * float(v[idx] @ val) + b)
            scale *= shrink
            if margin < 1.0:
                v[idx] += (eta * s[i] / scale) * val
                b += eta * s[i]
            if scale < 1e-9:
                v *= scale
                scale = 1.0
        w = v * scale
        loss = hinge_objective(w, b, X, y, hp.l2)[0]
        if not np.isfinite(loss):
            raise DivergenceError(epoch + 1, loss)
        history.append(loss)
        logger.debug("svm epoch %d loss %.6f", epoch + 1, loss)
    return LinearModel(v * scale, b, "hinge", hp, tuple(history))


def decision_values(model: NBModel | LinearModel, features: Features) -> np.ndarray:
    X = _as_matrix(features, model.n_features)
    w, b = model.coef()
    return np.asarray(X @ w).ravel() + b


def decision_value(model: NBModel | LinearModel, feature: SparseVector) -> float:
    """Log posterior odds for NB, the margin ``w.x + b`` otherwise."""
    if len(feature) and int(feature.indices[-1]) >= model.n_features:
        raise ValueError(f"feature index {int(feature.indices[-1])} exceeds model dimension {model.n_features}")
    w, b = model.coef()
    return feature.dot(w) + b


def label_of(value: float) -> Label:
    return Label.SUGGESTION if value > 0 else Label.NON_SUGGESTION


def predict(model: NBModel | LinearModel, feature: SparseVector) -> Label:
    return label_of(decision_value(model, feature))


def predict_many(model: NBModel | LinearModel, features: Features) -> list[Label]:
    return [label_of(v) for v in decision_values(model, features)]
