"""Single-layer LSTM sentence classifier over frozen word embeddings.

Gate order in the stacked weight matrices is input, forget, output, candidate.
Sequences are pre-padded; padded steps are masked out of the recurrence so
they leave the state untouched.
"""

from __future__ import annotations

import hashlib
import logging
import math
import os
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np
from scipy.special import expit

from .corpus import Label
from .linear_models import DivergenceError

logger = logging.getLogger(__name__)

__all__ = [
    "EmbeddingTable",
    "EmbeddingError",
    "LSTMClassifier",
    "LSTMHyperparameters",
    "load_embeddings",
    "init_lstm",
    "lstm_forward",
    "lstm_fit",
    "lstm_loss_and_grads",
    "lstm_logits",
    "lstm_predict_proba",
    "PARAM_NAMES",
]

PARAM_NAMES = ("W_x", "W_h", "b", "w_out", "b_out")


class EmbeddingError(ValueError):
    pass


@dataclass(frozen=True)
class EmbeddingTable:
    """Row 0 of ``matrix`` is the zero vector used for padding and unknown words."""

    words: tuple[str, ...]
    matrix: np.ndarray
    duplicates: int = 0
    _index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.matrix.shape[0] != len(self.words) + 1:
            raise ValueError("matrix must have one row per word plus the zero row")
        if np.any(self.matrix[0] != 0):
            raise ValueError("row 0 must be zero")
        object.__setattr__(self, "_index", {w: i + 1 for i, w in enumerate(self.words)})

    @classmethod
    def from_dict(cls, vectors: dict[str, Sequence[float]], dim: int) -> "EmbeddingTable":
        words = tuple(vectors)
        m = np.zeros((len(words) + 1, dim))
        for i, w in enumerate(words, start=1):
            vec = np.asarray(vectors[w], dtype=float)
            if vec.shape != (dim,):
                raise ValueError(f"vector for {w!r} has shape {vec.shape}, expected ({dim},)")
            m[i] = vec
        return cls(words, m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def __len__(self) -> int:
        return len(self.words)

    def index(self, word: str) -> int:
        i = self._index.get(word)
        if i is None:
            i = self._index.get(word.lower(), 0)
        return i

    def vector(self, word: str) -> np.ndarray:
        return self.matrix[self.index(word)].copy()

    def fingerprint(self) -> str:
        h = hashlib.sha256()
        h.update("\n".join(self.words).encode("utf-8"))
        h.update(np.ascontiguousarray(self.matrix, dtype="<f8").tobytes())
        return h.hexdigest()


def load_embeddings(path: str | os.PathLike, dim: int = 300) -> EmbeddingTable:
    """Read a text vector file: ``count dim`` header, then ``word v1 ... v_dim`` lines."""
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        parts = header.split()
        if len(parts) != 2 or not all(p.isdigit() for p in parts):
            raise EmbeddingError(f"{path}:1: malformed header {header.strip()!r}, expected 'count dim'")
        count, file_dim = int(parts[0]), int(parts[1])
        if file_dim != dim:
            raise EmbeddingError(f"{path}:1: vectors have dimension {file_dim}, expected {dim}")
        vectors: dict[str, np.ndarray] = {}
        duplicates = 0
        lineno = 1
        for lineno, line in enumerate(fh, start=2):
            if lineno - 1 > count:
                if line.strip():
                    raise EmbeddingError(f"{path}:{lineno}: more vectors than the header count {count}")
                continue
            fields = line.rstrip("\n").rstrip(" ").split(" ")
            if len(fields) != dim + 1:
                raise EmbeddingError(f"{path}:{lineno}: expected {dim + 1} fields, found {len(fields)}")
            try:
                vec = np.array([float(x) for x in fields[1:]])
            except ValueError:
                raise EmbeddingError(f"{path}:{lineno}: non-numeric component") from None
            if not np.all(np.isfinite(vec)):
                raise EmbeddingError(f"{path}:{lineno}: non-finite component")
            if fields[0] in vectors:
                duplicates += 1
            vectors[fields[0]] = vec
        seen = max(0, lineno - 1)
        if seen < count:
            raise EmbeddingError(f"{path}:{seen + 2}: header promises {count} vectors, file ended after {seen}")
    if duplicates:
        logger.warning("%s: %d duplicate words, last occurrence kept", path, duplicates)
    table = EmbeddingTable.from_dict(vectors, dim)
    return replace(table, duplicates=duplicates)


@dataclass(frozen=True)
class LSTMHyperparameters:
    lr: float = 0.5
    epochs: int = 10
    batch_size: int = 32
    clip_norm: float = 5.0
    seed: int = 42

    def to_dict(self) -> dict:
        return dict(lr=self.lr, epochs=self.epochs, batch_size=self.batch_size, clip_norm=self.clip_norm, seed=self.seed)


@dataclass(frozen=True)
class LSTMClassifier:
    params: dict[str, np.ndarray]
    input_dim: int = 300
    hidden_units: int = 128
    max_seq_len: int = 64
    seed: int = 42
    loss_history: tuple[float, ...] = ()

    kind = "lstm"

    def __post_init__(self):
        H, D = self.hidden_units, self.input_dim
        shapes = {"W_x": (4 * H, D), "W_h": (4 * H, H), "b": (4 * H,), "w_out": (H,), "b_out": ()}
        for name, shape in shapes.items():
            p = np.asarray(self.params[name], dtype=float)
            if p.shape != shape:
                raise ValueError(f"parameter {name} has shape {p.shape}, expected {shape}")
            if not np.all(np.isfinite(p)):
                raise ValueError(f"parameter {name} is not finite")

    def copy_params(self) -> dict[str, np.ndarray]:
        return {k: np.array(v, dtype=float, copy=True) for k, v in self.params.items()}


def init_lstm(input_dim: int = 300, hidden_units: int = 128, max_seq_len: int = 64, seed: int = 42) -> LSTMClassifier:
    """Uniform(-1/sqrt(H), 1/sqrt(H)) weights; forget-gate bias starts at 1."""
    rng = np.random.default_rng(seed)
    H, D = hidden_units, input_dim
    k = 1.0 / math.sqrt(H)
    b = np.zeros(4 * H)
    b[H:2 * H] = 1.0
    params = {
        "W_x": rng.uniform(-k, k, size=(4 * H, D)),
        "W_h": rng.uniform(-k, k, size=(4 * H, H)),
        "b": b,
        "w_out": rng.uniform(-k, k, size=H),
        "b_out": np.array(0.0),
    }
    return LSTMClassifier(params, D, H, max_seq_len, seed)


def encode(tokens: Sequence[str], embeddings: EmbeddingTable, max_seq_len: int) -> list[int]:
    """Embedding row ids, tail-truncated to ``max_seq_len``."""
    return [embeddings.index(t) for t in list(tokens)[:max_seq_len]]


def _batch(ids: Sequence[Sequence[int]], embeddings: EmbeddingTable, length: int | None = None):
    """Pre-padded (B, T, D) inputs and (B, T) mask."""
    T = length if length is not None else max((len(s) for s in ids), default=0)
    T = max(T, 1)
    B = len(ids)
    idx = np.zeros((B, T), dtype=np.int64)
    mask = np.zeros((B, T))
    for r, seq in enumerate(ids):
        if seq:
            idx[r, T - len(seq):] = seq
            mask[r, T - len(seq):] = 1.0
    return embeddings.matrix[idx], mask


def _forward(params, X: np.ndarray, M: np.ndarray):
    B, T, _ = X.shape
    H = params["W_h"].shape[1]
    Wx, Wh, b = params["W_x"], params["W_h"], params["b"]
    h = np.zeros((B, H))
    c = np.zeros((B, H))
    steps = []
    # input projections for all steps at once
    XW = X @ Wx.T + b
    for t in range(T):
        z = XW[:, t] + h @ Wh.T
        i = expit(z[:, :H])
        f = expit(z[:, H:2 * H])
        o = expit(z[:, 2 * H:3 * H])
        g = np.tanh(z[:, 3 * H:])
        c_new = f * c + i * g
        tc = np.tanh(c_new)
        h_new = o * tc
        m = M[:, t:t + 1]
        steps.append((h, c, i, f, o, g, tc))
        c = m * c_new + (1.0 - m) * c
        h = m * h_new + (1.0 - m) * h
    a = h @ params["w_out"] + params["b_out"]
    return a, h, steps


def lstm_forward(model: LSTMClassifier, tokens: Sequence[str], embeddings: EmbeddingTable):
    """Probability of Suggestion for one token sequence, plus cached activations."""
    if embeddings.dim != model.input_dim:
        raise ValueError(f"embedding dimension {embeddings.dim} does not match model input {model.input_dim}")
    X, M = _batch([encode(tokens, embeddings, model.max_seq_len)], embeddings)
    a, h, steps = _forward(model.params, X, M)
    p = float(expit(a[0]))
    if not np.isfinite(a[0]):
        raise DivergenceError(0, float(a[0]))
    return p, {"logit": float(a[0]), "h_final": h[0], "steps": steps, "inputs": X[0], "mask": M[0]}


def lstm_logits(model: LSTMClassifier, docs: Sequence[Sequence[str]], embeddings: EmbeddingTable, batch_size: int = 256) -> np.ndarray:
    out = []
    for s in range(0, len(docs), batch_size):
        chunk = [encode(d, embeddings, model.max_seq_len) for d in docs[s:s + batch_size]]
        X, M = _batch(chunk, embeddings)
        a, _, _ = _forward(model.params, X, M)
        out.append(a)
    return np.concatenate(out) if out else np.zeros(0)


def lstm_predict_proba(model: LSTMClassifier, docs: Sequence[Sequence[str]], embeddings: EmbeddingTable, batch_size: int = 256) -> np.ndarray:
    return expit(lstm_logits(model, docs, embeddings, batch_size))


def lstm_loss_and_grads(params: dict[str, np.ndarray], X: np.ndarray, M: np.ndarray, y: np.ndarray):
    """Mean cross-entropy of a padded batch and its gradient by backpropagation through time."""
    a, h_T, steps = _forward(params, X, M)
    loss = float(np.mean(np.logaddexp(0.0, a) - y * a))
    B, T, _ = X.shape
    H = params["W_h"].shape[1]
    Wh = params["W_h"]
    grads = {k: np.zeros_like(np.asarray(v, dtype=float)) for k, v in params.items()}
    da = (expit(a) - y) / B
    grads["w_out"] = h_T.T @ da
    grads["b_out"] = np.array(da.sum())
    dh = np.outer(da, params["w_out"])
    dc = np.zeros((B, H))
    dZ = np.empty((B, T, 4 * H))
    for t in reversed(range(T)):
        h_prev, c_prev, i, f, o, g, tc = steps[t]
        m = M[:, t:t + 1]
        dh_new = m * dh
        dc_new = m * dc + dh_new * o * (1.0 - tc * tc)
        dz = dZ[:, t]
        dz[:, :H] = dc_new * g * i * (1.0 - i)
        dz[:, H:2 * H] = dc_new * c_prev * f * (1.0 - f)
        dz[:, 2 * H:3 * H] = dh_new * tc * o * (1.0 - o)
        dz[:, 3 * H:] = dc_new * i * (1.0 - g * g)
        grads["W_h"] += dz.T @ h_prev
        dc = dc_new * f + (1.0 - m) * dc
        dh = dz @ Wh + (1.0 - m) * dh
    grads["W_x"] = np.einsum("btk,btd->kd", dZ, X)
    grads["b"] = dZ.sum(axis=(0, 1))
    return loss, grads


def lstm_fit(
    model: LSTMClassifier,
    docs: Sequence[Sequence[str]],
    labels: Sequence[Label | int],
    embeddings: EmbeddingTable,
    hp: LSTMHyperparameters | None = None,
) -> LSTMClassifier:
    """Mini-batch SGD with global-norm gradient clipping; embeddings stay fixed."""
    hp = hp or LSTMHyperparameters()
    if embeddings.dim != model.input_dim:
        raise ValueError(f"embedding dimension {embeddings.dim} does not match model input {model.input_dim}")
    if len(docs) != len(labels):
        raise ValueError("docs and labels differ in length")
    y = np.array([l.to_int() if isinstance(l, Label) else int(l) for l in labels], dtype=float)
    ids = [encode(d, embeddings, model.max_seq_len) for d in docs]
    params = model.copy_params()
    rng = np.random.default_rng(hp.seed)
    history = list(model.loss_history)
    for epoch in range(1, hp.epochs + 1):
        order = rng.permutation(len(ids))
        total = 0.0
        for s in range(0, len(order), hp.batch_size):
            batch = order[s:s + hp.batch_size]
            X, M = _batch([ids[j] for j in batch], embeddings)
            loss, grads = lstm_loss_and_grads(params, X, M, y[batch])
            if not math.isfinite(loss):
                raise DivergenceError(epoch, loss)
            norm = math.sqrt(sum(float(np.sum(g * g)) for g in grads.values()))
            factor = hp.lr * (hp.clip_norm / norm if norm > hp.clip_norm else 1.0)
            for k in params:
                params[k] = params[k] - factor * grads[k]
            total += loss * len(batch)
        mean_loss = total / max(len(ids), 1)
        if not math.isfinite(mean_loss):
            raise DivergenceError(epoch, mean_loss)
        history.append(mean_loss)
        logger.info("lstm epoch %d loss %.6f", epoch, mean_loss)
    return LSTMClassifier(params, model.input_dim, model.hidden_units, model.max_seq_len, model.seed, tuple(history))
