"""Vocabularies plus sparse count and TF-IDF vectors."""

from __future__ import annotations

import hashlib
import math
import os
from collections import Counter
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.sparse as sp

from .normalize import Token

__all__ = [
    "Vocabulary",
    "SparseVector",
    "fit_vocabulary",
    "count_vector",
    "tfidf_vector",
    "count_matrix",
    "tfidf_matrix",
    "stack",
    "save_vocabulary",
    "load_vocabulary",
]

VOCAB_VERSION = "1"
_HEADER_LINES = 5


def _surfaces(doc: Iterable[str | Token]) -> list[str]:
    return [t.surface if isinstance(t, Token) else t for t in doc]


def _terms(doc: Iterable[str | Token], lowercase: bool, ngram_range: tuple[int, int]) -> list[str]:
    toks = _surfaces(doc)
    if lowercase:
        toks = [t.lower() for t in toks]
    lo, hi = ngram_range
    if (lo, hi) == (1, 1):
        return toks
    out = []
    for n in range(lo, hi + 1):
        out.extend(" ".join(toks[i:i + n]) for i in range(len(toks) - n + 1))
    return out


@dataclass(frozen=True)
class Vocabulary:
    terms: tuple[str, ...]
    document_frequency: tuple[int, ...]
    n_documents: int
    lowercase: bool = True
    ngram_range: tuple[int, int] = (1, 1)

    def __post_init__(self):
        if len(self.terms) != len(self.document_frequency):
            raise ValueError("terms and document_frequency differ in length")
        if any(df < 1 or df > self.n_documents for df in self.document_frequency):
            raise ValueError("document frequencies must lie in [1, n_documents]")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})
        if len(self._index) != len(self.terms):
            raise ValueError("duplicate terms")

    @property
    def term_to_index(self) -> Mapping[str, int]:
        return self._index

    def __len__(self) -> int:
        return len(self.terms)

    def __contains__(self, term: object) -> bool:
        return term in self._index

    def df(self, term: str) -> int:
        return self.document_frequency[self._index[term]]

    def idf(self) -> np.ndarray:
        """Smoothed inverse document frequency, ``ln((1+n)/(1+df)) + 1``."""
        df = np.asarray(self.document_frequency, dtype=float)
        return np.log((1.0 + self.n_documents) / (1.0 + df)) + 1.0

    def terms_of(self, doc: Iterable[str | Token]) -> list[str]:
        return _terms(doc, self.lowercase, self.ngram_range)

    def serialize(self) -> str:
        lines = [
            "# suggestmine vocabulary",
            f"# version: {VOCAB_VERSION}",
            f"# n_documents: {self.n_documents}",
            f"# lowercase: {str(self.lowercase).lower()}",
            f"# ngram_range: {self.ngram_range[0]} {self.ngram_range[1]}",
        ]
        lines += [f"{t}\t{i}\t{df}" for i, (t, df) in enumerate(zip(self.terms, self.document_frequency))]
        return "\n".join(lines) + "\n"

    def fingerprint(self) -> str:
        return hashlib.sha256(self.serialize().encode("utf-8")).hexdigest()


@dataclass(frozen=True)
class SparseVector:
    """Sorted ``(index, weight)`` pairs with no stored zeros."""

    indices: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        w = np.asarray(self.weights, dtype=float)
        if idx.shape != w.shape or idx.ndim != 1:
            raise ValueError("indices and weights must be equal-length 1-d arrays")
        if idx.size and np.any(np.diff(idx) <= 0):
            raise ValueError("indices must be strictly increasing")
        if np.any(w == 0):
            raise ValueError("zero weights must not be stored")
        object.__setattr__(self, "indices", idx)
        object.__setattr__(self, "weights", w)

    @classmethod
    def from_counts(cls, counts: Mapping[int, float]) -> "SparseVector":
        items = sorted((i, w) for i, w in counts.items() if w != 0)
        return cls(np.array([i for i, _ in items], dtype=np.int64), np.array([w for _, w in items], dtype=float))

    @property
    def entries(self) -> list[tuple[int, float]]:
        return list(zip(self.indices.tolist(), self.weights.tolist()))

    def __len__(self) -> int:
        return int(self.indices.size)

    def norm(self) -> float:
        return float(np.sqrt(np.dot(self.weights, self.weights)))

    def dot(self, dense: np.ndarray) -> float:
        return float(np.dot(dense[self.indices], self.weights))

    def to_dense(self, dim: int) -> np.ndarray:
        out = np.zeros(dim)
        out[self.indices] = self.weights
        return out


def fit_vocabulary(
    corpus: Sequence[Iterable[str | Token]],
    min_df: int = 1,
    ngram_range: tuple[int, int] = (1, 1),
    lowercase: bool = True,
) -> Vocabulary:
    """Collect terms with document frequency >= ``min_df``, indexed in sorted order."""
    if len(corpus) == 0:
        raise ValueError("cannot fit a vocabulary on an empty corpus")
    if min_df < 1:
        raise ValueError("min_df must be >= 1")
    lo, hi = ngram_range
    if not 1 <= lo <= hi:
        raise ValueError(f"bad ngram_range {ngram_range}")
    df: Counter[str] = Counter()
    for doc in corpus:
        df.update(set(_terms(doc, lowercase, (lo, hi))))
    terms = sorted(t for t, c in df.items() if c >= min_df)
    return Vocabulary(tuple(terms), tuple(df[t] for t in terms), len(corpus), lowercase, (lo, hi))


def count_vector(ts: Iterable[str | Token], v: Vocabulary) -> SparseVector:
    index = v.term_to_index
    counts = Counter(index[t] for t in v.terms_of(ts) if t in index)
    return SparseVector.from_counts(counts)


def tfidf_vector(ts: Iterable[str | Token], v: Vocabulary) -> SparseVector:
    counts = count_vector(ts, v)
    if len(counts) == 0:
        return counts
    w = counts.weights * v.idf()[counts.indices]
    w /= math.sqrt(float(np.dot(w, w)))
    return SparseVector(counts.indices, w)


def stack(vectors: Sequence[SparseVector], dim: int) -> sp.csr_matrix:
    """Rows of ``vectors`` as a CSR matrix of width ``dim``."""
    indptr = np.zeros(len(vectors) + 1, dtype=np.int64)
    for i, vec in enumerate(vectors):
        indptr[i + 1] = indptr[i] + len(vec)
    if vectors:
        indices = np.concatenate([vec.indices for vec in vectors]) if indptr[-1] else np.zeros(0, np.int64)
        data = np.concatenate([vec.weights for vec in vectors]) if indptr[-1] else np.zeros(0)
    else:
        indices, data = np.zeros(0, np.int64), np.zeros(0)
    if indices.size and indices.max() >= dim:
        raise ValueError(f"feature index {int(indices.max())} out of range for dimension {dim}")
    return sp.csr_matrix((data, indices, indptr), shape=(len(vectors), dim))


def count_matrix(docs: Sequence[Iterable[str | Token]], v: Vocabulary) -> sp.csr_matrix:
    return stack([count_vector(d, v) for d in docs], len(v))


def tfidf_matrix(docs: Sequence[Iterable[str | Token]], v: Vocabulary) -> sp.csr_matrix:
    return stack([tfidf_vector(d, v) for d in docs], len(v))


def parse_vocabulary(text: str, source: str = "<vocabulary>") -> Vocabulary:
    lines = text.split("\n")
    meta: dict[str, str] = {}
    # fixed-size header; data lines may themselves start with "#"
    for line in lines[:_HEADER_LINES]:
        key, sep, value = line.lstrip("#").partition(":")
        if not line.startswith("#"):
            raise ValueError(f"{source}: truncated header")
        if sep:
            meta[key.strip()] = value.strip()
    terms, dfs = [], []
    for lineno, line in enumerate(lines[_HEADER_LINES:], start=_HEADER_LINES + 1):
        if not line:
            continue
        parts = line.split("\t")
        if len(parts) != 3:
            raise ValueError(f"{source}:{lineno}: expected term, index, df")
        term, index, df = parts
        if int(index) != len(terms):
            raise ValueError(f"{source}:{lineno}: index {index} out of sequence")
        terms.append(term)
        dfs.append(int(df))
    if meta.get("version") != VOCAB_VERSION:
        raise ValueError(f"{source}: unsupported vocabulary version {meta.get('version')!r}")
    lo, hi = (int(x) for x in meta["ngram_range"].split())
    return Vocabulary(tuple(terms), tuple(dfs), int(meta["n_documents"]), meta["lowercase"] == "true", (lo, hi))


def save_vocabulary(v: Vocabulary, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(v.serialize())


def load_vocabulary(path: str | os.PathLike) -> Vocabulary:
    with open(path, encoding="utf-8") as fh:
        return parse_vocabulary(fh.read(), os.fspath(path))
