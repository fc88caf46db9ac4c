"""Positive-class metrics, confusion matrices and false-positive keyword analysis."""

from __future__ import annotations

import csv
import io
import json
import os
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

from .corpus import Dataset, Label
from .normalize import NormalizerConfig, preprocess_tokens

__all__ = [
    "ConfusionMatrix",
    "EvalReport",
    "KeywordReport",
    "PredictionError",
    "DEFAULT_KEYWORDS",
    "evaluate",
    "keyword_analysis",
    "export_confusion",
    "read_confusion",
    "render_confusion",
]

DEFAULT_KEYWORDS = ("want", "please", "add", "support", "would", "could", "should", "need")
CONFUSION_HEADER = ("gold", "pred_pos", "pred_neg")


class PredictionError(ValueError):
    def __init__(self, missing: Sequence[str], surplus: Sequence[str]):
        self.missing = list(missing)
        self.surplus = list(surplus)
        parts = []
        if self.missing:
            parts.append(f"missing predictions for ids: {', '.join(self.missing)}")
        if self.surplus:
            parts.append(f"predictions for unknown ids: {', '.join(self.surplus)}")
        super().__init__("; ".join(parts))


@dataclass(frozen=True)
class ConfusionMatrix:
    tp: int = 0
    fp: int = 0
    fn: int = 0
    tn: int = 0

    def __post_init__(self):
        if min(self.tp, self.fp, self.fn, self.tn) < 0:
            raise ValueError("confusion counts must be non-negative")

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def precision(self) -> float:
        d = self.tp + self.fp
        return self.tp / d if d else 0.0

    def recall(self) -> float:
        d = self.tp + self.fn
        return self.tp / d if d else 0.0

    def f1(self) -> float:
        p, r = self.precision(), self.recall()
        return 2 * p * r / (p + r) if p + r else 0.0

    @property
    def degenerate(self) -> list[str]:
        """Names of metrics whose denominator vanished (reported as 0)."""
        flags = []
        if self.tp + self.fp == 0:
            flags.append("precision")
        if self.tp + self.fn == 0:
            flags.append("recall")
        if self.precision() + self.recall() == 0:
            flags.append("f1")
        return flags

    def to_dict(self) -> dict:
        return {"tp": self.tp, "fp": self.fp, "fn": self.fn, "tn": self.tn}


@dataclass(frozen=True)
class Outcome:
    id: str
    gold: Label
    predicted: Label
    decision_value: float | None = None

    @property
    def category(self) -> str:
        if self.gold.is_positive:
            return "tp" if self.predicted.is_positive else "fn"
        return "fp" if self.predicted.is_positive else "tn"


@dataclass(frozen=True)
class EvalReport:
    matrix: ConfusionMatrix
    precision: float
    recall: float
    f1: float
    outcomes: tuple[Outcome, ...]
    degenerate: tuple[str, ...] = ()

    def of(self, category: str) -> list[Outcome]:
        return [o for o in self.outcomes if o.category == category]

    def to_dict(self) -> dict:
        return {
            "matrix": self.matrix.to_dict(),
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "degenerate": list(self.degenerate),
            "outcomes": [
                {"id": o.id, "gold": o.gold.value, "predicted": o.predicted.value, "decision_value": o.decision_value}
                for o in self.outcomes
            ],
        }

    def summary(self, reference: Mapping[str, float] | None = None) -> str:
        m = self.matrix
        lines = [
            f"records   {m.total}",
            f"tp {m.tp}  fp {m.fp}  fn {m.fn}  tn {m.tn}",
            f"precision {self.precision:.4f}",
            f"recall    {self.recall:.4f}",
            f"f1        {self.f1:.4f}",
        ]
        if self.degenerate:
            lines.append(f"degenerate (reported as 0): {', '.join(self.degenerate)}")
        for name, value in (reference or {}).items():
            lines.append(f"reference {name}: {value:.3f}")
        return "\n".join(lines) + "\n"


def evaluate(
    gold: Dataset,
    predictions: Iterable[tuple[str, Label]],
    decision_values: Mapping[str, float] | None = None,
) -> EvalReport:
    """Score predictions against ``gold`` with Suggestion as the positive class.

    Prediction ids must cover the gold ids exactly; outcomes keep gold order.
    """
    pred: dict[str, Label] = {}
    surplus = []
    for rid, label in predictions:
        if rid not in gold or rid in pred:
            surplus.append(rid)
        else:
            pred[rid] = label
    missing = [rid for rid in gold.ids if rid not in pred]
    if missing or surplus:
        raise PredictionError(missing, surplus)
    dv = decision_values or {}
    outcomes = tuple(Outcome(r.id, r.label, pred[r.id], dv.get(r.id)) for r in gold.records)
    counts = {"tp": 0, "fp": 0, "fn": 0, "tn": 0}
    for o in outcomes:
        counts[o.category] += 1
    m = ConfusionMatrix(**counts)
    return EvalReport(m, m.precision(), m.recall(), m.f1(), outcomes, tuple(m.degenerate))


@dataclass(frozen=True)
class KeywordReport:
    keywords: tuple[str, ...]
    n_false_positives: int
    fraction_fp_with_any_keyword: float | None
    per_keyword_fraction: dict[str, float]
    fp_exemplars: list[dict] = field(default_factory=list)
    fn_exemplars: list[dict] = field(default_factory=list)
    not_applicable: bool = False

    def to_dict(self) -> dict:
        return {
            "keywords": list(self.keywords),
            "n_false_positives": self.n_false_positives,
            "not_applicable": self.not_applicable,
            "fraction_fp_with_any_keyword": self.fraction_fp_with_any_keyword,
            "per_keyword_fraction": self.per_keyword_fraction,
            "fp_exemplars": self.fp_exemplars,
            "fn_exemplars": self.fn_exemplars,
        }

    def summary(self, reference_fraction: float | None = None) -> str:
        if self.not_applicable:
            return "no false positives: keyword analysis not applicable\n"
        lines = [f"false positives: {self.n_false_positives}"]
        frac = self.fraction_fp_with_any_keyword
        ref = f" (reference {reference_fraction:.2f})" if reference_fraction is not None else ""
        lines.append(f"with any keyword: {frac:.4f}{ref}")
        for k, v in self.per_keyword_fraction.items():
            lines.append(f"  {k:<10} {v:.4f}")
        for title, rows in (("false positives", self.fp_exemplars), ("false negatives", self.fn_exemplars)):
            if rows:
                lines.append(f"{title}:")
                lines += [f"  {r['id']}: {r['text']}" for r in rows]
        return "\n".join(lines) + "\n"


def _exemplars(outcomes: Sequence[Outcome], corpus: Dataset, cap: int) -> list[dict]:
    if all(o.decision_value is not None for o in outcomes):
        ordered = sorted(outcomes, key=lambda o: (-abs(o.decision_value), o.id))
    else:
        ordered = sorted(outcomes, key=lambda o: o.id)
    return [
        {"id": o.id, "text": corpus[o.id].text, "decision_value": o.decision_value}
        for o in ordered[:cap]
    ]


def keyword_analysis(
    report: EvalReport,
    corpus: Dataset,
    keywords: Sequence[str] = DEFAULT_KEYWORDS,
    cfg: NormalizerConfig | None = None,
    max_exemplars: int = 10,
) -> KeywordReport:
    """Share of false positives whose normalized text contains each keyword.

    Matching is case-insensitive on whole normalized tokens.
    """
    keywords = tuple(k.lower() for k in keywords)
    fps = report.of("fp")
    fns = report.of("fn")
    fp_ex = _exemplars(fps, corpus, max_exemplars)
    fn_ex = _exemplars(fns, corpus, max_exemplars)
    if not fps:
        return KeywordReport(keywords, 0, None, {}, fp_ex, fn_ex, not_applicable=True)
    if not keywords:
        return KeywordReport(keywords, len(fps), 0.0, {}, fp_ex, fn_ex)
    token_sets = [{t.lower() for t in preprocess_tokens(corpus[o.id].text, cfg)} for o in fps]
    n = len(fps)
    any_kw = sum(1 for ts in token_sets if any(k in ts for k in keywords))
    per = {k: sum(1 for ts in token_sets if k in ts) / n for k in keywords}
    return KeywordReport(keywords, n, any_kw / n, per, fp_ex, fn_ex)


def render_confusion(m: ConfusionMatrix) -> str:
    width = max(8, *(len(str(x)) for x in (m.tp, m.fp, m.fn, m.tn)))
    rows = [
        ("", "pred_pos", "pred_neg"),
        ("gold_pos", str(m.tp), str(m.fn)),
        ("gold_neg", str(m.fp), str(m.tn)),
    ]
    return "\n".join(f"{a:<9}{b:>{width + 1}}{c:>{width + 1}}" for a, b, c in rows) + "\n"


def format_confusion(m: ConfusionMatrix) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONFUSION_HEADER)
    w.writerow(("gold_pos", m.tp, m.fn))
    w.writerow(("gold_neg", m.fp, m.tn))
    return buf.getvalue()


def export_confusion(m: ConfusionMatrix, path: str | os.PathLike) -> tuple[str, str]:
    """Write the 2x2 grid as CSV at ``path`` and a text table next to it (``.txt``)."""
    path = os.fspath(path)
    text_path = os.path.splitext(path)[0] + ".txt"
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_confusion(m))
    with open(text_path, "w", encoding="utf-8", newline="") as fh:
        fh.write(render_confusion(m))
    return path, text_path


def read_confusion(path: str | os.PathLike) -> ConfusionMatrix:
    with open(path, encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows or tuple(rows[0]) != CONFUSION_HEADER:
        raise ValueError(f"{path}: not a confusion-matrix file")
    cells = {r[0]: (int(r[1]), int(r[2])) for r in rows[1:]}
    (tp, fn), (fp, tn) = cells["gold_pos"], cells["gold_neg"]
    return ConfusionMatrix(tp, fp, fn, tn)


def write_json(obj, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, ensure_ascii=False)
        fh.write("\n")
