"""Labeled sentence datasets: loading, saving, class counts and oversampling."""

from __future__ import annotations

import csv
import enum
import io
import os
from collections import Counter
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

__all__ = [
    "Label",
    "LabeledSentence",
    "Dataset",
    "DatasetFormat",
    "DatasetError",
    "load_dataset",
    "save_dataset",
    "class_distribution",
    "oversample",
]

SPLIT_TAGS = ("train", "trial", "test", "other")
DUP_SUFFIX = "-dup"


class DatasetError(ValueError):
    """Raised for unreadable or malformed dataset files."""

    def __init__(self, message: str, path: str | None = None, row: int | None = None):
        self.path = path
        self.row = row
        where = []
        if path is not None:
            where.append(str(path))
        if row is not None:
            where.append(f"row {row}")
        prefix = ":".join(where)
        super().__init__(f"{prefix}: {message}" if prefix else message)


class Label(enum.Enum):
    SUGGESTION = "suggestion"
    NON_SUGGESTION = "non_suggestion"

    @classmethod
    def from_int(cls, value: int) -> "Label":
        if value == 1:
            return cls.SUGGESTION
        if value == 0:
            return cls.NON_SUGGESTION
        raise ValueError(f"label must be 0 or 1, got {value!r}")

    @classmethod
    def parse(cls, text: str) -> "Label":
        """Accept "0"/"1" or the enum value names."""
        t = text.strip()
        if t in ("0", "1"):
            return cls.from_int(int(t))
        try:
            return cls(t.lower())
        except ValueError:
            raise ValueError(f"label must be 0 or 1, got {text!r}") from None

    def to_int(self) -> int:
        return 1 if self is Label.SUGGESTION else 0

    @property
    def is_positive(self) -> bool:
        return self is Label.SUGGESTION


@dataclass(frozen=True)
class LabeledSentence:
    id: str
    text: str
    label: Label

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError(f"record {self.id!r}: text is empty")


@dataclass(frozen=True)
class Dataset:
    records: tuple[LabeledSentence, ...]
    split_tag: str = "other"
    _index: Mapping[str, int] = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.split_tag not in SPLIT_TAGS:
            raise ValueError(f"split_tag must be one of {SPLIT_TAGS}, got {self.split_tag!r}")
        records = tuple(self.records)
        object.__setattr__(self, "records", records)
        index = {}
        for i, rec in enumerate(records):
            if rec.id in index:
                raise DatasetError(f"duplicate id {rec.id!r}", row=i + 1)
            index[rec.id] = i
        object.__setattr__(self, "_index", index)

    def __len__(self) -> int:
        return len(self.records)

    def __iter__(self):
        return iter(self.records)

    def __getitem__(self, record_id: str) -> LabeledSentence:
        return self.records[self._index[record_id]]

    def __contains__(self, record_id: object) -> bool:
        return record_id in self._index

    @property
    def ids(self) -> list[str]:
        return [r.id for r in self.records]

    @property
    def texts(self) -> list[str]:
        return [r.text for r in self.records]

    @property
    def labels(self) -> list[Label]:
        return [r.label for r in self.records]

    def with_texts(self, texts: Sequence[str]) -> "Dataset":
        """Same ids, labels and split, new texts (e.g. after normalization)."""
        if len(texts) != len(self.records):
            raise ValueError("texts must align with records")
        recs = [LabeledSentence(r.id, t, r.label) for r, t in zip(self.records, texts)]
        return Dataset(recs, self.split_tag)


@dataclass(frozen=True)
class DatasetFormat:
    """How a dataset file is laid out.

    ``has_header=None`` auto-detects a header row by its label column
    reading ``label``.
    """

    delimiter: str = ","
    has_header: bool | None = None
    columns: tuple[str, str, str] = ("id", "sentence", "label")


def _looks_like_header(row: Sequence[str]) -> bool:
    return len(row) == 3 and row[2].strip().lower() == "label"


def load_dataset(
    path: str | os.PathLike,
    fmt: DatasetFormat | None = None,
    split_tag: str = "other",
) -> Dataset:
    """Read a delimiter-separated ``id, sentence, label`` file.

    Malformed rows raise :class:`DatasetError` carrying the 1-based row number.
    """
    fmt = fmt or DatasetFormat()
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise DatasetError("no such file", path=path)
    with open(path, "rb") as fh:
        raw = fh.read()
    try:
        content = raw.decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        row = raw[: exc.start].count(b"\n") + 1
        raise DatasetError(f"undecodable bytes at offset {exc.start}", path=path, row=row) from None
    return parse_dataset(content, fmt, split_tag=split_tag, path=path)


def parse_dataset(content: str, fmt: DatasetFormat | None = None, split_tag: str = "other", path: str | None = None) -> Dataset:
    fmt = fmt or DatasetFormat()
    reader = csv.reader(io.StringIO(content, newline=""), delimiter=fmt.delimiter)
    records: list[LabeledSentence] = []
    seen: dict[str, int] = {}
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise DatasetError(f"unparseable quoting: {exc}", path=path, row=reader.line_num) from None
    for rownum, row in enumerate(rows, start=1):
        if not row or (len(row) == 1 and not row[0].strip()):
            continue
        if rownum == 1 and (fmt.has_header or (fmt.has_header is None and _looks_like_header(row))):
            continue
        if len(row) != 3:
            raise DatasetError(f"expected 3 columns, found {len(row)}", path=path, row=rownum)
        rid, text, label = row
        rid = rid.strip()
        if not rid:
            raise DatasetError("empty id", path=path, row=rownum)
        if rid in seen:
            raise DatasetError(f"duplicate id {rid!r} (first seen at row {seen[rid]})", path=path, row=rownum)
        if label.strip() not in ("0", "1"):
            raise DatasetError(f"label outside {{0,1}}: {label!r}", path=path, row=rownum)
        if not text.strip():
            raise DatasetError("empty sentence", path=path, row=rownum)
        seen[rid] = rownum
        records.append(LabeledSentence(rid, text, Label.from_int(int(label.strip()))))
    return Dataset(records, split_tag)


def save_dataset(d: Dataset, path: str | os.PathLike, fmt: DatasetFormat | None = None) -> None:
    fmt = fmt or DatasetFormat()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(format_dataset(d, fmt))


def format_dataset(d: Dataset, fmt: DatasetFormat | None = None) -> str:
    fmt = fmt or DatasetFormat()
    buf = io.StringIO()
    writer = csv.writer(buf, delimiter=fmt.delimiter, lineterminator="\n")
    # with a "\n" terminator the csv module leaves a bare "\r" unquoted
    quoting = csv.writer(buf, delimiter=fmt.delimiter, lineterminator="\n", quoting=csv.QUOTE_ALL)
    header = fmt.has_header is not False
    if header:
        writer.writerow(fmt.columns)
    # row numbers count file lines, header included, as the loader's do
    for n, rec in enumerate(d.records, start=2 if header else 1):
        w = quoting if "\r" in rec.id or "\r" in rec.text else writer
        try:
            (rec.id + rec.text).encode("utf-8")
            w.writerow((rec.id, rec.text, rec.label.to_int()))
        except (csv.Error, UnicodeEncodeError) as exc:
            raise DatasetError(f"record {rec.id!r} cannot be written as UTF-8 CSV: {exc}", row=n) from None
    return buf.getvalue()


def class_distribution(d: Dataset | Iterable[LabeledSentence]) -> dict[Label, int]:
    counts = Counter(r.label for r in d)
    return {Label.SUGGESTION: counts[Label.SUGGESTION], Label.NON_SUGGESTION: counts[Label.NON_SUGGESTION]}


def oversample(d: Dataset, seed: int = 42) -> Dataset:
    """Double every Suggestion record, then shuffle with ``seed``.

    Copies get the id ``<original>-dup``. Evaluation splits are refused.
    """
    if d.split_tag in ("trial", "test"):
        raise ValueError(f"refusing to oversample a {d.split_tag} split")
    positives = [r for r in d.records if r.label is Label.SUGGESTION]
    if not positives:
        raise ValueError("no positive instances: oversampling undefined")
    dups = [LabeledSentence(r.id + DUP_SUFFIX, r.text, r.label) for r in positives]
    clash = [r.id for r in dups if r.id in d]
    if clash:
        raise ValueError(f"derived id already present in dataset: {clash[0]!r}")
    pool = list(d.records) + dups
    order = np.random.default_rng(seed).permutation(len(pool))
    return Dataset([pool[i] for i in order], d.split_tag)
