"""Rule tables, lexicons and normalizer configuration.

Lexicons and the rule table are plain-text files: one tab-separated entry per
line, ``#`` comments, and an optional ``# version: N`` line.
"""

from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field, replace
from importlib import resources
from typing import Mapping

MASKS = frozenset(
    {
        "<url>",
        "<hashtag>",
        "<date>",
        "<time>",
        "<phone>",
        "<money>",
        "<user>",
        "<percent>",
        "<censored>",
        "<number>",
        "<emhappy>",
        "<emsad>",
        "<emneutral>",
    }
)

RULE_KINDS = ("mask", "entity", "hashtag", "emoticon", "censored", "clitic", "number", "word", "quote", "terminal", "punct")

# Transformations the normalizer can switch off individually.
NORMALIZATIONS = frozenset(
    {"url", "email", "domain", "user", "hashtag", "date", "time", "phone", "money", "percent",
     "emoticon", "censored", "number", "segment", "slang", "strip_quotes", "strip_terminal"}
)

LOWERCASE_POLICIES = ("preserve", "lowercase_all", "lowercase_modified_only")

EMOTICON_PLACEHOLDER = "@emoticons"
_VERSION_RE = re.compile(r"#\s*version:\s*(\S+)")
SUPPORTED_VERSIONS = ("1",)


class LexiconError(ValueError):
    pass


@dataclass(frozen=True)
class Rule:
    name: str
    kind: str
    mask: str | None
    pattern: str

    @property
    def family(self) -> str:
        """Normalization switch governing this rule (``date_iso`` -> ``date``)."""
        return self.name.split("_", 1)[0]


def _data_text(name: str) -> str:
    return resources.files("suggestmine.normalize").joinpath("data", name).read_text(encoding="utf-8")


def _entries(text: str, source: str, ncols: int) -> list[tuple[int, list[str]]]:
    out = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("#"):
            m = _VERSION_RE.match(stripped)
            if m and m.group(1) not in SUPPORTED_VERSIONS:
                raise LexiconError(f"{source}:{lineno}: unsupported table version {m.group(1)!r}")
            continue
        parts = line.split("\t")
        if len(parts) != ncols:
            raise LexiconError(f"{source}:{lineno}: expected {ncols} tab-separated fields, found {len(parts)}")
        out.append((lineno, parts))
    return out


def parse_lexicon(text: str, source: str = "<lexicon>") -> dict[str, str]:
    out: dict[str, str] = {}
    for lineno, (key, value) in _entries(text, source, 2):
        if key in out:
            raise LexiconError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value
    return out


def load_lexicon(path: str | os.PathLike) -> dict[str, str]:
    with open(path, encoding="utf-8") as fh:
        return parse_lexicon(fh.read(), os.fspath(path))


def parse_rules(text: str, source: str = "<rules>") -> tuple[Rule, ...]:
    rules = []
    names = set()
    for lineno, (name, kind, mask, pattern) in _entries(text, source, 4):
        if kind not in RULE_KINDS:
            raise LexiconError(f"{source}:{lineno}: unknown rule kind {kind!r}")
        if name in names:
            raise LexiconError(f"{source}:{lineno}: duplicate rule {name!r}")
        mask = None if mask == "-" else mask
        if mask is not None and mask not in MASKS:
            raise LexiconError(f"{source}:{lineno}: {mask!r} is not a known mask")
        if pattern != EMOTICON_PLACEHOLDER:
            try:
                re.compile(pattern)
            except re.error as exc:
                raise LexiconError(f"{source}:{lineno}: bad pattern: {exc}") from None
        names.add(name)
        rules.append(Rule(name, kind, mask, pattern))
    return tuple(rules)


def load_rules(path: str | os.PathLike) -> tuple[Rule, ...]:
    with open(path, encoding="utf-8") as fh:
        return parse_rules(fh.read(), os.fspath(path))


@dataclass(frozen=True)
class NormalizerConfig:
    """Everything that determines the output of ``preprocess``.

    ``drop_chars`` lists the characters that make up strippable quote runs;
    ``keep_terminal_punct`` retains a sentence-final ``.``/``!``/``?`` run.
    """

    slang_lexicon: Mapping[str, str] = field(default_factory=dict)
    emoticon_lexicon: Mapping[str, str] = field(default_factory=dict)
    lowercase_policy: str = "lowercase_modified_only"
    enabled_rules: frozenset[str] = NORMALIZATIONS
    rules: tuple[Rule, ...] = ()
    drop_chars: str = "\"'`;“”‘’"
    keep_terminal_punct: bool = False

    def __post_init__(self):
        if self.lowercase_policy not in LOWERCASE_POLICIES:
            raise ValueError(f"lowercase_policy must be one of {LOWERCASE_POLICIES}")
        unknown = set(self.enabled_rules) - NORMALIZATIONS
        if unknown:
            raise ValueError(f"unknown normalization rules: {sorted(unknown)}")
        bad = {v for v in self.emoticon_lexicon.values() if v not in MASKS}
        if bad:
            raise ValueError(f"emoticon lexicon maps to unknown masks: {sorted(bad)}")
        lowered = [k.lower() for k in self.slang_lexicon]
        if len(set(lowered)) != len(lowered):
            raise ValueError("slang lexicon keys collide case-insensitively")
        object.__setattr__(self, "enabled_rules", frozenset(self.enabled_rules))
        object.__setattr__(self, "slang_lexicon", {k.lower(): v for k, v in self.slang_lexicon.items()})

    def with_options(self, **changes) -> "NormalizerConfig":
        return replace(self, **changes)

    def to_dict(self) -> dict:
        return {
            "slang_lexicon": dict(sorted(self.slang_lexicon.items())),
            "emoticon_lexicon": dict(sorted(self.emoticon_lexicon.items())),
            "lowercase_policy": self.lowercase_policy,
            "enabled_rules": sorted(self.enabled_rules),
            "rules": [[r.name, r.kind, r.mask or "-", r.pattern] for r in self.rules],
            "drop_chars": self.drop_chars,
            "keep_terminal_punct": self.keep_terminal_punct,
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "NormalizerConfig":
        return cls(
            slang_lexicon=dict(d["slang_lexicon"]),
            emoticon_lexicon=dict(d["emoticon_lexicon"]),
            lowercase_policy=d["lowercase_policy"],
            enabled_rules=frozenset(d["enabled_rules"]),
            rules=tuple(Rule(n, k, None if m == "-" else m, p) for n, k, m, p in d["rules"]),
            drop_chars=d["drop_chars"],
            keep_terminal_punct=d["keep_terminal_punct"],
        )

    def fingerprint(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, ensure_ascii=False, separators=(",", ":"))
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()


_DEFAULT: NormalizerConfig | None = None


def default_config() -> NormalizerConfig:
    """The shipped configuration (rules and lexicons from package data)."""
    global _DEFAULT
    if _DEFAULT is None:
        _DEFAULT = NormalizerConfig(
            slang_lexicon=parse_lexicon(_data_text("slang.tsv"), "slang.tsv"),
            emoticon_lexicon=parse_lexicon(_data_text("emoticons.tsv"), "emoticons.tsv"),
            rules=parse_rules(_data_text("rules.tsv"), "rules.tsv"),
        )
    return _DEFAULT


def build_config(
    slang_path: str | None = None,
    emoticon_path: str | None = None,
    rules_path: str | None = None,
    **options,
) -> NormalizerConfig:
    """Default config with any of its tables swapped for files on disk."""
    base = default_config()
    changes = dict(options)
    if slang_path:
        changes["slang_lexicon"] = load_lexicon(slang_path)
    if emoticon_path:
        changes["emoticon_lexicon"] = load_lexicon(emoticon_path)
    if rules_path:
        changes["rules"] = load_rules(rules_path)
    return replace(base, **changes) if changes else base
