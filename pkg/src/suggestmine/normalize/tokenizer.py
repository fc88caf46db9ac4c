"""Longest-match rule tokenizer for forum text."""

from __future__ import annotations

import enum
import re
from dataclasses import dataclass
from functools import lru_cache

from .config import EMOTICON_PLACEHOLDER, NormalizerConfig, Rule, default_config

_SPACE = re.compile(r"\s+")


class TokenKind(enum.Enum):
    WORD = "word"
    MASK = "mask"
    PUNCT = "punct"
    NUMBER = "number"


_KIND_OF_RULE = {
    "mask": TokenKind.MASK,
    "number": TokenKind.NUMBER,
    "quote": TokenKind.PUNCT,
    "terminal": TokenKind.PUNCT,
    "punct": TokenKind.PUNCT,
}


@dataclass(frozen=True)
class Token:
    """One token. ``span`` holds character offsets into the source text;
    ``rule`` names the tokenizer rule that produced it."""

    surface: str
    kind: TokenKind
    span: tuple[int, int]
    rule: str = ""

    def __str__(self) -> str:
        return self.surface


TokenStream = list[Token]


def _emoticon_pattern(lexicon) -> str:
    if not lexicon:
        return r"(?!)"
    alts = "|".join(re.escape(e) for e in sorted(lexicon, key=lambda e: (-len(e), e)))
    # emoticons must stand alone: whitespace (or text edge) before, whitespace/edge/sentence punctuation after
    return rf"(?<!\S)(?:{alts})(?=\s|$|[.,!?])"


@lru_cache(maxsize=8)
def _compile(rules: tuple[Rule, ...], emoticons: tuple[str, ...]) -> tuple[tuple[Rule, re.Pattern], ...]:
    compiled = []
    for rule in rules:
        pattern = _emoticon_pattern(emoticons) if rule.pattern == EMOTICON_PLACEHOLDER else rule.pattern
        compiled.append((rule, re.compile(pattern)))
    return tuple(compiled)


def compiled_rules(cfg: NormalizerConfig) -> tuple[tuple[Rule, re.Pattern], ...]:
    return _compile(tuple(cfg.rules), tuple(sorted(cfg.emoticon_lexicon)))


def tokenize(text: str, cfg: NormalizerConfig | None = None) -> TokenStream:
    """Split ``text`` into tokens.

    At every non-space position each rule is tried; the longest match wins and
    ties go to the rule listed first. Characters no rule claims become
    single-character punctuation, so the tokenizer never fails.
    """
    cfg = cfg or default_config()
    rules = compiled_rules(cfg)
    tokens: TokenStream = []
    pos, n = 0, len(text)
    while pos < n:
        m = _SPACE.match(text, pos)
        if m:
            pos = m.end()
            continue
        best_rule, best_end = None, pos
        for rule, rx in rules:
            m = rx.match(text, pos)
            if m and m.end() > best_end:
                best_rule, best_end = rule, m.end()
        if best_rule is None:
            tokens.append(Token(text[pos], TokenKind.PUNCT, (pos, pos + 1), "fallback"))
            pos += 1
            continue
        kind = _KIND_OF_RULE.get(best_rule.kind, TokenKind.WORD)
        tokens.append(Token(text[pos:best_end], kind, (pos, best_end), best_rule.name))
        pos = best_end
    return tokens
