"""Mask substitution, word segmentation and slang expansion."""

from __future__ import annotations

import re

from .config import NormalizerConfig, default_config
from .tokenizer import Token, TokenKind, TokenStream, tokenize

_CAMEL = re.compile(r"(?<=[a-z])(?=[A-Z])")
_TERMINAL = frozenset(".!?")


def segment_word(word: str) -> list[str]:
    """Split ``word`` at letter/digit boundaries, dropping the digit runs.

    >>> segment_word("ie9mobile")
    ['ie', 'mobile']
    """
    if not any(c.isalpha() for c in word):
        raise ValueError(f"cannot segment {word!r}: no letters (emit a number mask instead)")
    pieces, current, alpha = [], [], None
    for c in word:
        is_alpha = c.isalpha()
        if alpha is not None and is_alpha != alpha:
            pieces.append(("".join(current), alpha))
            current = []
        current.append(c)
        alpha = is_alpha
    pieces.append(("".join(current), alpha))
    return [p.lower() for p, is_alpha in pieces if is_alpha]


def _split_hashtag(body: str) -> list[str]:
    out = []
    for part in re.split(r"_+", _CAMEL.sub("_", body)):
        if any(c.isalpha() for c in part):
            out.extend(segment_word(part))
    return out


def _modified(surface: str, cfg: NormalizerConfig) -> str:
    return surface if cfg.lowercase_policy == "preserve" else surface.lower()


def normalize(ts: TokenStream, cfg: NormalizerConfig | None = None) -> TokenStream:
    """Replace recognized entities with masks and clean up word tokens.

    Tokens the rules do not touch pass through unchanged (lowercased only under
    ``lowercase_all``).
    """
    cfg = cfg or default_config()
    rules = {r.name: r for r in cfg.rules}
    on = cfg.enabled_rules
    out: TokenStream = []

    def emit(surface, kind, tok):
        out.append(Token(surface, kind, tok.span, tok.rule))

    for tok in ts:
        rule = rules.get(tok.rule)
        rkind = rule.kind if rule else None

        if tok.kind is TokenKind.MASK:
            out.append(tok)
        elif rkind == "entity" and rule.family in on:
            emit(rule.mask, TokenKind.MASK, tok)
        elif rkind == "hashtag" and "hashtag" in on:
            emit(rule.mask, TokenKind.MASK, tok)
            for piece in _split_hashtag(tok.surface[1:]):
                _emit_piece(piece, tok, cfg, emit)
        elif rkind == "emoticon" and "emoticon" in on and tok.surface in cfg.emoticon_lexicon:
            emit(cfg.emoticon_lexicon[tok.surface], TokenKind.MASK, tok)
        elif rkind == "censored" and "censored" in on:
            emit(rule.mask, TokenKind.MASK, tok)
        elif tok.kind is TokenKind.NUMBER and "number" in on:
            emit("<number>", TokenKind.MASK, tok)
        elif tok.kind is TokenKind.WORD and rkind == "word":
            _normalize_word(tok, cfg, emit)
        elif tok.kind is TokenKind.PUNCT and "strip_quotes" in on and all(c in cfg.drop_chars for c in tok.surface):
            continue
        elif cfg.lowercase_policy == "lowercase_all" and tok.kind is TokenKind.WORD:
            emit(tok.surface.lower(), tok.kind, tok)
        else:
            out.append(tok)

    if "strip_terminal" in on and not cfg.keep_terminal_punct:
        while out and out[-1].kind is TokenKind.PUNCT and set(out[-1].surface) <= _TERMINAL:
            out.pop()
    return out


def _emit_piece(piece: str, tok: Token, cfg: NormalizerConfig, emit) -> None:
    # segmented pieces can be slang keys themselves; expand now so a second pass is a no-op
    if "slang" in cfg.enabled_rules and piece in cfg.slang_lexicon:
        for sub in cfg.slang_lexicon[piece].split():
            emit(_modified(sub, cfg), TokenKind.WORD, tok)
    else:
        emit(piece, TokenKind.WORD, tok)


def _normalize_word(tok: Token, cfg: NormalizerConfig, emit) -> None:
    on = cfg.enabled_rules
    surface = tok.surface
    key = surface.lower()
    if "slang" in on and key in cfg.slang_lexicon:
        for piece in cfg.slang_lexicon[key].split():
            emit(_modified(piece, cfg), TokenKind.WORD, tok)
        return
    has_alpha = any(c.isalpha() for c in surface)
    if not has_alpha:
        if "number" in on:
            emit("<number>", TokenKind.MASK, tok)
        else:
            emit(surface, TokenKind.WORD, tok)
        return
    if "segment" in on and not surface.isalpha():
        for piece in segment_word(surface):
            _emit_piece(piece, tok, cfg, emit)
        return
    emit(surface.lower() if cfg.lowercase_policy == "lowercase_all" else surface, TokenKind.WORD, tok)


def preprocess(text: str, cfg: NormalizerConfig | None = None) -> str:
    """Tokenize, normalize and join with single spaces."""
    cfg = cfg or default_config()
    return " ".join(t.surface for t in normalize(tokenize(text, cfg), cfg))


def preprocess_tokens(text: str, cfg: NormalizerConfig | None = None) -> list[str]:
    cfg = cfg or default_config()
    return [t.surface for t in normalize(tokenize(text, cfg), cfg)]
