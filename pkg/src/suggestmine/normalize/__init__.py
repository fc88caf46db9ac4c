"""Forum-text tokenization and normalization."""

from .config import (
    MASKS,
    NORMALIZATIONS,
    LexiconError,
    NormalizerConfig,
    Rule,
    build_config,
    default_config,
    load_lexicon,
    load_rules,
    parse_lexicon,
    parse_rules,
)
from .normalizer import normalize, preprocess, preprocess_tokens, segment_word
from .tokenizer import Token, TokenKind, TokenStream, tokenize

__all__ = [
    "MASKS",
    "NORMALIZATIONS",
    "LexiconError",
    "NormalizerConfig",
    "Rule",
    "Token",
    "TokenKind",
    "TokenStream",
    "build_config",
    "default_config",
    "load_lexicon",
    "load_rules",
    "normalize",
    "parse_lexicon",
    "parse_rules",
    "preprocess",
    "preprocess_tokens",
    "segment_word",
    "tokenize",
]
