"""Suggestion mining: forum-text normalization, classifiers and error analysis."""

__version__ = "0.1.0"
