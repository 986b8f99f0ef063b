"""Shared text helpers. The tokenizer is declared bit-exactly because
both retrieval ranking and the ROUGE-1 kernel depend on it: lowercase,
split on non-alphanumeric runs, drop empty tokens."""

from __future__ import annotations

import re

_TOKEN_RE = re.compile(r"[a-z0-9]+")


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def normalize_answer(text: str) -> str:
    """Collapse whitespace and strip wrapping quotes/periods for sentinel checks."""
    return " ".join(text.split()).strip().strip("'\".").strip()
