"""Parsers for model output: labels, question lists, scores, code blocks.

Model output framing varies, so each parser accepts the handful of
shapes the prompts elicit and nothing more; callers reprompt once with a
stricter format note before giving up.
"""

from __future__ import annotations

import re

from .corpus import DiagramType

_LABEL_RE = re.compile(
    r"(?:extrapolated[-\s])?(flowchart|summary|architecture|results)", re.IGNORECASE
)

_NUMBERED_RE = re.compile(r"^\s*\d+[.)]\s+(.*\S)\s*$")
_BULLET_RE = re.compile(r"^\s*[-*•]\s+(.*\S)\s*$")

_SCORE_LINE_RE = re.compile(
    r"(?:^|\b)(?:[a-z -]*score)\s*[:=]\s*([0-9]+(?:\.[0-9]+)?)\s*(?:/\s*5)?",
    re.IGNORECASE,
)
_LEADING_NUMBER_RE = re.compile(r"^\s*([0-9]+(?:\.[0-9]+)?)\s*(?:/\s*5)?\s*(?:$|[,;—-])")
_FRACTION_RE = re.compile(r"\b([0-9]+(?:\.[0-9]+)?)\s*/\s*5\b")
_FEEDBACK_RE = re.compile(r"feedback\s*[:=]\s*(.*)", re.IGNORECASE | re.DOTALL)

_FENCE_RE = re.compile(r"```[a-zA-Z0-9_+-]*\n(.*?)```", re.DOTALL)


def parse_label(text: str) -> DiagramType | None:
    """Map model output onto one of the four intent labels, or None."""
    match = _LABEL_RE.search(text)
    if not match:
        return None
    return DiagramType(match.group(1).capitalize())


def parse_question_list(text: str) -> list[str]:
    """Accept numbered lists, bullets, comma-separated items, or bare lines."""
    lines = [line for line in text.splitlines() if line.strip()]
    if not lines:
        return []

    numbered = [m.group(1) for line in lines if (m := _NUMBERED_RE.match(line))]
    if numbered:
        return numbered
    bulleted = [m.group(1) for line in lines if (m := _BULLET_RE.match(line))]
    if bulleted:
        return bulleted
    if len(lines) == 1 and "," in lines[0] and "?" not in lines[0]:
        items = [part.strip() for part in lines[0].split(",")]
        return [item for item in items if item]
    return [line.strip() for line in lines]


def parse_score(text: str) -> float | None:
    """Accept 'Score: x', a bare leading number, or 'x/5'."""
    match = _SCORE_LINE_RE.search(text)
    if match is None:
        match = _LEADING_NUMBER_RE.match(text)
    if match is None:
        match = _FRACTION_RE.search(text)
    if match is None:
        stripped = text.strip()
        if re.fullmatch(r"[0-9]+(?:\.[0-9]+)?", stripped):
            return float(stripped)
        return None
    return float(match.group(1))


def parse_feedback(text: str) -> str:
    match = _FEEDBACK_RE.search(text)
    if match is None:
        return ""
    return match.group(1).strip()


def looks_like_code(text: str) -> bool:
    stripped = text.strip()
    if not stripped:
        return False
    markers = ("import ", "def ", "from ", "plt.", "fig.", "print(")
    return any(marker in stripped for marker in markers) or (
        "=" in stripped and "(" in stripped
    )


def extract_code(text: str) -> str | None:
    """Longest fenced block wins; else the whole response if it looks like code."""
    blocks = _FENCE_RE.findall(text)
    if blocks:
        return max(blocks, key=len)
    if looks_like_code(text):
        return text.strip() + "\n"
    return None
