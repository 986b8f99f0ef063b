"""Model-output parsers: labels, question lists, scores, code blocks."""

from __future__ import annotations

import pytest

from figcraft.corpus import DiagramType
from figcraft.parsing import (
    extract_code,
    parse_feedback,
    parse_label,
    parse_question_list,
    parse_score,
)


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Extrapolated-Flowchart", DiagramType.FLOWCHART),
        ("Label: Extrapolated-Summary", DiagramType.SUMMARY),
        ("extrapolated results", DiagramType.RESULTS),
        ("The label is Architecture.", DiagramType.ARCHITECTURE),
        ("FLOWCHART", DiagramType.FLOWCHART),
    ],
)
def test_parse_label_variants(text, expected):
    assert parse_label(text) is expected


def test_parse_label_rejects_noise():
    assert parse_label("I cannot classify this intent.") is None


def test_questions_numbered():
    text = "1. What stages exist?\n2) In what order?\n3. Who arbitrates?"
    assert parse_question_list(text) == [
        "What stages exist?",
        "In what order?",
        "Who arbitrates?",
    ]


def test_questions_bulleted_order_preserved():
    text = "- first thing\n* second thing\n• third thing"
    assert parse_question_list(text) == ["first thing", "second thing", "third thing"]


def test_questions_comma_separated():
    assert parse_question_list("stage names, stage order, final arbiter") == [
        "stage names",
        "stage order",
        "final arbiter",
    ]


def test_comma_inside_question_not_split():
    text = "Which stages, if any, run concurrently?"
    assert parse_question_list(text) == [text]


def test_questions_blank_output_empty():
    assert parse_question_list("   \n \n") == []


@pytest.mark.parametrize(
    "text,expected",
    [
        ("Score: 5", 5.0),
        ("Completeness Score: 4.5", 4.5),
        ("score = 3", 3.0),
        ("4.5 — legend overlaps the title", 4.5),
        ("3/5", 3.0),
        ("I would give this 4/5 overall", 4.0),
        ("2.5", 2.5),
        ("Score: 3, overlapping legend", 3.0),
    ],
)
def test_parse_score_formats(text, expected):
    assert parse_score(text) == expected


def test_parse_score_rejects_prose():
    assert parse_score("this diagram is quite nice") is None


def test_parse_feedback_tail():
    text = "Score: 3\nFeedback: overlapping legend hides the second bar"
    assert parse_feedback(text) == "overlapping legend hides the second bar"
    assert parse_feedback("Score: 5") == ""


def test_extract_code_takes_longest_fence():
    text = "```python\nshort\n```\nprose\n```python\nlonger = 1\nlines = 2\n```"
    assert extract_code(text) == "longer = 1\nlines = 2\n"


def test_extract_code_preserves_inner_bytes():
    inner = "import x\n\n\nweird   spacing = 1  # keep\n"
    assert extract_code(f"```py\n{inner}```") == inner


def test_extract_code_unfenced_code_like():
    text = "import matplotlib.pyplot as plt\nplt.plot([1])\n"
    assert extract_code(text) == text


def test_extract_code_rejects_prose():
    assert extract_code("I am unable to write code today.") is None
