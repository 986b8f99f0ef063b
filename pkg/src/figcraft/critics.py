"""The three aspect critics: completeness, faithfulness, layout.

Each critic maps a rendered diagram (plus context) to a score in [1, 5]
with textual feedback. Completeness and faithfulness decompose into
per-question sub-scores whose arithmetic mean is the aspect score;
layout is a single vision call judged against an editable rule
checklist. Satisfaction is strict: a score must exceed the threshold,
equality is not enough. Feedback is non-empty exactly when the score
falls below the feedback floor.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Mapping, Sequence

from .corpus import DocumentBundle
from .errors import EmptyQuestionSet, UnparseableScore
from .gateway import Gateway
from .parsing import parse_feedback, parse_question_list, parse_score
from .planner import IntentRecord
from .prompts import (
    ANSWER_EXTRACT,
    COMPLETENESS_QUESTIONS,
    COMPLETENESS_SCORE,
    FAITHFULNESS_QUESTIONS,
    FAITHFULNESS_SCORE,
    IMAGE_ANSWER,
    LAYOUT_SCORE,
    NA_SENTINEL,
    SELF_REFINE,
    STRICT_LIST_NOTE,
    STRICT_SCORE_NOTE,
)
from .renderer import DiagramVersion
from .retrieval import PassageIndex
from .textutil import normalize_answer


class Aspect(str, Enum):
    COMPLETENESS = "Completeness"
    FAITHFULNESS = "Faithfulness"
    LAYOUT = "Layout"
    GENERIC = "Generic"  # the single-critic Self-Refine baseline


CRITIC_ASPECTS = (Aspect.COMPLETENESS, Aspect.FAITHFULNESS, Aspect.LAYOUT)

DEFAULT_LAYOUT_RULES: tuple[str, ...] = (
    "Fonts are large and legible at presentation size.",
    "Legends and titles do not overlap other elements.",
    "Bounding boxes and labels sit on the elements they describe.",
    "Flowchart arrows are present and connect steps in the stated order.",
    "Plot axes carry correct labels, units, and value ranges.",
    "Nodes, rows, and steps appear in the sequence the source describes.",
)

# What the diagram is checked against when no user intent is in scope.
FAITHFULNESS_FRAME = "Verify that the diagram reflects the source paper accurately."


@dataclass(frozen=True)
class AspectConfig:
    threshold: float = 4.5
    max_iterations: int = 3
    feedback_required_below: float = 4.5

    def __post_init__(self):
        if not 1.0 <= self.threshold <= 5.0:
            raise ValueError("threshold must lie in [1, 5]")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be >= 0")


@dataclass(frozen=True)
class CritiqueReport:
    aspect: Aspect
    score: float
    feedback: str
    sub_scores: tuple[tuple[str, float], ...]
    satisfied: bool

    def __post_init__(self):
        if self.sub_scores:
            mean = sum(s for _, s in self.sub_scores) / len(self.sub_scores)
            if self.score != mean:
                raise ValueError(f"score {self.score} is not the sub-score mean {mean}")


def build_report(
    aspect: Aspect,
    sub_scores: Sequence[tuple[str, float]],
    feedback_parts: Sequence[tuple[str, str]],
    cfg: AspectConfig,
    single_score: float | None = None,
    single_feedback: str = "",
) -> CritiqueReport:
    """Aggregate sub-scores into a report honoring the threshold semantics.

    Aspect feedback joins the per-question feedback of sub-scores below
    the feedback floor; it is forced non-empty below the floor and empty
    at or above it.
    """
    if sub_scores:
        score = sum(s for _, s in sub_scores) / len(sub_scores)
    else:
        assert single_score is not None, "single-score critics must pass single_score"
        score = single_score

    if score < cfg.feedback_required_below:
        lines = [
            f"[{question}] {text}" for question, text in feedback_parts if text.strip()
        ]
        if single_feedback.strip():
            lines.insert(0, single_feedback.strip())
        feedback = "\n".join(lines)
        if not feedback:
            feedback = f"Improve the {aspect.value.lower()} of the diagram."
    else:
        feedback = ""

    return CritiqueReport(
        aspect=aspect,
        score=score,
        feedback=feedback,
        sub_scores=tuple(sub_scores),
        satisfied=score > cfg.threshold,
    )


def _format_threshold(value: float) -> str:
    return f"{value:g}"


def _ask_score(
    gateway: Gateway,
    template_id: str,
    bindings: Mapping[str, str],
    attachments: Sequence[Path],
    cfg: AspectConfig,
) -> tuple[float, str]:
    """One scoring call; out-of-range or unparseable output gets one reprompt."""
    base = dict(bindings)
    base["feedback_below"] = _format_threshold(cfg.feedback_required_below)
    for format_note in ("", STRICT_SCORE_NOTE):
        response = gateway.ask(
            template_id, {**base, "format_note": format_note}, attachments=attachments
        )
        score = parse_score(response.text)
        if score is not None and 1.0 <= score <= 5.0:
            return score, parse_feedback(response.text)
    raise UnparseableScore(
        f"no usable score from {template_id}: {response.text[:200]!r}"
    )


def _require_rendered(version: DiagramVersion) -> Path:
    if not version.render.ok or version.render.image_ref is None:
        raise ValueError("critics only accept versions whose render status is ok")
    return version.render.image_ref


def _ask_questions(
    gateway: Gateway,
    template_id: str,
    bindings: Mapping[str, str],
    attachments: Sequence[Path] = (),
) -> list[str]:
    for format_note in ("", STRICT_LIST_NOTE):
        response = gateway.ask(
            template_id, {**bindings, "format_note": format_note}, attachments=attachments
        )
        questions = parse_question_list(response.text)
        if questions:
            return questions
    raise EmptyQuestionSet(f"{template_id} produced no parseable questions")


def assess_completeness(
    version: DiagramVersion,
    intent: IntentRecord,
    bundles: Sequence[DocumentBundle],
    gateway: Gateway,
    cfg: AspectConfig = AspectConfig(),
    index: PassageIndex | None = None,
) -> CritiqueReport:
    """Decompose the intent into questions and score the diagram's answers."""
    image = _require_rendered(version)
    questions = _ask_questions(
        gateway, COMPLETENESS_QUESTIONS, {"intent": intent.intent_text}
    )
    index = index or PassageIndex(bundles)

    sub_scores: list[tuple[str, float]] = []
    feedback_parts: list[tuple[str, str]] = []
    for question in questions:
        diagram_answer = gateway.ask(
            IMAGE_ANSWER,
            {
                "intent": intent.intent_text,
                "question": question,
                "code": version.code.source,
            },
            attachments=[image],
        ).text.strip()
        passages = index.rank_passages(question, 1)
        pdf_answer = passages[0].text if passages else "(no relevant passage found)"
        score, feedback = _ask_score(
            gateway,
            COMPLETENESS_SCORE,
            {
                "intent": intent.intent_text,
                "code": version.code.source,
                "pdf_answer": pdf_answer,
                "diagram_answer": diagram_answer,
            },
            [image],
            cfg,
        )
        sub_scores.append((question, score))
        feedback_parts.append((question, feedback))

    return build_report(Aspect.COMPLETENESS, sub_scores, feedback_parts, cfg)


def assess_faithfulness(
    version: DiagramVersion,
    bundles: Sequence[DocumentBundle],
    gateway: Gateway,
    cfg: AspectConfig = AspectConfig(),
    question_count: int = 5,
    index: PassageIndex | None = None,
) -> CritiqueReport:
    """Generate validation questions from the diagram and score agreement
    between the paper's answers and the diagram's answers."""
    image = _require_rendered(version)
    questions = _ask_questions(
        gateway,
        FAITHFULNESS_QUESTIONS,
        {"count": str(question_count), "code": version.code.source},
        attachments=[image],
    )
    index = index or PassageIndex(bundles)

    sub_scores: list[tuple[str, float]] = []
    feedback_parts: list[tuple[str, str]] = []
    for question in questions:
        passages = index.rank_passages(question, 1)
        if passages:
            pdf_answer = gateway.ask(
                ANSWER_EXTRACT,
                {
                    "intent": FAITHFULNESS_FRAME,
                    "context": passages[0].text,
                    "question": question,
                },
            ).text.strip()
            if normalize_answer(pdf_answer).upper() == NA_SENTINEL:
                pdf_answer = "(the paper does not answer this question)"
        else:
            pdf_answer = "(the paper does not answer this question)"
        diagram_answer = gateway.ask(
            IMAGE_ANSWER,
            {
                "intent": FAITHFULNESS_FRAME,
                "question": question,
                "code": version.code.source,
            },
            attachments=[image],
        ).text.strip()
        score, feedback = _ask_score(
            gateway,
            FAITHFULNESS_SCORE,
            {
                "intent": FAITHFULNESS_FRAME,
                "code": version.code.source,
                "pdf_answer": pdf_answer,
                "diagram_answer": diagram_answer,
            },
            [image],
            cfg,
        )
        sub_scores.append((question, score))
        feedback_parts.append((question, feedback))

    return build_report(Aspect.FAITHFULNESS, sub_scores, feedback_parts, cfg)


def assess_layout(
    version: DiagramVersion,
    intent: IntentRecord,
    gateway: Gateway,
    cfg: AspectConfig = AspectConfig(),
    rules: Sequence[str] = DEFAULT_LAYOUT_RULES,
) -> CritiqueReport:
    """Single vision call judging readability against the rule checklist."""
    image = _require_rendered(version)
    rule_text = "\n".join(f"{i + 1}. {rule}" for i, rule in enumerate(rules))
    score, feedback = _ask_score(
        gateway,
        LAYOUT_SCORE,
        {"intent": intent.intent_text, "rules": rule_text},
        [image],
        cfg,
    )
    return build_report(
        Aspect.LAYOUT, (), (), cfg, single_score=score, single_feedback=feedback
    )


def assess_generic(
    version: DiagramVersion,
    intent: IntentRecord,
    gateway: Gateway,
    cfg: AspectConfig = AspectConfig(),
) -> CritiqueReport:
    """The Self-Refine baseline's one-shot critique without aspect decomposition."""
    image = _require_rendered(version)
    score, feedback = _ask_score(
        gateway, SELF_REFINE, {"intent": intent.intent_text}, [image], cfg
    )
    return build_report(
        Aspect.GENERIC, (), (), cfg, single_score=score, single_feedback=feedback
    )


@dataclass
class CriticSuite:
    """Bundles critic context so the refiner can evaluate any aspect.

    The three aspect critics are mutually independent over an immutable
    version, so callers may evaluate them concurrently.
    """

    gateway: Gateway
    intent: IntentRecord
    bundles: tuple[DocumentBundle, ...]
    configs: Mapping[Aspect, AspectConfig] = field(default_factory=dict)
    faithfulness_question_count: int = 5
    layout_rules: tuple[str, ...] = DEFAULT_LAYOUT_RULES

    def __post_init__(self):
        self._index = PassageIndex(self.bundles) if self.bundles else None

    def config_for(self, aspect: Aspect) -> AspectConfig:
        return self.configs.get(aspect, AspectConfig())

    def evaluate(self, aspect: Aspect, version: DiagramVersion) -> CritiqueReport:
        cfg = self.config_for(aspect)
        if aspect is Aspect.COMPLETENESS:
            return assess_completeness(
                version, self.intent, self.bundles, self.gateway, cfg, index=self._index
            )
        if aspect is Aspect.FAITHFULNESS:
            return assess_faithfulness(
                version,
                self.bundles,
                self.gateway,
                cfg,
                question_count=self.faithfulness_question_count,
                index=self._index,
            )
        if aspect is Aspect.LAYOUT:
            return assess_layout(version, self.intent, self.gateway, cfg, self.layout_rules)
        return assess_generic(version, self.intent, self.gateway, cfg)
