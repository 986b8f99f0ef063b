"""Stage one of the pipeline: ground (bundle, intent) in a diagram plan.

The plan is an ordered dictionary of question-answer pairs extracted
from the paper: classify the intent, generate clarification questions,
retrieve supporting passages (and data-bearing figures) per question,
then extract one answer per question with an NA sentinel. NA answers
never survive into the plan.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .corpus import DiagramType, DocumentBundle, FigureAsset, FigureKind, TableAsset
from .errors import (
    EmptyPlan,
    EmptyQuestionSet,
    ExtractionRefused,
    UnparseableLabel,
)
from .gateway import Gateway
from .parsing import parse_label, parse_question_list
from .prompts import (
    ANSWER_EXTRACT,
    FIGURE_DATA,
    INTENT_CLASSIFY,
    NA_SENTINEL,
    QUESTION_GEN,
    STRICT_LABEL_NOTE,
    STRICT_LIST_NOTE,
)
from .retrieval import PassageIndex, ScoredFigure, ScoredPassage
from .textutil import normalize_answer

logger = logging.getLogger(__name__)

# Only these kinds are routed through figure-to-table extraction by the pipeline.
DATA_FIGURE_KINDS = (FigureKind.PLOT, FigureKind.TABLE_IMAGE)


@dataclass(frozen=True)
class IntentRecord:
    """The user's intent plus its classified diagram label."""

    intent_text: str
    label: DiagramType

    @property
    def results_related(self) -> bool:
        return self.label is DiagramType.RESULTS


@dataclass(frozen=True)
class ClarificationQuestion:
    question_id: int  # dense from 1
    text: str


@dataclass(frozen=True)
class RetrievedEvidence:
    """Per-question evidence: ranked passages plus data-figure hits."""

    question_id: int
    passages: tuple[ScoredPassage, ...]
    figure_hits: tuple[ScoredFigure, ...] = ()
    figure_tables: tuple[TableAsset, ...] = ()

    def with_figure_tables(self, tables: Sequence[TableAsset]) -> "RetrievedEvidence":
        return RetrievedEvidence(
            question_id=self.question_id,
            passages=self.passages,
            figure_hits=self.figure_hits,
            figure_tables=tuple(tables),
        )


@dataclass(frozen=True)
class EvidenceRef:
    """Provenance pointer from a plan pair back into loaded content."""

    kind: str  # "passage" | "figure-table"
    paper_id: str
    section_index: int | None = None
    paragraph_index: int | None = None
    figure_id: str | None = None


@dataclass(frozen=True)
class QAPair:
    question_id: int
    question: str
    answer: str
    evidence: tuple[EvidenceRef, ...] = ()


@dataclass(frozen=True)
class DiagramPlan:
    intent: IntentRecord
    qa_pairs: tuple[QAPair, ...]

    def __post_init__(self):
        for pair in self.qa_pairs:
            if normalize_answer(pair.answer).upper() == NA_SENTINEL:
                raise ValueError(
                    f"NA answer leaked into plan for question: {pair.question!r}"
                )

    def as_prompt_text(self) -> str:
        return "\n".join(f"Q: {p.question} A: {p.answer}" for p in self.qa_pairs)


# --- operations ---------------------------------------------------------------


def classify_intent(intent_text: str, gateway: Gateway) -> IntentRecord:
    """Classify the intent into one of the four diagram labels.

    Unparseable model output triggers exactly one stricter reprompt.
    """
    if not intent_text.strip():
        raise ValueError("intent_text must be non-empty")
    for format_note in ("", STRICT_LABEL_NOTE):
        response = gateway.ask(
            INTENT_CLASSIFY, {"intent": intent_text, "format_note": format_note}
        )
        label = parse_label(response.text)
        if label is not None:
            return IntentRecord(intent_text=intent_text, label=label)
    raise UnparseableLabel(f"no label in model output: {response.text[:200]!r}")


def generate_questions(
    intent: IntentRecord, gateway: Gateway
) -> tuple[ClarificationQuestion, ...]:
    """Generate clarification questions for the intent, ids dense from 1."""
    for format_note in ("", STRICT_LIST_NOTE):
        response = gateway.ask(
            QUESTION_GEN, {"intent": intent.intent_text, "format_note": format_note}
        )
        items = parse_question_list(response.text)
        if items:
            return tuple(
                ClarificationQuestion(question_id=i + 1, text=text)
                for i, text in enumerate(items)
            )
    raise EmptyQuestionSet("model produced no parseable questions")


def retrieve_evidence(
    question: ClarificationQuestion,
    bundles: Sequence[DocumentBundle],
    k: int = 4,
    index: PassageIndex | None = None,
) -> RetrievedEvidence:
    """Top-k passages by lexical score, plus figures beating the passage floor."""
    if k < 1:
        raise ValueError("k must be >= 1")
    if not bundles:
        raise ValueError("bundles must be non-empty")
    index = index or PassageIndex(bundles)
    passages = tuple(index.rank_passages(question.text, k))
    floor = min((p.score for p in passages), default=0.0)
    figure_hits = tuple(index.score_figures(question.text, floor))
    return RetrievedEvidence(
        question_id=question.question_id, passages=passages, figure_hits=figure_hits
    )


def extract_figure_table(
    figure: FigureAsset, gateway: Gateway, paper_id: str = ""
) -> TableAsset:
    """Convert a data-bearing figure into a markdown table via a vision call."""
    response = gateway.ask(
        FIGURE_DATA, {"caption": figure.caption}, attachments=[figure.image_ref]
    )
    markdown = response.text.strip()
    if not markdown:
        raise ExtractionRefused(f"empty extraction for figure {figure.figure_id!r}")
    return TableAsset(
        table_id=f"{figure.figure_id}-extracted",
        caption=figure.caption,
        markdown=markdown,
        source_figure_id=figure.figure_id,
    )


@dataclass(frozen=True)
class _Chunk:
    text: str
    score: float
    ref: EvidenceRef


def _chunks_for(evidence: RetrievedEvidence, figure_paper: dict[str, str]) -> list[_Chunk]:
    chunks = [
        _Chunk(
            text=p.text,
            score=p.score,
            ref=EvidenceRef(
                kind="passage",
                paper_id=p.ref.paper_id,
                section_index=p.ref.section_index,
                paragraph_index=p.ref.paragraph_index,
            ),
        )
        for p in evidence.passages
    ]
    for table in evidence.figure_tables:
        fig_id = table.source_figure_id or table.table_id
        hit_score = next(
            (h.score for h in evidence.figure_hits if h.figure.figure_id == fig_id), 0.0
        )
        chunks.append(
            _Chunk(
                text=table.as_text(),
                score=hit_score,
                ref=EvidenceRef(
                    kind="figure-table",
                    paper_id=figure_paper.get(fig_id, ""),
                    figure_id=fig_id,
                ),
            )
        )
    # Highest-scoring evidence is consulted first; ties keep passage order.
    chunks.sort(key=lambda c: -c.score)
    return chunks


def _answer_one(
    intent: IntentRecord,
    question: ClarificationQuestion,
    chunks: Sequence[_Chunk],
    gateway: Gateway,
) -> QAPair | None:
    for chunk in chunks:
        response = gateway.ask(
            ANSWER_EXTRACT,
            {
                "intent": intent.intent_text,
                "context": chunk.text,
                "question": question.text,
            },
        )
        answer = normalize_answer(response.text)
        if answer and answer.upper() != NA_SENTINEL:
            return QAPair(
                question_id=question.question_id,
                question=question.text,
                answer=answer,
                evidence=(chunk.ref,),
            )
    return None


def synthesize_plan(
    intent: IntentRecord,
    questions: Sequence[ClarificationQuestion],
    evidence: Sequence[RetrievedEvidence],
    gateway: Gateway,
    figure_paper: dict[str, str] | None = None,
    max_workers: int = 1,
) -> DiagramPlan:
    """Answer each question from its evidence; NA answers are filtered out.

    One model call per (question, evidence chunk); the first non-NA
    answer in retrieval-rank order wins. Questions whose every chunk
    answers NA are dropped; if all questions drop, EmptyPlan is raised
    rather than handing the renderer an empty plan.
    """
    if not questions:
        raise ValueError("questions must be non-empty")
    by_id = {ev.question_id: ev for ev in evidence}
    figure_paper = figure_paper or {}

    def work(question: ClarificationQuestion) -> QAPair | None:
        ev = by_id.get(question.question_id)
        if ev is None:
            return None
        return _answer_one(intent, question, _chunks_for(ev, figure_paper), gateway)

    if max_workers > 1:
        with ThreadPoolExecutor(max_workers=max_workers) as pool:
            results = list(pool.map(work, questions))
    else:
        results = [work(q) for q in questions]

    pairs = tuple(
        pair for pair in sorted(
            (r for r in results if r is not None), key=lambda p: p.question_id
        )
    )
    if not pairs:
        raise EmptyPlan("every answer was NA")
    return DiagramPlan(intent=intent, qa_pairs=pairs)


# --- plan (de)serialization -----------------------------------------------------


def plan_to_dict(plan: DiagramPlan) -> dict:
    return {
        "intent": {"intent_text": plan.intent.intent_text, "label": plan.intent.label.value},
        "qa_pairs": [
            {
                "question_id": p.question_id,
                "question": p.question,
                "answer": p.answer,
                "evidence": [
                    {k: v for k, v in vars(ref).items() if v is not None}
                    for ref in p.evidence
                ],
            }
            for p in plan.qa_pairs
        ],
    }


def plan_from_dict(raw: dict) -> DiagramPlan:
    intent = IntentRecord(
        intent_text=raw["intent"]["intent_text"],
        label=DiagramType(raw["intent"]["label"]),
    )
    pairs = tuple(
        QAPair(
            question_id=p["question_id"],
            question=p["question"],
            answer=p["answer"],
            evidence=tuple(EvidenceRef(**ref) for ref in p.get("evidence", [])),
        )
        for p in raw["qa_pairs"]
    )
    return DiagramPlan(intent=intent, qa_pairs=pairs)


def save_plan(plan: DiagramPlan, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(plan_to_dict(plan), indent=2, sort_keys=True, ensure_ascii=False) + "\n",
        encoding="utf-8",
    )


def load_plan(path: str | Path) -> DiagramPlan:
    return plan_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
