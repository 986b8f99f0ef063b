"""End-to-end orchestration: (bundles, intent) -> rendered, refined diagram.

This is the composition root the CLI, benchmark runner, and session
service all call into. Under a replay-mode gateway the whole run is a
pure function of (bundles, intent, config, fixture set).
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

from .artifacts import BlobStore
from .corpus import DocumentBundle
from .critics import Aspect, AspectConfig
from .dialects import select_dialect
from .errors import ExtractionRefused
from .gateway import Gateway
from .planner import (
    DATA_FIGURE_KINDS,
    DiagramPlan,
    IntentRecord,
    RetrievedEvidence,
    classify_intent,
    extract_figure_table,
    generate_questions,
    retrieve_evidence,
    synthesize_plan,
)
from .refiner import (
    RefinementConfig,
    RefinementContext,
    RefinementStrategy,
    RefinementTrace,
    refine,
)
from .renderer import DiagramVersion, ExecLimits, render_with_repair
from .retrieval import PassageIndex
from .sandbox import RunnerClient

logger = logging.getLogger(__name__)

# Benchmark strategy names; "fs" is the unrefined few-shot pipeline.
STRATEGY_ALIASES = {
    "fs": None,
    "seqmaf": RefinementStrategy.SEQMAF,
    "summaf": RefinementStrategy.SUMMAF,
    "sr": RefinementStrategy.SELF_REFINE,
    "selfrefine": RefinementStrategy.SELF_REFINE,
}


@dataclass(frozen=True)
class PipelineConfig:
    retrieval_k: int = 4
    max_repairs: int = 2
    answer_workers: int = 1
    critic_concurrency: int = 1
    limits: ExecLimits = field(default_factory=ExecLimits)
    refinement: RefinementConfig = field(default_factory=RefinementConfig)


@dataclass
class PipelineResult:
    intent: IntentRecord
    plan: DiagramPlan
    initial_version: DiagramVersion
    final_version: DiagramVersion
    trace: RefinementTrace | None = None


def build_plan(
    bundles: list[DocumentBundle],
    intent_text: str,
    gateway: Gateway,
    cfg: PipelineConfig = PipelineConfig(),
) -> DiagramPlan:
    """Planning stage alone: classify, question, retrieve, extract, synthesize."""
    intent = classify_intent(intent_text, gateway)
    questions = generate_questions(intent, gateway)
    return complete_plan(bundles, intent, questions, gateway, cfg)


def complete_plan(
    bundles: list[DocumentBundle],
    intent: IntentRecord,
    questions,
    gateway: Gateway,
    cfg: PipelineConfig = PipelineConfig(),
) -> DiagramPlan:
    """Retrieval, figure extraction, and synthesis for existing questions."""
    index = PassageIndex(bundles)
    evidences = [
        retrieve_evidence(q, bundles, k=cfg.retrieval_k, index=index) for q in questions
    ]

    figure_paper = {
        fig.figure_id: bundle.paper_id for bundle in bundles for fig in bundle.figures
    }
    extracted: dict[str, object] = {}
    enriched: list[RetrievedEvidence] = []
    for evidence in evidences:
        tables = []
        for hit in evidence.figure_hits:
            if hit.figure.kind not in DATA_FIGURE_KINDS:
                continue
            if hit.figure.figure_id not in extracted:
                try:
                    extracted[hit.figure.figure_id] = extract_figure_table(
                        hit.figure, gateway, paper_id=hit.paper_id
                    )
                except ExtractionRefused as exc:
                    logger.warning("figure extraction refused: %s", exc)
                    extracted[hit.figure.figure_id] = None
            table = extracted[hit.figure.figure_id]
            if table is not None:
                tables.append(table)
        enriched.append(evidence.with_figure_tables(tables))

    return synthesize_plan(
        intent,
        questions,
        enriched,
        gateway,
        figure_paper=figure_paper,
        max_workers=cfg.answer_workers,
    )


def run_pipeline(
    bundles: list[DocumentBundle],
    intent_text: str,
    gateway: Gateway,
    store: BlobStore,
    strategy: str = "fs",
    cfg: PipelineConfig = PipelineConfig(),
    runner: RunnerClient | None = None,
    plan: DiagramPlan | None = None,
) -> PipelineResult:
    """Full run for one intent under one strategy."""
    if strategy not in STRATEGY_ALIASES:
        raise ValueError(f"unknown strategy {strategy!r}")
    if plan is None:
        plan = build_plan(bundles, intent_text, gateway, cfg)
    intent = plan.intent

    dialect = select_dialect(intent.label)
    version = render_with_repair(
        intent,
        plan,
        dialect,
        gateway,
        store,
        limits=cfg.limits,
        max_repairs=cfg.max_repairs,
        runner=runner,
    )
    initial = version

    refinement = STRATEGY_ALIASES[strategy]
    trace: RefinementTrace | None = None
    if refinement is not None:
        ctx = RefinementContext(
            intent=intent,
            bundles=tuple(bundles),
            plan=plan,
            store=store,
            runner=runner,
            limits=cfg.limits,
            critic_concurrency=cfg.critic_concurrency,
        )
        version, trace = refine(refinement, version, ctx, cfg.refinement, gateway)

    return PipelineResult(
        intent=intent,
        plan=plan,
        initial_version=initial,
        final_version=version,
        trace=trace,
    )


def default_refinement_config(threshold: float = 4.5, max_iterations: int = 3) -> RefinementConfig:
    return RefinementConfig(
        threshold=threshold,
        max_iterations=max_iterations,
        aspects={
            aspect: AspectConfig(
                threshold=threshold,
                max_iterations=max_iterations,
                feedback_required_below=threshold,
            )
            for aspect in Aspect
        },
    )
