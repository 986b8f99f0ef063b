"""Iterative refinement of rendered diagrams.

Three strategies share one mechanical core:

- sequential: one critic at a time in a fixed aspect order, looping
  refine-and-re-evaluate per aspect until the score strictly exceeds the
  threshold or the per-aspect iteration cap is spent;
- summarized: all three critics evaluate each round, feedback from
  critics scoring strictly below the threshold is combined into a single
  refinement, the round's aggregate score is the minimum of the three;
- self-refine: a single generic critic with the same loop bound, kept as
  the baseline.

Stopping is strict everywhere: a score equal to the threshold does not
stop a loop. Every step lands in an audit trace; a refinement whose
re-render fails consumes its iteration and falls back to the prior
version.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path
from typing import Callable, Mapping, Protocol, Sequence

from .artifacts import BlobStore
from .corpus import DocumentBundle
from .critics import (
    CRITIC_ASPECTS,
    Aspect,
    AspectConfig,
    CriticSuite,
    CritiqueReport,
)
from .errors import FigcraftError, NoCodeBlock, RefinementError
from .gateway import Gateway
from .parsing import extract_code
from .planner import DiagramPlan, IntentRecord
from .prompts import REFINE_CODE, STRICT_CODE_NOTE
from .renderer import (
    CodeArtifact,
    CodeOrigin,
    DiagramVersion,
    ExecLimits,
    RenderResult,
    execute,
)
from .sandbox import RunnerClient

logger = logging.getLogger(__name__)

FALLBACK_FEEDBACK = (
    "No critic feedback text was produced; improve the diagram so every "
    "aspect exceeds the quality threshold."
)


class RefinementStrategy(str, Enum):
    SEQMAF = "seqmaf"
    SUMMAF = "summaf"
    SELF_REFINE = "selfrefine"


class StopReason(str, Enum):
    THRESHOLD_MET = "threshold_met"
    MAX_ITERATIONS = "max_iterations"
    ERROR = "error"


@dataclass(frozen=True)
class RefinementConfig:
    strategy: RefinementStrategy = RefinementStrategy.SEQMAF
    threshold: float = 4.5
    max_iterations: int = 3
    aspect_order: tuple[Aspect, ...] = CRITIC_ASPECTS
    aspects: Mapping[Aspect, AspectConfig] = field(default_factory=dict)

    def __post_init__(self):
        if sorted(a.value for a in self.aspect_order) != sorted(
            a.value for a in CRITIC_ASPECTS
        ):
            raise ValueError("aspect_order must be a permutation of the three aspects")

    def config_for(self, aspect: Aspect) -> AspectConfig:
        if aspect in self.aspects:
            return self.aspects[aspect]
        return AspectConfig(
            threshold=self.threshold,
            max_iterations=self.max_iterations,
            feedback_required_below=self.threshold,
        )


class CriticEvaluator(Protocol):
    def evaluate(self, aspect: Aspect, version: DiagramVersion) -> CritiqueReport: ...


# Produces revised source for (version, aspect label, score, feedback text).
CodeRefiner = Callable[[DiagramVersion, str, float, str], str]


@dataclass
class RefinementContext:
    """Everything a refinement run needs besides the version under work.

    ``critics`` and ``code_refiner`` default to the real gateway-backed
    implementations; tests inject scripted ones.
    """

    intent: IntentRecord
    bundles: tuple[DocumentBundle, ...] = ()
    plan: DiagramPlan | None = None
    store: BlobStore | None = None
    runner: RunnerClient | None = None
    limits: ExecLimits = field(default_factory=ExecLimits)
    critics: CriticEvaluator | None = None
    code_refiner: CodeRefiner | None = None
    executor: Callable[[CodeArtifact], RenderResult] | None = None
    critic_concurrency: int = 1


@dataclass
class RefinementStep:
    step_index: int
    strategy: RefinementStrategy
    aspects: tuple[Aspect, ...]
    critiques: tuple[CritiqueReport, ...]
    version_before: int
    version_after: int
    refined: bool
    render_ok: bool | None = None
    rejected_code_id: str | None = None
    aggregate_score: float | None = None
    combined_from: tuple[Aspect, ...] | None = None
    stop_reason: StopReason | None = None


@dataclass
class AspectTotals:
    evaluations: int = 0
    refinements: int = 0
    stop_reason: StopReason | None = None


@dataclass
class RefinementTrace:
    strategy: RefinementStrategy
    steps: list[RefinementStep] = field(default_factory=list)
    totals: dict[str, AspectTotals] = field(default_factory=dict)
    versions: list[DiagramVersion] = field(default_factory=list)
    final_version: DiagramVersion | None = None
    error: str | None = None

    def totals_for(self, key: Aspect | str) -> AspectTotals:
        name = key.value if isinstance(key, Aspect) else key
        return self.totals.setdefault(name, AspectTotals())

    def refinement_count(self, key: Aspect | str) -> int:
        name = key.value if isinstance(key, Aspect) else key
        return self.totals[name].refinements if name in self.totals else 0


# --- feedback application ----------------------------------------------------------


def apply_feedback(
    code: CodeArtifact,
    critique_text: str,
    aspect_label: str,
    score: float,
    gateway: Gateway,
    image: Path | None = None,
) -> CodeArtifact:
    """Regenerate the program to incorporate critique feedback.

    The refinement prompt carries the diagram image, the current code,
    the aspect name, its score, and the feedback. One reprompt before
    giving up on code extraction.
    """
    if not critique_text.strip():
        raise ValueError("critique_text must be non-empty")
    attachments = [image] if image is not None else []
    for format_note in ("", STRICT_CODE_NOTE):
        response = gateway.ask(
            REFINE_CODE,
            {
                "criteria_name": aspect_label,
                "code": code.source,
                "score": f"{score:g}",
                "feedback": critique_text,
                "format_note": format_note,
            },
            attachments=attachments,
        )
        source = extract_code(response.text)
        if source is not None:
            return code.revise(source, CodeOrigin.REFINEMENT)
    raise NoCodeBlock("refinement produced no extractable code")


# --- the engine ---------------------------------------------------------------------


class _Engine:
    def __init__(self, ctx: RefinementContext, cfg: RefinementConfig, gateway: Gateway):
        self.ctx = ctx
        self.cfg = cfg
        self.gateway = gateway
        self.critics = ctx.critics or CriticSuite(
            gateway=gateway,
            intent=ctx.intent,
            bundles=tuple(ctx.bundles),
            configs={a: cfg.config_for(a) for a in Aspect},
        )

    def evaluate(self, aspect: Aspect, version: DiagramVersion) -> CritiqueReport:
        return self.critics.evaluate(aspect, version)

    def revise(
        self, version: DiagramVersion, aspect_label: str, score: float, feedback: str
    ) -> tuple[DiagramVersion | None, CodeArtifact]:
        """Apply feedback and re-render; None signals a failed re-render."""
        text = feedback.strip() or FALLBACK_FEEDBACK
        if self.ctx.code_refiner is not None:
            source = self.ctx.code_refiner(version, aspect_label, score, text)
            code = version.code.revise(source, CodeOrigin.REFINEMENT)
        else:
            code = apply_feedback(
                version.code,
                text,
                aspect_label,
                score,
                self.gateway,
                image=version.render.image_ref,
            )
        if self.ctx.executor is not None:
            result = self.ctx.executor(code)
        else:
            if self.ctx.store is None:
                raise RefinementError("refinement needs a store or an injected executor")
            result = execute(code, self.ctx.limits, self.ctx.store, self.ctx.runner)
        if not result.ok:
            logger.warning(
                "re-render of version %d failed (%s); keeping prior version",
                code.version,
                result.status.value,
            )
            return None, code
        return (
            DiagramVersion(code=code, render=result, created_at=datetime.now(timezone.utc)),
            code,
        )


def _aspect_loop(
    engine: _Engine,
    trace: RefinementTrace,
    aspect: Aspect,
    version: DiagramVersion,
    threshold: float,
    max_iterations: int,
) -> DiagramVersion:
    """The shared per-aspect loop: evaluate, break strictly above threshold,
    else refine; at most max_iterations evaluations and refinements."""
    totals = trace.totals_for(aspect)
    last_step: RefinementStep | None = None
    for _ in range(max_iterations):
        critique = engine.evaluate(aspect, version)
        totals.evaluations += 1
        step = RefinementStep(
            step_index=len(trace.steps),
            strategy=trace.strategy,
            aspects=(aspect,),
            critiques=(critique,),
            version_before=version.code.version,
            version_after=version.code.version,
            refined=False,
        )
        trace.steps.append(step)
        last_step = step
        if critique.score > threshold:
            step.stop_reason = StopReason.THRESHOLD_MET
            totals.stop_reason = StopReason.THRESHOLD_MET
            return version
        new_version, code = engine.revise(
            version, aspect.value, critique.score, critique.feedback
        )
        step.refined = True
        totals.refinements += 1
        if new_version is None:
            step.render_ok = False
            step.rejected_code_id = code.code_id
        else:
            step.render_ok = True
            step.version_after = new_version.code.version
            version = new_version
            trace.versions.append(version)
    if last_step is not None:
        last_step.stop_reason = StopReason.MAX_ITERATIONS
    totals.stop_reason = StopReason.MAX_ITERATIONS
    return version


def refine_sequential(
    version: DiagramVersion,
    ctx: RefinementContext,
    cfg: RefinementConfig,
    gateway: Gateway,
) -> tuple[DiagramVersion, RefinementTrace]:
    """One pass through the aspect order, each aspect refined to satisfaction
    or iteration exhaustion; the final version is returned either way."""
    cfg = _with_strategy(cfg, RefinementStrategy.SEQMAF)
    engine = _Engine(ctx, cfg, gateway)
    trace = RefinementTrace(strategy=RefinementStrategy.SEQMAF, versions=[version])
    try:
        for aspect in cfg.aspect_order:
            aspect_cfg = cfg.config_for(aspect)
            version = _aspect_loop(
                engine,
                trace,
                aspect,
                version,
                aspect_cfg.threshold,
                aspect_cfg.max_iterations,
            )
    except FigcraftError as exc:
        trace.error = str(exc)
        trace.final_version = version
        raise RefinementError(f"sequential refinement aborted: {exc}", trace) from exc
    trace.final_version = version
    return version, trace


def refine_summarized(
    version: DiagramVersion,
    ctx: RefinementContext,
    cfg: RefinementConfig,
    gateway: Gateway,
) -> tuple[DiagramVersion, RefinementTrace]:
    """Rounds of all three critics with one combined refinement per round.

    Feedback enters the round's combined set iff its critic scored
    strictly below the threshold; the aggregate score is the minimum of
    the three. The loop stops when every critic strictly exceeds the
    threshold or the iteration cap is spent.
    """
    cfg = _with_strategy(cfg, RefinementStrategy.SUMMAF)
    engine = _Engine(ctx, cfg, gateway)
    trace = RefinementTrace(strategy=RefinementStrategy.SUMMAF, versions=[version])
    combined_totals = trace.totals_for("Combined")
    if cfg.max_iterations == 0:
        combined_totals.stop_reason = StopReason.MAX_ITERATIONS
        trace.final_version = version
        return version, trace

    iteration = 0
    try:
        while True:
            critiques = _evaluate_all(engine, ctx, version, cfg.aspect_order)
            for aspect in cfg.aspect_order:
                trace.totals_for(aspect).evaluations += 1
            aggregate = min(c.score for c in critiques)
            combined = [
                c for c in critiques if c.score < cfg.config_for(c.aspect).threshold
            ]
            step = RefinementStep(
                step_index=len(trace.steps),
                strategy=RefinementStrategy.SUMMAF,
                aspects=tuple(c.aspect for c in critiques),
                critiques=tuple(critiques),
                version_before=version.code.version,
                version_after=version.code.version,
                refined=False,
                aggregate_score=aggregate,
                combined_from=tuple(c.aspect for c in combined),
            )
            trace.steps.append(step)
            if all(c.satisfied for c in critiques):
                step.stop_reason = StopReason.THRESHOLD_MET
                combined_totals.stop_reason = StopReason.THRESHOLD_MET
                break
            summary = _summarize_feedback(combined)
            new_version, code = engine.revise(version, "Combined", aggregate, summary)
            step.refined = True
            combined_totals.refinements += 1
            iteration += 1
            if new_version is None:
                step.render_ok = False
                step.rejected_code_id = code.code_id
            else:
                step.render_ok = True
                step.version_after = new_version.code.version
                version = new_version
                trace.versions.append(version)
            if iteration >= cfg.max_iterations:
                step.stop_reason = StopReason.MAX_ITERATIONS
                combined_totals.stop_reason = StopReason.MAX_ITERATIONS
                break
    except FigcraftError as exc:
        trace.error = str(exc)
        trace.final_version = version
        raise RefinementError(f"summarized refinement aborted: {exc}", trace) from exc
    trace.final_version = version
    return version, trace


def refine_self(
    version: DiagramVersion,
    ctx: RefinementContext,
    cfg: RefinementConfig,
    gateway: Gateway,
) -> tuple[DiagramVersion, RefinementTrace]:
    """The Self-Refine baseline: one generic critic, same loop bound."""
    cfg = _with_strategy(cfg, RefinementStrategy.SELF_REFINE)
    engine = _Engine(ctx, cfg, gateway)
    trace = RefinementTrace(strategy=RefinementStrategy.SELF_REFINE, versions=[version])
    try:
        version = _aspect_loop(
            engine, trace, Aspect.GENERIC, version, cfg.threshold, cfg.max_iterations
        )
    except FigcraftError as exc:
        trace.error = str(exc)
        trace.final_version = version
        raise RefinementError(f"self-refine aborted: {exc}", trace) from exc
    trace.final_version = version
    return version, trace


def refine(
    strategy: RefinementStrategy,
    version: DiagramVersion,
    ctx: RefinementContext,
    cfg: RefinementConfig,
    gateway: Gateway,
) -> tuple[DiagramVersion, RefinementTrace]:
    runner = {
        RefinementStrategy.SEQMAF: refine_sequential,
        RefinementStrategy.SUMMAF: refine_summarized,
        RefinementStrategy.SELF_REFINE: refine_self,
    }[strategy]
    return runner(version, ctx, cfg, gateway)


def _with_strategy(cfg: RefinementConfig, strategy: RefinementStrategy) -> RefinementConfig:
    if cfg.strategy is strategy:
        return cfg
    return RefinementConfig(
        strategy=strategy,
        threshold=cfg.threshold,
        max_iterations=cfg.max_iterations,
        aspect_order=cfg.aspect_order,
        aspects=cfg.aspects,
    )


def _evaluate_all(
    engine: _Engine,
    ctx: RefinementContext,
    version: DiagramVersion,
    order: Sequence[Aspect],
) -> list[CritiqueReport]:
    if ctx.critic_concurrency > 1:
        with ThreadPoolExecutor(max_workers=ctx.critic_concurrency) as pool:
            return list(pool.map(lambda a: engine.evaluate(a, version), order))
    return [engine.evaluate(aspect, version) for aspect in order]


def _summarize_feedback(critiques: Sequence[CritiqueReport]) -> str:
    parts = [
        f"{c.aspect.value} (score {c.score:g}): {c.feedback.strip()}"
        for c in critiques
        if c.feedback.strip()
    ]
    return "\n".join(parts)


# --- trace serialization --------------------------------------------------------------


def _critique_to_dict(critique: CritiqueReport) -> dict:
    return {
        "aspect": critique.aspect.value,
        "score": critique.score,
        "feedback": critique.feedback,
        "sub_scores": [[q, s] for q, s in critique.sub_scores],
        "satisfied": critique.satisfied,
    }


def _version_to_dict(version: DiagramVersion) -> dict:
    render = version.render
    return {
        "version": version.code.version,
        "code_id": version.code.code_id,
        "parent": version.code.parent,
        "origin": version.code.origin.value,
        "render_status": render.status.value,
        "image": render.image_blob.relpath if render.image_blob else None,
    }


def trace_to_dict(trace: RefinementTrace) -> dict:
    """Canonical JSON shape of a trace; deliberately free of wall-clock
    fields so replayed runs serialize byte-identically."""
    return {
        "strategy": trace.strategy.value,
        "steps": [
            {
                "step_index": s.step_index,
                "strategy": s.strategy.value,
                "aspects": [a.value for a in s.aspects],
                "critiques": [_critique_to_dict(c) for c in s.critiques],
                "version_before": s.version_before,
                "version_after": s.version_after,
                "refined": s.refined,
                **({"render_ok": s.render_ok} if s.render_ok is not None else {}),
                **(
                    {"rejected_code_id": s.rejected_code_id}
                    if s.rejected_code_id
                    else {}
                ),
                **(
                    {"aggregate_score": s.aggregate_score}
                    if s.aggregate_score is not None
                    else {}
                ),
                **(
                    {"combined_from": [a.value for a in s.combined_from]}
                    if s.combined_from is not None
                    else {}
                ),
                **({"stop_reason": s.stop_reason.value} if s.stop_reason else {}),
            }
            for s in trace.steps
        ],
        "totals": {
            name: {
                "evaluations": t.evaluations,
                "refinements": t.refinements,
                "stop_reason": t.stop_reason.value if t.stop_reason else None,
            }
            for name, t in sorted(trace.totals.items())
        },
        "versions": [_version_to_dict(v) for v in trace.versions],
        "final_version": _version_to_dict(trace.final_version)
        if trace.final_version
        else None,
        **({"error": trace.error} if trace.error else {}),
    }


def save_trace(trace: RefinementTrace, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(trace_to_dict(trace), indent=2, sort_keys=True, ensure_ascii=False)
        + "\n",
        encoding="utf-8",
    )
