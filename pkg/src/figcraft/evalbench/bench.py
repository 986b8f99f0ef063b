"""Benchmark runner: manifest in, per-item metrics and category means out.

Items are independent: a failing item is recorded as an item-level error
and never aborts the run. Report ordering follows manifest order then
strategy order regardless of completion order, so replayed runs
serialize byte-identically.
"""

from __future__ import annotations

import json
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping, Sequence

from ..artifacts import BlobStore
from ..corpus import (
    BenchItem,
    BenchManifest,
    BenchSubset,
    DiagramType,
    DocumentBundle,
)
from ..errors import DanglingPaperRef, FigcraftError, ScorerUnavailable
from ..gateway import Gateway
from ..gateway.providers import Decoding
from ..pipeline import PipelineConfig, run_pipeline
from ..planner import classify_intent
from ..prompts import INTENT_GEN
from .captioning import caption_image
from .metrics import (
    AlignmentScorer,
    CaptionPair,
    SemanticScorer,
    image_text_alignment,
    rouge1,
    semantic_similarity,
)

logger = logging.getLogger(__name__)

METRIC_FIELDS = ("rouge1", "semantic_sim", "image_text_align")


@dataclass
class ItemRecord:
    item_id: str
    strategy: str
    diagram_type: str
    rouge1: float | None = None
    semantic_sim: float | None = None
    semantic_sim_provider: str | None = None
    image_text_align: float | None = None
    image_text_align_provider: str | None = None
    generated_image: str | None = None
    gold_caption: str | None = None
    generated_caption: str | None = None
    refinements: int | None = None
    error: str | None = None
    missing_reason: str | None = None


@dataclass
class CategoryRow:
    diagram_type: str
    strategy: str
    count: int
    means: dict[str, float | None] = field(default_factory=dict)
    counts: dict[str, int] = field(default_factory=dict)


@dataclass
class MetricReport:
    run_manifest: dict
    items: list[ItemRecord]
    categories: list[CategoryRow]


def _category_rows(
    items: Sequence[ItemRecord], strategies: Sequence[str]
) -> list[CategoryRow]:
    rows: list[CategoryRow] = []
    for diagram_type in DiagramType:
        for strategy in strategies:
            group = [
                i
                for i in items
                if i.diagram_type == diagram_type.value and i.strategy == strategy
            ]
            if not group:
                continue
            means: dict[str, float | None] = {}
            counts: dict[str, int] = {}
            for metric in METRIC_FIELDS:
                values = [
                    getattr(i, metric) for i in group if getattr(i, metric) is not None
                ]
                counts[metric] = len(values)
                means[metric] = (sum(values) / len(values)) if values else None
            rows.append(
                CategoryRow(
                    diagram_type=diagram_type.value,
                    strategy=strategy,
                    count=len(group),
                    means=means,
                    counts=counts,
                )
            )
    return rows


def run_benchmark(
    manifest: BenchManifest,
    bundles: Mapping[str, DocumentBundle],
    gateway: Gateway,
    store: BlobStore,
    strategies: Sequence[str] = ("fs",),
    cfg: PipelineConfig = PipelineConfig(),
    semantic_scorer: SemanticScorer | None = None,
    alignment_scorer: AlignmentScorer | None = None,
    workers: int = 1,
) -> MetricReport:
    """Run every (item, strategy) combination and aggregate by category."""
    for item in manifest.items:
        for pid in item.paper_ids:
            if pid not in bundles:
                raise DanglingPaperRef(pid)

    jobs = [
        (f"item-{idx:04d}", item, strategy)
        for idx, item in enumerate(manifest.items)
        for strategy in strategies
    ]

    def run_one(job: tuple[str, BenchItem, str]) -> ItemRecord:
        item_id, item, strategy = job
        record = ItemRecord(
            item_id=item_id, strategy=strategy, diagram_type=item.diagram_type.value
        )
        try:
            item_bundles = [bundles[pid] for pid in item.paper_ids]
            result = run_pipeline(
                item_bundles, item.intent_text, gateway, store, strategy, cfg
            )
            record.generated_image = (
                result.final_version.render.image_blob.relpath
                if result.final_version.render.image_blob
                else None
            )
            if result.trace is not None:
                record.refinements = sum(
                    t.refinements for t in result.trace.totals.values()
                )
            generated_caption = caption_image(result.final_version.image_path, gateway)
            record.generated_caption = generated_caption
            if item.gold_image_ref is None:
                record.missing_reason = "no gold image for this subset"
                return record
            gold_caption = caption_image(item.gold_image_ref, gateway)
            record.gold_caption = gold_caption
            pair = CaptionPair(
                gold_caption=gold_caption,
                generated_caption=generated_caption,
                gold_image_ref=item.gold_image_ref,
                generated_image_ref=result.final_version.image_path,
            )
            record.rouge1 = rouge1(generated_caption, gold_caption)
            try:
                record.semantic_sim, record.semantic_sim_provider = semantic_similarity(
                    pair, semantic_scorer
                )
            except ScorerUnavailable:
                pass
            try:
                record.image_text_align, record.image_text_align_provider = (
                    image_text_alignment(
                        item.gold_image_ref, generated_caption, alignment_scorer
                    )
                )
            except ScorerUnavailable:
                pass
        except FigcraftError as exc:
            record.error = f"{type(exc).__name__}: {exc}"
            logger.warning("bench item %s/%s errored: %s", item_id, strategy, exc)
        return record

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            items = list(pool.map(run_one, jobs))
    else:
        items = [run_one(job) for job in jobs]

    run_manifest = {
        "gateway_mode": gateway.mode.value,
        "provider_id": gateway.provider.provider_id if gateway.provider else "replay",
        "template_digests": gateway.registry.digests(),
        "strategies": list(strategies),
        "subset": manifest.subset_name.value,
        "retrieval_k": cfg.retrieval_k,
        "threshold": cfg.refinement.threshold,
        "max_iterations": cfg.refinement.max_iterations,
        "rouge_variant": "unigram-multiset-f1",
        "tokenizer": "lowercase, split on non-alphanumeric runs, drop empties",
        "semantic_scorer": semantic_scorer.provider_id if semantic_scorer else None,
        "alignment_scorer": alignment_scorer.provider_id if alignment_scorer else None,
    }
    return MetricReport(
        run_manifest=run_manifest,
        items=items,
        categories=_category_rows(items, strategies),
    )


# --- report (de)serialization -------------------------------------------------------


def report_to_dict(report: MetricReport) -> dict:
    return {
        "run": report.run_manifest,
        "items": [
            {k: v for k, v in vars(item).items() if v is not None}
            for item in report.items
        ],
        "categories": [
            {
                "diagram_type": row.diagram_type,
                "strategy": row.strategy,
                "count": row.count,
                "means": row.means,
                "counts": row.counts,
            }
            for row in report.categories
        ],
    }


def save_report(report: MetricReport, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(report_to_dict(report), indent=2, sort_keys=True, ensure_ascii=False)
        + "\n",
        encoding="utf-8",
    )


def load_report_dict(path: str | Path) -> dict:
    return json.loads(Path(path).read_text(encoding="utf-8"))


# --- dataset extension utility --------------------------------------------------------


def extend_manifest(
    bundle: DocumentBundle,
    gateway: Gateway,
    count: int = 1,
) -> BenchManifest:
    """Generate new diagram intents for a paper (Extended-subset utility).

    This is a harness utility for growing a benchmark, deliberately
    separated from evaluation itself.
    """
    sections_text = "\n".join(
        f"{s.heading}: {' '.join(s.paragraphs)[:400]}" for s in bundle.sections
    )
    abstract = (
        " ".join(bundle.sections[0].paragraphs)[:600] if bundle.sections else ""
    )
    items = []
    for ordinal in range(count):
        response = gateway.ask(
            INTENT_GEN,
            {
                "title": bundle.title,
                "abstract": abstract,
                "section_content": sections_text[:2000],
                "table_captions": "; ".join(t.caption for t in bundle.tables) or "None",
                "image_captions": "; ".join(f.caption for f in bundle.figures) or "None",
            },
            # Distinct seeds give distinct cache keys, hence distinct intents.
            decoding=Decoding(seed=ordinal),
        )
        intent_text = response.text.strip()
        record = classify_intent(intent_text, gateway)
        items.append(
            BenchItem(
                paper_ids=(bundle.paper_id,),
                intent_text=intent_text,
                diagram_type=record.label,
            )
        )
    return BenchManifest(subset_name=BenchSubset.EXTENDED, items=tuple(items))
