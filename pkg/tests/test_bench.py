"""Benchmark runner: grouping, isolation of item failures, report shaping."""

from __future__ import annotations

import json
from pathlib import Path

from figcraft.corpus import (
    BenchItem,
    BenchManifest,
    BenchSubset,
    DiagramType,
    load_document_bundle,
)
from figcraft.evalbench.bench import (
    ItemRecord,
    _category_rows,
    extend_manifest,
    run_benchmark,
    save_report,
)
from figcraft.evalbench.report import render_figures, to_csv, to_table
from figcraft.pipeline import PipelineConfig
from figcraft.renderer import ExecLimits

from conftest import scripted_gateway, write_bundle, write_png

OK_CODE = (
    "```python\n"
    "import matplotlib.pyplot as plt\n"
    "fig, ax = plt.subplots()\n"
    "ax.bar(['lru', 'ours'], [148, 212])\n"
    "ax.set_ylabel('kops')\n"
    "fig.savefig('diagram.png', dpi=100)\n"
    "```"
)


def pipeline_router(prompt: str, attachments) -> str | None:
    """Generic scripted model good enough to drive the whole pipeline."""
    if prompt.startswith("You will be provided with an intent."):
        intent_line = prompt.rsplit("Intent: ", 1)[1]
        if "flowchart" in intent_line.lower():
            return "Extrapolated-Flowchart"
        if "chart" in intent_line.lower() or "plot" in intent_line.lower():
            return "Extrapolated-Results"
        if "architecture" in intent_line.lower() or "highlight" in intent_line.lower():
            return "Extrapolated-Architecture"
        return "Extrapolated-Summary"
    if prompt.startswith("Your intent of coming up with the diagram creation"):
        return "1. What stages does the method have?\n2. What throughput is reported?"
    if prompt.startswith("Your intent of diagram creation is presented"):
        context = prompt.rsplit("Section/Image data: ", 1)[1].split("\nQuestion:")[0]
        if "stages" in context:
            return "parse, rank, and render"
        if "212k" in context:
            return "212k ops per second"
        return "NA"
    if prompt.startswith("Extract raw data in the form of markdown"):
        return "| policy | ops |\n| lru | 148k |\n| ours | 212k |"
    if prompt.startswith("Generate a code in python"):
        if "sabotage" in prompt:
            return "I refuse to write code."
        return OK_CODE
    if prompt.startswith("Describe the scientific diagram"):
        import hashlib

        digest = hashlib.sha256(Path(attachments[0]).read_bytes()).hexdigest()[:6]
        return f"a bar chart comparing lru and ours near 212k (image {digest})"
    return None


def _manifest_with_gold(tmp_path, intents) -> tuple[BenchManifest, dict]:
    bundle_path = write_bundle(tmp_path / "bundles")
    bundle = load_document_bundle(bundle_path)
    gold = write_png(tmp_path / "gold.png", size=(30, 20), color=(10, 99, 10))
    items = tuple(
        BenchItem(
            paper_ids=(bundle.paper_id,),
            intent_text=text,
            diagram_type=diagram_type,
            gold_image_ref=gold,
        )
        for text, diagram_type in intents
    )
    manifest = BenchManifest(subset_name=BenchSubset.GOLD, items=items)
    return manifest, {bundle.paper_id: bundle}


def test_four_item_manifest_groups_one_row_per_type(tmp_path, store):
    manifest, bundles = _manifest_with_gold(
        tmp_path,
        [
            ("Create a flowchart of the method stages.", DiagramType.FLOWCHART),
            ("Convert the throughput into a bar chart.", DiagramType.RESULTS),
            ("Highlight the architecture figure.", DiagramType.ARCHITECTURE),
            ("Create a table summarizing policies.", DiagramType.SUMMARY),
        ],
    )
    gateway = scripted_gateway(router=pipeline_router)
    report = run_benchmark(
        manifest,
        bundles,
        gateway,
        store,
        strategies=("fs",),
        cfg=PipelineConfig(limits=ExecLimits(timeout_s=60)),
    )
    assert len(report.categories) == 4
    assert all(row.count == 1 for row in report.categories)
    assert {row.diagram_type for row in report.categories} == {
        t.value for t in DiagramType
    }
    for item in report.items:
        assert item.error is None
        assert item.rouge1 is not None and 0.0 <= item.rouge1 <= 1.0


def test_item_failure_is_isolated(tmp_path, store):
    manifest, bundles = _manifest_with_gold(
        tmp_path,
        [
            ("Create a flowchart of the method stages.", DiagramType.FLOWCHART),
            ("Create a flowchart but sabotage the drawing step.", DiagramType.FLOWCHART),
        ],
    )
    gateway = scripted_gateway(router=pipeline_router)
    report = run_benchmark(
        manifest, bundles, gateway, store,
        strategies=("fs",), cfg=PipelineConfig(limits=ExecLimits(timeout_s=60)),
    )
    ok, failed = report.items
    assert ok.error is None and ok.rouge1 is not None
    assert failed.error is not None and "NoCodeBlock" in failed.error
    # the failing item still contributes to the category count
    row = report.categories[0]
    assert row.count == 2 and row.counts["rouge1"] == 1


def test_missing_gold_means_missing_metrics(tmp_path, store):
    bundle_path = write_bundle(tmp_path / "bundles")
    bundle = load_document_bundle(bundle_path)
    manifest = BenchManifest(
        subset_name=BenchSubset.EXTENDED,
        items=(
            BenchItem(
                paper_ids=(bundle.paper_id,),
                intent_text="Create a flowchart of the method stages.",
                diagram_type=DiagramType.FLOWCHART,
            ),
        ),
    )
    gateway = scripted_gateway(router=pipeline_router)
    report = run_benchmark(
        manifest, {bundle.paper_id: bundle}, gateway, store,
        strategies=("fs",), cfg=PipelineConfig(limits=ExecLimits(timeout_s=60)),
    )
    item = report.items[0]
    assert item.error is None
    assert item.rouge1 is None and item.semantic_sim is None
    assert item.missing_reason is not None
    assert report.categories[0].counts["rouge1"] == 0


def test_category_means_over_non_missing_only():
    items = [
        ItemRecord(item_id="i0", strategy="fs", diagram_type="Flowchart", rouge1=0.4),
        ItemRecord(item_id="i1", strategy="fs", diagram_type="Flowchart", rouge1=0.6),
        ItemRecord(item_id="i2", strategy="fs", diagram_type="Flowchart", rouge1=None),
    ]
    rows = _category_rows(items, ["fs"])
    assert rows[0].count == 3
    assert rows[0].counts["rouge1"] == 2
    assert rows[0].means["rouge1"] == 0.5
    assert rows[0].means["semantic_sim"] is None


def _sample_report_dict() -> dict:
    items = [
        ItemRecord(item_id="i0", strategy="fs", diagram_type="Flowchart", rouge1=0.28),
        ItemRecord(item_id="i1", strategy="seqmaf", diagram_type="Flowchart", rouge1=0.39),
    ]
    return {
        "run": {"gateway_mode": "replay"},
        "items": [vars(i) for i in items],
        "categories": [
            {
                "diagram_type": "Flowchart",
                "strategy": strategy,
                "count": 1,
                "means": {"rouge1": value, "semantic_sim": None, "image_text_align": None},
                "counts": {"rouge1": 1, "semantic_sim": 0, "image_text_align": 0},
            }
            for strategy, value in (("fs", 0.28), ("seqmaf", 0.39))
        ],
    }


def test_table_and_csv_shaping():
    report = _sample_report_dict()
    table = to_table(report)
    assert "strategy" in table.splitlines()[0]
    assert any(line.startswith("fs") for line in table.splitlines())
    assert any(line.startswith("seqmaf") for line in table.splitlines())
    csv_text = to_csv(report)
    assert csv_text.splitlines()[0].startswith("diagram_type,strategy,count")
    assert "Flowchart,seqmaf,1,0.390000" in csv_text


def test_report_figures_rendered(tmp_path):
    figures = render_figures(_sample_report_dict(), tmp_path / "figs")
    assert figures, "at least the rouge figure must render"
    assert all(p.suffix == ".png" and p.stat().st_size > 0 for p in figures)


def test_report_json_stable_key_order(tmp_path, store):
    manifest, bundles = _manifest_with_gold(
        tmp_path, [("Create a flowchart of the method stages.", DiagramType.FLOWCHART)]
    )
    gateway = scripted_gateway(router=pipeline_router)
    report = run_benchmark(
        manifest, bundles, gateway, store,
        strategies=("fs",), cfg=PipelineConfig(limits=ExecLimits(timeout_s=60)),
    )
    path_a, path_b = tmp_path / "a.json", tmp_path / "b.json"
    save_report(report, path_a)
    save_report(report, path_b)
    assert path_a.read_bytes() == path_b.read_bytes()
    payload = json.loads(path_a.read_text())
    assert list(payload) == sorted(payload)


def test_extend_manifest_generates_classified_intents(tmp_path):
    bundle = load_document_bundle(write_bundle(tmp_path / "bundles"))

    def router(prompt, attachments):
        if prompt.startswith("You will be given the title"):
            return "Create a flowchart of the ranking stages with their inputs."
        if prompt.startswith("You will be provided with an intent."):
            return "Extrapolated-Flowchart"
        return None

    manifest = extend_manifest(bundle, scripted_gateway(router=router), count=2)
    assert manifest.subset_name is BenchSubset.EXTENDED
    assert manifest.total == 2
    assert all(item.diagram_type is DiagramType.FLOWCHART for item in manifest.items)
    assert all(item.gold_image_ref is None for item in manifest.items)


def test_concurrent_workers_produce_identical_report(tmp_path, store):
    manifest, bundles = _manifest_with_gold(
        tmp_path,
        [
            ("Create a flowchart of the method stages.", DiagramType.FLOWCHART),
            ("Convert the throughput into a bar chart.", DiagramType.RESULTS),
        ],
    )
    cfg = PipelineConfig(limits=ExecLimits(timeout_s=60))
    serial = run_benchmark(
        manifest, bundles, scripted_gateway(router=pipeline_router), store,
        strategies=("fs",), cfg=cfg, workers=1,
    )
    from figcraft.artifacts import BlobStore

    concurrent = run_benchmark(
        manifest, bundles, scripted_gateway(router=pipeline_router),
        BlobStore(tmp_path / "store2"), strategies=("fs",), cfg=cfg, workers=3,
    )
    assert [i.item_id for i in concurrent.items] == [i.item_id for i in serial.items]
    assert [i.rouge1 for i in concurrent.items] == [i.rouge1 for i in serial.items]
