"""Shared test fixtures: synthetic bundles, scripted gateways, stub versions."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import pytest
from PIL import Image

from figcraft.artifacts import BlobStore
from figcraft.corpus import DiagramType, load_document_bundle
from figcraft.critics import Aspect, CritiqueReport
from figcraft.dialects import FLOWCHART_DAG
from figcraft.gateway import Gateway, GatewayMode, ScriptedProvider
from figcraft.planner import IntentRecord
from figcraft.prompts import build_registry
from figcraft.renderer import DiagramVersion, RenderResult, make_artifact
from figcraft.sandbox import ExecStatus

FIXTURES = Path(__file__).parent / "fixtures"


def pytest_runtest_logreport(report):
    """One visible pass/fail line per acceptance criterion."""
    if "test_acceptance" in report.nodeid and report.when == "call":
        name = report.nodeid.split("::")[-1]
        outcome = "PASS" if report.passed else ("SKIP" if report.skipped else "FAIL")
        print(f"\n[ACCEPTANCE] {name}: {outcome}", flush=True)


def write_png(path: Path, size=(24, 16), color=(90, 140, 220)) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    Image.new("RGB", size, color).save(path, format="PNG")
    return path


def write_bundle(
    directory: Path,
    paper_id: str = "paper-a",
    sections: list[dict] | None = None,
    figures: list[dict] | None = None,
    tables: list[dict] | None = None,
    title: str = "A Synthetic Paper",
) -> Path:
    """Write a small valid bundle (plus its images) and return its path."""
    directory.mkdir(parents=True, exist_ok=True)
    if sections is None:
        sections = [
            {"heading": "Introduction", "paragraphs": ["We study widget caching."]},
            {
                "heading": "Method",
                "paragraphs": [
                    "The method has three stages: parse, rank, and render.",
                    "Ranking uses a lexical scorer over paragraphs.",
                ],
            },
            {
                "heading": "Results",
                "paragraphs": ["The widget cache reaches 212k ops per second."],
            },
        ]
    if figures is None:
        figures = [
            {
                "figure_id": "fig1",
                "caption": "Throughput by policy",
                "image_ref": "fig1.png",
                "kind": "plot",
            },
            {
                "figure_id": "fig2",
                "caption": "System architecture overview",
                "image_ref": "fig2.png",
                "kind": "figure",
            },
        ]
    if tables is None:
        tables = [
            {
                "table_id": "t1",
                "caption": "Policies",
                "grid": [["policy", "ops"], ["lru", "148k"], ["ours", "212k"]],
            }
        ]
    for fig in figures:
        write_png(directory / fig["image_ref"])
    payload = {
        "paper_id": paper_id,
        "title": title,
        "sections": sections,
        "figures": figures,
        "tables": tables,
    }
    path = directory / f"{paper_id}.json"
    path.write_text(json.dumps(payload, indent=2), encoding="utf-8")
    return path


@pytest.fixture
def bundle(tmp_path):
    return load_document_bundle(write_bundle(tmp_path / "bundle"))


@pytest.fixture
def registry():
    return build_registry()


def scripted_gateway(
    queue: list[str] | None = None, router=None, registry=None
) -> Gateway:
    """Live-mode gateway over an in-memory scripted provider (no disk cache)."""
    provider = ScriptedProvider(queue=list(queue or []), router=router)
    return Gateway(
        registry=registry or build_registry(),
        provider=provider,
        mode=GatewayMode.LIVE,
    )


@pytest.fixture
def gateway_factory():
    return scripted_gateway


# --- rendered-version scaffolding --------------------------------------------------


def make_version(store: BlobStore, source: str = "print('hi')\n") -> DiagramVersion:
    """A version-1 DiagramVersion with a real (tiny) PNG in the store."""
    image = store.root / "seed.png"
    write_png(image)
    blob = store.put_file(image)
    code = make_artifact(source, FLOWCHART_DAG)
    render = RenderResult(
        status=ExecStatus.OK,
        log="",
        image_blob=blob,
        image_ref=store.path_for(blob),
    )
    return DiagramVersion(code=code, render=render, created_at=datetime.now(timezone.utc))


@pytest.fixture
def store(tmp_path):
    return BlobStore(tmp_path / "store")


@pytest.fixture
def ok_version(store):
    return make_version(store)


@pytest.fixture
def intent_flowchart():
    return IntentRecord(
        intent_text="Create a flowchart of the three-stage method.",
        label=DiagramType.FLOWCHART,
    )


# --- scripted refinement collaborators ----------------------------------------------


def critique(aspect: Aspect, score: float, threshold: float = 4.5) -> CritiqueReport:
    """A critic verdict honoring the feedback/satisfaction contracts."""
    feedback = f"raise the {aspect.value.lower()} above {threshold}" if score < 4.5 else ""
    return CritiqueReport(
        aspect=aspect,
        score=score,
        feedback=feedback,
        sub_scores=(),
        satisfied=score > threshold,
    )


@dataclass
class ScriptedCritics:
    """Per-aspect queues of scores; repeats the last score when drained."""

    scripts: dict[Aspect, list[float]]
    threshold: float = 4.5
    calls: list[tuple[Aspect, int]] = field(default_factory=list)

    def evaluate(self, aspect: Aspect, version: DiagramVersion) -> CritiqueReport:
        queue = self.scripts[aspect]
        score = queue.pop(0) if len(queue) > 1 else queue[0]
        self.calls.append((aspect, version.code.version))
        return critique(aspect, score, self.threshold)


@dataclass
class ScriptedExecutor:
    """Executor stub: pops ok/fail flags, defaulting to ok; reuses the seed blob."""

    store: BlobStore
    outcomes: list[bool] = field(default_factory=list)
    executed: list[str] = field(default_factory=list)

    def __call__(self, code) -> RenderResult:
        ok = self.outcomes.pop(0) if self.outcomes else True
        self.executed.append(code.code_id)
        if not ok:
            return RenderResult(status=ExecStatus.EXEC_ERROR, log="scripted failure")
        image = self.store.root / "seed.png"
        if not image.exists():
            write_png(image)
        blob = self.store.put_file(image)
        return RenderResult(
            status=ExecStatus.OK,
            log="",
            image_blob=blob,
            image_ref=self.store.path_for(blob),
        )


def scripted_refiner(version, aspect_label, score, feedback) -> str:
    """Code refiner stub: appends a comment so each revision is distinct."""
    return version.code.source + f"# refined for {aspect_label} at {score:g}\n"
