"""Top-level command line: ingest, plan, render, critique, refine, bench,
serve, and session management."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__
from .artifacts import BlobStore
from .config import gateway_from_env, runner_from_env, store_dir
from .corpus import (
    DiagramType,
    load_bench_manifest,
    load_document_bundle,
    manifest_to_dict,
)
from .critics import CRITIC_ASPECTS, Aspect, CriticSuite
from .dialects import DIALECTS, select_dialect
from .errors import FigcraftError
from .evalbench.bench import load_report_dict, run_benchmark, save_report
from .evalbench.report import render_figures, to_csv, to_table
from .evalbench import extend_manifest
from .pipeline import PipelineConfig, default_refinement_config
from .planner import IntentRecord, classify_intent, load_plan, save_plan
from .refiner import (
    RefinementContext,
    RefinementStrategy,
    refine as run_refinement,
    save_trace,
)
from .renderer import (
    ExecLimits,
    load_version,
    render_with_repair,
    save_version,
)


@click.group()
@click.version_option(__version__)
def main() -> None:
    """Generate and refine paper-grounded diagrams."""


def _fail(exc: Exception) -> None:
    click.echo(f"error: {exc}", err=True)
    sys.exit(1)


# --- ingest ---------------------------------------------------------------------


@main.group()
def ingest() -> None:
    """Load and validate bundles and benchmark manifests."""


@ingest.command("validate")
@click.argument("path", type=click.Path(exists=True, path_type=Path))
def ingest_validate(path: Path) -> None:
    """Validate a bundle or manifest file; nonzero exit on first violation."""
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        _fail(exc)
    try:
        if isinstance(raw, dict) and "items" in raw:
            manifest = load_bench_manifest(path)
            tallies = {t.value: n for t, n in manifest.tallies.items()}
            click.echo(
                f"ok: manifest {manifest.subset_name.value}, total {manifest.total}, "
                f"tallies {json.dumps(tallies, sort_keys=True)}"
            )
        else:
            bundle = load_document_bundle(path)
            click.echo(
                f"ok: bundle {bundle.paper_id}: {len(bundle.sections)} sections, "
                f"{len(bundle.figures)} figures, {len(bundle.tables)} tables"
            )
    except FigcraftError as exc:
        _fail(exc)


# --- plan ------------------------------------------------------------------------


@main.command("plan")
@click.option("--bundle", "bundle_paths", multiple=True, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--intent", "intent_text", required=True)
@click.option("--k", default=4, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("plan.json"), show_default=True)
@click.option("--mode", default=None, help="gateway mode override (live|record|replay)")
def plan_cmd(bundle_paths: tuple[Path, ...], intent_text: str, k: int, out: Path, mode: str | None) -> None:
    """Build a diagram plan for the intent over one or more bundles."""
    from .pipeline import build_plan

    gateway = gateway_from_env(mode)
    bundles = [load_document_bundle(p) for p in bundle_paths]
    try:
        plan = build_plan(bundles, intent_text, gateway, PipelineConfig(retrieval_k=k))
    except FigcraftError as exc:
        _fail(exc)
    save_plan(plan, out)
    click.echo(f"plan with {len(plan.qa_pairs)} QA pairs -> {out}")


# --- render ------------------------------------------------------------------------


@main.command("render")
@click.option("--plan", "plan_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--dialect", default="auto", show_default=True)
@click.option("--out-dir", type=click.Path(path_type=Path), default=None, help="artifact store root")
@click.option("--max-repairs", default=2, show_default=True)
@click.option("--timeout", default=60.0, show_default=True)
@click.option("--mode", default=None)
def render_cmd(plan_path: Path, dialect: str, out_dir: Path | None, max_repairs: int, timeout: float, mode: str | None) -> None:
    """Generate intermediate code for a plan and execute it."""
    gateway = gateway_from_env(mode)
    store = BlobStore(out_dir or store_dir())
    plan = load_plan(plan_path)
    chosen = select_dialect(plan.intent.label) if dialect == "auto" else DIALECTS[dialect]
    try:
        version = render_with_repair(
            plan.intent,
            plan,
            chosen,
            gateway,
            store,
            limits=ExecLimits(timeout_s=timeout),
            max_repairs=max_repairs,
            runner=runner_from_env(),
        )
    except FigcraftError as exc:
        _fail(exc)
    record = save_version(version, store)
    click.echo(f"rendered version {version.code.version} ({version.code.code_id[:12]})")
    click.echo(f"image: {version.image_path}")
    click.echo(f"record: {record}")


# --- critique ------------------------------------------------------------------------


def _intent_from_options(intent_text: str, label: str | None, gateway) -> IntentRecord:
    if label:
        return IntentRecord(intent_text=intent_text, label=DiagramType(label))
    return classify_intent(intent_text, gateway)


@main.command("critique")
@click.option("--version", "code_id", required=True, help="code_id of a stored version")
@click.option("--aspect", default="all", show_default=True, type=click.Choice(["all", "completeness", "faithfulness", "layout"]))
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--bundle", "bundle_paths", multiple=True, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--intent", "intent_text", required=True)
@click.option("--label", default=None, type=click.Choice([t.value for t in DiagramType]))
@click.option("--mode", default=None)
def critique_cmd(code_id: str, aspect: str, store_path: Path | None, bundle_paths: tuple[Path, ...], intent_text: str, label: str | None, mode: str | None) -> None:
    """Run critics over a stored version, emitting CritiqueReport JSON."""
    gateway = gateway_from_env(mode)
    store = BlobStore(store_path or store_dir())
    bundles = tuple(load_document_bundle(p) for p in bundle_paths)
    try:
        version = load_version(code_id, store)
        intent = _intent_from_options(intent_text, label, gateway)
        suite = CriticSuite(gateway=gateway, intent=intent, bundles=bundles)
        aspects = CRITIC_ASPECTS if aspect == "all" else (Aspect(aspect.capitalize()),)
        reports = [suite.evaluate(a, version) for a in aspects]
    except FigcraftError as exc:
        _fail(exc)
    click.echo(
        json.dumps(
            [
                {
                    "aspect": r.aspect.value,
                    "score": r.score,
                    "feedback": r.feedback,
                    "sub_scores": [[q, s] for q, s in r.sub_scores],
                    "satisfied": r.satisfied,
                }
                for r in reports
            ],
            indent=2,
            sort_keys=True,
        )
    )


# --- refine ------------------------------------------------------------------------


@main.command("refine")
@click.option("--version", "code_id", required=True)
@click.option("--strategy", default="seqmaf", show_default=True, type=click.Choice(["seqmaf", "summaf", "selfrefine"]))
@click.option("--max-iter", default=3, show_default=True)
@click.option("--threshold", default=4.5, show_default=True)
@click.option("--trace-out", type=click.Path(path_type=Path), default=Path("trace.json"), show_default=True)
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--bundle", "bundle_paths", multiple=True, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--plan", "plan_path", type=click.Path(exists=True, path_type=Path), default=None)
@click.option("--intent", "intent_text", required=True)
@click.option("--label", default=None, type=click.Choice([t.value for t in DiagramType]))
@click.option("--mode", default=None)
def refine_cmd(code_id: str, strategy: str, max_iter: int, threshold: float, trace_out: Path, store_path: Path | None, bundle_paths: tuple[Path, ...], plan_path: Path | None, intent_text: str, label: str | None, mode: str | None) -> None:
    """Refine a stored version under one of the three strategies."""
    gateway = gateway_from_env(mode)
    store = BlobStore(store_path or store_dir())
    bundles = tuple(load_document_bundle(p) for p in bundle_paths)
    try:
        version = load_version(code_id, store)
        intent = _intent_from_options(intent_text, label, gateway)
        ctx = RefinementContext(
            intent=intent,
            bundles=bundles,
            plan=load_plan(plan_path) if plan_path else None,
            store=store,
            runner=runner_from_env(),
        )
        cfg = default_refinement_config(threshold=threshold, max_iterations=max_iter)
        final, trace = run_refinement(
            RefinementStrategy(strategy), version, ctx, cfg, gateway
        )
    except FigcraftError as exc:
        _fail(exc)
    save_trace(trace, trace_out)
    save_version(final, store)
    click.echo(
        f"final version {final.code.version} ({final.code.code_id[:12]}); trace -> {trace_out}"
    )


# --- bench ------------------------------------------------------------------------


@main.group()
def bench() -> None:
    """Benchmark running, reporting, and dataset extension."""


@bench.command("run")
@click.option("--manifest", "manifest_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--bundles", "bundles_dir", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--strategies", default="fs", show_default=True, help="comma-separated: fs,sr,summaf,seqmaf")
@click.option("--mode", default=None)
@click.option("--report", "report_path", type=click.Path(path_type=Path), default=Path("report.json"), show_default=True)
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--workers", default=1, show_default=True)
def bench_run(manifest_path: Path, bundles_dir: Path, strategies: str, mode: str | None, report_path: Path, store_path: Path | None, workers: int) -> None:
    """Run the benchmark over a manifest."""
    gateway = gateway_from_env(mode)
    store = BlobStore(store_path or store_dir())
    bundles = {}
    for bundle_file in sorted(Path(bundles_dir).glob("*.json")):
        bundle = load_document_bundle(bundle_file)
        bundles[bundle.paper_id] = bundle
    manifest = load_bench_manifest(manifest_path, known_paper_ids=bundles.keys())
    try:
        report = run_benchmark(
            manifest,
            bundles,
            gateway,
            store,
            strategies=tuple(s.strip() for s in strategies.split(",") if s.strip()),
            workers=workers,
        )
    except FigcraftError as exc:
        _fail(exc)
    save_report(report, report_path)
    errored = sum(1 for i in report.items if i.error)
    click.echo(f"{len(report.items)} item-runs ({errored} errored) -> {report_path}")


@bench.command("report")
@click.option("--report", "report_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--format", "fmt", default="table", show_default=True, type=click.Choice(["table", "csv"]))
@click.option("--out-dir", type=click.Path(path_type=Path), default=None, help="write figures and the delimited file here")
def bench_report(report_path: Path, fmt: str, out_dir: Path | None) -> None:
    """Reshape a report into a grid/CSV plus rendered figures."""
    report = load_report_dict(report_path)
    rendered = to_table(report) if fmt == "table" else to_csv(report)
    click.echo(rendered, nl=False)
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        suffix = "tsv" if fmt == "table" else "csv"
        delimited = out_dir / f"report.{suffix}"
        delimited.write_text(rendered, encoding="utf-8")
        figures = render_figures(report, out_dir)
        click.echo(f"wrote {delimited}", err=True)
        for figure in figures:
            click.echo(f"wrote {figure}", err=True)


@bench.command("extend")
@click.option("--bundle", "bundle_path", required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--count", default=1, show_default=True)
@click.option("--out", type=click.Path(path_type=Path), default=Path("extended_manifest.json"), show_default=True)
@click.option("--mode", default=None)
def bench_extend(bundle_path: Path, count: int, out: Path, mode: str | None) -> None:
    """Generate new diagram intents for a paper (dataset extension utility)."""
    gateway = gateway_from_env(mode)
    bundle = load_document_bundle(bundle_path)
    try:
        manifest = extend_manifest(bundle, gateway, count=count)
    except FigcraftError as exc:
        _fail(exc)
    out.write_text(
        json.dumps(manifest_to_dict(manifest), indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )
    click.echo(f"{manifest.total} generated intents -> {out}")


# --- serve / session ---------------------------------------------------------------


def _service(store_path: Path | None, mode: str | None):
    from .service import SessionService, SessionStore

    return SessionService(
        store=SessionStore(store_path or store_dir()),
        gateway=gateway_from_env(mode),
        runner=runner_from_env(),
    )


@main.command("serve")
@click.option("--port", default=8040, show_default=True)
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--static", "static_dir", type=click.Path(path_type=Path), default=None, help="directory of built studio assets")
@click.option("--mode", default=None)
def serve_cmd(port: int, store_path: Path | None, static_dir: Path | None, mode: str | None) -> None:
    """Serve the session HTTP API (and optionally the studio frontend)."""
    from .service.app import serve

    serve(_service(store_path, mode), port=port, static_dir=str(static_dir) if static_dir else None)


@main.group()
def session() -> None:
    """Create, advance, and export interactive sessions."""


@session.command("new")
@click.option("--bundle", "bundle_paths", multiple=True, required=True, type=click.Path(exists=True, path_type=Path))
@click.option("--intent", "intent_text", default="")
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--mode", default=None)
def session_new(bundle_paths: tuple[Path, ...], intent_text: str, store_path: Path | None, mode: str | None) -> None:
    service = _service(store_path, mode)
    created = service.create_session([str(p) for p in bundle_paths], intent_text)
    click.echo(created.session_id)


@session.command("advance")
@click.option("--id", "session_id", required=True)
@click.option("--action", required=True, type=click.Choice(["intent", "plan", "render", "critique", "feedback"]))
@click.option("--payload", default="{}", help="JSON payload for the action")
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
@click.option("--mode", default=None)
def session_advance(session_id: str, action: str, payload: str, store_path: Path | None, mode: str | None) -> None:
    service = _service(store_path, mode)
    body = json.loads(payload)
    try:
        if action == "intent":
            updated = service.submit_intent(session_id, body["intent_text"])
        elif action == "plan":
            updated = service.put_plan(session_id, body.get("qa_pairs"))
        elif action == "render":
            updated = service.render(session_id, body.get("source"))
        elif action == "critique":
            updated = service.critique(session_id, body.get("aspect", "all"))
        else:
            updated = service.feedback(
                session_id,
                body.get("ratings", {}),
                body.get("text", ""),
                action="regenerate" if body.get("regenerate") else "save",
            )
    except FigcraftError as exc:
        _fail(exc)
    click.echo(f"{updated.session_id}: state={updated.state.value} ordinal={updated.last_ordinal}")


@session.command("export")
@click.option("--id", "session_id", required=True)
@click.option("--out", type=click.Path(path_type=Path), required=True)
@click.option("--store", "store_path", type=click.Path(path_type=Path), default=None)
def session_export(session_id: str, out: Path, store_path: Path | None) -> None:
    service = _service(store_path, None)
    try:
        data = service.export_session(session_id)
    except FigcraftError as exc:
        _fail(exc)
    out.write_bytes(data)
    click.echo(f"exported {len(data)} bytes -> {out}")


if __name__ == "__main__":
    main()
