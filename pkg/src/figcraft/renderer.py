"""Stage two of the pipeline: intermediate code generation and execution.

Code generation produces a single Python program per the selected
dialect; execution happens out of process through the runner protocol,
and successful images land in the content-addressed artifact store. A
bounded repair loop re-prompts with the failing source and log when
execution fails, because a first-draft program is not guaranteed to run.
"""

from __future__ import annotations

import hashlib
import tempfile
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from enum import Enum
from pathlib import Path

from .artifacts import BlobRef, BlobStore
from .dialects import RenderDialect
from .errors import NoCodeBlock, RenderExhausted
from .gateway import Gateway
from .parsing import extract_code
from .planner import DiagramPlan, IntentRecord
from .prompts import CODE_GEN, REPAIR_CODE, STRICT_CODE_NOTE
from .sandbox import ExecRequest, ExecStatus, RunnerClient, SubprocessRunnerClient


class CodeOrigin(str, Enum):
    INITIAL = "initial"
    REPAIR = "repair"
    REFINEMENT = "refinement"
    HUMAN_EDIT = "human-edit"


@dataclass(frozen=True)
class ExecLimits:
    timeout_s: float = 60.0
    mem_mb: int = 1024


@dataclass(frozen=True)
class CodeArtifact:
    code_id: str
    dialect: RenderDialect
    source: str
    version: int = 1
    parent: str | None = None
    origin: CodeOrigin = CodeOrigin.INITIAL

    def __post_init__(self):
        if (self.version == 1) != (self.parent is None):
            raise ValueError("version 1 must be parentless; later versions need a parent")
        if self.code_id != source_digest(self.source):
            raise ValueError("code_id does not match source digest")

    def revise(self, source: str, origin: CodeOrigin) -> "CodeArtifact":
        return CodeArtifact(
            code_id=source_digest(source),
            dialect=self.dialect,
            source=source,
            version=self.version + 1,
            parent=self.code_id,
            origin=origin,
        )


def source_digest(source: str) -> str:
    return hashlib.sha256(source.encode("utf-8")).hexdigest()


def make_artifact(source: str, dialect: RenderDialect) -> CodeArtifact:
    return CodeArtifact(code_id=source_digest(source), dialect=dialect, source=source)


@dataclass(frozen=True)
class RenderResult:
    status: ExecStatus
    log: str
    image_blob: BlobRef | None = None
    image_ref: Path | None = None
    duration_ms: float = 0.0

    def __post_init__(self):
        ok = self.status is ExecStatus.OK
        if ok != (self.image_blob is not None):
            raise ValueError("status ok iff an image is present")

    @property
    def ok(self) -> bool:
        return self.status is ExecStatus.OK


@dataclass(frozen=True)
class DiagramVersion:
    code: CodeArtifact
    render: RenderResult
    created_at: datetime

    @property
    def image_path(self) -> Path:
        assert self.render.image_ref is not None, "version was not rendered ok"
        return self.render.image_ref


# --- operations -----------------------------------------------------------------


def generate_code(
    intent: IntentRecord,
    plan: DiagramPlan,
    dialect: RenderDialect,
    gateway: Gateway,
) -> CodeArtifact:
    """Generate the initial program for (intent, plan); one reprompt on no code."""
    if not plan.qa_pairs:
        raise ValueError("plan must be non-empty")
    for format_note in ("", STRICT_CODE_NOTE):
        response = gateway.ask(
            CODE_GEN,
            {
                "intent": intent.intent_text,
                "intent_type": f"Extrapolated-{intent.label.value}",
                "qa_pairs": plan.as_prompt_text(),
                "dialect_directive": dialect.generator_directive,
                "format_note": format_note,
            },
        )
        source = extract_code(response.text)
        if source is not None:
            return make_artifact(source, dialect)
    raise NoCodeBlock(f"no extractable code in model output: {response.text[:200]!r}")


def execute(
    code: CodeArtifact,
    limits: ExecLimits,
    store: BlobStore,
    runner: RunnerClient | None = None,
) -> RenderResult:
    """Run the program through the runner protocol; failures are statuses."""
    runner = runner or SubprocessRunnerClient()
    started = time.monotonic()
    with tempfile.TemporaryDirectory(prefix="figcraft-exec-") as out_dir:
        request = ExecRequest(
            toolchain_id=code.dialect.toolchain_id,
            source=code.source,
            timeout_s=limits.timeout_s,
            mem_mb=limits.mem_mb,
            out_dir=out_dir,
        )
        response = runner.run(request)
        duration_ms = (time.monotonic() - started) * 1000.0
        if response.status is not ExecStatus.OK:
            return RenderResult(
                status=response.status, log=response.log, duration_ms=duration_ms
            )
        image_path = Path(out_dir) / (response.image_filename or "")
        blob = store.put_file(image_path)
    return RenderResult(
        status=ExecStatus.OK,
        log=response.log,
        image_blob=blob,
        image_ref=store.path_for(blob),
        duration_ms=duration_ms,
    )


def render_with_repair(
    intent: IntentRecord,
    plan: DiagramPlan,
    dialect: RenderDialect,
    gateway: Gateway,
    store: BlobStore,
    limits: ExecLimits | None = None,
    max_repairs: int = 2,
    runner: RunnerClient | None = None,
) -> DiagramVersion:
    """Render the plan, re-prompting with the failure log up to max_repairs times."""
    if max_repairs < 0:
        raise ValueError("max_repairs must be >= 0")
    limits = limits or ExecLimits()
    code = generate_code(intent, plan, dialect, gateway)
    result = execute(code, limits, store, runner)
    attempts = 0
    while not result.ok and attempts < max_repairs:
        attempts += 1
        response = gateway.ask(
            REPAIR_CODE,
            {"intent": intent.intent_text, "code": code.source, "log": result.log},
        )
        source = extract_code(response.text)
        if source is None:
            raise NoCodeBlock("repair produced no extractable code")
        code = code.revise(source, CodeOrigin.REPAIR)
        result = execute(code, limits, store, runner)
    if not result.ok:
        raise RenderExhausted(result)
    return DiagramVersion(code=code, render=result, created_at=datetime.now(timezone.utc))


def lineage_depth(version: DiagramVersion) -> int:
    """Steps from this version back to the root along parent links."""
    return version.code.version - 1


def rerender(
    version: DiagramVersion,
    source: str,
    origin: CodeOrigin,
    store: BlobStore,
    limits: ExecLimits | None = None,
    runner: RunnerClient | None = None,
) -> DiagramVersion:
    """Execute revised source as the next version in the lineage chain."""
    code = version.code.revise(source, origin)
    result = execute(code, limits or ExecLimits(), store, runner)
    return DiagramVersion(code=code, render=result, created_at=datetime.now(timezone.utc))


# --- version persistence (used by the CLI to hand versions between commands) ------


def save_version(version: DiagramVersion, store: BlobStore) -> Path:
    import json

    from .dialects import DIALECTS  # noqa: F401  (id validated on load)

    code_blob = store.put_text(version.code.source, suffix=".py")
    record = {
        "version": version.code.version,
        "code_id": version.code.code_id,
        "parent": version.code.parent,
        "origin": version.code.origin.value,
        "dialect_id": version.code.dialect.dialect_id,
        "status": version.render.status.value,
        "code_blob": code_blob.relpath,
        "image_blob": version.render.image_blob.relpath
        if version.render.image_blob
        else None,
    }
    path = store.root / "versions" / f"{version.code.code_id}.json"
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_version(code_id: str, store: BlobStore) -> DiagramVersion:
    import json

    from .artifacts import BlobRef
    from .dialects import DIALECTS
    from .sandbox import ExecStatus as _Status

    path = store.root / "versions" / f"{code_id}.json"
    record = json.loads(path.read_text(encoding="utf-8"))
    source = store.read_bytes(record["code_blob"]).decode("utf-8")
    code = CodeArtifact(
        code_id=record["code_id"],
        dialect=DIALECTS[record["dialect_id"]],
        source=source,
        version=record["version"],
        parent=record.get("parent"),
        origin=CodeOrigin(record["origin"]),
    )
    blob = None
    image_ref = None
    if record.get("image_blob"):
        blob = BlobRef(digest=Path(record["image_blob"]).stem, relpath=record["image_blob"])
        image_ref = store.path_for(blob)
    result = RenderResult(
        status=_Status(record["status"]),
        log="",
        image_blob=blob,
        image_ref=image_ref,
    )
    return DiagramVersion(code=code, render=result, created_at=datetime.now(timezone.utc))
