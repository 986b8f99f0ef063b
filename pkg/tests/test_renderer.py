"""Renderer: dialect mapping, code generation, execution, repair loop."""

from __future__ import annotations

import pytest

from figcraft.corpus import DiagramType
from figcraft.dialects import DIALECTS, select_dialect
from figcraft.errors import NoCodeBlock, RenderExhausted
from figcraft.planner import DiagramPlan, QAPair
from figcraft.renderer import (
    CodeOrigin,
    ExecLimits,
    execute,
    generate_code,
    load_version,
    make_artifact,
    render_with_repair,
    save_version,
)
from figcraft.sandbox import ExecStatus

from conftest import scripted_gateway

OK_SOURCE = (
    "import matplotlib.pyplot as plt\n"
    "fig, ax = plt.subplots()\n"
    "ax.bar(['a', 'b'], [1, 2])\n"
    "fig.savefig('diagram.png', dpi=100)\n"
)


def _plan(intent):
    return DiagramPlan(
        intent=intent,
        qa_pairs=(QAPair(question_id=1, question="stages?", answer="parse, rank, render"),),
    )


def test_select_dialect_total_mapping():
    assert select_dialect(DiagramType.FLOWCHART).dialect_id == "flowchart-dag"
    assert select_dialect(DiagramType.RESULTS).dialect_id == "stat-plot"
    assert select_dialect(DiagramType.ARCHITECTURE).dialect_id == "image-annotate"
    assert select_dialect(DiagramType.SUMMARY).dialect_id == "table-layout"


def test_dialect_directives_name_their_toolkits():
    assert "graphviz" in DIALECTS["flowchart-dag"].generator_directive
    assert "plotnine" in DIALECTS["stat-plot"].generator_directive
    assert "pillow" in DIALECTS["image-annotate"].generator_directive
    assert "table header" in DIALECTS["table-layout"].generator_directive


def test_generate_code_strips_fences_byte_exact(intent_flowchart):
    inner = "import x\n\nvalue = 1  # keep   spacing\n"
    gateway = scripted_gateway(queue=[f"prose before\n```python\n{inner}```\nafter"])
    artifact = generate_code(
        intent_flowchart, _plan(intent_flowchart), select_dialect(intent_flowchart.label), gateway
    )
    assert artifact.source == inner
    assert artifact.version == 1
    assert artifact.origin is CodeOrigin.INITIAL
    assert artifact.parent is None


def test_generate_code_prose_twice_raises(intent_flowchart):
    gateway = scripted_gateway(queue=["cannot help", "still prose only"])
    with pytest.raises(NoCodeBlock):
        generate_code(
            intent_flowchart,
            _plan(intent_flowchart),
            select_dialect(intent_flowchart.label),
            gateway,
        )


def test_execute_smoke_payload(store):
    artifact = make_artifact(OK_SOURCE, DIALECTS["stat-plot"])
    result = execute(artifact, ExecLimits(timeout_s=60), store)
    assert result.status is ExecStatus.OK
    assert result.image_ref is not None and result.image_ref.stat().st_size > 0


def test_execute_syntax_error_captures_interpreter_text(store):
    artifact = make_artifact("def broken(:\n", DIALECTS["stat-plot"])
    result = execute(artifact, ExecLimits(timeout_s=30), store)
    assert result.status is ExecStatus.EXEC_ERROR
    assert "SyntaxError" in result.log


def test_render_with_repair_scripted_fail_then_succeed(store, intent_flowchart):
    gateway = scripted_gateway(
        queue=[
            "```python\nraise RuntimeError('first draft broken')\n```",
            f"```python\n{OK_SOURCE}```",
        ]
    )
    version = render_with_repair(
        intent_flowchart,
        _plan(intent_flowchart),
        DIALECTS["stat-plot"],
        gateway,
        store,
        limits=ExecLimits(timeout_s=60),
        max_repairs=2,
    )
    assert version.code.version == 2
    assert version.code.origin is CodeOrigin.REPAIR
    assert version.render.status is ExecStatus.OK
    # repair prompt carried the failing source and its log
    repair_prompt = gateway.provider.calls[1]
    assert "first draft broken" in repair_prompt


def test_render_exhausted_after_exactly_max_repairs_plus_one(store, intent_flowchart):
    bad = "```python\nraise RuntimeError('always broken')\n```"
    gateway = scripted_gateway(queue=[bad, bad, bad])
    executed = []
    import figcraft.renderer as renderer_mod

    original = renderer_mod.execute

    def counting_execute(code, limits, st, runner=None):
        executed.append(code.code_id)
        return original(code, limits, st, runner)

    renderer_mod_execute = renderer_mod.execute
    try:
        renderer_mod.execute = counting_execute
        with pytest.raises(RenderExhausted) as err:
            renderer_mod.render_with_repair(
                intent_flowchart,
                _plan(intent_flowchart),
                DIALECTS["stat-plot"],
                gateway,
                store,
                limits=ExecLimits(timeout_s=30),
                max_repairs=2,
            )
    finally:
        renderer_mod.execute = renderer_mod_execute
    assert len(executed) == 3  # initial + 2 repairs
    assert err.value.last_result.status is ExecStatus.EXEC_ERROR


def test_first_attempt_ok_means_zero_repairs(store, intent_flowchart):
    gateway = scripted_gateway(queue=[f"```python\n{OK_SOURCE}```"])
    version = render_with_repair(
        intent_flowchart,
        _plan(intent_flowchart),
        DIALECTS["stat-plot"],
        gateway,
        store,
    )
    assert version.code.version == 1
    assert len(gateway.provider.calls) == 1


def test_lineage_chain_reaches_root(ok_version):
    parent_map = {}
    current = ok_version.code
    for origin in (CodeOrigin.REPAIR, CodeOrigin.REFINEMENT, CodeOrigin.REFINEMENT):
        revised = current.revise(current.source + f"# {origin.value}\n", origin)
        parent_map[revised.code_id] = current
        current = revised
    assert current.version == 4
    steps = 0
    cursor = current
    while cursor.parent is not None:
        cursor = parent_map[cursor.code_id]
        steps += 1
    assert steps == current.version - 1
    assert cursor.code_id == ok_version.code.code_id


def test_execute_same_artifact_twice_same_status(store):
    artifact = make_artifact(OK_SOURCE, DIALECTS["stat-plot"])
    first = execute(artifact, ExecLimits(timeout_s=60), store)
    second = execute(artifact, ExecLimits(timeout_s=60), store)
    assert first.status == second.status == ExecStatus.OK
    # canonical re-encode makes the stored pixel content identical
    assert first.image_blob.digest == second.image_blob.digest


def test_version_record_roundtrip(store, ok_version):
    save_version(ok_version, store)
    loaded = load_version(ok_version.code.code_id, store)
    assert loaded.code == ok_version.code
    assert loaded.render.status is ExecStatus.OK
    assert loaded.render.image_blob.relpath == ok_version.render.image_blob.relpath
