"""Render dialects: the toolchain family code generation targets.

Each intent label maps to exactly one dialect; the mapping is total and
deterministic. The directive text is spliced into the code-generation
prompt to steer the model toward the dialect's library family.
"""

from __future__ import annotations

from dataclasses import dataclass

from .corpus import DiagramType


@dataclass(frozen=True)
class RenderDialect:
    dialect_id: str
    generator_directive: str
    toolchain_id: str


FLOWCHART_DAG = RenderDialect(
    dialect_id="flowchart-dag",
    generator_directive=(
        "If the intent is about creating a flowchart, it has to be in graphviz; "
        "when graphviz is unavailable, draw the directed graph with networkx on "
        "a matplotlib figure."
    ),
    toolchain_id="py-flowchart",
)

STAT_PLOT = RenderDialect(
    dialect_id="stat-plot",
    generator_directive=(
        "If the intent is about creating plots/line charts/graphs, it has to be "
        "clear and legible, ideally in plotnine; matplotlib is an acceptable "
        "fallback."
    ),
    toolchain_id="py-plot",
)

IMAGE_ANNOTATE = RenderDialect(
    dialect_id="image-annotate",
    generator_directive=(
        "If the intent is to create or highlight a portion of an image, you "
        "should use the pillow library to include bounding box or textual "
        "explanation."
    ),
    toolchain_id="py-image",
)

TABLE_LAYOUT = RenderDialect(
    dialect_id="table-layout",
    generator_directive=(
        "If you want to create a summary, it should be in a good layout with "
        "proper table header and fonts."
    ),
    toolchain_id="py-table",
)

_DIALECT_BY_LABEL: dict[DiagramType, RenderDialect] = {
    DiagramType.FLOWCHART: FLOWCHART_DAG,
    DiagramType.RESULTS: STAT_PLOT,
    DiagramType.ARCHITECTURE: IMAGE_ANNOTATE,
    DiagramType.SUMMARY: TABLE_LAYOUT,
}

DIALECTS: dict[str, RenderDialect] = {
    d.dialect_id: d for d in _DIALECT_BY_LABEL.values()
}


def select_dialect(label: DiagramType) -> RenderDialect:
    """Total mapping from intent label to render dialect."""
    return _DIALECT_BY_LABEL[label]
