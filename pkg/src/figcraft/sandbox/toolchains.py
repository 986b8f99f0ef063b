"""Registered execution toolchains.

All four dialects execute Python; the ids exist so runners can refuse
payloads for toolchains they do not know and so a future runner can
vary interpreter settings per dialect.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Toolchain:
    toolchain_id: str
    description: str


TOOLCHAINS: dict[str, Toolchain] = {
    tc.toolchain_id: tc
    for tc in (
        Toolchain("py-flowchart", "python renderer for directed-graph flowcharts"),
        Toolchain("py-plot", "python renderer for statistical plots"),
        Toolchain("py-image", "python renderer for annotated images"),
        Toolchain("py-table", "python renderer for laid-out summary tables"),
    )
}


def toolchain_for(toolchain_id: str) -> Toolchain | None:
    return TOOLCHAINS.get(toolchain_id)
