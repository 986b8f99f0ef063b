"""Canonical in-memory model for pre-parsed papers and benchmark manifests.

Ingestion consumes the output of external PDF parsers serialized as JSON;
this module only validates and loads. Loaders are pure: loading the same
file twice produces equal, immutable values.
"""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

from .errors import DanglingPaperRef, MalformedBundle, MalformedManifest, MissingAsset

RASTER_VECTOR_EXTENSIONS = (".png", ".jpg", ".jpeg", ".gif", ".bmp", ".svg", ".pdf")


class DiagramType(str, Enum):
    """The four diagram categories the pipeline targets."""

    FLOWCHART = "Flowchart"
    RESULTS = "Results"
    ARCHITECTURE = "Architecture"
    SUMMARY = "Summary"


class FigureKind(str, Enum):
    FIGURE = "figure"
    PLOT = "plot"
    TABLE_IMAGE = "table-image"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class Section:
    """One section of body text: a heading plus its ordered paragraphs."""

    heading: str
    paragraphs: tuple[str, ...]
    section_index: int
    structural_only: bool = False

    def __post_init__(self):
        if not self.paragraphs and not self.structural_only:
            raise MalformedBundle(
                "sections.paragraphs",
                f"section {self.section_index} ({self.heading!r}) has no paragraphs "
                "and is not flagged structural-only",
            )


@dataclass(frozen=True)
class FigureAsset:
    """A figure, plot, or table image extracted from the source paper."""

    figure_id: str
    caption: str
    image_ref: Path
    kind: FigureKind = FigureKind.FIGURE

    def __post_init__(self):
        if not self.caption and self.kind is not FigureKind.UNKNOWN:
            raise MalformedBundle(
                "figures.caption",
                f"figure {self.figure_id!r} has an empty caption but kind={self.kind.value}",
            )
        if self.image_ref.suffix.lower() not in RASTER_VECTOR_EXTENSIONS:
            raise MalformedBundle(
                "figures.image_ref",
                f"figure {self.figure_id!r} has unsupported extension {self.image_ref.suffix!r}",
            )


@dataclass(frozen=True)
class TableAsset:
    """A table: either a row-major cell grid or a markdown rendering."""

    table_id: str
    caption: str
    grid: tuple[tuple[str, ...], ...] | None = None
    markdown: str | None = None
    source_figure_id: str | None = None

    def __post_init__(self):
        if self.grid is None and self.markdown is None:
            raise MalformedBundle(
                "tables", f"table {self.table_id!r} carries neither grid nor markdown"
            )
        if self.grid is not None:
            arities = {len(row) for row in self.grid}
            if len(arities) > 1:
                raise MalformedBundle(
                    "tables.grid",
                    f"table {self.table_id!r} rows have mixed arity {sorted(arities)}",
                )

    def as_text(self) -> str:
        """Flat text form used for retrieval and prompting."""
        if self.markdown is not None:
            return self.markdown
        assert self.grid is not None
        return "\n".join(" | ".join(row) for row in self.grid)


@dataclass(frozen=True)
class DocumentBundle:
    """A fully parsed paper: body text, figures, and tables."""

    paper_id: str
    title: str
    sections: tuple[Section, ...]
    figures: tuple[FigureAsset, ...] = ()
    tables: tuple[TableAsset, ...] = ()

    def __post_init__(self):
        if not self.paper_id:
            raise MalformedBundle("paper_id", "paper_id must be non-empty")
        indices = [s.section_index for s in self.sections]
        if indices != sorted(set(indices)):
            raise MalformedBundle(
                "sections.section_index", "section indices must be unique and ordered"
            )

    def figure(self, figure_id: str) -> FigureAsset:
        for fig in self.figures:
            if fig.figure_id == figure_id:
                return fig
        raise KeyError(figure_id)


@dataclass(frozen=True)
class BenchItem:
    """One benchmark row: source paper(s), the diagram intent, optional gold image."""

    paper_ids: tuple[str, ...]
    intent_text: str
    diagram_type: DiagramType
    gold_image_ref: Path | None = None

    def __post_init__(self):
        if not self.paper_ids:
            raise MalformedManifest("bench item has empty paper_ids")
        if not self.intent_text.strip():
            raise MalformedManifest("bench item has empty intent_text")


class BenchSubset(str, Enum):
    GOLD = "Gold"
    EXTENDED = "Extended"
    MULTI_DOC_GOLD = "MultiDocGold"


GOLD_SUBSETS = (BenchSubset.GOLD, BenchSubset.MULTI_DOC_GOLD)


@dataclass(frozen=True)
class BenchManifest:
    """A benchmark subset plus per-diagram-type tallies."""

    subset_name: BenchSubset
    items: tuple[BenchItem, ...]
    tallies: Mapping[DiagramType, int] = field(default_factory=dict)

    def __post_init__(self):
        counted = Counter(item.diagram_type for item in self.items)
        expected = {t: counted.get(t, 0) for t in DiagramType}
        if not self.tallies:
            object.__setattr__(self, "tallies", expected)
        elif dict(self.tallies) != expected:
            raise MalformedManifest(
                f"declared tallies {dict(self.tallies)} disagree with items {expected}"
            )

    @property
    def total(self) -> int:
        return len(self.items)


# --- loading ----------------------------------------------------------------


def _require(mapping: Mapping[str, Any], key: str, where: str) -> Any:
    if key not in mapping:
        raise MalformedBundle(f"{where}.{key}" if where else key, "missing required field")
    return mapping[key]


def _as_str(value: Any, where: str) -> str:
    if not isinstance(value, str):
        raise MalformedBundle(where, f"expected string, got {type(value).__name__}")
    return value


def load_document_bundle(path: str | Path) -> DocumentBundle:
    """Load and validate one paper bundle from its JSON file.

    Image paths inside the bundle are resolved relative to the bundle
    file's directory and must exist; a missing file raises MissingAsset
    naming the figure.
    """
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedBundle("<document>", f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise MalformedBundle("<document>", "bundle root must be a JSON object")

    base = path.parent
    sections = []
    for idx, sec in enumerate(_require(raw, "sections", "")):
        heading = _as_str(_require(sec, "heading", "sections"), "sections.heading")
        paragraphs = tuple(
            _as_str(p, "sections.paragraphs") for p in _require(sec, "paragraphs", "sections")
        )
        sections.append(
            Section(
                heading=heading,
                paragraphs=paragraphs,
                section_index=int(sec.get("section_index", idx)),
                structural_only=bool(sec.get("structural_only", False)),
            )
        )

    figures = []
    for fig in raw.get("figures", []):
        figure_id = _as_str(_require(fig, "figure_id", "figures"), "figures.figure_id")
        kind_raw = fig.get("kind", "figure")
        try:
            kind = FigureKind(kind_raw)
        except ValueError:
            raise MalformedBundle("figures.kind", f"unknown kind {kind_raw!r}")
        caption = _as_str(fig.get("caption", ""), "figures.caption")
        # Real parses are noisy: captionless figures are admitted, demoted to unknown.
        if not caption:
            kind = FigureKind.UNKNOWN
        image_ref = base / _as_str(_require(fig, "image_ref", "figures"), "figures.image_ref")
        asset = FigureAsset(figure_id=figure_id, caption=caption, image_ref=image_ref, kind=kind)
        if not image_ref.is_file():
            raise MissingAsset(figure_id, str(image_ref))
        figures.append(asset)

    tables = []
    for tab in raw.get("tables", []):
        table_id = _as_str(_require(tab, "table_id", "tables"), "tables.table_id")
        grid = tab.get("grid")
        tables.append(
            TableAsset(
                table_id=table_id,
                caption=_as_str(tab.get("caption", ""), "tables.caption"),
                grid=tuple(tuple(str(c) for c in row) for row in grid) if grid else None,
                markdown=tab.get("markdown"),
            )
        )

    return DocumentBundle(
        paper_id=_as_str(_require(raw, "paper_id", ""), "paper_id"),
        title=_as_str(raw.get("title", ""), "title"),
        sections=tuple(sections),
        figures=tuple(figures),
        tables=tuple(tables),
    )


def bundle_to_dict(bundle: DocumentBundle, base: Path | None = None) -> dict:
    """Serialize a bundle to its on-disk JSON shape (image paths relative to base)."""
    def rel(p: Path) -> str:
        return str(p.relative_to(base)) if base else str(p)

    return {
        "paper_id": bundle.paper_id,
        "title": bundle.title,
        "sections": [
            {
                "heading": s.heading,
                "paragraphs": list(s.paragraphs),
                "section_index": s.section_index,
                **({"structural_only": True} if s.structural_only else {}),
            }
            for s in bundle.sections
        ],
        "figures": [
            {
                "figure_id": f.figure_id,
                "caption": f.caption,
                "image_ref": rel(f.image_ref),
                "kind": f.kind.value,
            }
            for f in bundle.figures
        ],
        "tables": [
            {
                "table_id": t.table_id,
                "caption": t.caption,
                **({"grid": [list(r) for r in t.grid]} if t.grid else {}),
                **({"markdown": t.markdown} if t.markdown is not None else {}),
            }
            for t in bundle.tables
        ],
    }


def load_bench_manifest(
    path: str | Path, known_paper_ids: Iterable[str] | None = None
) -> BenchManifest:
    """Load a benchmark manifest; optionally verify every paper_id resolves."""
    path = Path(path)
    try:
        raw = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise MalformedManifest(f"invalid JSON: {exc}") from exc
    if not isinstance(raw, dict) or "items" not in raw:
        raise MalformedManifest("manifest must be an object with an 'items' array")

    try:
        subset = BenchSubset(raw.get("subset_name", "Extended"))
    except ValueError:
        raise MalformedManifest(f"unknown subset_name {raw.get('subset_name')!r}")

    base = path.parent
    items = []
    for record in raw["items"]:
        paper_ids = record.get("paper_ids") or (
            [record["paper_id"]] if "paper_id" in record else []
        )
        try:
            diagram_type = DiagramType(record.get("diagram_type", ""))
        except ValueError:
            raise MalformedManifest(f"unknown diagram_type {record.get('diagram_type')!r}")
        gold = record.get("gold_image_ref")
        item = BenchItem(
            paper_ids=tuple(str(p) for p in paper_ids),
            intent_text=str(record.get("intent_text", "")),
            diagram_type=diagram_type,
            gold_image_ref=(base / gold) if gold else None,
        )
        if subset in GOLD_SUBSETS and item.gold_image_ref is None:
            raise MalformedManifest(
                f"{subset.value} subset item {item.intent_text[:40]!r} lacks gold_image_ref"
            )
        if subset is BenchSubset.EXTENDED and item.gold_image_ref is not None:
            raise MalformedManifest("Extended subset items must not carry gold_image_ref")
        items.append(item)

    if known_paper_ids is not None:
        known = set(known_paper_ids)
        for item in items:
            for pid in item.paper_ids:
                if pid not in known:
                    raise DanglingPaperRef(pid)

    return BenchManifest(subset_name=subset, items=tuple(items))


def manifest_to_dict(manifest: BenchManifest, base: Path | None = None) -> dict:
    def rel(p: Path | None) -> str | None:
        if p is None:
            return None
        return str(p.relative_to(base)) if base else str(p)

    return {
        "subset_name": manifest.subset_name.value,
        "items": [
            {
                "paper_ids": list(item.paper_ids),
                "intent_text": item.intent_text,
                "diagram_type": item.diagram_type.value,
                **(
                    {"gold_image_ref": rel(item.gold_image_ref)}
                    if item.gold_image_ref is not None
                    else {}
                ),
            }
            for item in manifest.items
        ],
    }


def paragraphs_of(bundles: Sequence[DocumentBundle]):
    """Yield (bundle_order, paper_id, section_index, paragraph_index, text) in source order."""
    for order, bundle in enumerate(bundles):
        for section in bundle.sections:
            for par_idx, text in enumerate(section.paragraphs):
                yield order, bundle.paper_id, section.section_index, par_idx, text
