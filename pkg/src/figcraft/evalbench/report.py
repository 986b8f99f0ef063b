"""Reshape benchmark reports into grids, CSV, and figures.

The report path always renders one matplotlib figure per metric next to
the delimited output, grouped bars by diagram type with one bar per
strategy.
"""

from __future__ import annotations

import csv
import io
from pathlib import Path

METRIC_LABELS = {
    "rouge1": "ROUGE-1",
    "semantic_sim": "Semantic similarity",
    "image_text_align": "Image-text alignment",
}

_STRATEGY_ORDER = ("fs", "sr", "summaf", "seqmaf")


def _sorted_rows(report: dict) -> list[dict]:
    rows = list(report["categories"])

    def order(row: dict) -> tuple[int, str]:
        try:
            return (_STRATEGY_ORDER.index(row["strategy"]), row["diagram_type"])
        except ValueError:
            return (len(_STRATEGY_ORDER), row["diagram_type"])

    rows.sort(key=order)
    return rows


def _fmt(value: float | None) -> str:
    return f"{value:.3f}" if value is not None else "-"


def to_table(report: dict) -> str:
    """Text grid: one row per strategy, metric columns grouped by type."""
    rows = _sorted_rows(report)
    types = sorted({row["diagram_type"] for row in rows})
    strategies = []
    for row in rows:
        if row["strategy"] not in strategies:
            strategies.append(row["strategy"])

    header = ["strategy"]
    for diagram_type in types:
        for metric in METRIC_LABELS:
            header.append(f"{diagram_type}:{metric}")
    lines = ["\t".join(header)]
    for strategy in strategies:
        cells = [strategy]
        for diagram_type in types:
            row = next(
                (
                    r
                    for r in rows
                    if r["strategy"] == strategy and r["diagram_type"] == diagram_type
                ),
                None,
            )
            for metric in METRIC_LABELS:
                cells.append(_fmt(row["means"].get(metric)) if row else "-")
        lines.append("\t".join(cells))
    return "\n".join(lines) + "\n"


def to_csv(report: dict) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(
        ["diagram_type", "strategy", "count"]
        + [f"{metric}_mean" for metric in METRIC_LABELS]
        + [f"{metric}_count" for metric in METRIC_LABELS]
    )
    for row in _sorted_rows(report):
        writer.writerow(
            [row["diagram_type"], row["strategy"], row["count"]]
            + [
                f"{row['means'][metric]:.6f}" if row["means"].get(metric) is not None else ""
                for metric in METRIC_LABELS
            ]
            + [row["counts"].get(metric, 0) for metric in METRIC_LABELS]
        )
    return buffer.getvalue()


def render_figures(report: dict, out_dir: str | Path) -> list[Path]:
    """One grouped-bar figure per metric that has any data."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = _sorted_rows(report)
    types = sorted({row["diagram_type"] for row in rows})
    strategies = []
    for row in rows:
        if row["strategy"] not in strategies:
            strategies.append(row["strategy"])

    written: list[Path] = []
    for metric, label in METRIC_LABELS.items():
        series: dict[str, list[float | None]] = {
            strategy: [
                next(
                    (
                        row["means"].get(metric)
                        for row in rows
                        if row["strategy"] == strategy
                        and row["diagram_type"] == diagram_type
                    ),
                    None,
                )
                for diagram_type in types
            ]
            for strategy in strategies
        }
        if not any(v is not None for values in series.values() for v in values):
            continue
        fig, ax = plt.subplots(figsize=(7, 4))
        width = 0.8 / max(len(strategies), 1)
        for pos, strategy in enumerate(strategies):
            xs = [i + pos * width for i in range(len(types))]
            ys = [v if v is not None else 0.0 for v in series[strategy]]
            ax.bar(xs, ys, width=width, label=strategy)
        ax.set_xticks([i + 0.4 - width / 2 for i in range(len(types))])
        ax.set_xticklabels(types)
        ax.set_ylabel(label)
        ax.set_ylim(0, 1)
        ax.set_title(f"{label} by diagram type")
        ax.legend()
        fig.tight_layout()
        path = out_dir / f"{metric}.png"
        fig.savefig(path, dpi=150)
        plt.close(fig)
        written.append(path)
    return written
