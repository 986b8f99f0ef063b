"""Benchmark runner and caption-mediated automatic metrics."""

from .bench import MetricReport, extend_manifest, run_benchmark
from .captioning import caption_image
from .metrics import (
    AlignmentScorer,
    CaptionPair,
    SemanticScorer,
    image_text_alignment,
    rouge1,
    semantic_similarity,
)

__all__ = [
    "AlignmentScorer",
    "CaptionPair",
    "MetricReport",
    "SemanticScorer",
    "caption_image",
    "extend_manifest",
    "image_text_alignment",
    "rouge1",
    "run_benchmark",
    "semantic_similarity",
]
