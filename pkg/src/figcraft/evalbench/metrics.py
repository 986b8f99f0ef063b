"""Caption-space metrics.

ROUGE-1 is native: F1 over the unigram multiset overlap of the two
captions, using the declared tokenizer (lowercase, split on
non-alphanumeric runs, drop empties). Semantic similarity and
image-text alignment require large pretrained scorers, so they are
pluggable providers; when no scorer is configured the metric is
reported missing, never fabricated.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from pathlib import Path
from typing import Protocol

from ..errors import ScorerUnavailable
from ..textutil import tokenize


@dataclass(frozen=True)
class CaptionPair:
    """Gold and generated captions plus the images they were produced from.

    Both captions must come from the same captioning template and
    provider configuration within a run; the bench runner guarantees it.
    """

    gold_caption: str
    generated_caption: str
    gold_image_ref: Path | None = None
    generated_image_ref: Path | None = None


def rouge1(candidate: str, reference: str) -> float:
    """Unigram multiset-overlap F1 in [0, 1].

    Both-empty token sequences score 1.0, exactly one empty scores 0.0.
    Computed as 2*overlap/(|candidate| + |reference|), which equals the
    harmonic-mean F1 and is symmetric by construction.
    """
    candidate_tokens = tokenize(candidate)
    reference_tokens = tokenize(reference)
    if not candidate_tokens and not reference_tokens:
        return 1.0
    if not candidate_tokens or not reference_tokens:
        return 0.0
    candidate_counts = Counter(candidate_tokens)
    reference_counts = Counter(reference_tokens)
    overlap = sum((candidate_counts & reference_counts).values())
    if overlap == 0:
        return 0.0
    return 2.0 * overlap / (len(candidate_tokens) + len(reference_tokens))


class SemanticScorer(Protocol):
    """Pluggable caption-to-caption similarity provider."""

    provider_id: str

    def score_captions(self, gold_caption: str, generated_caption: str) -> float: ...


class AlignmentScorer(Protocol):
    """Pluggable image-to-text alignment provider."""

    provider_id: str

    def score_alignment(self, image_ref: Path, caption: str) -> float: ...


def semantic_similarity(pair: CaptionPair, scorer: SemanticScorer | None) -> tuple[float, str]:
    """Pass-through to the configured scorer, recording its provider id."""
    if scorer is None:
        raise ScorerUnavailable("no semantic similarity scorer configured")
    return scorer.score_captions(pair.gold_caption, pair.generated_caption), scorer.provider_id


def image_text_alignment(
    gold_image_ref: Path, generated_caption: str, scorer: AlignmentScorer | None
) -> tuple[float, str]:
    """Pass-through alignment of the gold image against the generated caption."""
    if scorer is None:
        raise ScorerUnavailable("no image-text alignment scorer configured")
    return scorer.score_alignment(gold_image_ref, generated_caption), scorer.provider_id
