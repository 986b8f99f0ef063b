"""Lexical passage retrieval over loaded bundles.

A small Okapi BM25 scorer: deterministic, dependency-light, auditable.
Passages and figure captions live in one index so both are scored with
identical corpus statistics; ranking only ever selects passages, while
caption scores are compared against the selected passages' floor to
decide which figures get attached for data extraction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

from .corpus import DocumentBundle, FigureAsset, paragraphs_of
from .textutil import tokenize

K1 = 1.5
B = 0.75


@dataclass(frozen=True)
class PassageRef:
    """Stable address of one paragraph inside a loaded bundle."""

    paper_id: str
    section_index: int
    paragraph_index: int


@dataclass(frozen=True)
class ScoredPassage:
    ref: PassageRef
    text: str
    score: float


@dataclass(frozen=True)
class ScoredFigure:
    paper_id: str
    figure: FigureAsset
    score: float


@dataclass(frozen=True)
class _Doc:
    tokens: tuple[str, ...]
    order: tuple[int, int, int]  # bundle order, section_index, paragraph_index


class PassageIndex:
    """BM25 index over the paragraphs (and figure captions) of bundles."""

    def __init__(self, bundles: Sequence[DocumentBundle]):
        self.bundles = tuple(bundles)
        self._passages: list[tuple[PassageRef, str, _Doc]] = []
        self._figures: list[tuple[str, FigureAsset, _Doc]] = []

        for order, paper_id, sec_idx, par_idx, text in paragraphs_of(self.bundles):
            doc = _Doc(tokens=tuple(tokenize(text)), order=(order, sec_idx, par_idx))
            self._passages.append((PassageRef(paper_id, sec_idx, par_idx), text, doc))
        for order, bundle in enumerate(self.bundles):
            for fig_idx, fig in enumerate(bundle.figures):
                doc = _Doc(tokens=tuple(tokenize(fig.caption)), order=(order, fig_idx, -1))
                self._figures.append((bundle.paper_id, fig, doc))

        corpus = [doc for _, _, doc in self._passages] + [doc for _, _, doc in self._figures]
        self._n_docs = len(corpus)
        total_len = sum(len(doc.tokens) for doc in corpus)
        self._avgdl = (total_len / self._n_docs) if self._n_docs else 0.0
        self._df: dict[str, int] = {}
        for doc in corpus:
            for term in set(doc.tokens):
                self._df[term] = self._df.get(term, 0) + 1

    def _idf(self, term: str) -> float:
        df = self._df.get(term, 0)
        return math.log((self._n_docs - df + 0.5) / (df + 0.5) + 1.0)

    def score(self, query_tokens: Sequence[str], doc: _Doc) -> float:
        if not doc.tokens or not query_tokens:
            return 0.0
        score = 0.0
        length_norm = K1 * (1.0 - B + B * len(doc.tokens) / self._avgdl)
        for term in query_tokens:
            tf = doc.tokens.count(term)
            if tf == 0:
                continue
            score += self._idf(term) * (tf * (K1 + 1.0)) / (tf + length_norm)
        return score

    def rank_passages(self, query: str, k: int) -> list[ScoredPassage]:
        """Top-k passages; ties broken by (paper order, section, paragraph)."""
        query_tokens = tokenize(query)
        scored = [
            (self.score(query_tokens, doc), doc.order, ref, text)
            for ref, text, doc in self._passages
        ]
        scored.sort(key=lambda item: (-item[0], item[1]))
        return [ScoredPassage(ref=ref, text=text, score=s) for s, _, ref, text in scored[:k]]

    def score_figures(self, query: str, floor: float) -> list[ScoredFigure]:
        """Figures whose caption scores strictly above the passage floor."""
        query_tokens = tokenize(query)
        hits = []
        for paper_id, fig, doc in self._figures:
            score = self.score(query_tokens, doc)
            if score > floor:
                hits.append((score, doc.order, paper_id, fig))
        hits.sort(key=lambda item: (-item[0], item[1]))
        return [ScoredFigure(paper_id=p, figure=f, score=s) for s, _, p, f in hits]
