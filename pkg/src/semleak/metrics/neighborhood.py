"""Semantic-neighborhood preservation metrics over a tag vocabulary.

The neighborhood of a tag is the m most cosine-similar vocabulary tags
(the tag itself always ranks first; remaining ties break lexicographically).
Recall counts reference tags whose neighborhood contains at least one
retrieved tag; precision counts retrieved tags explained by at least one
reference neighborhood.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np

from ..errors import EmptySet, MOutOfRange
from ..retriever.vocab import TagVocabulary


class PRF(NamedTuple):
    recall: float
    precision: float
    f1: float


def _f1(recall: float, precision: float) -> float:
    if recall + precision == 0:
        return 0.0
    return 2.0 * recall * precision / (recall + precision)


class NeighborhoodIndex:
    """Lazy per-tag cosine rank rows; rank(t, u) < m  <=>  u in N_m(t)."""

    def __init__(self, vocab: TagVocabulary):
        self.vocab = vocab
        self._E = vocab.embeddings.values
        tags = np.asarray(vocab.tags)
        lex_order = np.argsort(tags, kind="stable")
        self._lex_rank = np.empty(len(tags), dtype=int)
        self._lex_rank[lex_order] = np.arange(len(tags))
        self._rank_rows: dict[int, np.ndarray] = {}
        self._orders: dict[int, np.ndarray] = {}

    @property
    def size(self) -> int:
        return self.vocab.size

    def _order_for(self, ti: int) -> np.ndarray:
        order = self._orders.get(ti)
        if order is None:
            sims = self._E @ self._E[ti]
            not_self = np.ones(self.size)
            not_self[ti] = 0.0
            order = np.lexsort((self._lex_rank, not_self, -sims))
            self._orders[ti] = order
        return order

    def ranks_for(self, tag: str) -> np.ndarray:
        ti = self.vocab.tag_index(tag)
        ranks = self._rank_rows.get(ti)
        if ranks is None:
            order = self._order_for(ti)
            ranks = np.empty(self.size, dtype=int)
            ranks[order] = np.arange(self.size)
            self._rank_rows[ti] = ranks
        return ranks

    def neighbors(self, tag: str, m: int) -> list[str]:
        order = self._order_for(self.vocab.tag_index(tag))
        return [self.vocab.tags[j] for j in order[:m]]


def semantic_neighborhood(tag: str, vocab: TagVocabulary, m: int,
                          index: NeighborhoodIndex | None = None) -> list[str]:
    """The m vocabulary tags with highest cosine to `tag` (itself included)."""
    if not 1 <= m <= vocab.size:
        raise MOutOfRange(f"m={m} outside [1, {vocab.size}]")
    index = index or NeighborhoodIndex(vocab)
    return index.neighbors(tag, m)


def neighborhood_prf(G, P, vocab: TagVocabulary, m: int,
                     index: NeighborhoodIndex | None = None) -> PRF:
    """Neighborhood recall/precision/F1 of retrieved tags P against reference G."""
    G = sorted(set(G))
    P = sorted(set(P))
    if not G or not P:
        raise EmptySet("G and P must be non-empty tag sets")
    if not 1 <= m <= vocab.size:
        raise MOutOfRange(f"m={m} outside [1, {vocab.size}]")
    index = index or NeighborhoodIndex(vocab)
    p_idx = np.asarray([vocab.tag_index(u) for u in P], dtype=int)
    # hit[t] for recall; explained[u] for precision — both via rank rows of G
    explained = np.zeros(len(P), dtype=bool)
    hits = 0
    for t in G:
        in_nbhd = index.ranks_for(t)[p_idx] < m
        if in_nbhd.any():
            hits += 1
        explained |= in_nbhd
    recall = hits / len(G)
    precision = float(np.mean(explained))
    return PRF(recall, precision, _f1(recall, precision))


def exact_retrieval_prf(G, P) -> PRF:
    """Plain set-overlap recall/precision/F1."""
    G, P = set(G), set(P)
    if not G or not P:
        raise EmptySet("G and P must be non-empty tag sets")
    inter = len(G & P)
    recall = inter / len(G)
    precision = inter / len(P)
    return PRF(recall, precision, _f1(recall, precision))


@dataclass
class NeighborhoodReport:
    """Per-item and mean PRF across an m-sweep at a fixed retrieval K."""

    K: int
    m_sweep: list
    per_item: dict = field(default_factory=dict)   # item -> {m: PRF}
    means: dict = field(default_factory=dict)      # m -> PRF
    exact_per_item: dict = field(default_factory=dict)
    exact_mean: PRF | None = None

    @classmethod
    def compute(cls, G_by_item: dict, P_by_item: dict, vocab: TagVocabulary,
                m_sweep, K: int) -> "NeighborhoodReport":
        from ..errors import MissingItem

        index = NeighborhoodIndex(vocab)
        m_sweep = list(m_sweep)
        report = cls(K=K, m_sweep=m_sweep)
        for item_id in sorted(G_by_item):
            G = G_by_item[item_id]
            if item_id not in P_by_item:
                raise MissingItem(f"no retrieval result for item {item_id!r}")
            P = P_by_item[item_id]
            report.per_item[item_id] = {
                m: neighborhood_prf(G, P, vocab, m, index) for m in m_sweep
            }
            report.exact_per_item[item_id] = exact_retrieval_prf(G, P)
        items = sorted(report.per_item)
        if items:
            for m in m_sweep:
                rows = [report.per_item[i][m] for i in items]
                report.means[m] = PRF(
                    float(np.mean([r.recall for r in rows])),
                    float(np.mean([r.precision for r in rows])),
                    float(np.mean([r.f1 for r in rows])),
                )
            exact = [report.exact_per_item[i] for i in items]
            report.exact_mean = PRF(
                float(np.mean([r.recall for r in exact])),
                float(np.mean([r.precision for r in exact])),
                float(np.mean([r.f1 for r in exact])),
            )
        return report
