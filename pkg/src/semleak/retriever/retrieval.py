"""Top-K tag retrieval for any attack-space embedding."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..errors import DimMismatch, KOutOfRange
from ..store import EmbeddingMatrix, l2_normalize
from .model import RetrieverModel, _dcn_forward, _proj_forward, pairwise_features
from .vocab import TagVocabulary


@dataclass
class RetrievalResult:
    item_id: str
    topk: list  # ordered (tag phrase, score) pairs, scores non-increasing
    K: int


def _ordered_topk(scores: np.ndarray, tags: np.ndarray, K: int):
    # primary key: score descending; ties: tag phrase ascending
    order = np.lexsort((tags, -scores))[:K]
    return [(str(tags[j]), float(scores[j])) for j in order]


def _score_against_vocab(model: RetrieverModel, e: np.ndarray,
                         P_tag: np.ndarray, by: str) -> np.ndarray:
    p_img, _ = _proj_forward(model.params, "img", e[None, :])
    if by == "similarity":
        return P_tag @ p_img[0]
    if by == "ranker":
        phi = pairwise_features(p_img[0], P_tag)
        scores, _ = _dcn_forward(model.params, phi, model.config)
        return scores
    raise ValueError(f"unknown scoring mode {by!r}")


def _projected_tags(model: RetrieverModel, vocab: TagVocabulary) -> np.ndarray:
    emb = vocab.embeddings
    if not emb.normalized:
        emb = l2_normalize(emb)
    P_tag, _ = _proj_forward(model.params, "tag", emb.values)
    return P_tag


def retrieve_topk(model: RetrieverModel, vocab: TagVocabulary, e,
                  K: int, by: str = "ranker", item_id: str = "") -> RetrievalResult:
    """Top-K vocabulary tags for one embedding, deterministically ordered.

    `by="ranker"` scores interaction features with the trained cross-network
    head; `by="similarity"` ranks by projected cosine, which is also what an
    untrained model should be queried with.
    """
    if not 1 <= K <= vocab.size:
        raise KOutOfRange(f"K={K} outside [1, {vocab.size}]")
    e = np.asarray(e, dtype=np.float64)
    if e.shape != (model.dim,):
        raise DimMismatch(f"query shape {e.shape} != ({model.dim},)")
    P_tag = _projected_tags(model, vocab)
    scores = _score_against_vocab(model, e, P_tag, by)
    tags = np.asarray(vocab.tags)
    return RetrievalResult(item_id, _ordered_topk(scores, tags, K), K)


def batch_retrieve(model: RetrieverModel, vocab: TagVocabulary,
                   queries: EmbeddingMatrix, K: int,
                   by: str = "ranker") -> list[RetrievalResult]:
    """retrieve_topk over every row of a matrix, sharing the projected vocab."""
    if not 1 <= K <= vocab.size:
        raise KOutOfRange(f"K={K} outside [1, {vocab.size}]")
    if queries.dim != model.dim:
        raise DimMismatch(f"query dim {queries.dim} != model dim {model.dim}")
    P_tag = _projected_tags(model, vocab)
    tags = np.asarray(vocab.tags)
    out = []
    for item_id, row in zip(queries.ids, queries.values):
        scores = _score_against_vocab(model, row, P_tag, by)
        out.append(RetrievalResult(item_id, _ordered_topk(scores, tags, K), K))
    return out
