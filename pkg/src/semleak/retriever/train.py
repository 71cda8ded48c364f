"""Seed-deterministic SGD training for the projection and ranker stages.

Plain SGD with momentum 0.9, cosine-decayed learning rate, and a global
gradient-norm clip at 5. Both stages shuffle with their own seeded
generator, so a fixed seed reproduces parameters bit-for-bit.
"""
from __future__ import annotations

import math

import numpy as np

from ..errors import Divergence, EmptyGroupSide
from ..store import EmbeddingMatrix, l2_normalize
from .losses import RankGroup, contrastive_loss_grad, ranker_loss_grad
from .model import (
    RetrieverModel,
    TrainConfig,
    _dcn_backward,
    _dcn_forward,
    _proj_backward,
    _proj_forward,
    init_retriever,
    pairwise_features,
    projection_keys,
    ranker_keys,
)
from .vocab import TagVocabulary


def _cosine_lr(base: float, lr_min: float, step: int, total: int) -> float:
    if total <= 1:
        return base
    frac = step / (total - 1)
    return lr_min + 0.5 * (base - lr_min) * (1.0 + math.cos(math.pi * frac))


def _clip_grads(grads: dict, keys, max_norm: float) -> float:
    total = math.sqrt(sum(float(np.sum(grads[k] ** 2)) for k in keys))
    if max_norm > 0 and total > max_norm:
        scale = max_norm / total
        for k in keys:
            grads[k] *= scale
    return total

def _sgd_step(params, grads, velocity, keys, lr, momentum):
    for k in keys:
        velocity[k] = momentum * velocity[k] + grads[k]
        params[k] = params[k] - lr * velocity[k]


def _batches(order, batch_size):
    for start in range(0, len(order), batch_size):
        yield order[start:start + batch_size]


def _unit_rows(matrix: EmbeddingMatrix) -> np.ndarray:
    if not matrix.normalized:
        matrix = l2_normalize(matrix)
    return matrix.values


def train_projections(images: EmbeddingMatrix, vocab: TagVocabulary,
                      config: TrainConfig | None = None,
                      model: RetrieverModel | None = None) -> RetrieverModel:
    """Contrastive fine-tuning of the two projection heads and temperature.

    Each batch scores its images against their positive tags plus the
    hardest non-member tags under the current model (per-image count
    `hard_negatives`, overall candidate cap `candidate_cap`).
    """
    config = config or (model.config if model else TrainConfig())
    if model is None:
        model = init_retriever(images.dim, config)
    params = model.params
    X_img = _unit_rows(images)
    X_tag = _unit_rows(vocab.embeddings)
    image_ids = list(images.ids)
    pos_lists = [vocab.positives(i) for i in image_ids]
    if config.batch_size < 2 or len(image_ids) < 1:
        raise Divergence("projection training needs batch_size >= 2 and data")

    keys = projection_keys()
    velocity = {k: np.zeros_like(params[k]) for k in keys}
    rng = np.random.default_rng([config.seed, 0])
    n_batches = math.ceil(len(image_ids) / config.batch_size)
    total_steps = max(1, config.proj_epochs * n_batches)
    step = 0
    log = []
    for epoch in range(config.proj_epochs):
        order = rng.permutation(len(image_ids))
        epoch_losses = []
        for batch in _batches(order, config.batch_size):
            E_b = X_img[batch]
            batch_pos = [pos_lists[i] for i in batch]

            # mine hard negatives under the current projections
            P_img, cache_img = _proj_forward(params, "img", E_b)
            P_tag_full, _ = _proj_forward(params, "tag", X_tag)
            sims = P_img @ P_tag_full.T
            cols: set[int] = set()
            for r, pos in enumerate(batch_pos):
                cols.update(int(t) for t in pos)
                if config.hard_negatives > 0:
                    masked = sims[r].copy()
                    masked[pos] = -np.inf
                    take = min(config.hard_negatives, vocab.size - len(pos))
                    if take > 0:
                        hard = np.argpartition(-masked, take - 1)[:take]
                        cols.update(int(t) for t in hard)
            col_idx = np.asarray(sorted(cols), dtype=int)[: config.candidate_cap]

            P_tag_b, cache_tag = _proj_forward(params, "tag", X_tag[col_idx])
            alpha = float(np.exp(params["log_temp"]))
            S = alpha * (P_img @ P_tag_b.T)
            if not np.all(np.isfinite(S)):
                raise Divergence(
                    f"similarities diverged at epoch {epoch}, step {step} "
                    f"(alpha={alpha:.3g})"
                )
            M_b = vocab.membership_matrix([image_ids[i] for i in batch], col_idx)
            loss, G_S = contrastive_loss_grad(S, M_b)
            if not math.isfinite(loss.total):
                raise Divergence(
                    f"contrastive loss diverged at epoch {epoch}, step {step}"
                )
            grads = {k: np.zeros_like(params[k]) for k in keys}
            grads["log_temp"] += np.sum(G_S * S)
            G_C = alpha * G_S
            _proj_backward(params, "img", cache_img, G_C @ P_tag_b, grads)
            _proj_backward(params, "tag", cache_tag, G_C.T @ P_img, grads)
            _clip_grads(grads, keys, config.clip_norm)
            lr = _cosine_lr(config.proj_lr, config.lr_min, step, total_steps)
            _sgd_step(params, grads, velocity, keys, lr, config.momentum)
            step += 1
            epoch_losses.append(loss.total)
        log.append({"epoch": epoch, "loss": float(np.mean(epoch_losses))})
    model.train_log["projections"] = log
    return model


def _ranker_negatives(rng, pos: np.ndarray, pool: np.ndarray, vocab_size: int,
                      count: int) -> np.ndarray:
    """Candidate negatives: in-batch tags first, random non-members as filler."""
    pos_set = set(int(t) for t in pos)
    cand = np.asarray([t for t in pool if int(t) not in pos_set], dtype=int)
    if cand.size > count:
        cand = rng.choice(cand, size=count, replace=False)
    elif cand.size < count:
        rest = np.setdiff1d(np.arange(vocab_size), np.union1d(pool, pos))
        need = min(count - cand.size, rest.size)
        if need > 0:
            cand = np.concatenate([cand, rng.choice(rest, size=need, replace=False)])
    if cand.size == 0:
        raise EmptyGroupSide("no negative candidates available")
    return np.sort(cand)


def train_ranker(model: RetrieverModel, images: EmbeddingMatrix,
                 vocab: TagVocabulary,
                 config: TrainConfig | None = None) -> RetrieverModel:
    """Train the cross-network ranker on frozen (projected) embeddings."""
    config = config or model.config
    params = model.params
    X_img = _unit_rows(images)
    X_tag = _unit_rows(vocab.embeddings)
    if config.ranker_on_projected:
        X_img, _ = _proj_forward(params, "img", X_img)
        X_tag, _ = _proj_forward(params, "tag", X_tag)
    image_ids = list(images.ids)
    pos_lists = [vocab.positives(i) for i in image_ids]

    keys = ranker_keys(config)
    velocity = {k: np.zeros_like(params[k]) for k in keys}
    rng = np.random.default_rng([config.seed, 1])
    n_batches = math.ceil(len(image_ids) / config.batch_size)
    total_steps = max(1, config.ranker_epochs * n_batches)
    step = 0
    log = []
    for epoch in range(config.ranker_epochs):
        order = rng.permutation(len(image_ids))
        epoch_losses = []
        for batch in _batches(order, config.batch_size):
            pool = np.unique(np.concatenate([pos_lists[i] for i in batch]))
            feats = []
            spans = []  # (n_pos, neg_indices) per image
            for i in batch:
                pos = pos_lists[i]
                neg = _ranker_negatives(rng, pos, pool, vocab.size,
                                        min(config.ranker_negatives,
                                            config.candidate_cap))
                cand = np.concatenate([pos, neg])
                feats.append(pairwise_features(X_img[i], X_tag[cand]))
                spans.append((len(pos), neg))
            X = np.concatenate(feats, axis=0)
            scores, cache = _dcn_forward(params, X, config)
            if not np.all(np.isfinite(scores)):
                raise Divergence(f"ranker scores diverged at epoch {epoch}")

            groups = []
            offset = 0
            for n_pos, neg in spans:
                n_cand = n_pos + neg.size
                s = scores[offset:offset + n_cand]
                groups.append(RankGroup(
                    pos=s[:n_pos], neg=s[n_pos:],
                    neg_keys=[vocab.tags[int(t)] for t in neg],
                ))
                offset += n_cand
            loss, group_grads = ranker_loss_grad(groups, config.margin,
                                                 config.hn_ratio)
            if not math.isfinite(loss):
                raise Divergence(f"ranker loss diverged at epoch {epoch}")

            g_scores = np.zeros_like(scores)
            offset = 0
            for (n_pos, neg), (g_pos, g_neg) in zip(spans, group_grads):
                n_cand = n_pos + neg.size
                g_scores[offset:offset + n_pos] = g_pos
                g_scores[offset + n_pos:offset + n_cand] = g_neg
                offset += n_cand
            grads = {k: np.zeros_like(params[k]) for k in keys}
            _dcn_backward(params, cache, g_scores, grads, config)
            _clip_grads(grads, keys, config.clip_norm)
            lr = _cosine_lr(config.ranker_lr, config.lr_min, step, total_steps)
            _sgd_step(params, grads, velocity, keys, lr, config.momentum)
            step += 1
            epoch_losses.append(loss)
        log.append({"epoch": epoch, "loss": float(np.mean(epoch_losses))})
    model.train_log["ranker"] = log
    return model
