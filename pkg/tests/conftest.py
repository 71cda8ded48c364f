"""Shared synthetic fixtures.

Two workhorses:

* dual_encoder_fixture — 2,000 items whose attack/victim embeddings are two
  random orthogonal maps of a shared 32-d latent plus Gaussian noise
  (sigma=0.05), with a 100-tag vocabulary whose memberships follow latent
  similarity. Drives the alignment-trend and neighborhood checks.
* separable_fixture — tag embeddings live in the attack space, image
  embeddings are a hidden rotation of their tag's latent plus noise, one
  positive tag per image. The projection stage must learn the rotation,
  which gives training plenty of headroom to show loss drops.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import pytest

from semleak.retriever import TagVocabulary, TrainConfig
from semleak.store import EmbeddingMatrix, TagRecord, l2_normalize


def random_orthogonal_columns(rng, rows: int, cols: int) -> np.ndarray:
    q, _ = np.linalg.qr(rng.normal(size=(rows, cols)))
    return q[:, :cols]


def matrix(ids, values, normalize=True) -> EmbeddingMatrix:
    m = EmbeddingMatrix(list(ids), np.asarray(values, dtype=np.float64))
    return l2_normalize(m) if normalize else m


@dataclass
class DualEncoderData:
    attack: EmbeddingMatrix        # 2000 x 48, unit rows
    victim: EmbeddingMatrix        # 2000 x 40, unit rows, same ids
    vocab: TagVocabulary           # 100 tags embedded in attack space
    pool_ids: list                 # 1500 ids for fitting alignment maps
    test_ids: list                 # 500 held-out ids
    gt_tags: dict                  # item -> list of member tag phrases


def _build_dual_encoder(seed=20240817, n_items=2000, latent=32,
                        attack_dim=48, victim_dim=40, n_tags=100,
                        sigma=0.05, tags_per_item=3) -> DualEncoderData:
    rng = np.random.default_rng(seed)
    Q_A = random_orthogonal_columns(rng, attack_dim, latent)
    Q_V = random_orthogonal_columns(rng, victim_dim, latent)
    Z = rng.normal(size=(n_items, latent))
    ids = [f"item{i:04d}" for i in range(n_items)]
    attack = matrix(ids, Z @ Q_A.T + sigma * rng.normal(size=(n_items, attack_dim)))
    victim = matrix(ids, Z @ Q_V.T + sigma * rng.normal(size=(n_items, victim_dim)))

    tag_latents = rng.normal(size=(n_tags, latent))
    tags = [f"tag {i:03d}" for i in range(n_tags)]
    tag_emb = matrix(tags, tag_latents @ Q_A.T
                     + sigma * rng.normal(size=(n_tags, attack_dim)))
    sims = (Z / np.linalg.norm(Z, axis=1, keepdims=True)) @ \
        (tag_latents / np.linalg.norm(tag_latents, axis=1, keepdims=True)).T
    membership = {
        ids[i]: np.sort(np.argsort(-sims[i])[:tags_per_item])
        for i in range(n_items)
    }
    vocab = TagVocabulary(tags=tags, embeddings=tag_emb, membership=membership)
    gt_tags = {item: [tags[j] for j in idx] for item, idx in membership.items()}
    return DualEncoderData(
        attack=attack,
        victim=victim,
        vocab=vocab,
        pool_ids=ids[:1500],
        test_ids=ids[1500:],
        gt_tags=gt_tags,
    )


@pytest.fixture(scope="session")
def dual_encoder_fixture() -> DualEncoderData:
    return _build_dual_encoder()


@dataclass
class SeparableData:
    train: EmbeddingMatrix
    val: EmbeddingMatrix
    vocab: TagVocabulary
    val_positives: dict            # image id -> list of true tag phrases
    config: TrainConfig


def _build_separable(seed=7, dim=24, n_tags=100, n_train=160, n_val=40,
                     img_noise=0.45, tag_noise=0.25, blend=0.4) -> SeparableData:
    rng = np.random.default_rng(seed)
    # images sit near their tag, pushed part-way along a hidden rotation:
    # separable, but the projection stage has real misalignment to remove
    R = random_orthogonal_columns(rng, dim, dim)
    M = (1 - blend) * np.eye(dim) + blend * R
    tag_latents = rng.normal(size=(n_tags, dim))
    tag_latents /= np.linalg.norm(tag_latents, axis=1, keepdims=True)
    tags = [f"tag {i:03d}" for i in range(n_tags)]
    tag_dirs = rng.normal(size=(n_tags, dim))
    tag_dirs /= np.linalg.norm(tag_dirs, axis=1, keepdims=True)
    tag_emb = matrix(tags, tag_latents + tag_noise * tag_dirs)

    def build_images(count, prefix):
        ids, rows, members = [], [], {}
        for i in range(count):
            t = i % n_tags
            u = rng.normal(size=dim)
            u /= np.linalg.norm(u)
            ids.append(f"{prefix}{i:04d}")
            rows.append(M @ tag_latents[t] + img_noise * u)
            members[ids[-1]] = np.asarray([t])
        return ids, np.asarray(rows), members

    train_ids, train_rows, train_members = build_images(n_train, "train")
    val_ids, val_rows, val_members = build_images(n_val, "val")
    vocab = TagVocabulary(tags=tags, embeddings=tag_emb,
                          membership={**train_members, **val_members})
    config = TrainConfig(
        proj_epochs=20, proj_lr=0.3, ranker_epochs=50, ranker_lr=0.05,
        batch_size=32, hard_negatives=16, ranker_negatives=24,
        margin=0.2, hn_ratio=0.5, seed=11,
    )
    return SeparableData(
        train=matrix(train_ids, train_rows),
        val=matrix(val_ids, val_rows),
        vocab=vocab,
        val_positives={i: [tags[t] for t in val_members[i]] for i in val_ids},
        config=config,
    )


@pytest.fixture(scope="session")
def separable_fixture() -> SeparableData:
    return _build_separable()


@pytest.fixture
def toy_vocab() -> TagVocabulary:
    """Five hand-placed unit vectors with known cosine structure."""
    tags = ["apple", "banana", "cherry", "date", "elder"]
    vectors = np.asarray([
        [1.0, 0.0, 0.0],
        [0.96, 0.28, 0.0],   # close to apple
        [0.0, 1.0, 0.0],
        [0.0, 0.96, 0.28],   # close to cherry
        [0.0, 0.0, 1.0],
    ])
    records = [
        TagRecord("img0", ["apple", "banana"]),
        TagRecord("img1", ["cherry"]),
        TagRecord("img2", ["date", "elder"]),
    ]
    emb = matrix(tags, vectors)
    return TagVocabulary.build(records, emb)
