#!/usr/bin/env python3
"""Training the local retriever: contrastive projections, then the ranker.

Creates a separable dataset (each image sits near its tag, displaced by a
hidden partial rotation), fine-tunes the projection heads with the
symmetric contrastive loss, then trains the cross-network ranker with the
grouped margin loss and hard-negative mining. Prints loss curves and
before/after recall@10.

Run:  python3 demos/02_train_local_retriever.py
"""
import numpy as np

from semleak.retriever import (
    TagVocabulary,
    TrainConfig,
    batch_retrieve,
    init_retriever,
    train_projections,
    train_ranker,
)
from semleak.store import EmbeddingMatrix, l2_normalize

rng = np.random.default_rng(7)
DIM, N_TAGS, N_TRAIN, N_VAL = 24, 100, 160, 40

R, _ = np.linalg.qr(rng.normal(size=(DIM, DIM)))
mix = 0.6 * np.eye(DIM) + 0.4 * R      # hidden misalignment to learn away
tag_latents = rng.normal(size=(N_TAGS, DIM))
tag_latents /= np.linalg.norm(tag_latents, axis=1, keepdims=True)
tags = [f"tag {i:03d}" for i in range(N_TAGS)]
tag_dirs = rng.normal(size=(N_TAGS, DIM))
tag_dirs /= np.linalg.norm(tag_dirs, axis=1, keepdims=True)
tag_emb = l2_normalize(EmbeddingMatrix(tags, tag_latents + 0.25 * tag_dirs))


def make_images(count, prefix):
    ids, rows, members = [], [], {}
    for i in range(count):
        t = i % N_TAGS
        u = rng.normal(size=DIM)
        u /= np.linalg.norm(u)
        ids.append(f"{prefix}{i:04d}")
        rows.append(mix @ tag_latents[t] + 0.45 * u)
        members[ids[-1]] = np.asarray([t])
    return l2_normalize(EmbeddingMatrix(ids, np.asarray(rows))), members


train_imgs, train_members = make_images(N_TRAIN, "train")
val_imgs, val_members = make_images(N_VAL, "val")
vocab = TagVocabulary(tags=tags, embeddings=tag_emb,
                      membership={**train_members, **val_members})

config = TrainConfig(proj_epochs=20, proj_lr=0.3, ranker_epochs=50,
                     ranker_lr=0.05, batch_size=32, seed=11)


def recall_at_10(model, by):
    results = batch_retrieve(model, vocab, val_imgs, 10, by=by)
    hits = [len({tags[t] for t in val_members[r.item_id]}
                & {t for t, _ in r.topk}) for r in results]
    return float(np.mean(hits))


model = init_retriever(DIM, config)
print(f"untrained ranker recall@10: {recall_at_10(model, 'ranker'):.2f}")

model = train_projections(train_imgs, vocab, config, model)
log = model.train_log["projections"]
print(f"\ncontrastive loss: {log[0]['loss']:.4f} -> {log[-1]['loss']:.4f} "
      f"({1 - log[-1]['loss'] / log[0]['loss']:.0%} drop over {len(log)} epochs)")
print(f"cosine retrieval recall@10 after projections: "
      f"{recall_at_10(model, 'similarity'):.2f}")

model = train_ranker(model, train_imgs, vocab, config)
log = model.train_log["ranker"]
print(f"\nranker loss: {log[0]['loss']:.4f} -> {log[-1]['loss']:.6f} "
      f"({1 - log[-1]['loss'] / log[0]['loss']:.0%} drop over {len(log)} epochs)")
print(f"trained ranker recall@10: {recall_at_10(model, 'ranker'):.2f}")

sample = batch_retrieve(model, vocab, val_imgs.subset(val_imgs.ids[:1]), 5,
                        by="ranker")[0]
truth = [tags[t] for t in val_members[sample.item_id]]
print(f"\n{sample.item_id}: true tag {truth}, top-5 retrieved:")
for tag, score in sample.topk:
    print(f"  {score:8.4f}  {tag}")
