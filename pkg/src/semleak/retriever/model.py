"""Retriever parameters and differentiable building blocks.

All parameters live in a flat dict of float64 arrays so the optimizer,
gradient clipping, finite-difference checks, and checkpointing can treat
them uniformly. Scalars are 0-d arrays.

Parameter keys:
    img.W, img.b, img.gamma      residual projection for image embeddings
    tag.W, tag.b, tag.gamma      residual projection for tag embeddings
    log_temp                     similarity temperature (alpha = exp)
    cross.{l}.W, cross.{l}.b     cross-network layers of the ranker
    mlp.{i}.W, mlp.{i}.b         ranker MLP layers
    head.w, head.b               scalar scoring head
"""
from __future__ import annotations

import hashlib
import json
import math
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from ..errors import BadMagic, DimMismatch, ZeroRow
from ..store import MAGIC

DEFAULT_TEMPERATURE = 14.3


@dataclass
class TrainConfig:
    """Hyperparameters for both training stages (snapshotted on the model)."""

    proj_epochs: int = 20
    proj_lr: float = 0.05
    ranker_epochs: int = 50
    ranker_lr: float = 0.02
    batch_size: int = 32
    momentum: float = 0.9
    clip_norm: float = 5.0
    lr_min: float = 0.0
    hard_negatives: int = 16        # contrastive denominator negatives per image
    candidate_cap: int = 512        # per-image candidate tag cap
    ranker_negatives: int = 64      # candidate negatives per image for the ranker
    margin: float = 0.2
    hn_ratio: float = 0.5
    ranker_on_projected: bool = True
    cross_layers: int = 2
    mlp_hidden: tuple = (256, 64)
    seed: int = 0

    def to_dict(self) -> dict:
        d = dict(self.__dict__)
        d["mlp_hidden"] = list(self.mlp_hidden)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "TrainConfig":
        d = dict(d)
        if "mlp_hidden" in d:
            d["mlp_hidden"] = tuple(d["mlp_hidden"])
        return cls(**d)


@dataclass
class RetrieverModel:
    dim: int
    params: dict
    config: TrainConfig
    seed: int
    train_log: dict = field(default_factory=dict)

    @property
    def alpha(self) -> float:
        return float(np.exp(self.params["log_temp"]))

    @property
    def feature_dim(self) -> int:
        return 4 * self.dim + 1


def projection_keys():
    return ["img.W", "img.b", "img.gamma", "tag.W", "tag.b", "tag.gamma", "log_temp"]


def ranker_keys(config: TrainConfig):
    keys = []
    for l in range(config.cross_layers):
        keys += [f"cross.{l}.W", f"cross.{l}.b"]
    for i in range(len(config.mlp_hidden)):
        keys += [f"mlp.{i}.W", f"mlp.{i}.b"]
    keys += ["head.w", "head.b"]
    return keys


def init_retriever(dim: int, config: TrainConfig | None = None,
                   seed: int | None = None) -> RetrieverModel:
    """Fresh model; projections start near identity, scoring head at zero."""
    config = config or TrainConfig()
    seed = config.seed if seed is None else seed
    rng = np.random.default_rng(seed)
    D = 4 * dim + 1
    params = {}
    for prefix in ("img", "tag"):
        params[f"{prefix}.W"] = rng.normal(0.0, 0.02 / math.sqrt(dim), (dim, dim))
        params[f"{prefix}.b"] = np.zeros(dim)
        params[f"{prefix}.gamma"] = np.array(0.1)
    params["log_temp"] = np.array(math.log(DEFAULT_TEMPERATURE))
    for l in range(config.cross_layers):
        params[f"cross.{l}.W"] = rng.normal(0.0, 0.5 / math.sqrt(D), (D, D))
        params[f"cross.{l}.b"] = np.zeros(D)
    widths = [D, *config.mlp_hidden]
    for i, (fan_in, fan_out) in enumerate(zip(widths[:-1], widths[1:])):
        params[f"mlp.{i}.W"] = rng.normal(0.0, math.sqrt(2.0 / fan_in), (fan_out, fan_in))
        params[f"mlp.{i}.b"] = np.zeros(fan_out)
    params["head.w"] = np.zeros(widths[-1])
    params["head.b"] = np.array(0.0)
    return RetrieverModel(dim=dim, params=params, config=config, seed=seed)


# --- residual projection ------------------------------------------------------


def _proj_forward(params: dict, prefix: str, E: np.ndarray):
    """normalize(e + gamma * (W e + b)) for each row of E; returns cache."""
    W = params[f"{prefix}.W"]
    b = params[f"{prefix}.b"]
    gamma = float(params[f"{prefix}.gamma"])
    A = E @ W.T + b
    Y = E + gamma * A
    norms = np.linalg.norm(Y, axis=1, keepdims=True)
    if np.any(norms < 1e-12):
        raise ZeroRow("projection collapsed a row to zero")
    P = Y / norms
    return P, (E, A, norms, P)


def _proj_backward(params: dict, prefix: str, cache, G_P: np.ndarray, grads: dict):
    E, A, norms, P = cache
    gamma = float(params[f"{prefix}.gamma"])
    dot = np.sum(P * G_P, axis=1, keepdims=True)
    G_Y = (G_P - P * dot) / norms
    grads[f"{prefix}.W"] += gamma * (G_Y.T @ E)
    grads[f"{prefix}.b"] += gamma * G_Y.sum(axis=0)
    grads[f"{prefix}.gamma"] += np.sum(G_Y * A)


def project(model: RetrieverModel, e: np.ndarray, modality: str) -> np.ndarray:
    """Project a unit embedding through its modality head; output is unit-norm."""
    e = np.asarray(e, dtype=np.float64)
    single = e.ndim == 1
    E = e[None, :] if single else e
    if E.shape[1] != model.dim:
        raise DimMismatch(f"dim {E.shape[1]} != model dim {model.dim}")
    if modality not in ("image", "tag"):
        raise ValueError(f"modality must be 'image' or 'tag', got {modality!r}")
    prefix = "img" if modality == "image" else "tag"
    P, _ = _proj_forward(model.params, prefix, E)
    return P[0] if single else P


def similarities(model: RetrieverModel, E_img, E_tag, project_inputs: bool = True
                 ) -> np.ndarray:
    """Temperature-scaled similarity matrix S = alpha * P_img @ P_tag.T.

    Inputs are unit-norm rows; with project_inputs=False they are taken as
    already projected, otherwise each side goes through its modality head.
    """
    E_img = np.atleast_2d(np.asarray(E_img, dtype=np.float64))
    E_tag = np.atleast_2d(np.asarray(E_tag, dtype=np.float64))
    if E_img.shape[1] != E_tag.shape[1]:
        raise DimMismatch("image/tag dims differ")
    if project_inputs:
        E_img = project(model, E_img, "image")
        E_tag = project(model, E_tag, "tag")
    return model.alpha * (E_img @ E_tag.T)


# --- interaction features -----------------------------------------------------


def interaction_features(e_i, e_t) -> np.ndarray:
    """[e_i; e_t; c; e_i*e_t; e_i-e_t] with c the cosine scalar; width 4n+1."""
    e_i = np.asarray(e_i, dtype=np.float64)
    e_t = np.asarray(e_t, dtype=np.float64)
    if e_i.ndim != 1 or e_i.shape != e_t.shape:
        raise DimMismatch(f"feature inputs must be equal 1-D vectors, "
                          f"got {e_i.shape} and {e_t.shape}")
    c = float(e_i @ e_t)
    return np.concatenate([e_i, e_t, [c], e_i * e_t, e_i - e_t])


def pairwise_features(e_img: np.ndarray, E_tag: np.ndarray) -> np.ndarray:
    """Feature rows for one image against every tag row; shape (N, 4n+1)."""
    e_img = np.asarray(e_img, dtype=np.float64)
    E_tag = np.asarray(E_tag, dtype=np.float64)
    if e_img.ndim != 1 or E_tag.ndim != 2 or E_tag.shape[1] != e_img.shape[0]:
        raise DimMismatch("pairwise_features expects (n,) and (N, n)")
    n_rows = E_tag.shape[0]
    tiled = np.broadcast_to(e_img, (n_rows, e_img.shape[0]))
    dots = E_tag @ e_img
    return np.concatenate(
        [tiled, E_tag, dots[:, None], tiled * E_tag, tiled - E_tag], axis=1
    )


# --- DCN-style ranker (cross network + MLP + scalar head) ----------------------


def _dcn_forward(params: dict, X: np.ndarray, config: TrainConfig):
    x0 = X
    xs = [X]
    us = []
    x = X
    for l in range(config.cross_layers):
        u = x @ params[f"cross.{l}.W"].T + params[f"cross.{l}.b"]
        x = x0 * u + x
        us.append(u)
        xs.append(x)
    zs = []
    hs = [x]
    h = x
    for i in range(len(config.mlp_hidden)):
        z = h @ params[f"mlp.{i}.W"].T + params[f"mlp.{i}.b"]
        h = np.maximum(z, 0.0)
        zs.append(z)
        hs.append(h)
    scores = h @ params["head.w"] + float(params["head.b"])
    return scores, (xs, us, zs, hs)


def _dcn_backward(params: dict, cache, g_scores: np.ndarray, grads: dict,
                  config: TrainConfig) -> np.ndarray:
    xs, us, zs, hs = cache
    grads["head.w"] += hs[-1].T @ g_scores
    grads["head.b"] += np.sum(g_scores)
    G_h = g_scores[:, None] * params["head.w"][None, :]
    for i in reversed(range(len(config.mlp_hidden))):
        G_z = G_h * (zs[i] > 0)
        grads[f"mlp.{i}.W"] += G_z.T @ hs[i]
        grads[f"mlp.{i}.b"] += G_z.sum(axis=0)
        G_h = G_z @ params[f"mlp.{i}.W"]
    G_x = G_h
    G_x0 = np.zeros_like(xs[0])
    for l in reversed(range(config.cross_layers)):
        G_u = G_x * xs[0]
        grads[f"cross.{l}.W"] += G_u.T @ xs[l]
        grads[f"cross.{l}.b"] += G_u.sum(axis=0)
        G_x0 += G_x * us[l]
        G_x = G_x + G_u @ params[f"cross.{l}.W"]
    return G_x0 + G_x


def ranker_score(model: RetrieverModel, phi) -> float | np.ndarray:
    """Deterministic scalar score for one feature vector or a batch of rows."""
    phi = np.asarray(phi, dtype=np.float64)
    single = phi.ndim == 1
    X = phi[None, :] if single else phi
    if X.shape[1] != model.feature_dim:
        raise DimMismatch(f"feature width {X.shape[1]} != {model.feature_dim}")
    scores, _ = _dcn_forward(model.params, X, model.config)
    return float(scores[0]) if single else scores


# --- checkpointing --------------------------------------------------------------

CHECKPOINT_VERSION = 1


def config_hash(config: TrainConfig) -> str:
    blob = json.dumps(config.to_dict(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


def _write_block(fh, arr: np.ndarray) -> None:
    a2 = np.atleast_2d(np.asarray(arr, dtype=np.float64))
    fh.write(MAGIC)
    fh.write(struct.pack("<II", a2.shape[0], a2.shape[1]))
    fh.write(np.ascontiguousarray(a2, dtype="<f4").tobytes())


def _read_block(fh) -> np.ndarray:
    head = fh.read(16)
    if head[:8] != MAGIC:
        raise BadMagic(f"bad checkpoint block magic {head[:8]!r}")
    rows, dim = struct.unpack("<II", head[8:16])
    payload = fh.read(rows * dim * 4)
    if len(payload) != rows * dim * 4:
        raise DimMismatch("truncated checkpoint block")
    return np.frombuffer(payload, dtype="<f4").astype(np.float64).reshape(rows, dim)


def save_retriever(model: RetrieverModel, ckpt_dir) -> None:
    """Checkpoint = one file of EMBMAT01 blocks + a JSON manifest."""
    ckpt_dir = Path(ckpt_dir)
    ckpt_dir.mkdir(parents=True, exist_ok=True)
    names = sorted(model.params)
    manifest = {
        "version": CHECKPOINT_VERSION,
        "dim": model.dim,
        "seed": model.seed,
        "alpha": model.alpha,
        "config": model.config.to_dict(),
        "config_hash": config_hash(model.config),
        "params": [
            {"name": k, "shape": list(model.params[k].shape)} for k in names
        ],
    }
    with open(ckpt_dir / "manifest.json", "w", encoding="utf-8") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True)
        fh.write("\n")
    with open(ckpt_dir / "params.bin", "wb") as fh:
        for k in names:
            _write_block(fh, model.params[k])


def load_retriever(ckpt_dir) -> RetrieverModel:
    ckpt_dir = Path(ckpt_dir)
    with open(ckpt_dir / "manifest.json", "r", encoding="utf-8") as fh:
        manifest = json.load(fh)
    config = TrainConfig.from_dict(manifest["config"])
    params = {}
    with open(ckpt_dir / "params.bin", "rb") as fh:
        for entry in manifest["params"]:
            arr = _read_block(fh)
            params[entry["name"]] = arr.reshape(entry["shape"])
    return RetrieverModel(dim=manifest["dim"], params=params, config=config,
                          seed=manifest["seed"])
