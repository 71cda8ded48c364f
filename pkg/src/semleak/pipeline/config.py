"""Experiment configuration: one JSON file, validated up front.

String values may interpolate environment variables as ``${VAR}`` (used for
secrets and machine-local paths). Referenced input paths must exist at
validation time; sweeps must be non-empty and ascending.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from pathlib import Path

from ..errors import ConfigError
from ..retriever.model import TrainConfig

_ENV_RE = re.compile(r"\$\{([A-Za-z_][A-Za-z0-9_]*)\}")
_MODALITIES = ("tags", "captions", "image")

DEFAULT_B_SWEEP = [1, 10, 100, 1000, 10000]
DEFAULT_K_SWEEP = [5, 10, 15, 20, 25, 30]
DEFAULT_M_SWEEP = list(range(1, 101))


def _interpolate(value):
    if isinstance(value, str):
        def repl(match):
            name = match.group(1)
            if name not in os.environ:
                raise ConfigError(f"environment variable {name} is not set")
            return os.environ[name]
        return _ENV_RE.sub(repl, value)
    if isinstance(value, list):
        return [_interpolate(v) for v in value]
    if isinstance(value, dict):
        return {k: _interpolate(v) for k, v in value.items()}
    return value


def _require_sorted(name, values):
    vals = list(values)
    if not vals:
        raise ConfigError(f"{name} must be non-empty")
    if vals != sorted(vals) or len(set(vals)) != len(vals):
        raise ConfigError(f"{name} must be strictly ascending, got {vals}")
    return vals


def _require_path(name, value, base: Path):
    if value is None:
        raise ConfigError(f"missing required path {name}")
    path = Path(value)
    if not path.is_absolute():
        path = base / path
    if not path.exists():
        raise ConfigError(f"{name}: {path} does not exist")
    return str(path)


@dataclass
class DatasetPaths:
    attack_embeddings: str
    tag_embeddings: str
    victim_embeddings: dict    # victim space id -> embeddings path
    tags: str
    captions: str
    val_n: int = 0
    test_n: int = 0
    normalize: bool = True
    domains: str | None = None  # image_id -> "near"/"out", cross-domain only

    @classmethod
    def parse(cls, doc: dict, base: Path, name: str) -> "DatasetPaths":
        if not isinstance(doc.get("victim_embeddings"), dict) or not doc["victim_embeddings"]:
            raise ConfigError(f"{name}.victim_embeddings must map space ids to paths")
        victims = {k: _require_path(f"{name}.victim_embeddings.{k}", v, base)
                   for k, v in doc["victim_embeddings"].items()}
        return cls(
            attack_embeddings=_require_path(f"{name}.attack_embeddings",
                                            doc.get("attack_embeddings"), base),
            tag_embeddings=_require_path(f"{name}.tag_embeddings",
                                         doc.get("tag_embeddings"), base),
            victim_embeddings=victims,
            tags=_require_path(f"{name}.tags", doc.get("tags"), base),
            captions=_require_path(f"{name}.captions", doc.get("captions"), base),
            val_n=int(doc.get("val_n", 0)),
            test_n=int(doc.get("test_n", 0)),
            normalize=bool(doc.get("normalize", True)),
            domains=(_require_path(f"{name}.domains", doc["domains"], base)
                     if doc.get("domains") else None),
        )


@dataclass
class ExperimentConfig:
    seed: int
    output_dir: str
    data: DatasetPaths
    client_provider: str = "stub"
    client_model: str = "stub-model"
    client_mode: str = "replay"
    cache_path: str | None = None
    concurrency: int = 4
    workers: int = 4
    b_sweep: list = field(default_factory=lambda: list(DEFAULT_B_SWEEP))
    solver: str = "svd_pinv"
    ridge_lambda: float = 0.0
    K: int = 10
    K_sweep: list = field(default_factory=lambda: list(DEFAULT_K_SWEEP))
    retrieval_by: str = "similarity"
    checkpoint: str | None = None
    m_sweep: list = field(default_factory=lambda: list(DEFAULT_M_SWEEP))
    eval_b: int | None = None
    n_captions: int = 5
    conditioning: list = field(default_factory=lambda: [["tags"], ["captions"],
                                                        ["tags", "captions"]])
    image_dir: str | None = None
    reference_image_dir: str | None = None
    cross_domain: DatasetPaths | None = None
    retriever: TrainConfig = field(default_factory=TrainConfig)
    raw: dict = field(default_factory=dict, repr=False)

    @classmethod
    def from_file(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        return cls.from_dict(doc, base=path.parent)

    @classmethod
    def from_dict(cls, doc: dict, base=".") -> "ExperimentConfig":
        base = Path(base)
        doc = _interpolate(doc)
        if "data" not in doc:
            raise ConfigError("config needs a 'data' section")
        data = DatasetPaths.parse(doc["data"], base, "data")
        client = doc.get("client", {})
        mode = client.get("mode", "replay")
        if mode not in ("live", "record", "replay"):
            raise ConfigError(f"client.mode must be live/record/replay, got {mode!r}")
        alignment = doc.get("alignment", {})
        retrieval = doc.get("retrieval", {})
        neighborhood = doc.get("neighborhood", {})
        adaptive = doc.get("adaptive", {})
        conditioning = adaptive.get("conditioning",
                                    [["tags"], ["captions"], ["tags", "captions"]])
        if not conditioning:
            raise ConfigError("adaptive.conditioning must be non-empty")
        for setting in conditioning:
            if not setting:
                raise ConfigError("empty conditioning set is not allowed")
            for modality in setting:
                if modality not in _MODALITIES:
                    raise ConfigError(f"unknown conditioning modality {modality!r}")
        image_dir = adaptive.get("image_dir")
        if image_dir:
            image_dir = _require_path("adaptive.image_dir", image_dir, base)
        elif any("image" in s for s in conditioning):
            raise ConfigError("image conditioning requires adaptive.image_dir")
        ref_image_dir = adaptive.get("reference_image_dir")
        if ref_image_dir:
            ref_image_dir = _require_path("adaptive.reference_image_dir",
                                          ref_image_dir, base)
        cache_path = client.get("cache_path")
        if cache_path is not None:
            cache_path = str(base / cache_path) if not Path(cache_path).is_absolute() \
                else cache_path
            if mode == "replay" and not Path(cache_path).exists():
                raise ConfigError(f"replay cache {cache_path} does not exist")
        elif mode in ("replay", "record"):
            raise ConfigError(f"client.mode={mode} requires client.cache_path")
        cross = None
        if doc.get("cross_domain"):
            cross = DatasetPaths.parse(doc["cross_domain"], base, "cross_domain")
            if cross.domains is None:
                raise ConfigError("cross_domain.domains (near/out labels) is required")
        out_dir = doc.get("output_dir", "out")
        out_dir = str(base / out_dir) if not Path(out_dir).is_absolute() else out_dir
        cfg = cls(
            seed=int(doc.get("seed", 0)),
            output_dir=out_dir,
            data=data,
            client_provider=client.get("provider", "stub"),
            client_model=client.get("model", "stub-model"),
            client_mode=mode,
            cache_path=cache_path,
            concurrency=int(client.get("concurrency", 4)),
            workers=int(doc.get("workers", 4)),
            b_sweep=_require_sorted("alignment.b_sweep",
                                    alignment.get("b_sweep", DEFAULT_B_SWEEP)),
            solver=alignment.get("solver", "svd_pinv"),
            ridge_lambda=float(alignment.get("ridge_lambda", 0.0)),
            K=int(retrieval.get("K", 10)),
            K_sweep=_require_sorted("retrieval.K_sweep",
                                    retrieval.get("K_sweep", DEFAULT_K_SWEEP)),
            retrieval_by=retrieval.get("by", "similarity"),
            checkpoint=retrieval.get("checkpoint"),
            m_sweep=_require_sorted("neighborhood.m_sweep",
                                    neighborhood.get("m_sweep", DEFAULT_M_SWEEP)),
            eval_b=neighborhood.get("eval_b"),
            n_captions=int(doc.get("captions", {}).get("n_captions", 5)),
            conditioning=[sorted(set(s)) for s in conditioning],
            image_dir=image_dir,
            reference_image_dir=ref_image_dir,
            cross_domain=cross,
            retriever=TrainConfig.from_dict(doc.get("retriever", {}))
            if doc.get("retriever") else TrainConfig(),
            raw=doc,
        )
        if cfg.retrieval_by not in ("similarity", "ranker"):
            raise ConfigError(f"retrieval.by must be similarity/ranker")
        if cfg.checkpoint:
            cfg.checkpoint = _require_path("retrieval.checkpoint", cfg.checkpoint, base)
        if cfg.K < 1:
            raise ConfigError("retrieval.K must be >= 1")
        return cfg

    def canonical_json(self) -> str:
        # execution knobs (worker/pool sizes) do not change report content,
        # so they stay out of the hash: equal hash => byte-identical reports
        doc = dict(self.raw)
        doc.pop("workers", None)
        if isinstance(doc.get("client"), dict):
            doc["client"] = {k: v for k, v in doc["client"].items()
                             if k != "concurrency"}
        return json.dumps(doc, sort_keys=True, separators=(",", ":"),
                          ensure_ascii=False)

    @property
    def config_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()
