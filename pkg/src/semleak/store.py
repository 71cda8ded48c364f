"""Embedding matrices, tag/caption files, and dataset splits.

Owns the on-disk formats:

* ``EMBMAT01`` binary container: 8-byte magic, u32 rows, u32 dim
  (little-endian), then ``rows*dim`` little-endian float32 values in
  row-major order. Item ids live in a sibling UTF-8 text file, one per
  line (default ``<path>.ids``), so the payload stays loadable without
  any numeric library.
* Tag and caption files are JSONL, one record per line; lines starting
  with ``#`` are header comments and are skipped.
"""
from __future__ import annotations

import json
import random
import struct
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    BadMagic,
    DimMismatch,
    DuplicateId,
    MalformedLine,
    MissingField,
    NonFiniteInput,
    NotEnoughIds,
    ZeroRow,
)

MAGIC = b"EMBMAT01"
NORM_ATOL = 1e-4  # tolerance on row norms for the `normalized` flag


@dataclass
class EmbeddingMatrix:
    """Dense matrix of embedding rows keyed by item id.

    Values are held as float64 in memory (float32 is exactly
    representable, so a load/save round trip is bit-exact) and written
    as float32 on disk.
    """

    ids: list[str]
    values: np.ndarray
    normalized: bool = False

    def __post_init__(self):
        self.values = np.asarray(self.values, dtype=np.float64)
        if self.values.ndim != 2:
            raise DimMismatch(f"expected 2-D matrix, got shape {self.values.shape}")
        if self.values.shape[0] != len(self.ids):
            raise DimMismatch(
                f"{self.values.shape[0]} rows but {len(self.ids)} ids"
            )
        if len(set(self.ids)) != len(self.ids):
            seen = set()
            dup = next(i for i in self.ids if i in seen or seen.add(i))
            raise DuplicateId(f"duplicate id {dup!r}")
        if not np.all(np.isfinite(self.values)):
            raise NonFiniteInput("embedding matrix contains NaN/Inf")
        if self.normalized:
            norms = np.linalg.norm(self.values, axis=1)
            if norms.size and np.max(np.abs(norms - 1.0)) > NORM_ATOL:
                raise ZeroRow("normalized flag set but rows are not unit norm")
        self._index: dict[str, int] | None = None

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def index_of(self, item_id: str) -> int:
        if self._index is None:
            self._index = {i: k for k, i in enumerate(self.ids)}
        try:
            return self._index[item_id]
        except KeyError:
            raise KeyError(f"unknown id {item_id!r}") from None

    def row(self, item_id: str) -> np.ndarray:
        return self.values[self.index_of(item_id)]

    def subset(self, ids) -> "EmbeddingMatrix":
        """New matrix restricted to `ids`, in the given order."""
        idx = [self.index_of(i) for i in ids]
        return EmbeddingMatrix(list(ids), self.values[idx].copy(), self.normalized)

    def save(self, path, ids_path=None) -> None:
        save_embedding_matrix(self, path, ids_path)


def _ids_path_for(path, ids_path=None) -> Path:
    return Path(ids_path) if ids_path is not None else Path(str(path) + ".ids")


def save_embedding_matrix(matrix: EmbeddingMatrix, path, ids_path=None) -> None:
    path = Path(path)
    payload = np.ascontiguousarray(matrix.values, dtype="<f4").tobytes()
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", matrix.rows, matrix.dim))
        fh.write(payload)
    with open(_ids_path_for(path, ids_path), "w", encoding="utf-8") as fh:
        for item_id in matrix.ids:
            fh.write(item_id + "\n")


def load_embedding_matrix(path, ids_path=None) -> EmbeddingMatrix:
    """Load an EMBMAT01 file plus its sidecar id file.

    No normalization is applied; callers opt in via `l2_normalize`.
    """
    path = Path(path)
    blob = path.read_bytes()
    if blob[:8] != MAGIC:
        raise BadMagic(f"{path}: expected {MAGIC!r}, got {blob[:8]!r}")
    if len(blob) < 16:
        raise DimMismatch(f"{path}: truncated header")
    rows, dim = struct.unpack("<II", blob[8:16])
    payload = blob[16:]
    expected = rows * dim * 4
    if len(payload) != expected:
        raise DimMismatch(
            f"{path}: payload is {len(payload)} bytes, expected {expected} "
            f"({rows}x{dim} float32)"
        )
    values = np.frombuffer(payload, dtype="<f4").reshape(rows, dim)
    ids_file = _ids_path_for(path, ids_path)
    ids = ids_file.read_text(encoding="utf-8").splitlines()
    ids = [line for line in ids if line != ""]
    if len(ids) != rows:
        raise DimMismatch(f"{ids_file}: {len(ids)} ids for {rows} rows")
    return EmbeddingMatrix(ids, values)


def l2_normalize(matrix: EmbeddingMatrix) -> EmbeddingMatrix:
    """Divide every row by its L2 norm. Zero rows are a hard error."""
    norms = np.linalg.norm(matrix.values, axis=1)
    if np.any(norms < 1e-12):
        bad = int(np.argmin(norms))
        raise ZeroRow(f"row {bad} (id {matrix.ids[bad]!r}) has norm {norms[bad]:.3g}")
    values = matrix.values / norms[:, None]
    return EmbeddingMatrix(list(matrix.ids), values, normalized=True)


# --- tag and caption JSONL -------------------------------------------------


@dataclass
class TagRecord:
    image_id: str
    tags: list[str]


@dataclass
class CaptionSet:
    image_id: str
    captions: list[str]
    source: str = "human"


def _iter_jsonl(path):
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            try:
                obj = json.loads(stripped)
            except json.JSONDecodeError as exc:
                raise MalformedLine(lineno, str(exc)) from exc
            if not isinstance(obj, dict):
                raise MalformedLine(lineno, "expected a JSON object")
            yield lineno, obj


def _clean_tags(raw_tags) -> list[str]:
    seen = set()
    tags = []
    for tag in raw_tags:
        phrase = str(tag).strip().lower()
        if phrase and phrase not in seen:
            seen.add(phrase)
            tags.append(phrase)
    return tags


def load_tags(path) -> list[TagRecord]:
    """Parse a tag JSONL file; tags are lowercased and deduplicated per image."""
    records = []
    for lineno, obj in _iter_jsonl(path):
        if "image_id" not in obj:
            raise MissingField(f"line {lineno}: missing 'image_id'")
        if "tags" not in obj:
            raise MissingField(f"line {lineno}: missing 'tags'")
        records.append(TagRecord(str(obj["image_id"]), _clean_tags(obj["tags"])))
    return records


def save_tags(records, path, header=None) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        if header:
            fh.write(f"# {header}\n")
        for rec in records:
            fh.write(json.dumps({"image_id": rec.image_id, "tags": rec.tags},
                                ensure_ascii=False) + "\n")


def load_captions(path) -> list[CaptionSet]:
    sets = []
    for lineno, obj in _iter_jsonl(path):
        if "image_id" not in obj:
            raise MissingField(f"line {lineno}: missing 'image_id'")
        if "captions" not in obj:
            raise MissingField(f"line {lineno}: missing 'captions'")
        captions = [str(c) for c in obj["captions"] if str(c).strip()]
        if not captions:
            raise MissingField(f"line {lineno}: empty caption list")
        sets.append(CaptionSet(str(obj["image_id"]), captions,
                               str(obj.get("source", "human"))))
    return sets


def save_captions(sets, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for cs in sets:
            fh.write(json.dumps(
                {"image_id": cs.image_id, "captions": cs.captions, "source": cs.source},
                ensure_ascii=False) + "\n")


# --- dataset splits -----------------------------------------------------------


@dataclass
class DatasetSplit:
    train: list[str]
    val: list[str]
    test: list[str]
    seed: int = 0

    def __post_init__(self):
        pools = [set(self.train), set(self.val), set(self.test)]
        if sum(len(p) for p in pools) != len(pools[0] | pools[1] | pools[2]):
            raise DuplicateId("splits are not pairwise disjoint")


def make_split(ids, seed: int, val_n: int, test_n: int) -> DatasetSplit:
    """Deterministic disjoint train/val/test split.

    Pure function of (ids, seed, sizes); the shuffle uses Python's
    Mersenne Twister so the permutation is stable across platforms.
    """
    ids = list(ids)
    if val_n + test_n > len(ids):
        raise NotEnoughIds(
            f"val_n+test_n = {val_n + test_n} exceeds {len(ids)} available ids"
        )
    order = ids[:]
    random.Random(seed).shuffle(order)
    val = order[:val_n]
    test = order[val_n:val_n + test_n]
    train = order[val_n + test_n:]
    return DatasetSplit(train=train, val=val, test=test, seed=seed)
