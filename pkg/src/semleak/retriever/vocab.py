"""Tag vocabulary: unique tag phrases, their embeddings, and image membership."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..errors import EmptyPositives, UnknownTag
from ..store import EmbeddingMatrix, l2_normalize


@dataclass
class TagVocabulary:
    """N unique tag phrases with unit-norm embeddings and per-image membership.

    `membership` maps image_id -> sorted array of tag indices; it is the
    sparse form of the binary image-by-tag matrix used by the losses.
    """

    tags: list[str]
    embeddings: EmbeddingMatrix
    membership: dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if len(self.tags) != self.embeddings.rows:
            raise UnknownTag(
                f"{len(self.tags)} tags but {self.embeddings.rows} embedding rows"
            )
        if not self.embeddings.normalized:
            self.embeddings = l2_normalize(self.embeddings)
        self._tag_index = {t: i for i, t in enumerate(self.tags)}
        self.membership = {
            k: np.asarray(sorted(set(np.asarray(v, dtype=int).tolist())), dtype=int)
            for k, v in self.membership.items()
        }

    @classmethod
    def build(cls, records, tag_embeddings: EmbeddingMatrix) -> "TagVocabulary":
        """Vocabulary from training TagRecords plus a tag-embedding matrix.

        Every tag in the records must have an embedding row (keyed by the
        tag phrase itself); each training record must carry at least one tag.
        """
        tags = sorted({tag for rec in records for tag in rec.tags})
        emb_ids = set(tag_embeddings.ids)
        missing = [t for t in tags if t not in emb_ids]
        if missing:
            raise UnknownTag(f"{len(missing)} tags lack embeddings, e.g. {missing[0]!r}")
        embeddings = tag_embeddings.subset(tags)
        index = {t: i for i, t in enumerate(tags)}
        membership = {}
        for rec in records:
            if not rec.tags:
                raise EmptyPositives(rec.image_id, axis="image")
            membership[rec.image_id] = np.asarray(
                sorted(index[t] for t in set(rec.tags)), dtype=int
            )
        return cls(tags=tags, embeddings=embeddings, membership=membership)

    @property
    def size(self) -> int:
        return len(self.tags)

    def tag_index(self, tag: str) -> int:
        try:
            return self._tag_index[tag]
        except KeyError:
            raise UnknownTag(f"unknown tag {tag!r}") from None

    def positives(self, image_id: str) -> np.ndarray:
        if image_id not in self.membership:
            raise EmptyPositives(image_id, axis="image")
        return self.membership[image_id]

    def tags_of(self, image_id: str) -> list[str]:
        return [self.tags[i] for i in self.positives(image_id)]

    def membership_matrix(self, image_ids, tag_indices=None) -> np.ndarray:
        """Dense 0/1 matrix over (image_ids x tag_indices)."""
        cols = np.asarray(
            tag_indices if tag_indices is not None else np.arange(self.size), dtype=int
        )
        col_pos = {int(c): j for j, c in enumerate(cols)}
        M = np.zeros((len(image_ids), len(cols)))
        for r, image_id in enumerate(image_ids):
            for t in self.positives(image_id):
                j = col_pos.get(int(t))
                if j is not None:
                    M[r, j] = 1.0
        return M
