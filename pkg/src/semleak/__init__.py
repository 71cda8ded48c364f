"""semleak — measure semantic leakage from shared image embeddings.

The toolkit aligns a victim embedding space onto an attack space with a
one-step least-squares map, retrieves relational tags with a locally
trained contrastive retriever and interaction ranker, quantifies how well
semantic neighborhoods survive the mapping, and drives offline-replayable
LLM/VLM caption and scene-graph inference attacks with full evaluation.
"""

from . import align, clients, errors, metrics, retriever, store
from .align import AlignmentMap, alignment_cosine, apply_alignment, fit_alignment
from .store import (
    CaptionSet,
    DatasetSplit,
    EmbeddingMatrix,
    TagRecord,
    l2_normalize,
    load_captions,
    load_embedding_matrix,
    load_tags,
    make_split,
    save_embedding_matrix,
)

__version__ = "0.1.0"

__all__ = [
    "AlignmentMap",
    "CaptionSet",
    "DatasetSplit",
    "EmbeddingMatrix",
    "TagRecord",
    "align",
    "alignment_cosine",
    "apply_alignment",
    "clients",
    "errors",
    "fit_alignment",
    "l2_normalize",
    "load_captions",
    "load_embedding_matrix",
    "load_tags",
    "make_split",
    "metrics",
    "retriever",
    "save_embedding_matrix",
    "store",
]
