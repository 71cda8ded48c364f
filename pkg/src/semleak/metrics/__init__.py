from .neighborhood import (
    PRF,
    NeighborhoodIndex,
    NeighborhoodReport,
    exact_retrieval_prf,
    neighborhood_prf,
    semantic_neighborhood,
)
from .scene import PREDICATES, StructuredScene, lemma_phrase, singular_noun, structured_f1
from .stem import porter_stem
from .text import (
    METRICS,
    TOKENIZER_VERSION,
    TextScore,
    best_match_score,
    bleu4,
    meteor,
    rouge1,
    rouge2,
    rougeL,
    tokenize,
)

__all__ = [
    "METRICS",
    "PREDICATES",
    "PRF",
    "NeighborhoodIndex",
    "NeighborhoodReport",
    "StructuredScene",
    "TOKENIZER_VERSION",
    "TextScore",
    "best_match_score",
    "bleu4",
    "exact_retrieval_prf",
    "lemma_phrase",
    "meteor",
    "neighborhood_prf",
    "porter_stem",
    "rouge1",
    "rouge2",
    "rougeL",
    "semantic_neighborhood",
    "singular_noun",
    "structured_f1",
    "tokenize",
]
