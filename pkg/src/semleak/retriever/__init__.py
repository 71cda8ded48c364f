from .losses import ContrastiveLoss, RankGroup, contrastive_loss, contrastive_loss_grad, ranker_loss, ranker_loss_grad, select_hard_negatives
from .model import (
    RetrieverModel,
    TrainConfig,
    init_retriever,
    interaction_features,
    load_retriever,
    pairwise_features,
    project,
    ranker_score,
    save_retriever,
    similarities,
)
from .retrieval import RetrievalResult, batch_retrieve, retrieve_topk
from .train import train_projections, train_ranker
from .vocab import TagVocabulary

__all__ = [
    "ContrastiveLoss",
    "RankGroup",
    "RetrievalResult",
    "RetrieverModel",
    "TagVocabulary",
    "TrainConfig",
    "batch_retrieve",
    "contrastive_loss",
    "contrastive_loss_grad",
    "init_retriever",
    "interaction_features",
    "load_retriever",
    "pairwise_features",
    "project",
    "ranker_loss",
    "ranker_loss_grad",
    "ranker_score",
    "retrieve_topk",
    "save_retriever",
    "select_hard_negatives",
    "similarities",
    "train_projections",
    "train_ranker",
]
