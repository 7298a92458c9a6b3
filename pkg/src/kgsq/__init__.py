"""Knowledge-graph embeddings with an algebraic semantic-query engine."""

from .evaluate import LinkPredictionMetrics, evaluate_link_prediction
from .graph import (
    GraphError,
    KnowledgeGraph,
    ParseError,
    Triple,
    UnknownEntityError,
    UnknownRelationError,
    Vocabulary,
    augment,
    ingest_entity_types,
    ingest_triples,
    render_triples,
    split_holdout,
    strip_augmentation,
)
from .model import (
    EmbeddingModel,
    ModelConfig,
    init_model,
    prob_valid,
    score_directed,
    score_full,
    trilinear,
)
from .query import (
    BrowseSession,
    QuerySpec,
    RankedList,
    analogy_query,
    browse_back,
    browse_start,
    browse_step,
    direction,
    mean_vector,
    rank_candidates,
    sim,
    similar_entities,
    similar_with_bias,
)
from .store import ModelFormatError, load_model, load_model_file, save_model, save_model_file
from .training import SparseGrads, TrainingError, loss_and_grads, train

__version__ = "0.1.0"

__all__ = [
    "EmbeddingModel",
    "GraphError",
    "KnowledgeGraph",
    "LinkPredictionMetrics",
    "ModelConfig",
    "ModelFormatError",
    "ParseError",
    "QuerySpec",
    "RankedList",
    "BrowseSession",
    "SparseGrads",
    "TrainingError",
    "Triple",
    "UnknownEntityError",
    "UnknownRelationError",
    "Vocabulary",
    "analogy_query",
    "augment",
    "browse_back",
    "browse_start",
    "browse_step",
    "direction",
    "evaluate_link_prediction",
    "ingest_entity_types",
    "ingest_triples",
    "init_model",
    "load_model",
    "load_model_file",
    "loss_and_grads",
    "mean_vector",
    "prob_valid",
    "rank_candidates",
    "render_triples",
    "save_model",
    "save_model_file",
    "score_directed",
    "score_full",
    "sim",
    "similar_entities",
    "similar_with_bias",
    "split_holdout",
    "strip_augmentation",
    "train",
    "trilinear",
]
