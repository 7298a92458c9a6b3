"""Embedding model with two vectors per entity and trilinear scoring.

Each entity owns a head-role and a tail-role vector; each relation (original
and inverse) owns one vector. The full score of an original triple is the sum
of two directed trilinear terms, one through the original relation and one
through its inverse.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .graph import GraphError, KnowledgeGraph, Triple, Vocabulary

OPTIMIZERS = ("sgd", "adagrad")


@dataclass(frozen=True)
class ModelConfig:
    dim: int = 32
    init_scale: float = 0.1
    lr: float = 0.05
    n_neg: int = 5
    epochs: int = 100
    l2: float = 0.0
    seed: int = 0
    optimizer: str = "sgd"
    batch_size: int = 128

    def __post_init__(self):
        if self.dim < 1:
            raise ValueError(f"dim must be >= 1, got {self.dim}")
        if not self.init_scale > 0:
            raise ValueError(f"init_scale must be > 0, got {self.init_scale}")
        if not self.lr > 0:
            raise ValueError(f"lr must be > 0, got {self.lr}")
        if self.n_neg < 0:
            raise ValueError(f"n_neg must be >= 0, got {self.n_neg}")
        if self.epochs < 0:
            raise ValueError(f"epochs must be >= 0, got {self.epochs}")
        if self.l2 < 0:
            raise ValueError(f"l2 must be >= 0, got {self.l2}")
        if self.optimizer not in OPTIMIZERS:
            raise ValueError(f"optimizer must be one of {OPTIMIZERS}, got {self.optimizer!r}")
        if self.batch_size < 1:
            raise ValueError(f"batch_size must be >= 1, got {self.batch_size}")


@dataclass(eq=False)
class EmbeddingModel:
    head_vectors: np.ndarray      # N x D
    tail_vectors: np.ndarray      # N x D
    relation_vectors: np.ndarray  # 2M x D
    config: ModelConfig
    vocabulary: Vocabulary

    @property
    def n_entities(self) -> int:
        return self.head_vectors.shape[0]

    @property
    def n_relations_total(self) -> int:
        return self.relation_vectors.shape[0]

    @property
    def dim(self) -> int:
        return self.head_vectors.shape[1]

    def check_triple(self, t: Triple, original_only: bool = False) -> None:
        n, r_max = self.n_entities, self.n_relations_total
        if original_only:
            r_max //= 2
        if not 0 <= t.head < n:
            raise ValueError(f"head id {t.head} out of range [0, {n})")
        if not 0 <= t.tail < n:
            raise ValueError(f"tail id {t.tail} out of range [0, {n})")
        if not 0 <= t.relation < r_max:
            raise ValueError(f"relation id {t.relation} out of range [0, {r_max})")


def init_model(graph: KnowledgeGraph, config: ModelConfig) -> EmbeddingModel:
    """Gaussian(0, init_scale^2) initialization, deterministic per seed."""
    if not graph.augmented:
        raise GraphError("model initialization requires an augmented graph")
    vocab = graph.vocabulary
    if vocab.n_entities == 0 or vocab.n_relations == 0:
        raise GraphError("empty vocabulary")
    rng = np.random.default_rng(config.seed)
    n, d = vocab.n_entities, config.dim
    head = rng.normal(0.0, config.init_scale, (n, d))
    tail = rng.normal(0.0, config.init_scale, (n, d))
    rel = rng.normal(0.0, config.init_scale, (2 * vocab.n_relations, d))
    return EmbeddingModel(head, tail, rel, config, vocab)


def trilinear(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Sum over dimensions of the element-wise product of three vectors."""
    a, b, c = np.asarray(a), np.asarray(b), np.asarray(c)
    if not (a.shape == b.shape == c.shape) or a.ndim != 1:
        raise ValueError(f"trilinear needs three equal-length vectors, got shapes {a.shape}, {b.shape}, {c.shape}")
    return float((a * b * c).sum())


def score_directed(model: EmbeddingModel, t: Triple) -> float:
    """One directed trilinear term; the relation may be an inverse (id >= M)."""
    model.check_triple(t)
    return trilinear(
        model.head_vectors[t.head],
        model.tail_vectors[t.tail],
        model.relation_vectors[t.relation],
    )


def score_full(model: EmbeddingModel, t: Triple) -> float:
    """Directed term plus the inverse-relation term, for an original triple."""
    model.check_triple(t, original_only=True)
    m = model.n_relations_total // 2
    return score_directed(model, t) + score_directed(
        model, Triple(t.tail, t.head, t.relation + m)
    )


def prob_valid(score: float) -> float:
    """Logistic validity probability; sign-split so large |score| cannot overflow."""
    if math.isnan(score):
        raise ValueError("score is NaN")
    if score >= 0:
        return 1.0 / (1.0 + math.exp(-score))
    z = math.exp(score)
    return z / (1.0 + z)
