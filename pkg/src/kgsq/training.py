"""Negative-sampled logistic-loss training with sparse per-row updates.

Training operates on the directed triples of an augmented graph, scoring one
trilinear term per example. Negatives corrupt the head and the tail of each
positive uniformly over entities. The negatives for a positive are derived
from (call salt, triple), so a duplicated positive contributes an identical
loss term and the batch mean is duplication-invariant.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .graph import GraphError, KnowledgeGraph, Triple
from .model import EmbeddingModel, ModelConfig, init_model

_TRAIN_STREAM = 0x747261696E  # decorrelates the training PRNG from init_model's
_ADAGRAD_EPS = 1e-10

ProgressSink = Callable[[int, float], None]


class TrainingError(RuntimeError):
    """Training aborted (non-finite loss)."""


@dataclass
class SparseGrads:
    """Gradients for the rows a batch touched, keyed by row id per matrix."""

    head: dict[int, np.ndarray] = field(default_factory=dict)
    tail: dict[int, np.ndarray] = field(default_factory=dict)
    relation: dict[int, np.ndarray] = field(default_factory=dict)


def _sigmoid(x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def _negatives_for(
    positive: Triple, salt: int, n_neg: int, n_entities: int
) -> tuple[np.ndarray, np.ndarray]:
    """Corrupted-head and corrupted-tail entity ids for one positive."""
    rng = np.random.default_rng(
        (salt, positive.head, positive.relation, positive.tail)
    )
    return rng.integers(0, n_entities, n_neg), rng.integers(0, n_entities, n_neg)


def _scatter(
    ids: np.ndarray, grads: np.ndarray, matrix: np.ndarray, l2: float
) -> tuple[dict[int, np.ndarray], float]:
    """Accumulate per-example gradients into unique rows; add the L2 part."""
    uniq, inverse = np.unique(ids, return_inverse=True)
    acc = np.zeros((uniq.size, matrix.shape[1]))
    np.add.at(acc, inverse, grads)
    penalty = 0.0
    if l2:
        touched = matrix[uniq]
        acc += 2.0 * l2 * touched
        penalty = l2 * float((touched * touched).sum())
    return dict(zip(uniq.tolist(), acc)), penalty


def loss_and_grads(
    model: EmbeddingModel, positives: Sequence[Triple], rng: np.random.Generator
) -> tuple[float, SparseGrads]:
    """Mean binary cross-entropy over positives and their sampled negatives.

    Returns the loss (data mean plus l2 * squared norm of touched rows) and
    sparse gradients for exactly the rows the batch references. Deterministic
    for a fixed generator state.
    """
    if len(positives) == 0:
        raise ValueError("empty batch")
    salt = int(rng.integers(0, 2**63))
    n_neg = model.config.n_neg
    n = model.n_entities

    heads: list[int] = []
    tails: list[int] = []
    rels: list[int] = []
    labels: list[float] = []
    for t in positives:
        model.check_triple(t)
        heads.append(t.head)
        tails.append(t.tail)
        rels.append(t.relation)
        labels.append(1.0)
        if n_neg:
            neg_heads, neg_tails = _negatives_for(t, salt, n_neg, n)
            for h in neg_heads:
                heads.append(int(h))
                tails.append(t.tail)
                rels.append(t.relation)
                labels.append(0.0)
            for tl in neg_tails:
                heads.append(t.head)
                tails.append(int(tl))
                rels.append(t.relation)
                labels.append(0.0)

    h_idx = np.asarray(heads)
    t_idx = np.asarray(tails)
    r_idx = np.asarray(rels)
    y = np.asarray(labels)
    n_examples = y.size

    h_rows = model.head_vectors[h_idx]
    t_rows = model.tail_vectors[t_idx]
    r_rows = model.relation_vectors[r_idx]
    scores = np.einsum("ij,ij,ij->i", h_rows, t_rows, r_rows)

    # -log sigma(s) for positives, -log sigma(-s) for negatives
    data_loss = float(np.logaddexp(0.0, (1.0 - 2.0 * y) * scores).mean())
    coef = ((_sigmoid(scores) - y) / n_examples)[:, None]

    l2 = model.config.l2
    grads = SparseGrads()
    grads.head, p_h = _scatter(h_idx, coef * t_rows * r_rows, model.head_vectors, l2)
    grads.tail, p_t = _scatter(t_idx, coef * h_rows * r_rows, model.tail_vectors, l2)
    grads.relation, p_r = _scatter(r_idx, coef * h_rows * t_rows, model.relation_vectors, l2)
    return data_loss + p_h + p_t + p_r, grads


class _Sgd:
    def __init__(self, config: ModelConfig, model: EmbeddingModel):
        self.lr = config.lr

    def apply(self, model: EmbeddingModel, grads: SparseGrads) -> None:
        for matrix, rows in (
            (model.head_vectors, grads.head),
            (model.tail_vectors, grads.tail),
            (model.relation_vectors, grads.relation),
        ):
            for row, g in rows.items():
                matrix[row] -= self.lr * g


class _Adagrad:
    """Per-entry accumulated squared gradients, updated only on touched rows."""

    def __init__(self, config: ModelConfig, model: EmbeddingModel):
        self.lr = config.lr
        self.sums = (
            np.zeros_like(model.head_vectors),
            np.zeros_like(model.tail_vectors),
            np.zeros_like(model.relation_vectors),
        )

    def apply(self, model: EmbeddingModel, grads: SparseGrads) -> None:
        matrices = (model.head_vectors, model.tail_vectors, model.relation_vectors)
        for matrix, acc, rows in zip(
            matrices, self.sums, (grads.head, grads.tail, grads.relation)
        ):
            for row, g in rows.items():
                acc[row] += g * g
                matrix[row] -= self.lr * g / (np.sqrt(acc[row]) + _ADAGRAD_EPS)


_OPTIMIZER_IMPLS = {"sgd": _Sgd, "adagrad": _Adagrad}


def train(
    graph: KnowledgeGraph,
    config: ModelConfig,
    progress_sink: ProgressSink | None = None,
) -> EmbeddingModel:
    """Train by SGD over shuffled directed triples; pure function of (graph, config).

    Emits (epoch, mean loss) per epoch through progress_sink. With epochs=0
    the initialized model is returned unchanged.
    """
    if not graph.augmented:
        raise GraphError("training requires an augmented graph")
    model = init_model(graph, config)
    if config.epochs == 0:
        return model

    rng = np.random.default_rng((config.seed, _TRAIN_STREAM))
    optimizer = _OPTIMIZER_IMPLS[config.optimizer](config, model)
    triples = graph.triples

    for epoch in range(1, config.epochs + 1):
        order = rng.permutation(len(triples))
        total = 0.0
        for batch_no, start in enumerate(range(0, len(triples), config.batch_size)):
            batch = [triples[i] for i in order[start : start + config.batch_size]]
            loss, grads = loss_and_grads(model, batch, rng)
            if not math.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss {loss} at epoch {epoch}, batch {batch_no}"
                )
            optimizer.apply(model, grads)
            total += loss * len(batch)
        if progress_sink is not None:
            progress_sink(epoch, total / len(triples))
    return model
