"""Algebraic semantic queries over head-role embedding vectors.

Similarity is the raw dot product and a semantic direction is a vector
difference. Every ranked operation scores all candidates against a single
query point: the anchor vector, optionally shifted by the mean of a positive
bias set minus the mean of a negative bias set. Tail-role vectors are never
read here.
"""

from __future__ import annotations

import uuid
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .model import EmbeddingModel


@dataclass(frozen=True)
class QuerySpec:
    """A semantic query: anchor entity, bias sets, result count, and filters.

    With ``exclude`` on (the default), the anchor and all bias entities are
    removed from the candidate pool. ``type_filter=None`` admits every
    entity; a label admits only entities tagged with exactly that label.
    """

    anchor: int
    positives: tuple[int, ...] = ()
    negatives: tuple[int, ...] = ()
    k: int = 10
    type_filter: str | None = None
    exclude: bool = True

    def __post_init__(self):
        object.__setattr__(self, "positives", tuple(self.positives))
        object.__setattr__(self, "negatives", tuple(self.negatives))
        if self.k < 1:
            raise ValueError(f"k must be >= 1, got {self.k}")


@dataclass
class RankedList:
    """Scored entities, scores non-increasing, ties broken by id ascending."""

    entries: list[tuple[int, float]]

    def ids(self) -> list[int]:
        return [e for e, _ in self.entries]

    def __len__(self) -> int:
        return len(self.entries)


@dataclass
class BrowseStep:
    spec: QuerySpec
    results: RankedList
    prev_anchor: np.ndarray  # snapshot for bit-exact back-navigation


@dataclass
class BrowseSession:
    """Mutable exploration state: current query point plus the step history."""

    session_id: str
    anchor_entity: int
    anchor_vector: np.ndarray
    trail: list[BrowseStep] = field(default_factory=list)

    def bias_ids(self) -> set[int]:
        """Original anchor plus every entity used as a bias so far."""
        ids = {self.anchor_entity}
        for step in self.trail:
            ids.update(step.spec.positives)
            ids.update(step.spec.negatives)
        return ids


def sim(a: np.ndarray, b: np.ndarray) -> float:
    """Dot-product similarity between two embedding vectors."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"sim needs two equal-length vectors, got {a.shape} and {b.shape}")
    return float(a @ b)


def direction(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Semantic direction from b to a: the vector difference a - b."""
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError(f"direction needs two equal-length vectors, got {a.shape} and {b.shape}")
    return a - b


def _check_ids(model: EmbeddingModel, ids: Sequence[int]) -> None:
    n = model.n_entities
    for i in ids:
        if not 0 <= i < n:
            raise ValueError(f"entity id {i} out of range [0, {n})")


def mean_vector(ids: Sequence[int], model: EmbeddingModel) -> np.ndarray:
    """Component-wise mean of head-role vectors; empty input gives the 0-vector."""
    _check_ids(model, ids)
    if len(ids) == 0:
        return np.zeros(model.dim, dtype=model.head_vectors.dtype)
    return model.head_vectors[list(ids)].mean(axis=0)


def rank_candidates(
    model: EmbeddingModel,
    query_vector: np.ndarray,
    k: int,
    exclude_ids: set[int] | frozenset[int] = frozenset(),
    type_filter: str | None = None,
) -> RankedList:
    """Top-k entities by dot product with the query point (exact, brute force)."""
    scores = model.head_vectors @ np.asarray(query_vector)
    eligible = np.ones(model.n_entities, dtype=bool)
    for i in exclude_ids:
        eligible[i] = False
    if type_filter is not None:
        types = model.vocabulary.entity_types
        for i in np.flatnonzero(eligible):
            if types.get(int(i)) != type_filter:
                eligible[i] = False
    idx = np.flatnonzero(eligible)
    # score descending, entity id ascending on ties
    order = np.lexsort((idx, -scores[idx]))[:k]
    return RankedList([(int(idx[j]), float(scores[idx[j]])) for j in order])


def _query_point(model: EmbeddingModel, spec: QuerySpec) -> np.ndarray:
    anchor_vec = model.head_vectors[spec.anchor]
    return mean_vector(spec.positives, model) - mean_vector(spec.negatives, model) + anchor_vec


def _exclusion(spec: QuerySpec) -> set[int]:
    if not spec.exclude:
        return set()
    return {spec.anchor, *spec.positives, *spec.negatives}


def analogy_query(spec: QuerySpec, model: EmbeddingModel) -> RankedList:
    """Rank by similarity to (mean positives - mean negatives + anchor)."""
    _check_ids(model, (spec.anchor,))
    return rank_candidates(
        model, _query_point(model, spec), spec.k, _exclusion(spec), spec.type_filter
    )


def similar_with_bias(spec: QuerySpec, model: EmbeddingModel) -> RankedList:
    """Rank by similarity to (mean positives + anchor); negatives must be empty."""
    if spec.negatives:
        raise ValueError("similar_with_bias takes no negative bias entities")
    return analogy_query(spec, model)


def similar_entities(spec: QuerySpec, model: EmbeddingModel) -> RankedList:
    """Rank by similarity to the anchor vector alone; biases must be empty."""
    if spec.positives or spec.negatives:
        raise ValueError("similar_entities takes no bias entities")
    return analogy_query(spec, model)


def browse_start(anchor: int, model: EmbeddingModel) -> BrowseSession:
    """Open a session anchored at an entity's head-role vector."""
    _check_ids(model, (anchor,))
    return BrowseSession(
        session_id=uuid.uuid4().hex,
        anchor_entity=anchor,
        anchor_vector=model.head_vectors[anchor].copy(),
    )


def browse_step(
    session: BrowseSession,
    model: EmbeddingModel,
    positives: Sequence[int] = (),
    negatives: Sequence[int] = (),
    k: int = 10,
    type_filter: str | None = None,
) -> tuple[BrowseSession, RankedList]:
    """Shift the session's query point by (mean positives - mean negatives).

    Results are ranked around the shifted point, excluding the original
    anchor and every bias entity used anywhere in the trail. On error the
    session is left unchanged.
    """
    spec = QuerySpec(
        anchor=session.anchor_entity,
        positives=tuple(positives),
        negatives=tuple(negatives),
        k=k,
        type_filter=type_filter,
    )
    _check_ids(model, spec.positives)
    _check_ids(model, spec.negatives)

    delta = mean_vector(spec.positives, model) - mean_vector(spec.negatives, model)
    new_anchor = session.anchor_vector + delta
    exclude = session.bias_ids() | set(spec.positives) | set(spec.negatives)
    results = rank_candidates(model, new_anchor, k, exclude, type_filter)

    session.trail.append(BrowseStep(spec, results, prev_anchor=session.anchor_vector))
    session.anchor_vector = new_anchor
    return session, results


def browse_back(session: BrowseSession) -> BrowseSession:
    """Pop the last step, restoring the previous query point bit-exactly."""
    if not session.trail:
        raise ValueError("at session start")
    step = session.trail.pop()
    session.anchor_vector = step.prev_anchor
    return session


def results_payload(model: EmbeddingModel, ranked: RankedList) -> list[dict]:
    """JSON-ready result rows shared by the CLI and the HTTP service."""
    vocab = model.vocabulary
    return [
        {"entity": vocab.entity_names[eid], "type": vocab.type_of(eid), "score": score}
        for eid, score in ranked.entries
    ]
