"""Filtered ranking evaluation: mean reciprocal rank and hits@k.

For each test triple both the tail and the head are ranked against all
entities by the full two-term score, with candidates that form a known true
triple filtered out. Ties are scored pessimistically: every tied candidate
counts as ranked above the true entity.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .graph import Triple
from .model import EmbeddingModel

HITS_KS = (1, 3, 10)


@dataclass
class LinkPredictionMetrics:
    mrr: float
    hits_at: dict[int, float]


def _rank(scores: np.ndarray, true_id: int, filtered: Iterable[int]) -> int:
    mask = np.ones(scores.size, dtype=bool)
    for i in filtered:
        mask[i] = False
    mask[true_id] = False
    return 1 + int((scores[mask] >= scores[true_id]).sum())


def evaluate_link_prediction(
    model: EmbeddingModel, test: Sequence[Triple], known: Iterable[Triple]
) -> LinkPredictionMetrics:
    """Filtered MRR and hits@{1,3,10} over head and tail rankings."""
    if len(test) == 0:
        raise ValueError("empty test set")
    m = model.n_relations_total // 2

    tails_of: dict[tuple[int, int], list[int]] = {}
    heads_of: dict[tuple[int, int], list[int]] = {}
    for t in known:
        tails_of.setdefault((t.head, t.relation), []).append(t.tail)
        heads_of.setdefault((t.tail, t.relation), []).append(t.head)

    head_m = model.head_vectors
    tail_m = model.tail_vectors
    rel_m = model.relation_vectors

    ranks: list[int] = []
    for t in test:
        model.check_triple(t, original_only=True)
        r_fwd = rel_m[t.relation]
        r_inv = rel_m[t.relation + m]

        # candidate tails i: <h, i(2), r> + <i, h(2), r_inv>
        scores = tail_m @ (head_m[t.head] * r_fwd) + head_m @ (tail_m[t.head] * r_inv)
        ranks.append(_rank(scores, t.tail, tails_of.get((t.head, t.relation), ())))

        # candidate heads i: <i, t(2), r> + <t, i(2), r_inv>
        scores = head_m @ (tail_m[t.tail] * r_fwd) + tail_m @ (head_m[t.tail] * r_inv)
        ranks.append(_rank(scores, t.head, heads_of.get((t.tail, t.relation), ())))

    arr = np.asarray(ranks, dtype=float)
    return LinkPredictionMetrics(
        mrr=float((1.0 / arr).mean()),
        hits_at={k: float((arr <= k).mean()) for k in HITS_KS},
    )
