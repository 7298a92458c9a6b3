import numpy as np
import pytest

from kgsq.graph import Vocabulary
from kgsq.model import EmbeddingModel, ModelConfig

TINY_LINES = [
    "AuthorA\twrite\tPaper1",
    "AuthorB\twrite\tPaper1",
    "Paper1\tcite\tPaper2",
    "AuthorA\twrite\tPaper2",
    "Paper2\tcite\tPaper3",
    "AuthorB\twrite\tPaper3",
    "Paper1\tin\tVenueX",
    "Paper2\tin\tVenueX",
    "Paper3\tin\tVenueY",
    "AuthorC\twrite\tPaper3",
]

TINY_TYPE_LINES = [
    "AuthorA\tauthor",
    "AuthorB\tauthor",
    "AuthorC\tauthor",
    "Paper1\tpaper",
    "Paper2\tpaper",
    "Paper3\tpaper",
    "VenueX\tvenue",
    "VenueY\tvenue",
]


def make_model(
    n_entities: int,
    n_relations: int,
    dim: int,
    seed: int = 0,
    scale: float = 1.0,
    types: dict[int, str] | None = None,
    **config_kwargs,
) -> EmbeddingModel:
    """A random model without going through a graph, for unit fixtures."""
    rng = np.random.default_rng(seed)
    vocab = Vocabulary(
        [f"e{i}" for i in range(n_entities)],
        [f"r{j}" for j in range(n_relations)],
        dict(types or {}),
    )
    config = ModelConfig(dim=dim, **config_kwargs)
    return EmbeddingModel(
        rng.normal(0.0, scale, (n_entities, dim)),
        rng.normal(0.0, scale, (n_entities, dim)),
        rng.normal(0.0, scale, (2 * n_relations, dim)),
        config,
        vocab,
    )


@pytest.fixture
def tiny_lines():
    return list(TINY_LINES)


@pytest.fixture
def tiny_type_lines():
    return list(TINY_TYPE_LINES)


@pytest.fixture
def tiny_graph(tiny_lines):
    from kgsq.graph import ingest_triples

    return ingest_triples(tiny_lines)
