"""Triple-file ingestion, integer vocabularies, and inverse-relation augmentation.

The on-disk format is one triple per line, ``head<TAB>relation<TAB>tail``,
UTF-8, lines starting with ``#`` ignored. Ids are assigned by first
appearance, so a graph is a deterministic function of its input bytes.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field, replace
from typing import Iterable, Iterator


class ParseError(ValueError):
    """Malformed line in a triple or entity-type file."""

    def __init__(self, message: str, line_no: int):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class GraphError(ValueError):
    """A graph-level precondition was violated."""


class UnknownEntityError(LookupError):
    """An entity name is absent from the vocabulary."""

    def __init__(self, name: str):
        super().__init__(f"unknown entity: {name!r}")
        self.name = name


class UnknownRelationError(LookupError):
    """A relation name is absent from the vocabulary."""

    def __init__(self, name: str):
        super().__init__(f"unknown relation: {name!r}")
        self.name = name


@dataclass(frozen=True)
class Triple:
    head: int
    tail: int
    relation: int


@dataclass
class Vocabulary:
    """String names for entities and original relations, plus optional type tags.

    ``entity_types`` maps entity id to a single type label; untyped entities
    are simply absent from the map.
    """

    entity_names: list[str]
    relation_names: list[str]
    entity_types: dict[int, str] = field(default_factory=dict)

    _entity_ids: dict[str, int] = field(init=False, repr=False, compare=False)
    _relation_ids: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        self._entity_ids = {name: i for i, name in enumerate(self.entity_names)}
        self._relation_ids = {name: i for i, name in enumerate(self.relation_names)}
        if len(self._entity_ids) != len(self.entity_names):
            raise GraphError("duplicate entity names in vocabulary")
        if len(self._relation_ids) != len(self.relation_names):
            raise GraphError("duplicate relation names in vocabulary")

    @property
    def n_entities(self) -> int:
        return len(self.entity_names)

    @property
    def n_relations(self) -> int:
        """Number of original relations (before augmentation)."""
        return len(self.relation_names)

    def entity_id(self, name: str) -> int:
        try:
            return self._entity_ids[name]
        except KeyError:
            raise UnknownEntityError(name) from None

    def relation_id(self, name: str) -> int:
        try:
            return self._relation_ids[name]
        except KeyError:
            raise UnknownRelationError(name) from None

    def type_of(self, entity_id: int) -> str | None:
        return self.entity_types.get(entity_id)


@dataclass
class KnowledgeGraph:
    vocabulary: Vocabulary
    triples: list[Triple]
    augmented: bool = False
    duplicates_dropped: int = 0

    @property
    def n_relations_total(self) -> int:
        """Relation id space: 2M once augmented, M before."""
        m = self.vocabulary.n_relations
        return 2 * m if self.augmented else m


def _fields(raw_line: str, line_no: int, n_fields: int) -> list[str]:
    line = raw_line.rstrip("\n").rstrip("\r")
    fields = line.split("\t")
    if len(fields) != n_fields:
        raise ParseError(
            f"expected {n_fields} tab-separated fields, got {len(fields)}", line_no
        )
    for f in fields:
        if not f:
            raise ParseError("empty field", line_no)
    return fields


def _skip(raw_line: str) -> bool:
    stripped = raw_line.strip()
    return not stripped or stripped.startswith("#")


def parse_triple_lines(lines: Iterable[str]) -> Iterator[tuple[str, str, str]]:
    """Yield (head, relation, tail) name fields without building a vocabulary."""
    for line_no, raw in enumerate(lines, start=1):
        if _skip(raw):
            continue
        head_s, rel_s, tail_s = _fields(raw, line_no, 3)
        yield head_s, rel_s, tail_s


def ingest_triples(lines: Iterable[str]) -> KnowledgeGraph:
    """Parse ``head<TAB>relation<TAB>tail`` lines into an un-augmented graph.

    Ids are assigned by first appearance scanning each line left to right;
    duplicate triples are dropped and counted in ``duplicates_dropped``.
    Blank lines and ``#`` comments are skipped.
    """
    entity_ids: dict[str, int] = {}
    relation_ids: dict[str, int] = {}
    triples: list[Triple] = []
    seen: set[tuple[int, int, int]] = set()
    duplicates = 0

    for head_s, rel_s, tail_s in parse_triple_lines(lines):
        head = entity_ids.setdefault(head_s, len(entity_ids))
        rel = relation_ids.setdefault(rel_s, len(relation_ids))
        tail = entity_ids.setdefault(tail_s, len(entity_ids))
        key = (head, tail, rel)
        if key in seen:
            duplicates += 1
            continue
        seen.add(key)
        triples.append(Triple(head, tail, rel))

    if not triples:
        raise GraphError("no triples")

    vocab = Vocabulary(list(entity_ids), list(relation_ids))
    return KnowledgeGraph(vocab, triples, augmented=False, duplicates_dropped=duplicates)


def ingest_entity_types(lines: Iterable[str], graph: KnowledgeGraph) -> KnowledgeGraph:
    """Attach ``entity<TAB>type`` labels to an existing graph.

    Every entity named in the file must already be in the vocabulary; the
    last label wins if an entity is listed twice.
    """
    types = dict(graph.vocabulary.entity_types)
    for line_no, raw in enumerate(lines, start=1):
        if _skip(raw):
            continue
        name, label = _fields(raw, line_no, 2)
        try:
            eid = graph.vocabulary.entity_id(name)
        except UnknownEntityError:
            raise GraphError(f"line {line_no}: unknown entity {name!r}") from None
        types[eid] = label

    vocab = Vocabulary(
        list(graph.vocabulary.entity_names),
        list(graph.vocabulary.relation_names),
        types,
    )
    return replace(graph, vocabulary=vocab)


def augment(graph: KnowledgeGraph) -> KnowledgeGraph:
    """Add the inverse triple (t, h, r+M) for every original (h, t, r).

    Original triples keep their positions; inverses are appended in the same
    order. The relation id space doubles from M to 2M.
    """
    if graph.augmented:
        raise GraphError("graph is already augmented")
    if not graph.triples:
        raise GraphError("no triples")
    m = graph.vocabulary.n_relations
    inverses = [Triple(t.tail, t.head, t.relation + m) for t in graph.triples]
    return replace(graph, triples=graph.triples + inverses, augmented=True)


def strip_augmentation(graph: KnowledgeGraph) -> KnowledgeGraph:
    """Inverse of :func:`augment`: drop relations >= M and clear the flag."""
    if not graph.augmented:
        raise GraphError("graph is not augmented")
    m = graph.vocabulary.n_relations
    originals = [t for t in graph.triples if t.relation < m]
    return replace(graph, triples=originals, augmented=False)


def render_triples(graph: KnowledgeGraph) -> Iterator[str]:
    """Yield original triples back as tab-separated lines (round-trip safe)."""
    vocab = graph.vocabulary
    m = vocab.n_relations
    for t in graph.triples:
        if t.relation >= m:
            continue
        yield (
            f"{vocab.entity_names[t.head]}\t"
            f"{vocab.relation_names[t.relation]}\t"
            f"{vocab.entity_names[t.tail]}"
        )


def split_holdout(
    graph: KnowledgeGraph, fraction: float, seed: int
) -> tuple[KnowledgeGraph, list[Triple]]:
    """Split an un-augmented graph into a train graph and held-out test triples.

    Deterministic for a fixed seed. A triple is only eligible for the test
    set if removing it leaves all of its entities and its relation with at
    least one remaining occurrence in train.
    """
    if graph.augmented:
        raise GraphError("split requires an un-augmented graph")
    if not 0.0 < fraction < 1.0:
        raise GraphError(f"holdout fraction must be in (0, 1), got {fraction}")
    n = len(graph.triples)
    if fraction * n < 1.0:
        raise GraphError(f"holdout fraction {fraction} selects no triples out of {n}")
    n_test = int(fraction * n)

    entity_count: dict[int, int] = {}
    relation_count: dict[int, int] = {}
    for t in graph.triples:
        entity_count[t.head] = entity_count.get(t.head, 0) + 1
        entity_count[t.tail] = entity_count.get(t.tail, 0) + 1
        relation_count[t.relation] = relation_count.get(t.relation, 0) + 1

    order = list(range(n))
    random.Random(seed).shuffle(order)

    test_idx: set[int] = set()
    for i in order:
        if len(test_idx) == n_test:
            break
        t = graph.triples[i]
        # self-loops consume two entity counts for the same id
        need_head = 2 if t.head == t.tail else 1
        if (
            entity_count[t.head] > need_head
            and entity_count[t.tail] > 1
            and relation_count[t.relation] > 1
        ):
            test_idx.add(i)
            entity_count[t.head] -= 1
            entity_count[t.tail] -= 1
            relation_count[t.relation] -= 1

    if len(test_idx) < n_test:
        raise GraphError(
            f"cannot hold out {n_test} triples without orphaning an entity or relation"
        )

    train = [t for i, t in enumerate(graph.triples) if i not in test_idx]
    test = [graph.triples[i] for i in sorted(test_idx)]
    return replace(graph, triples=train), test
