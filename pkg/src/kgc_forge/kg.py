"""Canonical in-memory knowledge graph: interning, membership, relation cardinality."""

from __future__ import annotations

from collections import defaultdict
from dataclasses import dataclass, field
from enum import Enum
from typing import Iterable, NamedTuple


class KgcError(Exception):
    """Base error for the toolkit."""


class Triple(NamedTuple):
    head: int
    relation: int
    tail: int


class Side(Enum):
    HEAD = "head"
    TAIL = "tail"
    RELATION = "relation"


class Cardinality(Enum):
    ONE_ONE = "1-1"
    ONE_MANY = "1-N"
    MANY_ONE = "N-1"
    MANY_MANY = "N-N"


@dataclass(frozen=True)
class RelationCardinality:
    category: Cardinality
    avg_tails_per_head: float
    avg_heads_per_tail: float


class Interner:
    """Dense first-appearance-order string interner. Bijective by construction."""

    def __init__(self):
        self._strings: list[str] = []
        self._index: dict[str, int] = {}

    def intern(self, s: str) -> int:
        idx = self._index.get(s)
        if idx is None:
            idx = len(self._strings)
            self._index[s] = idx
            self._strings.append(s)
        return idx

    def lookup(self, s: str) -> int | None:
        return self._index.get(s)

    def __getitem__(self, idx: int) -> str:
        return self._strings[idx]

    def __contains__(self, s: str) -> bool:
        return s in self._index

    def __len__(self) -> int:
        return len(self._strings)

    def __iter__(self):
        return iter(self._strings)


@dataclass
class KnowledgeGraph:
    """Immutable after construction; safe for unrestricted concurrent reads."""

    entities: Interner = field(default_factory=Interner)
    relations: Interner = field(default_factory=Interner)
    positives: set[Triple] = field(default_factory=set)
    entity_labels: dict[int, str] = field(default_factory=dict)
    relation_labels: dict[int, str] = field(default_factory=dict)
    entity_types: dict[int, list[str]] = field(default_factory=dict)
    relation_synonyms: dict[int, list[str]] = field(default_factory=dict)

    @property
    def num_entities(self) -> int:
        return len(self.entities)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    def contains(self, t: Triple) -> bool:
        return t in self.positives

    def entity_label(self, e: int) -> str:
        # fall back to the raw identifier: scorers require non-empty text
        return self.entity_labels.get(e) or self.entities[e]

    def relation_label(self, r: int) -> str:
        return self.relation_labels.get(r) or self.relations[r]

    def entity_augmentations(self, e: int) -> list[str]:
        return self.entity_types.get(e, [])

    def relation_augmentations(self, r: int) -> list[str]:
        return self.relation_synonyms.get(r, [])

    def intern_raw(self, raw: Iterable[tuple[str, str, str]]) -> list[Triple]:
        """Intern raw string triples, adding them to the positive set."""
        out = []
        for h, r, t in raw:
            triple = Triple(
                self.entities.intern(h), self.relations.intern(r), self.entities.intern(t)
            )
            out.append(triple)
            self.positives.add(triple)
        return out


def intern_triples(raw: Iterable[tuple[str, str, str]]) -> KnowledgeGraph:
    """Build a graph from raw string triples; duplicates collapse in the positive set."""
    kg = KnowledgeGraph()
    kg.intern_raw(raw)
    return kg


def relation_cardinality(
    kg: KnowledgeGraph,
    r: int,
    threshold: float = 1.5,
    triples: Iterable[Triple] | None = None,
) -> RelationCardinality:
    """Classify a relation into 1-1 / 1-N / N-1 / N-N by average branching.

    `triples` restricts the computation to a subset (typically the training
    split, so test-time grouping does not leak test data); defaults to the
    full positive set.
    """
    pool = kg.positives if triples is None else triples
    tails_per_head: dict[int, set[int]] = defaultdict(set)
    heads_per_tail: dict[int, set[int]] = defaultdict(set)
    for t in pool:
        if t.relation == r:
            tails_per_head[t.head].add(t.tail)
            heads_per_tail[t.tail].add(t.head)
    if not tails_per_head:
        raise KgcError(f"uncategorizable relation: {r} has no triples")
    avg_tph = sum(len(v) for v in tails_per_head.values()) / len(tails_per_head)
    avg_hpt = sum(len(v) for v in heads_per_tail.values()) / len(heads_per_tail)
    many_tails = avg_tph > threshold
    many_heads = avg_hpt > threshold
    if many_tails and many_heads:
        category = Cardinality.MANY_MANY
    elif many_tails:
        category = Cardinality.ONE_MANY
    elif many_heads:
        category = Cardinality.MANY_ONE
    else:
        category = Cardinality.ONE_ONE
    return RelationCardinality(category, avg_tph, avg_hpt)
