"""Render triples and entity pairs as token sequences with segment/position ids.

Layout for a triple: [CLS] head-tokens [SEP] relation-tokens [SEP] tail-tokens [SEP],
head and tail sharing segment 0, the relation on segment 1. Entity pairs drop the
relation sentence. Entity-type and relation-synonym augmentations are appended to
the element's own sentence.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .kg import KgcError, KnowledgeGraph, Triple

DEFAULT_MAX_LEN = 512

# lowercased alphanumeric runs; ./-/_/'/% may join or trail inside a run,
# so "CI(2.9," -> ["ci", "2.9"] and "95%" stays one token
_TOKEN_RE = re.compile(r"[a-z0-9%]+(?:[.\-_/'][a-z0-9%]+)*")


class TokenKind(Enum):
    CLS = "CLS"
    SEP = "SEP"
    WORD = "WORD"


@dataclass(frozen=True)
class Token:
    text: str
    kind: TokenKind = TokenKind.WORD


CLS = Token("[CLS]", TokenKind.CLS)
SEP = Token("[SEP]", TokenKind.SEP)


@dataclass(frozen=True)
class InputSequence:
    tokens: tuple[Token, ...]
    segment_ids: tuple[int, ...]
    position_ids: tuple[int, ...]
    truncated: bool = False

    def __post_init__(self):
        assert len(self.tokens) == len(self.segment_ids) == len(self.position_ids)

    def __len__(self) -> int:
        return len(self.tokens)

    def texts(self) -> list[str]:
        return [t.text for t in self.tokens]


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def element_sentence(label: str, augmentations: list[str] | None = None) -> list[Token]:
    """Tokenized label followed by each augmentation's tokens, in file order."""
    if not label or not label.strip():
        raise KgcError("unlabeled element")
    words = tokenize(label)
    if not words:
        raise KgcError(f"unlabeled element: {label!r} has no tokens")
    for aug in augmentations or []:
        words.extend(tokenize(aug))
    return [Token(w) for w in words]


def _truncate(sentences: list[list[Token]], budget: int) -> bool:
    """Trim from the ends, longest sentence first, down to `budget` word tokens."""
    total = sum(len(s) for s in sentences)
    truncated = False
    while total > budget:
        longest = max(sentences, key=len)
        if len(longest) <= 1:
            break  # every sentence keeps at least one token
        longest.pop()
        total -= 1
        truncated = True
    return truncated


def _assemble(
    sentences: list[list[Token]], segments: list[int], max_len: int
) -> InputSequence:
    budget = max_len - 1 - len(sentences)  # [CLS] plus one [SEP] per sentence
    if budget < len(sentences):
        raise KgcError(f"max_len {max_len} too small for {len(sentences)} sentences")
    truncated = _truncate(sentences, budget)
    tokens: list[Token] = [CLS]
    segment_ids: list[int] = [0]
    for sent, seg in zip(sentences, segments):
        tokens.extend(sent)
        segment_ids.extend([seg] * len(sent))
        tokens.append(SEP)
        segment_ids.append(seg)  # each [SEP] closes the sentence it follows
    position_ids = list(range(1, len(tokens) + 1))
    return InputSequence(tuple(tokens), tuple(segment_ids), tuple(position_ids), truncated)


def entity_sentence(kg: KnowledgeGraph, e: int) -> list[Token]:
    return element_sentence(kg.entity_label(e), kg.entity_augmentations(e))


def relation_sentence(kg: KnowledgeGraph, r: int) -> list[Token]:
    return element_sentence(kg.relation_label(r), kg.relation_augmentations(r))


def triple_sequence(
    kg: KnowledgeGraph, t: Triple, max_len: int = DEFAULT_MAX_LEN
) -> InputSequence:
    sentences = [
        entity_sentence(kg, t.head),
        relation_sentence(kg, t.relation),
        entity_sentence(kg, t.tail),
    ]
    return _assemble(sentences, [0, 1, 0], max_len)


def pair_sequence(
    kg: KnowledgeGraph, head: int, tail: int, max_len: int = DEFAULT_MAX_LEN
) -> InputSequence:
    sentences = [entity_sentence(kg, head), entity_sentence(kg, tail)]
    return _assemble(sentences, [0, 0], max_len)


def element_texts(kg: KnowledgeGraph, t: Triple, with_relation: bool = True) -> dict:
    """Raw element strings plus augmentations, as shipped over the bridge protocol."""
    item = {
        "head_text": kg.entity_label(t.head),
        "tail_text": kg.entity_label(t.tail),
        "head_augmentations": kg.entity_augmentations(t.head),
        "tail_augmentations": kg.entity_augmentations(t.tail),
    }
    if with_relation:
        item["relation_text"] = kg.relation_label(t.relation)
        item["relation_augmentations"] = kg.relation_augmentations(t.relation)
    return item
