"""Uniform scoring interface over the native classifier, embedding baselines,
and external bridge scorers, as consumed by the evaluation module."""

from __future__ import annotations

from typing import Protocol, Sequence

import numpy as np

from . import classifier as clf
from . import embeddings as emb
from .kg import KgcError, KnowledgeGraph, Triple
from .textgen import pair_sequence, triple_sequence

SCORE_CHUNK = 2048


class Scorer(Protocol):
    """Read-only after training; safe for concurrent scoring."""

    def score_triples(self, triples: np.ndarray) -> np.ndarray:
        """Plausibility score per (h, r, t) row, higher = more plausible."""
        ...

    def relation_scores(self, head: int, tail: int) -> np.ndarray:
        """Score per candidate relation for the (head, tail) pair."""
        ...

    def classify_triples(self, triples: np.ndarray) -> np.ndarray:
        """0/1 label per row."""
        ...


class ClassifierScorer:
    def __init__(self, state: clf.ClassifierState, kg: KnowledgeGraph):
        self.state = state
        self.kg = kg

    def score_triples(self, triples: np.ndarray) -> np.ndarray:
        triples = np.atleast_2d(np.asarray(triples))
        out = np.empty(len(triples))
        for start in range(0, len(triples), SCORE_CHUNK):
            chunk = triples[start : start + SCORE_CHUNK]
            seqs = [
                triple_sequence(self.kg, Triple(*map(int, row)), self.state.max_len)
                for row in chunk
            ]
            out[start : start + len(chunk)] = clf.triple_probs(self.state, seqs)[:, 0]
        return out

    def relation_scores(self, head: int, tail: int) -> np.ndarray:
        seq = pair_sequence(self.kg, head, tail, self.state.max_len)
        return clf.relation_probs(self.state, [seq])[0]

    def classify_triples(self, triples: np.ndarray) -> np.ndarray:
        return (self.score_triples(triples) >= 0.5).astype(int)


class EmbeddingScorer:
    def __init__(self, state: emb.EmbeddingState, kg: KnowledgeGraph):
        self.state = state
        self.kg = kg

    def score_triples(self, triples: np.ndarray) -> np.ndarray:
        return emb.score_triples(self.state, np.atleast_2d(np.asarray(triples)))

    def relation_scores(self, head: int, tail: int) -> np.ndarray:
        r = np.arange(self.state.relation_vectors.shape[0])
        triples = np.column_stack([np.full_like(r, head), r, np.full_like(r, tail)])
        return self.score_triples(triples)

    def classify_triples(self, triples: np.ndarray) -> np.ndarray:
        return (self.score_triples(triples) >= self.state.threshold).astype(int)


class FunctionScorer:
    """Wrap an arbitrary triple -> score function (fixtures, oracles)."""

    def __init__(self, fn, relation_fn=None, threshold: float = 0.0):
        self.fn = fn
        self.relation_fn = relation_fn
        self.threshold = threshold

    def score_triples(self, triples: np.ndarray) -> np.ndarray:
        triples = np.atleast_2d(np.asarray(triples))
        return np.array([self.fn(Triple(*map(int, row))) for row in triples], dtype=float)

    def relation_scores(self, head: int, tail: int) -> np.ndarray:
        if self.relation_fn is None:
            raise KgcError("fixture scorer has no relation head")
        return np.asarray(self.relation_fn(head, tail), dtype=float)

    def classify_triples(self, triples: np.ndarray) -> np.ndarray:
        return (self.score_triples(triples) >= self.threshold).astype(int)
