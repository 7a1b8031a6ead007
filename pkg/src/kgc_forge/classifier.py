"""Native text classifier scoring triples and relation distributions.

Desk-scale stand-in for a transformer encoder: every token embedding is the sum
of a token, segment, and position embedding passed through a tanh (so token
order is not washed out by pooling); the sequence is mean-pooled and
passed through one tanh layer to produce the [CLS]-style summary vector C. Two
linear heads sit on top: a 2-class triple-plausibility head and an R-class
relation head, both trained with summed cross-entropy.

The 2-class head is a softmax over two logits, which satisfies p0 + p1 = 1
exactly (equivalent to a sigmoid over the logit difference). p0 is the
positive/plausible class.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .kg import KgcError, KnowledgeGraph, Triple
from .textgen import DEFAULT_MAX_LEN, InputSequence, entity_sentence, relation_sentence

EPS = 1e-12

UNK, CLS_ID, SEP_ID = 0, 1, 2
_SPECIALS = {"[UNK]": UNK, "[CLS]": CLS_ID, "[SEP]": SEP_ID}


@dataclass(frozen=True)
class ScoreVector:
    p0: float
    p1: float

    def __post_init__(self):
        assert 0.0 <= self.p0 <= 1.0 and 0.0 <= self.p1 <= 1.0
        assert abs(self.p0 + self.p1 - 1.0) <= 1e-9


@dataclass(frozen=True)
class RelationDistribution:
    probs: np.ndarray

    def __post_init__(self):
        assert abs(float(self.probs.sum()) - 1.0) <= 1e-9
        assert np.all(self.probs >= 0) and np.all(self.probs <= 1)


@dataclass
class ClassifierState:
    vocab: dict[str, int]
    tok_emb: np.ndarray  # |V| x H
    seg_emb: np.ndarray  # 2 x H
    pos_emb: np.ndarray  # max_len x H
    w_enc: np.ndarray  # H x H
    b_enc: np.ndarray  # H
    w_triple: np.ndarray  # 2 x H
    w_rel: np.ndarray  # R x H
    dropout: float = 0.1
    max_len: int = DEFAULT_MAX_LEN

    @property
    def hidden(self) -> int:
        return self.tok_emb.shape[1]

    @property
    def num_relations(self) -> int:
        return self.w_rel.shape[0]

    def params(self) -> list[np.ndarray]:
        return [
            self.tok_emb, self.seg_emb, self.pos_emb,
            self.w_enc, self.b_enc, self.w_triple, self.w_rel,
        ]


def build_vocab(kg: KnowledgeGraph, triples: Iterable[Triple]) -> dict[str, int]:
    """Token vocabulary from the labels of elements seen in `triples`."""
    vocab = dict(_SPECIALS)
    for t in triples:
        for sent in (
            entity_sentence(kg, t.head),
            relation_sentence(kg, t.relation),
            entity_sentence(kg, t.tail),
        ):
            for tok in sent:
                vocab.setdefault(tok.text, len(vocab))
    return vocab


def init_classifier(
    kg: KnowledgeGraph,
    triples: Iterable[Triple],
    hidden: int = 128,
    dropout: float = 0.1,
    max_len: int = DEFAULT_MAX_LEN,
    seed: int = 0,
) -> ClassifierState:
    """Uniform(-0.1, 0.1) embeddings and encoder, zero heads: every untrained
    score is exactly (0.5, 0.5) / uniform."""
    rng = np.random.default_rng(seed)
    vocab = build_vocab(kg, triples)

    def u(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    return ClassifierState(
        vocab=vocab,
        tok_emb=u(len(vocab), hidden),
        seg_emb=u(2, hidden),
        pos_emb=u(max_len, hidden),
        w_enc=u(hidden, hidden),
        b_enc=np.zeros(hidden),
        w_triple=np.zeros((2, hidden)),
        w_rel=np.zeros((kg.num_relations, hidden)),
        dropout=dropout,
        max_len=max_len,
    )


@dataclass
class PackedBatch:
    tok_ids: np.ndarray  # B x L
    seg_ids: np.ndarray  # B x L
    pos_ids: np.ndarray  # B x L, 1-based, 0 at padding
    mask: np.ndarray  # B x L float
    lengths: np.ndarray  # B


def pack_sequences(state: ClassifierState, seqs: Sequence[InputSequence]) -> PackedBatch:
    max_l = max(len(s) for s in seqs)
    b = len(seqs)
    tok = np.zeros((b, max_l), dtype=np.int64)
    seg = np.zeros((b, max_l), dtype=np.int64)
    pos = np.zeros((b, max_l), dtype=np.int64)
    mask = np.zeros((b, max_l))
    for i, s in enumerate(seqs):
        n = len(s)
        tok[i, :n] = [state.vocab.get(t.text, UNK) for t in s.tokens]
        seg[i, :n] = s.segment_ids
        pos[i, :n] = s.position_ids
        mask[i, :n] = 1.0
    return PackedBatch(tok, seg, pos, mask, mask.sum(axis=1))


@dataclass
class _Forward:
    batch: PackedBatch
    token_act: np.ndarray  # B x L x H, per-token tanh activations
    pooled: np.ndarray  # B x H, mean-pooled token activations
    c: np.ndarray  # B x H, tanh output pre-dropout
    c_drop: np.ndarray  # B x H, fed to the heads
    drop_mask: np.ndarray | None


def _forward(
    state: ClassifierState,
    batch: PackedBatch,
    train: bool = False,
    rng: np.random.Generator | None = None,
) -> _Forward:
    e = state.tok_emb[batch.tok_ids] + state.seg_emb[batch.seg_ids]
    e = e + state.pos_emb[np.maximum(batch.pos_ids - 1, 0)]
    # per-token nonlinearity keeps token order observable through mean pooling
    token_act = np.tanh(e)
    x = token_act * batch.mask[:, :, None]
    pooled = x.sum(axis=1) / batch.lengths[:, None]
    c = np.tanh(pooled @ state.w_enc.T + state.b_enc)
    drop_mask = None
    c_drop = c
    if train and state.dropout > 0.0:
        keep = 1.0 - state.dropout
        drop_mask = (rng.random(c.shape) < keep) / keep
        c_drop = c * drop_mask
    return _Forward(batch, token_act, pooled, c, c_drop, drop_mask)


def _backward_from_c(state: ClassifierState, fwd: _Forward, d_c_drop: np.ndarray) -> dict:
    """Propagate a gradient at the (post-dropout) summary vector into all params."""
    batch = fwd.batch
    d_c = d_c_drop if fwd.drop_mask is None else d_c_drop * fwd.drop_mask
    d_z = d_c * (1.0 - fwd.c**2)
    d_w_enc = d_z.T @ fwd.pooled
    d_b_enc = d_z.sum(axis=0)
    d_pooled = d_z @ state.w_enc
    d_x = (d_pooled[:, None, :] / batch.lengths[:, None, None]) * batch.mask[:, :, None]
    d_e = d_x * (1.0 - fwd.token_act**2)  # through the per-token tanh
    d_tok = np.zeros_like(state.tok_emb)
    d_seg = np.zeros_like(state.seg_emb)
    d_pos = np.zeros_like(state.pos_emb)
    flat = d_e.reshape(-1, state.hidden)
    np.add.at(d_tok, batch.tok_ids.ravel(), flat)
    np.add.at(d_seg, batch.seg_ids.ravel(), flat)
    np.add.at(d_pos, np.maximum(batch.pos_ids - 1, 0).ravel(), flat)
    # padding rows carried zero gradient (masked), so index 0 collisions are harmless
    return {
        "tok_emb": d_tok, "seg_emb": d_seg, "pos_emb": d_pos,
        "w_enc": d_w_enc, "b_enc": d_b_enc,
    }


def _softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def encode(state: ClassifierState, seq: InputSequence) -> np.ndarray:
    """Deterministic (eval mode) summary vector C for one sequence."""
    fwd = _forward(state, pack_sequences(state, [seq]))
    return fwd.c[0]


def triple_probs(state: ClassifierState, seqs: Sequence[InputSequence]) -> np.ndarray:
    """(p0, p1) rows for a batch of triple sequences, eval mode."""
    fwd = _forward(state, pack_sequences(state, seqs))
    return _softmax(fwd.c_drop @ state.w_triple.T)


def relation_probs(state: ClassifierState, seqs: Sequence[InputSequence]) -> np.ndarray:
    fwd = _forward(state, pack_sequences(state, seqs))
    return _softmax(fwd.c_drop @ state.w_rel.T)


def classify_triple(state: ClassifierState, seq: InputSequence) -> ScoreVector:
    p = triple_probs(state, [seq])[0]
    return ScoreVector(float(p[0]), float(p[1]))


def classify_relation(state: ClassifierState, seq: InputSequence) -> RelationDistribution:
    return RelationDistribution(relation_probs(state, [seq])[0])


def triple_loss(scores: Sequence[ScoreVector], labels: Sequence[int]) -> float:
    """Summed binary cross-entropy: -sum(y*log(p0) + (1-y)*log(p1))."""
    if len(scores) != len(labels):
        raise KgcError(f"length mismatch: {len(scores)} scores vs {len(labels)} labels")
    total = 0.0
    for s, y in zip(scores, labels):
        p0 = min(max(s.p0, EPS), 1.0 - EPS)
        p1 = min(max(s.p1, EPS), 1.0 - EPS)
        total -= y * np.log(p0) + (1 - y) * np.log(p1)
    return float(total)


def relation_loss(
    dists: Sequence[RelationDistribution], true_relations: Sequence[int]
) -> float:
    """Summed categorical cross-entropy of the true relation's probability."""
    if len(dists) != len(true_relations):
        raise KgcError("length mismatch between distributions and relations")
    total = 0.0
    for d, r in zip(dists, true_relations):
        if r >= d.probs.shape[0]:
            raise KgcError(f"relation id {r} out of range (R={d.probs.shape[0]})")
        total -= np.log(min(max(float(d.probs[r]), EPS), 1.0 - EPS))
    return float(total)


def triple_loss_and_grads(
    state: ClassifierState,
    seqs: Sequence[InputSequence],
    labels: Sequence[int],
    train: bool = True,
    rng: np.random.Generator | None = None,
) -> tuple[float, dict]:
    """Summed Eq-style binary cross-entropy over the batch, with full parameter grads."""
    batch = pack_sequences(state, seqs)
    fwd = _forward(state, batch, train=train, rng=rng)
    probs = _softmax(fwd.c_drop @ state.w_triple.T)
    y = np.asarray(labels)
    target = np.where(y == 1, 0, 1)  # class 0 is "plausible"
    picked = np.clip(probs[np.arange(len(y)), target], EPS, 1.0 - EPS)
    loss = float(-np.log(picked).sum())
    d_logits = probs.copy()
    d_logits[np.arange(len(y)), target] -= 1.0
    grads = _backward_from_c(state, fwd, d_logits @ state.w_triple)
    grads["w_triple"] = d_logits.T @ fwd.c_drop
    grads["w_rel"] = np.zeros_like(state.w_rel)
    return loss, grads


def relation_loss_and_grads(
    state: ClassifierState,
    seqs: Sequence[InputSequence],
    true_relations: Sequence[int],
    train: bool = True,
    rng: np.random.Generator | None = None,
) -> tuple[float, dict]:
    batch = pack_sequences(state, seqs)
    fwd = _forward(state, batch, train=train, rng=rng)
    probs = _softmax(fwd.c_drop @ state.w_rel.T)
    idx = np.asarray(true_relations)
    if idx.max(initial=0) >= state.num_relations:
        raise KgcError(f"relation id out of range (R={state.num_relations})")
    picked = np.clip(probs[np.arange(len(idx)), idx], EPS, 1.0 - EPS)
    loss = float(-np.log(picked).sum())
    d_logits = probs.copy()
    d_logits[np.arange(len(idx)), idx] -= 1.0
    grads = _backward_from_c(state, fwd, d_logits @ state.w_rel)
    grads["w_rel"] = d_logits.T @ fwd.c_drop
    grads["w_triple"] = np.zeros_like(state.w_triple)
    return loss, grads


PARAM_ORDER = ["tok_emb", "seg_emb", "pos_emb", "w_enc", "b_enc", "w_triple", "w_rel"]


def grads_as_list(grads: dict) -> list[np.ndarray]:
    return [grads[k] for k in PARAM_ORDER]
