"""Translational and bilinear baseline scorers: TransE and DistMult."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .kg import KgcError, Triple


@dataclass
class EmbeddingState:
    kind: str  # "transe" | "distmult"
    entity_vectors: np.ndarray  # |E| x d
    relation_vectors: np.ndarray  # |R| x d
    norm: str = "l2"  # TransE distance norm
    margin: float = 1.0
    threshold: float = 0.0  # classification cut on the raw score, dev-calibrated

    @property
    def dim(self) -> int:
        return self.entity_vectors.shape[1]


def init_embeddings(
    num_entities: int, num_relations: int, dim: int, kind: str, seed: int = 0,
    norm: str = "l2", margin: float = 1.0,
) -> EmbeddingState:
    if kind not in ("transe", "distmult"):
        raise KgcError(f"unknown embedding scorer kind: {kind}")
    rng = np.random.default_rng(seed)
    bound = 6.0 / np.sqrt(dim)
    ent = rng.uniform(-bound, bound, size=(num_entities, dim))
    rel = rng.uniform(-bound, bound, size=(num_relations, dim))
    if kind == "transe":
        rel /= np.maximum(np.linalg.norm(rel, axis=1, keepdims=True), 1e-12)
        ent /= np.maximum(np.linalg.norm(ent, axis=1, keepdims=True), 1e-12)
    return EmbeddingState(kind, ent, rel, norm=norm, margin=margin)


def _residual(state: EmbeddingState, h, r, t) -> np.ndarray:
    return state.entity_vectors[h] + state.relation_vectors[r] - state.entity_vectors[t]


def transe_scores(state: EmbeddingState, h, r, t) -> np.ndarray:
    """Negative translational distance, higher = more plausible."""
    res = _residual(state, h, r, t)
    if state.norm == "l1":
        return -np.abs(res).sum(axis=-1)
    return -np.sqrt((res**2).sum(axis=-1))


def distmult_scores(state: EmbeddingState, h, r, t) -> np.ndarray:
    """Trilinear product sum_k h_k * r_k * t_k."""
    return (
        state.entity_vectors[h] * state.relation_vectors[r] * state.entity_vectors[t]
    ).sum(axis=-1)


def score_triples(state: EmbeddingState, triples: np.ndarray) -> np.ndarray:
    triples = np.asarray(triples)
    h, r, t = triples[..., 0], triples[..., 1], triples[..., 2]
    if state.kind == "transe":
        return transe_scores(state, h, r, t)
    return distmult_scores(state, h, r, t)


def transe_score(state: EmbeddingState, t: Triple) -> float:
    return float(transe_scores(state, t.head, t.relation, t.tail))


def distmult_score(state: EmbeddingState, t: Triple) -> float:
    return float(distmult_scores(state, t.head, t.relation, t.tail))


def margin_loss_and_grads(
    state: EmbeddingState, pos: np.ndarray, neg: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Margin ranking loss sum(max(0, margin + s(neg) - s(pos))) for TransE.

    Scores are negative distances, so the hinge activates while the negative
    triple sits within `margin` of the positive. Returns (loss, d_entities,
    d_relations) as dense gradient arrays.
    """
    pos = np.asarray(pos)
    neg = np.asarray(neg)
    s_pos = score_triples(state, pos)
    s_neg = score_triples(state, neg)
    viol = state.margin + s_neg - s_pos
    active = viol > 0
    loss = float(viol[active].sum())
    d_ent = np.zeros_like(state.entity_vectors)
    d_rel = np.zeros_like(state.relation_vectors)
    if not active.any():
        return loss, d_ent, d_rel

    def d_score(triples, scores):
        """Gradient of the TransE score wrt (h, r, t) vectors, active rows only."""
        res = _residual(state, triples[:, 0], triples[:, 1], triples[:, 2])
        if state.norm == "l1":
            g = -np.sign(res)
        else:
            dist = np.maximum(-scores, 1e-12)
            g = -res / dist[:, None]
        return g

    p, n = pos[active], neg[active]
    g_pos = d_score(p, s_pos[active])
    g_neg = d_score(n, s_neg[active])
    # d/dθ [s(neg) - s(pos)] on the hinge-active rows
    np.add.at(d_ent, p[:, 0], -g_pos)
    np.add.at(d_ent, p[:, 2], g_pos)
    np.add.at(d_rel, p[:, 1], -g_pos)
    np.add.at(d_ent, n[:, 0], g_neg)
    np.add.at(d_ent, n[:, 2], -g_neg)
    np.add.at(d_rel, n[:, 1], g_neg)
    return loss, d_ent, d_rel


def sigmoid_bce_loss_and_grads(
    state: EmbeddingState, triples: np.ndarray, labels: np.ndarray
) -> tuple[float, np.ndarray, np.ndarray]:
    """Binary cross-entropy on sigmoid(score), used to train DistMult.

    The sigmoid of the raw score is the plausible-class probability p0; the
    loss is the same summed cross-entropy as the classifier head objective.
    """
    triples = np.asarray(triples)
    labels = np.asarray(labels, dtype=float)
    s = score_triples(state, triples)
    # numerically stable: -log p = softplus(-s), -log(1-p) = softplus(s)
    softplus = np.logaddexp(0.0, np.where(labels == 1, -s, s))
    loss = float(softplus.sum())
    p = np.where(s >= 0, 1.0 / (1.0 + np.exp(-np.abs(s))), np.exp(-np.abs(s)) / (1.0 + np.exp(-np.abs(s))))
    d_s = p - labels
    h, r, t = triples[:, 0], triples[:, 1], triples[:, 2]
    hv, rv, tv = state.entity_vectors[h], state.relation_vectors[r], state.entity_vectors[t]
    d_ent = np.zeros_like(state.entity_vectors)
    d_rel = np.zeros_like(state.relation_vectors)
    np.add.at(d_ent, h, d_s[:, None] * rv * tv)
    np.add.at(d_ent, t, d_s[:, None] * hv * rv)
    np.add.at(d_rel, r, d_s[:, None] * hv * tv)
    return loss, d_ent, d_rel


def renormalize_entities(state: EmbeddingState) -> None:
    """Project entity vectors back onto the unit sphere (TransE training step)."""
    norms = np.maximum(np.linalg.norm(state.entity_vectors, axis=1, keepdims=True), 1e-12)
    state.entity_vectors /= norms
