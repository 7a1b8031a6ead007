"""Training loops for the three scorer kinds on the three subtasks."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from . import classifier as clf
from . import embeddings as emb
from .adam import Adam
from .ingest import DatasetBundle
from .kg import KgcError, Triple
from .sampling import negative_batch
from .scorers import ClassifierScorer, EmbeddingScorer
from .textgen import DEFAULT_MAX_LEN, pair_sequence, triple_sequence

TASKS = ("tc", "lp", "rp")
SCORER_KINDS = ("classifier", "transe", "distmult")

# per-task regimes: (epochs, negative_ratio)
TASK_DEFAULTS = {"tc": (3, 1), "lp": (5, 5), "rp": (20, 1)}


class TrainingDivergedError(KgcError):
    pass


@dataclass
class TrainConfig:
    batch_size: int = 32
    learning_rate: float = 5e-5
    epochs: int = 3
    negative_ratio: int = 1
    dropout: float = 0.1
    seed: int = 0
    adam_betas: tuple[float, float] = (0.9, 0.999)
    adam_epsilon: float = 1e-8
    # model hyperparameters beyond the shared optimizer settings
    hidden: int = 128
    dim: int = 50
    margin: float = 1.0
    norm: str = "l2"
    max_len: int = DEFAULT_MAX_LEN
    resample_negatives: bool = False  # fixed negative set per run by default
    exclusion: str = "full"  # negative sampling excludes train+dev+test positives

    @classmethod
    def for_task(cls, task: str, **overrides) -> "TrainConfig":
        if task not in TASKS:
            raise KgcError(f"unknown task: {task}")
        epochs, ratio = TASK_DEFAULTS[task]
        base = {"epochs": epochs, "negative_ratio": ratio}
        base.update(overrides)
        return cls(**base)


@dataclass
class TrainedModel:
    kind: str
    task: str
    state: object  # ClassifierState | EmbeddingState
    config: TrainConfig
    loss_history: list[float] = field(default_factory=list)

    def scorer(self, kg):
        if self.kind == "classifier":
            return ClassifierScorer(self.state, kg)
        return EmbeddingScorer(self.state, kg)

    def config_echo(self) -> dict:
        return asdict(self.config)


def _check_finite(loss: float, step: int) -> None:
    if not np.isfinite(loss):
        raise TrainingDivergedError(f"loss became non-finite at step {step}")


def _exclusion_set(bundle: DatasetBundle, cfg: TrainConfig) -> set[Triple]:
    if cfg.exclusion == "train":
        return set(bundle.train)
    return bundle.graph.positives


def _train_classifier(bundle: DatasetBundle, task: str, cfg: TrainConfig) -> TrainedModel:
    kg = bundle.graph
    rng = np.random.default_rng(cfg.seed)
    state = clf.init_classifier(
        kg, bundle.train, hidden=cfg.hidden, dropout=cfg.dropout,
        max_len=cfg.max_len, seed=cfg.seed,
    )
    opt = Adam(state.params(), lr=cfg.learning_rate, betas=cfg.adam_betas, eps=cfg.adam_epsilon)
    history = []
    step = 0
    seq_cache: dict[Triple, object] = {}

    def triple_seq(t: Triple):
        seq = seq_cache.get(t)
        if seq is None:
            seq = triple_sequence(kg, t, cfg.max_len)
            seq_cache[t] = seq
        return seq

    if task == "rp":
        examples = [(pair_sequence(kg, t.head, t.tail, cfg.max_len), t.relation) for t in bundle.train]
        for _ in range(cfg.epochs):
            epoch_loss = 0.0
            order = rng.permutation(len(examples))
            for start in range(0, len(order), cfg.batch_size):
                batch = [examples[i] for i in order[start : start + cfg.batch_size]]
                seqs = [b[0] for b in batch]
                rels = [b[1] for b in batch]
                loss, grads = clf.relation_loss_and_grads(state, seqs, rels, train=True, rng=rng)
                step += 1
                _check_finite(loss, step)
                opt.step(clf.grads_as_list(grads))
                epoch_loss += loss
            history.append(epoch_loss / len(examples))
    else:
        exclusion = _exclusion_set(bundle, cfg)
        labeled = negative_batch(kg, bundle.train, cfg.negative_ratio, rng, exclusion)
        for _ in range(cfg.epochs):
            epoch_loss = 0.0
            order = rng.permutation(len(labeled))
            for start in range(0, len(order), cfg.batch_size):
                batch = [labeled[i] for i in order[start : start + cfg.batch_size]]
                seqs = [triple_seq(lt.triple) for lt in batch]
                ys = [lt.label for lt in batch]
                loss, grads = clf.triple_loss_and_grads(state, seqs, ys, train=True, rng=rng)
                step += 1
                _check_finite(loss, step)
                opt.step(clf.grads_as_list(grads))
                epoch_loss += loss
            history.append(epoch_loss / len(labeled))
            if cfg.resample_negatives:
                labeled = negative_batch(kg, bundle.train, cfg.negative_ratio, rng, exclusion)
    return TrainedModel("classifier", task, state, cfg, history)


def calibrate_threshold(
    state: emb.EmbeddingState, bundle: DatasetBundle, cfg: TrainConfig
) -> float:
    """Pick the score threshold maximizing balanced accuracy on a labeled dev set."""
    if not bundle.dev:
        return float(np.median(emb.score_triples(state, np.asarray(bundle.train))))
    rng = np.random.default_rng(cfg.seed + 1)
    labeled = negative_batch(bundle.graph, bundle.dev, 1, rng, _exclusion_set(bundle, cfg))
    triples = np.array([lt.triple for lt in labeled])
    labels = np.array([lt.label for lt in labeled])
    scores = emb.score_triples(state, triples)
    order = np.argsort(scores, kind="stable")
    sorted_scores = scores[order]
    sorted_labels = labels[order]
    # accuracy of "score >= cut" as the cut moves across each sorted gap
    pos_below = np.concatenate([[0], np.cumsum(sorted_labels)])
    total_pos = int(labels.sum())
    n = len(labels)
    correct = []
    for i in range(n + 1):
        tn = i - int(pos_below[i])  # negatives strictly below the cut
        tp = total_pos - int(pos_below[i])
        correct.append(tn + tp)
    best = int(np.argmax(correct))
    if best == 0:
        return float(sorted_scores[0] - 1.0)
    if best == n:
        return float(sorted_scores[-1] + 1.0)
    return float((sorted_scores[best - 1] + sorted_scores[best]) / 2.0)


def _train_embedding(
    kind: str, bundle: DatasetBundle, task: str, cfg: TrainConfig
) -> TrainedModel:
    kg = bundle.graph
    rng = np.random.default_rng(cfg.seed)
    state = emb.init_embeddings(
        kg.num_entities, kg.num_relations, cfg.dim, kind,
        seed=cfg.seed, norm=cfg.norm, margin=cfg.margin,
    )
    opt = Adam(
        [state.entity_vectors, state.relation_vectors],
        lr=cfg.learning_rate, betas=cfg.adam_betas, eps=cfg.adam_epsilon,
    )
    exclusion = _exclusion_set(bundle, cfg)
    labeled = negative_batch(kg, bundle.train, cfg.negative_ratio, rng, exclusion)
    history = []
    step = 0
    group = 1 + cfg.negative_ratio
    n_pos = len(bundle.train)
    for _ in range(cfg.epochs):
        epoch_loss = 0.0
        order = rng.permutation(n_pos)
        for start in range(0, n_pos, cfg.batch_size):
            idx = order[start : start + cfg.batch_size]
            if kind == "transe":
                # pair each positive with each of its sampled corruptions
                pos_rows = []
                neg_rows = []
                for i in idx:
                    for k in range(cfg.negative_ratio):
                        pos_rows.append(labeled[i * group].triple)
                        neg_rows.append(labeled[i * group + 1 + k].triple)
                loss, d_ent, d_rel = emb.margin_loss_and_grads(
                    state, np.array(pos_rows), np.array(neg_rows)
                )
            else:
                rows = []
                ys = []
                for i in idx:
                    for k in range(group):
                        rows.append(labeled[i * group + k].triple)
                        ys.append(labeled[i * group + k].label)
                loss, d_ent, d_rel = emb.sigmoid_bce_loss_and_grads(
                    state, np.array(rows), np.array(ys)
                )
            step += 1
            _check_finite(loss, step)
            opt.step([d_ent, d_rel])
            if kind == "transe":
                emb.renormalize_entities(state)
            epoch_loss += loss
        history.append(epoch_loss / n_pos)
        if cfg.resample_negatives:
            labeled = negative_batch(kg, bundle.train, cfg.negative_ratio, rng, exclusion)
    state.threshold = calibrate_threshold(state, bundle, cfg)
    return TrainedModel(kind, task, state, cfg, history)


def train(scorer_kind: str, bundle: DatasetBundle, task: str, cfg: TrainConfig) -> TrainedModel:
    if scorer_kind not in SCORER_KINDS:
        raise KgcError(f"unknown scorer kind: {scorer_kind}")
    if task not in TASKS:
        raise KgcError(f"unknown task: {task}")
    if not bundle.train:
        raise KgcError("bundle has no training triples")
    if scorer_kind == "classifier":
        return _train_classifier(bundle, task, cfg)
    # embedding scorers rank relations with their triple score; training is task-agnostic
    return _train_embedding(scorer_kind, bundle, task, cfg)
