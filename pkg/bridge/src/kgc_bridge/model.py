"""Toy trainable text scorer behind the wire protocol.

Each element (head, relation, tail) is embedded as a hashed bag-of-words over
its text plus augmentations; a tanh layer mixes the three element vectors into
a summary vector feeding two linear heads: a 2-class plausibility head whose
softmax output satisfies p0 + p1 = 1 exactly, and an R-class relation head.
Heads start at zero, so an untrained model scores every triple (0.5, 0.5) and
every pair uniformly. Stands in for a fine-tuned transformer scorer; the
protocol is the part under test.
"""

from __future__ import annotations

import hashlib
import json
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

N_BUCKETS = 512
_TOKEN_RE = re.compile(r"[a-z0-9%]+(?:[.\-_/'][a-z0-9%]+)*")

FORMAT_VERSION = 1


class BridgeModelError(Exception):
    pass


def tokenize(text: str) -> list[str]:
    return _TOKEN_RE.findall(text.lower())


def bucket(token: str) -> int:
    # stable across processes, unlike hash()
    return int.from_bytes(hashlib.md5(token.encode("utf-8")).digest()[:4], "big") % N_BUCKETS


def hashed_bow(text: str, augmentations: list[str] | None = None) -> np.ndarray:
    vec = np.zeros(N_BUCKETS)
    tokens = tokenize(text)
    for aug in augmentations or []:
        tokens.extend(tokenize(aug))
    if not tokens:
        raise BridgeModelError(f"text has no tokens: {text!r}")
    for tok in tokens:
        vec[bucket(tok)] += 1.0
    return vec / len(tokens)


@dataclass
class ToyModel:
    w_head: np.ndarray  # H x B
    w_rel: np.ndarray  # H x B
    w_tail: np.ndarray  # H x B
    bias: np.ndarray  # H
    head2: np.ndarray  # 2 x H, triple plausibility head
    headr: np.ndarray  # R x H, relation head
    relations: list[str]  # relation label per class index

    @property
    def hidden(self) -> int:
        return self.bias.shape[0]

    @property
    def num_relations(self) -> int:
        return self.headr.shape[0]


def init_model(relations: list[str], hidden: int = 32, seed: int = 0) -> ToyModel:
    rng = np.random.default_rng(seed)

    def u(*shape):
        return rng.uniform(-0.1, 0.1, size=shape)

    return ToyModel(
        w_head=u(hidden, N_BUCKETS),
        w_rel=u(hidden, N_BUCKETS),
        w_tail=u(hidden, N_BUCKETS),
        bias=np.zeros(hidden),
        head2=np.zeros((2, hidden)),
        headr=np.zeros((len(relations), hidden)),
        relations=list(relations),
    )


def _softmax(z: np.ndarray) -> np.ndarray:
    z = z - z.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def _item_vectors(item: dict, with_relation: bool) -> tuple[np.ndarray, np.ndarray | None, np.ndarray]:
    xh = hashed_bow(item["head_text"], item.get("head_augmentations"))
    xt = hashed_bow(item["tail_text"], item.get("tail_augmentations"))
    xr = None
    if with_relation:
        xr = hashed_bow(item["relation_text"], item.get("relation_augmentations"))
    return xh, xr, xt


def encode(model: ToyModel, items: list[dict], with_relation: bool) -> np.ndarray:
    rows = []
    for item in items:
        xh, xr, xt = _item_vectors(item, with_relation)
        z = model.w_head @ xh + model.w_tail @ xt + model.bias
        if xr is not None:
            z = z + model.w_rel @ xr
        rows.append(np.tanh(z))
    return np.array(rows)


def score_triples(model: ToyModel, items: list[dict]) -> list[list[float]]:
    """(p0, p1) per item, p0 the plausible-class probability."""
    c = encode(model, items, with_relation=True)
    return _softmax(c @ model.head2.T).tolist()


def score_pairs(model: ToyModel, items: list[dict]) -> list[list[float]]:
    """Length-R relation distribution per item."""
    c = encode(model, items, with_relation=False)
    return _softmax(c @ model.headr.T).tolist()


def triple_training_step(
    model: ToyModel, items: list[dict], labels: list[int], lr: float
) -> float:
    """One SGD step on the summed 2-class cross-entropy; returns the loss."""
    c = encode(model, items, with_relation=True)
    probs = _softmax(c @ model.head2.T)
    y = np.asarray(labels)
    target = np.where(y == 1, 0, 1)
    picked = np.clip(probs[np.arange(len(y)), target], 1e-12, None)
    loss = float(-np.log(picked).sum())
    d_logits = probs.copy()
    d_logits[np.arange(len(y)), target] -= 1.0
    _apply_grads(model, items, c, d_logits @ model.head2, lr, with_relation=True)
    model.head2 -= lr * (d_logits.T @ c)
    return loss


def relation_training_step(
    model: ToyModel, items: list[dict], true_relations: list[int], lr: float
) -> float:
    """One SGD step on the summed R-class cross-entropy over entity pairs."""
    c = encode(model, items, with_relation=False)
    probs = _softmax(c @ model.headr.T)
    idx = np.asarray(true_relations)
    picked = np.clip(probs[np.arange(len(idx)), idx], 1e-12, None)
    loss = float(-np.log(picked).sum())
    d_logits = probs.copy()
    d_logits[np.arange(len(idx)), idx] -= 1.0
    _apply_grads(model, items, c, d_logits @ model.headr, lr, with_relation=False)
    model.headr -= lr * (d_logits.T @ c)
    return loss


def _apply_grads(model, items, c, d_c, lr, with_relation):
    d_z = d_c * (1.0 - c**2)
    for i, item in enumerate(items):
        xh, xr, xt = _item_vectors(item, with_relation)
        model.w_head -= lr * np.outer(d_z[i], xh)
        model.w_tail -= lr * np.outer(d_z[i], xt)
        if xr is not None:
            model.w_rel -= lr * np.outer(d_z[i], xr)
    model.bias -= lr * d_z.sum(axis=0)


_ARRAYS = ["w_head", "w_rel", "w_tail", "bias", "head2", "headr"]


def save_model(model: ToyModel, path: str | Path) -> Path:
    path = Path(path)
    meta = {"format_version": FORMAT_VERSION, "relations": model.relations}
    with open(path, "wb") as f:
        np.savez(
            f,
            meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8),
            **{name: getattr(model, name) for name in _ARRAYS},
        )
    return path


def load_model(path: str | Path) -> ToyModel:
    path = Path(path)
    if not path.exists():
        raise BridgeModelError(f"no such model file: {path}")
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise BridgeModelError(f"unsupported model version: {meta.get('format_version')}")
        arrays = {name: data[name].copy() for name in _ARRAYS}
    return ToyModel(relations=meta["relations"], **arrays)
