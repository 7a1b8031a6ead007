"""Fine-tune the toy model on a dataset directory exported by `kgc-forge ingest`.

Expected layout: train.tsv (tab-separated head/relation/tail per line) plus the
optional entity2text / relation2text / entity2type / relation2synonyms maps.
Negatives are manufactured locally by corrupting one side of each positive with
a random entity, rejecting corruptions that are themselves positives.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import model as toy


class FinetuneError(Exception):
    pass


@dataclass
class TextDataset:
    triples: list[tuple[str, str, str]]
    entities: list[str]
    relations: list[str]
    entity_text: dict[str, str] = field(default_factory=dict)
    relation_text: dict[str, str] = field(default_factory=dict)
    entity_types: dict[str, list[str]] = field(default_factory=dict)
    relation_synonyms: dict[str, list[str]] = field(default_factory=dict)

    def item(self, h: str, r: str | None, t: str) -> dict:
        out = {
            "head_text": self.entity_text.get(h, h),
            "head_augmentations": self.entity_types.get(h, []),
            "tail_text": self.entity_text.get(t, t),
            "tail_augmentations": self.entity_types.get(t, []),
        }
        if r is not None:
            out["relation_text"] = self.relation_text.get(r, r)
            out["relation_augmentations"] = self.relation_synonyms.get(r, [])
        return out


def _read_pairs(path: Path) -> list[tuple[str, str]]:
    out = []
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise FinetuneError(f"malformed line {lineno} in {path}")
        out.append((fields[0], fields[1]))
    return out


def load_text_dataset(data_dir: str | Path, split: str = "train") -> TextDataset:
    data_dir = Path(data_dir)
    triples_path = data_dir / f"{split}.tsv"
    if not triples_path.exists():
        raise FinetuneError(f"no such split file: {triples_path}")
    triples = []
    for lineno, line in enumerate(triples_path.read_text(encoding="utf-8").splitlines(), start=1):
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise FinetuneError(f"malformed line {lineno} in {triples_path}")
        triples.append((fields[0], fields[1], fields[2]))
    entities, relations = [], []
    seen_e, seen_r = set(), set()
    for h, r, t in triples:
        for e in (h, t):
            if e not in seen_e:
                seen_e.add(e)
                entities.append(e)
        if r not in seen_r:
            seen_r.add(r)
            relations.append(r)
    ds = TextDataset(triples, entities, relations)
    maps = [
        ("entity2text.tsv", ds.entity_text, False),
        ("relation2text.tsv", ds.relation_text, False),
        ("entity2type.tsv", ds.entity_types, True),
        ("relation2synonyms.tsv", ds.relation_synonyms, True),
    ]
    for fname, store, multi in maps:
        path = data_dir / fname
        if not path.exists():
            continue
        for key, value in _read_pairs(path):
            if multi:
                store.setdefault(key, []).append(value)
            else:
                store.setdefault(key, value)
    return ds


def _corrupt(triple, entities, positives, rng, cap=100):
    h, r, t = triple
    for _ in range(cap):
        e = entities[int(rng.integers(len(entities)))]
        if rng.integers(2) == 0:
            cand = (e, r, t)
            if e != h and cand not in positives:
                return cand
        else:
            cand = (h, r, e)
            if e != t and cand not in positives:
                return cand
    raise FinetuneError(f"could not corrupt {triple}: neighborhood saturated")


def finetune_triples(
    ds: TextDataset,
    model: toy.ToyModel | None = None,
    epochs: int = 3,
    batch_size: int = 16,
    lr: float = 0.05,
    seed: int = 0,
    limit: int | None = None,
) -> tuple[toy.ToyModel, list[float]]:
    """Train the 2-class plausibility head; returns the model and per-epoch losses."""
    rng = np.random.default_rng(seed)
    if model is None:
        model = toy.init_model(ds.relations, seed=seed)
    triples = ds.triples[:limit] if limit else ds.triples
    if not triples:
        raise FinetuneError("no training triples")
    positives = set(ds.triples)
    examples = []
    for t in triples:
        examples.append((ds.item(*t), 1))
        neg = _corrupt(t, ds.entities, positives, rng)
        examples.append((ds.item(*neg), 1 if neg in positives else 0))
    history = []
    for _ in range(epochs):
        order = rng.permutation(len(examples))
        total = 0.0
        for start in range(0, len(order), batch_size):
            batch = [examples[i] for i in order[start : start + batch_size]]
            items = [b[0] for b in batch]
            labels = [b[1] for b in batch]
            total += toy.triple_training_step(model, items, labels, lr)
        loss = total / len(examples)
        if not np.isfinite(loss):
            raise FinetuneError(f"training diverged: loss {loss}")
        history.append(loss)
    return model, history


def finetune_relations(
    ds: TextDataset,
    model: toy.ToyModel | None = None,
    epochs: int = 3,
    batch_size: int = 16,
    lr: float = 0.05,
    seed: int = 0,
    limit: int | None = None,
) -> tuple[toy.ToyModel, list[float]]:
    """Train the R-class relation head on (head, tail) pairs."""
    rng = np.random.default_rng(seed)
    if model is None:
        model = toy.init_model(ds.relations, seed=seed)
    rel_index = {r: i for i, r in enumerate(model.relations)}
    triples = ds.triples[:limit] if limit else ds.triples
    examples = [
        (ds.item(h, None, t), rel_index[r]) for h, r, t in triples if r in rel_index
    ]
    if not examples:
        raise FinetuneError("no training pairs with known relations")
    history = []
    for _ in range(epochs):
        order = rng.permutation(len(examples))
        total = 0.0
        for start in range(0, len(order), batch_size):
            batch = [examples[i] for i in order[start : start + batch_size]]
            total += toy.relation_training_step(
                model, [b[0] for b in batch], [b[1] for b in batch], lr
            )
        loss = total / len(examples)
        if not np.isfinite(loss):
            raise FinetuneError(f"training diverged: loss {loss}")
        history.append(loss)
    return model, history
