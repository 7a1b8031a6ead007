"""Dataset loading: TSV triples, auxiliary text maps, literal rewriting, splits."""

from __future__ import annotations

import os
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .kg import KgcError, KnowledgeGraph, Triple

RawTriple = tuple[str, str, str]

_NUMBER_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")


class IngestError(KgcError):
    pass


@dataclass
class DatasetBundle:
    train: list[Triple]
    dev: list[Triple]
    test: list[Triple]
    graph: KnowledgeGraph
    literal_count: int = 0
    seed: int | None = None

    @property
    def all_triples(self) -> list[Triple]:
        return self.train + self.dev + self.test


def parse_triples_file(path: str | Path) -> list[RawTriple]:
    """One tab-separated (head, relation, tail) per line; blank lines skipped."""
    path = Path(path)
    if not path.exists():
        raise IngestError(f"no such file: {path}")
    out = []
    try:
        text = path.read_text(encoding="utf-8")
    except UnicodeDecodeError as exc:
        raise IngestError(f"{path} is not valid UTF-8: {exc}") from exc
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 3:
            raise IngestError(f"malformed line {lineno} in {path}: expected 3 fields, got {len(fields)}")
        out.append((fields[0], fields[1], fields[2]))
    return out


def parse_pair_file(path: str | Path) -> list[tuple[str, str]]:
    """Two-column TSV used by the auxiliary maps; repeated keys allowed."""
    path = Path(path)
    out = []
    text = path.read_text(encoding="utf-8")
    for lineno, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            continue
        fields = line.split("\t")
        if len(fields) != 2:
            raise IngestError(f"malformed line {lineno} in {path}: expected 2 fields, got {len(fields)}")
        out.append((fields[0], fields[1]))
    return out


def default_is_literal(tail: str) -> bool:
    """Quoted strings, bare numbers, and ^^-suffixed datatyped values count as literals."""
    if tail.startswith('"') and tail.endswith('"') and len(tail) >= 2:
        return True
    if "^^" in tail:
        return True
    return bool(_NUMBER_RE.match(tail))


def literalize(
    raw: Sequence[RawTriple],
    is_literal: Callable[[str], bool] = default_is_literal,
) -> tuple[list[RawTriple], dict[str, str]]:
    """Replace literal tails with sequential "/literal_k" ids, first appearance order.

    Returns the rewritten triples and a map from assigned id back to the
    original literal string, used as the entity's label text.
    """
    ids: dict[str, str] = {}
    label_map: dict[str, str] = {}
    out = []
    for h, r, t in raw:
        if re.fullmatch(r"/literal_\d+", t):
            out.append((h, r, t))  # idempotent on already-rewritten input
            continue
        if is_literal(t):
            lit_id = ids.get(t)
            if lit_id is None:
                lit_id = f"/literal_{len(ids)}"
                ids[t] = lit_id
                label_map[lit_id] = t
            out.append((h, r, lit_id))
        else:
            out.append((h, r, t))
    return out, label_map


def split_triples(
    items: Sequence, ratios: tuple[float, float, float], seed: int
) -> tuple[list, list, list]:
    """Deterministic seeded shuffle; dev/test sizes round up, train takes the rest."""
    if any(r <= 0 for r in ratios):
        raise IngestError(f"split ratios must be positive, got {ratios}")
    if abs(sum(ratios) - 1.0) > 1e-9:
        raise IngestError(f"split ratios must sum to 1, got {sum(ratios)}")
    if len(items) < 3:
        raise IngestError("dataset too small to split")
    rng = np.random.default_rng(seed)
    order = rng.permutation(len(items))
    n_dev = int(np.ceil(len(items) * ratios[1]))
    n_test = int(np.ceil(len(items) * ratios[2]))
    n_train = len(items) - n_dev - n_test
    if n_train < 1:
        raise IngestError("dataset too small to split")
    shuffled = [items[i] for i in order]
    return (
        shuffled[:n_train],
        shuffled[n_train : n_train + n_dev],
        shuffled[n_train + n_dev :],
    )


def _load_aux(kg: KnowledgeGraph, data_dir: Path) -> None:
    def entity_id(key):
        return kg.entities.lookup(key)

    def relation_id(key):
        return kg.relations.lookup(key)

    specs = [
        ("entity2text.tsv", entity_id, kg.entity_labels, False),
        ("relation2text.tsv", relation_id, kg.relation_labels, False),
        ("entity2type.tsv", entity_id, kg.entity_types, True),
        ("relation2synonyms.tsv", relation_id, kg.relation_synonyms, True),
    ]
    for fname, resolve, store, multi in specs:
        path = data_dir / fname
        if not path.exists():
            continue
        for key, value in parse_pair_file(path):
            idx = resolve(key)
            if idx is None:
                continue  # aux entry for an element absent from the triples
            if multi:
                store.setdefault(idx, []).append(value)
            elif idx not in store:
                store[idx] = value


def build_bundle(
    train_raw: Sequence[RawTriple],
    dev_raw: Sequence[RawTriple],
    test_raw: Sequence[RawTriple],
    literal_label_map: dict[str, str] | None = None,
    seed: int | None = None,
) -> DatasetBundle:
    """Intern all splits into one graph; positives = union of the three splits."""
    kg = KnowledgeGraph()
    train = kg.intern_raw(train_raw)
    dev = kg.intern_raw(dev_raw)
    test = kg.intern_raw(test_raw)
    literal_label_map = literal_label_map or {}
    for lit_id, label in literal_label_map.items():
        idx = kg.entities.lookup(lit_id)
        if idx is not None:
            kg.entity_labels[idx] = label
    return DatasetBundle(train, dev, test, kg, len(literal_label_map), seed)


def load_dataset(
    data_dir: str | Path,
    ratios: tuple[float, float, float] = (0.6, 0.2, 0.2),
    seed: int = 0,
    apply_literalize: bool = True,
) -> DatasetBundle:
    """Load a dataset directory.

    Pre-split datasets ship train.tsv/dev.tsv/test.tsv and are loaded as-is;
    otherwise all.tsv is split by `ratios` under `seed`. Auxiliary maps
    (entity2text, relation2text, entity2type, relation2synonyms) are optional.
    """
    data_dir = Path(data_dir)
    if not data_dir.is_dir():
        raise IngestError(f"no such dataset directory: {data_dir}")
    if (data_dir / "train.tsv").exists():
        splits = []
        for name in ("train.tsv", "dev.tsv", "test.tsv"):
            path = data_dir / name
            splits.append(parse_triples_file(path) if path.exists() else [])
        train_raw, dev_raw, test_raw = splits
        used_seed = None
    elif (data_dir / "all.tsv").exists():
        raw = parse_triples_file(data_dir / "all.tsv")
        train_raw, dev_raw, test_raw = split_triples(raw, ratios, seed)
        used_seed = seed
    else:
        raise IngestError(f"{data_dir} contains neither train.tsv nor all.tsv")

    label_map: dict[str, str] = {}
    if apply_literalize:
        merged = train_raw + dev_raw + test_raw
        rewritten, label_map = literalize(merged)
        n_train, n_dev = len(train_raw), len(dev_raw)
        train_raw = rewritten[:n_train]
        dev_raw = rewritten[n_train : n_train + n_dev]
        test_raw = rewritten[n_train + n_dev :]

    bundle = build_bundle(train_raw, dev_raw, test_raw, label_map, used_seed)
    _load_aux(bundle.graph, data_dir)
    return bundle


def write_dataset(bundle: DatasetBundle, out_dir: str | Path) -> list[Path]:
    """Re-emit a bundle as TSV files; bit-stable for identical inputs and seed."""
    out_dir = Path(out_dir)
    os.makedirs(out_dir, exist_ok=True)
    kg = bundle.graph
    written = []
    for name, triples in (("train", bundle.train), ("dev", bundle.dev), ("test", bundle.test)):
        path = out_dir / f"{name}.tsv"
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for t in triples:
                f.write(f"{kg.entities[t.head]}\t{kg.relations[t.relation]}\t{kg.entities[t.tail]}\n")
        written.append(path)

    def dump_map(fname, interner, entries, multi):
        if not entries:
            return
        path = out_dir / fname
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for idx in sorted(entries):
                values = entries[idx] if multi else [entries[idx]]
                for v in values:
                    f.write(f"{interner[idx]}\t{v}\n")
        written.append(path)

    dump_map("entity2text.tsv", kg.entities, kg.entity_labels, False)
    dump_map("relation2text.tsv", kg.relations, kg.relation_labels, False)
    dump_map("entity2type.tsv", kg.entities, kg.entity_types, True)
    dump_map("relation2synonyms.tsv", kg.relations, kg.relation_synonyms, True)
    return written
