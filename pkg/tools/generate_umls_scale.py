#!/usr/bin/env python3
"""Generate the UMLS-scale stand-in dataset under data/umls/.

The real UMLS benchmark distribution cannot be redistributed here, so this
script synthesizes a biomedical-flavoured knowledge graph with the exact same
shape: 135 entities, 46 relations, 6,529 triples split 5,216 / 652 / 661.
Drop the real train.tsv/dev.tsv/test.tsv into data/umls/ to evaluate against
the genuine benchmark; the file format is identical.

Construction: entities live in 9 semantic groups embedded in a latent space
with per-group spread; every relation is a translation between a domain and a
range group-set, and its positive pairs are the geometrically closest
(head, tail) pairs under that translation, sampled through a soft (Gumbel)
boundary. This yields the properties the toolkit's desk-scale
experiments rely on: relations have heterogeneous scales and cardinalities,
corruptions are mostly implausible, and the graph is learnable by
translational models without being trivial.

Deterministic: a fixed seed, stable iteration order, byte-stable output.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import numpy as np

SEED = 20260823
N_ENTITIES = 135
N_RELATIONS = 46
N_TRIPLES = 6529
SPLITS = (5216, 652, 661)
LATENT_DIM = 8
BOUNDARY_TEMPERATURE = 1.2  # Gumbel temperature blurring the positive-set boundary

NOUNS = [
    "abnormality", "organism", "substance", "procedure", "structure",
    "function", "finding", "device", "concept",
]
ADJECTIVES = [
    "acquired", "congenital", "bacterial", "viral", "clinical", "molecular",
    "cellular", "anatomical", "diagnostic", "therapeutic", "experimental",
    "laboratory", "pathologic", "physiologic", "genetic",
]
RELATION_NAMES = [
    "affects", "causes", "treats", "prevents", "diagnoses", "location_of",
    "part_of", "result_of", "isa", "interacts_with", "produces", "disrupts",
    "complicates", "manages", "method_of", "measures", "measurement_of",
    "uses", "indicates", "co-occurs_with", "degree_of", "derivative_of",
    "precedes", "process_of", "property_of", "surrounds", "connected_to",
    "contains", "evaluation_of", "exhibits", "ingredient_of", "issue_in",
    "manifestation_of", "occurs_in", "performs", "practices", "carries_out",
    "consists_of", "adjacent_to", "analyzes", "assesses_effect_of",
    "associated_with", "branch_of", "brings_about", "conceptual_part_of",
    "developmental_form_of",
]
SYNONYMS = {
    "treats": "remedies",
    "causes": "induces",
    "prevents": "averts",
    "isa": "subtype of",
    "part_of": "component of",
    "uses": "employs",
    "produces": "generates",
    "measures": "quantifies",
    "contains": "encloses",
    "precedes": "comes before",
    "affects": "influences",
    "indicates": "signals",
}


def main(out_dir: Path) -> None:
    assert len(RELATION_NAMES) == N_RELATIONS
    rng = np.random.default_rng(SEED)

    entity_names = [f"{adj}_{noun}" for noun in NOUNS for adj in ADJECTIVES]
    assert len(entity_names) == N_ENTITIES
    groups = {noun: [i for i, n in enumerate(entity_names) if n.endswith(noun)] for noun in NOUNS}

    # heterogeneous geometry: group radius and spread vary so that a single
    # global classification threshold misfits some relations
    centers = rng.normal(size=(len(NOUNS), LATENT_DIM))
    centers *= rng.uniform(0.9, 2.4, size=(len(NOUNS), 1))
    spreads = rng.uniform(0.35, 1.05, size=len(NOUNS))
    coords = np.zeros((N_ENTITIES, LATENT_DIM))
    for g, noun in enumerate(NOUNS):
        for e in groups[noun]:
            coords[e] = centers[g] + spreads[g] * rng.normal(size=LATENT_DIM)

    # each relation translates from a domain group-set to a range group-set
    rel_specs = []
    for r in range(N_RELATIONS):
        n_dom = 1 + int(rng.random() < 0.4)
        n_rng = 1 + int(rng.random() < 0.4)
        dom = sorted(rng.choice(len(NOUNS), size=n_dom, replace=False).tolist())
        ran = sorted(rng.choice(len(NOUNS), size=n_rng, replace=False).tolist())
        shift = centers[ran].mean(axis=0) - centers[dom].mean(axis=0)
        shift = shift + 0.15 * rng.normal(size=LATENT_DIM)
        rel_specs.append((dom, ran, shift))

    # skewed triple counts per relation, capped by block capacity
    weights = rng.lognormal(mean=0.0, sigma=0.8, size=N_RELATIONS)
    capacities = []
    for dom, ran, _ in rel_specs:
        heads = sum(len(groups[NOUNS[g]]) for g in dom)
        tails = sum(len(groups[NOUNS[g]]) for g in ran)
        capacities.append(heads * tails - min(heads, tails))  # minus possible self-pairs
    counts = np.maximum(12, (weights / weights.sum() * N_TRIPLES).round().astype(int))
    counts = np.minimum(counts, (np.array(capacities) * 0.65).astype(int))
    # adjust to the exact total by nudging relations with slack
    while counts.sum() != N_TRIPLES:
        delta = N_TRIPLES - counts.sum()
        order = rng.permutation(N_RELATIONS)
        for r in order:
            if delta > 0 and counts[r] < int(capacities[r] * 0.65):
                counts[r] += 1
                delta += -1
            elif delta < 0 and counts[r] > 12:
                counts[r] -= 1
                delta += 1
            if delta == 0:
                break

    triples = []
    for r, (dom, ran, shift) in enumerate(rel_specs):
        heads = np.concatenate([groups[NOUNS[g]] for g in dom])
        tails = np.concatenate([groups[NOUNS[g]] for g in ran])
        hh, tt = np.meshgrid(heads, tails, indexing="ij")
        pairs = np.column_stack([hh.ravel(), tt.ravel()])
        pairs = pairs[pairs[:, 0] != pairs[:, 1]]
        dists = np.linalg.norm(coords[pairs[:, 0]] + shift - coords[pairs[:, 1]], axis=1)
        n = int(counts[r])
        # weighted sampling without replacement (Gumbel top-k): mostly the
        # closest pairs, but the boundary between positives and negatives is
        # soft, so classification has an irreducible error like real KGs
        keys = -dists / BOUNDARY_TEMPERATURE + rng.gumbel(size=len(dists))
        chosen = np.argsort(keys, kind="stable")[::-1][:n]
        for i in chosen:
            triples.append((entity_names[pairs[i, 0]], RELATION_NAMES[r], entity_names[pairs[i, 1]]))

    assert len(triples) == len(set(triples)) == N_TRIPLES, len(triples)
    order = rng.permutation(N_TRIPLES)
    shuffled = [triples[i] for i in order]
    n_train, n_dev, n_test = SPLITS
    split_files = {
        "train.tsv": shuffled[:n_train],
        "dev.tsv": shuffled[n_train : n_train + n_dev],
        "test.tsv": shuffled[n_train + n_dev :],
    }

    out_dir.mkdir(parents=True, exist_ok=True)
    for name, rows in split_files.items():
        with open(out_dir / name, "w", encoding="utf-8", newline="\n") as f:
            for h, rel, t in rows:
                f.write(f"{h}\t{rel}\t{t}\n")
    with open(out_dir / "entity2text.tsv", "w", encoding="utf-8", newline="\n") as f:
        for name in entity_names:
            f.write(f"{name}\t{name.replace('_', ' ').title()}\n")
    with open(out_dir / "relation2text.tsv", "w", encoding="utf-8", newline="\n") as f:
        for name in RELATION_NAMES:
            f.write(f"{name}\t{name.replace('_', ' ')}\n")
    with open(out_dir / "entity2type.tsv", "w", encoding="utf-8", newline="\n") as f:
        for name in entity_names:
            f.write(f"{name}\t{name.split('_')[-1]}\n")
    with open(out_dir / "relation2synonyms.tsv", "w", encoding="utf-8", newline="\n") as f:
        for rel, syn in SYNONYMS.items():
            f.write(f"{rel}\t{syn}\n")
    with open(out_dir / "PROVENANCE.json", "w", encoding="utf-8", newline="\n") as f:
        json.dump(
            {
                "generator": "tools/generate_umls_scale.py",
                "seed": SEED,
                "note": "synthetic stand-in matching the UMLS benchmark shape; "
                        "replace the TSVs with the real distribution for benchmark numbers",
                "entities": N_ENTITIES,
                "relations": N_RELATIONS,
                "triples": N_TRIPLES,
                "splits": SPLITS,
            },
            f, indent=2,
        )
        f.write("\n")
    print(f"wrote {N_TRIPLES} triples to {out_dir}")


if __name__ == "__main__":
    target = Path(sys.argv[1]) if len(sys.argv) > 1 else Path(__file__).resolve().parents[1] / "data" / "umls"
    main(target)
