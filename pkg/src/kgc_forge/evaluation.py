"""Filtered-setting evaluation: link/relation prediction ranking, triple
classification accuracy, and the per-relation / per-cardinality breakdowns.

Tie handling uses the mean-rank convention: rank = 1 + (# strictly higher)
+ (# tied)/2, the average of the optimistic and pessimistic ranks, so a
constant scorer cannot claim rank 1. Ranks are therefore real-valued
(half-integers under ties). Set tie_rule="optimistic" to compare against
results reported with first-position ranks.
"""

from __future__ import annotations

import csv
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from .kg import Cardinality, KgcError, KnowledgeGraph, Side, Triple, relation_cardinality
from .sampling import LabeledTriple
from .scorers import Scorer

DEFAULT_HITS = (1, 3, 10)


@dataclass(frozen=True)
class RankResult:
    triple: Triple
    side: Side
    rank: float
    candidates_considered: int

    def __post_init__(self):
        assert self.rank >= 1.0
        assert self.rank <= self.candidates_considered


def _rank_of_first(scores: np.ndarray, tie_rule: str = "mean") -> float:
    """Rank of scores[0] within the whole array, descending, ties averaged."""
    true_score = scores[0]
    others = scores[1:]
    higher = int((others > true_score).sum())
    ties = int((others == true_score).sum())
    if tie_rule == "optimistic":
        return float(1 + higher)
    return 1.0 + higher + ties / 2.0


def rank_link(
    scorer: Scorer,
    kg: KnowledgeGraph,
    test_triple: Triple,
    side: Side,
    filter_set: set[Triple],
    tie_rule: str = "mean",
) -> RankResult:
    """Filtered rank of the test triple against all same-side corruptions.

    Candidate replacements exclude both the head and the tail entity of the
    test triple; corruptions found in `filter_set` (known positives) are
    removed. The test triple itself always stays in the candidate list.
    """
    h, r, t = test_triple
    entities = np.arange(kg.num_entities)
    entities = entities[(entities != h) & (entities != t)]
    if side is Side.HEAD:
        cand = np.column_stack([entities, np.full_like(entities, r), np.full_like(entities, t)])
    elif side is Side.TAIL:
        cand = np.column_stack([np.full_like(entities, h), np.full_like(entities, r), entities])
    else:
        raise KgcError("rank_link takes HEAD or TAIL; use rank_relation for relations")
    if filter_set:
        keep = [i for i, row in enumerate(cand) if Triple(*map(int, row)) not in filter_set]
        cand = cand[keep]
    pool = np.vstack([np.array(test_triple), cand])
    scores = scorer.score_triples(pool)
    return RankResult(test_triple, side, _rank_of_first(scores, tie_rule), len(pool))


def rank_relation(
    scorer: Scorer,
    kg: KnowledgeGraph,
    test_triple: Triple,
    filter_set: set[Triple] | None = None,
    tie_rule: str = "mean",
) -> RankResult:
    """Filtered rank of the true relation among all candidate relations."""
    h, r, t = test_triple
    all_scores = scorer.relation_scores(h, t)
    cand_rels = [
        r2
        for r2 in range(kg.num_relations)
        if r2 != r and not (filter_set and Triple(h, r2, t) in filter_set)
    ]
    scores = np.concatenate([[all_scores[r]], all_scores[cand_rels]])
    return RankResult(test_triple, Side.RELATION, _rank_of_first(scores, tie_rule), len(scores))


def _map_ordered(fn, items, workers: int):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def link_prediction_ranks(
    scorer: Scorer,
    kg: KnowledgeGraph,
    test_triples: Sequence[Triple],
    filter_set: set[Triple] | None = None,
    tie_rule: str = "mean",
    workers: int = 1,
) -> list[RankResult]:
    """Two ranks (head and tail) per test triple, filtered against `filter_set`
    (defaults to the graph's full positive set)."""
    if filter_set is None:
        filter_set = kg.positives

    def both(t: Triple):
        return (
            rank_link(scorer, kg, t, Side.HEAD, filter_set, tie_rule),
            rank_link(scorer, kg, t, Side.TAIL, filter_set, tie_rule),
        )

    out: list[RankResult] = []
    for pair in _map_ordered(both, test_triples, workers):
        out.extend(pair)
    return out


def relation_prediction_ranks(
    scorer: Scorer,
    kg: KnowledgeGraph,
    test_triples: Sequence[Triple],
    filter_set: set[Triple] | None = None,
    tie_rule: str = "mean",
    workers: int = 1,
) -> list[RankResult]:
    if filter_set is None:
        filter_set = kg.positives
    return _map_ordered(
        lambda t: rank_relation(scorer, kg, t, filter_set, tie_rule), test_triples, workers
    )


@dataclass
class EvalReport:
    task: str
    mr: float
    mrr: float
    hits: dict[int, float]
    accuracy: float | None = None
    per_relation: dict[int, dict] = field(default_factory=dict)
    per_cardinality: dict[str, dict] = field(default_factory=dict)
    config_echo: dict = field(default_factory=dict)
    seed: int | None = None
    num_ranks: int = 0

    def __post_init__(self):
        assert self.mr >= 1.0
        assert 0.0 < self.mrr <= 1.0
        ns = sorted(self.hits)
        for a, b in zip(ns, ns[1:]):
            assert self.hits[a] <= self.hits[b], "Hits@N must be monotone in N"

    def to_dict(self) -> dict:
        return {
            "task": self.task,
            "MR": self.mr,
            "MRR": self.mrr,
            "hits": {str(n): v for n, v in self.hits.items()},
            "accuracy": self.accuracy,
            "per_relation": {str(k): v for k, v in self.per_relation.items()},
            "per_cardinality": self.per_cardinality,
            "config": self.config_echo,
            "seed": self.seed,
            "num_ranks": self.num_ranks,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True, **kwargs)


def _metrics(ranks: np.ndarray, ns: Sequence[int]) -> tuple[float, float, dict[int, float]]:
    mr = float(ranks.mean())
    mrr = float((1.0 / ranks).mean())
    hits = {n: float((ranks <= n).mean()) for n in ns}
    return mr, mrr, hits


def aggregate(
    results: Sequence[RankResult],
    ns: Sequence[int] = DEFAULT_HITS,
    task: str = "lp",
    config_echo: dict | None = None,
    seed: int | None = None,
) -> EvalReport:
    if not results:
        raise KgcError("cannot aggregate an empty rank list")
    ranks = np.array([r.rank for r in results])
    mr, mrr, hits = _metrics(ranks, ns)
    per_relation: dict[int, dict] = {}
    by_rel: dict[int, list[float]] = {}
    for r in results:
        by_rel.setdefault(r.triple.relation, []).append(r.rank)
    for rel, rel_ranks in sorted(by_rel.items()):
        rmr, rmrr, rhits = _metrics(np.array(rel_ranks), ns)
        per_relation[rel] = {"MR": rmr, "MRR": rmrr, "hits": {str(n): v for n, v in rhits.items()}, "count": len(rel_ranks)}
    return EvalReport(
        task=task, mr=mr, mrr=mrr, hits=hits,
        per_relation=per_relation, config_echo=config_echo or {}, seed=seed,
        num_ranks=len(results),
    )


def classification_accuracy(scorer: Scorer, labeled: Sequence[LabeledTriple]) -> float:
    """Fraction of labeled triples whose predicted class matches the label."""
    if not labeled:
        raise KgcError("cannot compute accuracy on an empty set")
    triples = np.array([lt.triple for lt in labeled])
    labels = np.array([lt.label for lt in labeled])
    preds = scorer.classify_triples(triples)
    return float((preds == labels).mean())


def ablate_cardinality(
    results: Sequence[RankResult],
    kg: KnowledgeGraph,
    train_triples: Sequence[Triple],
    threshold: float = 1.5,
) -> dict[str, dict]:
    """MRR and Hits@10 per (cardinality category, prediction side) cell.

    Categories come from the training split only. Empty cells are absent from
    the result, not zero.
    """
    train = list(train_triples)
    cats: dict[int, Cardinality] = {}
    cells: dict[tuple[str, str], list[float]] = {}
    for res in results:
        rel = res.triple.relation
        if rel not in cats:
            try:
                cats[rel] = relation_cardinality(kg, rel, threshold, train).category
            except KgcError:
                continue  # relation unseen in training: uncategorizable
        key = (cats[rel].value, res.side.value)
        cells.setdefault(key, []).append(res.rank)
    out: dict[str, dict] = {}
    for (cat, side), ranks in sorted(cells.items()):
        arr = np.array(ranks)
        out.setdefault(cat, {})[side] = {
            "MRR": float((1.0 / arr).mean()),
            "hits@10": float((arr <= 10).mean()),
            "count": len(arr),
        }
    return out


def per_relation_extremes(
    results: Sequence[RankResult],
    kg: KnowledgeGraph,
    k: int = 10,
    min_support: int = 5,
) -> tuple[list[dict], list[dict]]:
    """Best-k and worst-k relations by Hits@10 (ties: higher MRR, then label)."""
    by_rel: dict[int, list[float]] = {}
    support: dict[int, set[Triple]] = {}
    for res in results:
        by_rel.setdefault(res.triple.relation, []).append(res.rank)
        support.setdefault(res.triple.relation, set()).add(res.triple)
    rows = []
    for rel, ranks in by_rel.items():
        if len(support[rel]) < min_support:
            continue
        arr = np.array(ranks)
        rows.append(
            {
                "relation": kg.relations[rel],
                "hits@10": float((arr <= 10).mean()),
                "MRR": float((1.0 / arr).mean()),
                "count": len(ranks),
            }
        )
    best = sorted(rows, key=lambda r: (-r["hits@10"], -r["MRR"], r["relation"]))[:k]
    worst = sorted(rows, key=lambda r: (r["hits@10"], r["MRR"], r["relation"]))[:k]
    return best, worst


def write_report_tables(report: EvalReport, kg: KnowledgeGraph, out_dir: str | Path) -> list[Path]:
    """Emit per-relation and per-cardinality tables as CSV for plotting."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    written = []
    rel_path = out_dir / "per_relation.csv"
    with open(rel_path, "w", newline="", encoding="utf-8") as f:
        w = csv.writer(f)
        w.writerow(["relation", "side", "metric", "value"])
        for rel, stats in report.per_relation.items():
            label = kg.relations[int(rel)]
            w.writerow([label, "both", "MR", stats["MR"]])
            w.writerow([label, "both", "MRR", stats["MRR"]])
            for n, v in stats["hits"].items():
                w.writerow([label, "both", f"hits@{n}", v])
    written.append(rel_path)
    if report.per_cardinality:
        card_path = out_dir / "per_cardinality.csv"
        with open(card_path, "w", newline="", encoding="utf-8") as f:
            w = csv.writer(f)
            w.writerow(["category", "side", "metric", "value"])
            for cat, sides in report.per_cardinality.items():
                for side, stats in sides.items():
                    for metric in ("MRR", "hits@10"):
                        w.writerow([cat, side, metric, stats[metric]])
        written.append(card_path)
    return written
