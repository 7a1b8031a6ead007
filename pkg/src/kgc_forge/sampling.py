"""Negative triple construction by head/tail corruption.

A corruption replaces exactly one side with a different entity and never lands
in the positive set. Sampling is uniform over the valid replacements: rejection
sampling with a retry cap, then exhaustive enumeration as a fallback.
"""

from __future__ import annotations

from typing import Iterable, NamedTuple, Sequence

import numpy as np

from .kg import KgcError, KnowledgeGraph, Side, Triple

RETRY_CAP = 100


class SaturationError(KgcError):
    pass


class LabeledTriple(NamedTuple):
    triple: Triple
    label: int


def _replace(t: Triple, side: Side, e: int) -> Triple:
    if side is Side.HEAD:
        return Triple(e, t.relation, t.tail)
    return Triple(t.head, t.relation, e)


def corrupt(
    kg: KnowledgeGraph,
    t: Triple,
    side: Side,
    rng: np.random.Generator,
    positives: set[Triple] | None = None,
) -> Triple:
    """Uniformly sample one valid corruption of `t` on the given side.

    `positives` is the exclusion set; defaults to the graph's full positive
    set (filtered convention over train/dev/test).
    """
    if side is Side.RELATION:
        raise KgcError("relation corruption is not supported for training")
    if kg.num_entities < 2:
        raise SaturationError("saturated relation neighborhood: fewer than 2 entities")
    if positives is None:
        positives = kg.positives
    original = t.head if side is Side.HEAD else t.tail
    n = kg.num_entities
    for _ in range(RETRY_CAP):
        e = int(rng.integers(n))
        if e == original:
            continue
        candidate = _replace(t, side, e)
        if candidate not in positives:
            return candidate
    # dense neighborhood: enumerate the valid candidates exactly
    valid = [
        e for e in range(n) if e != original and _replace(t, side, e) not in positives
    ]
    if not valid:
        raise SaturationError(
            f"saturated relation neighborhood: no valid {side.value} replacement for {t}"
        )
    return _replace(t, side, valid[int(rng.integers(len(valid)))])


def negative_batch(
    kg: KnowledgeGraph,
    positives: Sequence[Triple],
    ratio: int,
    rng: np.random.Generator,
    exclusion: set[Triple] | None = None,
) -> list[LabeledTriple]:
    """Positives labeled 1 interleaved with `ratio` corruptions each labeled 0.

    The corrupted side is chosen uniformly per corruption. Output size is
    len(positives) * (1 + ratio).
    """
    if ratio < 1:
        raise KgcError(f"negative ratio must be >= 1, got {ratio}")
    out: list[LabeledTriple] = []
    for pos in positives:
        out.append(LabeledTriple(pos, 1))
        for _ in range(ratio):
            side = Side.HEAD if rng.integers(2) == 0 else Side.TAIL
            try:
                neg = corrupt(kg, pos, side, rng, exclusion)
            except SaturationError as exc:
                raise SaturationError(f"{exc} (while corrupting positive {pos})") from exc
            out.append(LabeledTriple(neg, 0))
    return out
