import numpy as np
import pytest

from kgc_forge import Triple, intern_triples
from kgc_forge.ingest import DatasetBundle, build_bundle, load_dataset

from pathlib import Path

DATA_DIR = Path(__file__).resolve().parents[1] / "data" / "umls"


@pytest.fixture
def tiny_kg():
    """3 entities, 1 relation, 1 positive."""
    return intern_triples([("A", "p", "B")])


@pytest.fixture
def fork_kg():
    """A -p-> {B, C}: a 1-N relation."""
    return intern_triples([("A", "p", "B"), ("A", "p", "C")])


@pytest.fixture
def small_bundle():
    """Hand-built 5-entity bundle with train/dev/test splits."""
    train = [("A", "p", "B"), ("A", "p", "C"), ("B", "q", "C"), ("C", "q", "D"), ("D", "p", "E")]
    dev = [("B", "p", "C")]
    test = [("A", "q", "D"), ("E", "q", "A")]
    return build_bundle(train, dev, test)


@pytest.fixture(scope="session")
def umls_bundle():
    if not DATA_DIR.exists():
        pytest.skip("data/umls not generated (run tools/generate_umls_scale.py)")
    return load_dataset(DATA_DIR)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def random_bundle(rng, n_entities=10, n_relations=3, n_triples=40) -> DatasetBundle:
    """Random small dataset with disjoint splits, for oracle comparisons."""
    seen = set()
    while len(seen) < n_triples:
        h = int(rng.integers(n_entities))
        t = int(rng.integers(n_entities))
        r = int(rng.integers(n_relations))
        seen.add((f"e{h}", f"r{r}", f"e{t}"))
    triples = sorted(seen)
    order = rng.permutation(len(triples))
    shuffled = [triples[i] for i in order]
    n_test = max(1, n_triples // 5)
    n_dev = max(1, n_triples // 10)
    return build_bundle(
        shuffled[: n_triples - n_dev - n_test],
        shuffled[n_triples - n_dev - n_test : n_triples - n_test],
        shuffled[n_triples - n_test :],
    )
