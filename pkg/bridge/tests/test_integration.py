"""End-to-end check against the kgc-forge client, when it is installed."""

import threading

import numpy as np
import pytest

kgc_forge = pytest.importorskip("kgc_forge")

from kgc_forge.bridge_client import BridgeError, BridgeScorer
from kgc_forge.kg import intern_triples

from kgc_bridge import BridgeServer
from kgc_bridge.model import init_model, score_triples, triple_training_step


@pytest.fixture
def live_server():
    model = init_model(["points at", "quotes from"], seed=0)
    items = [
        {"head_text": "node 0", "relation_text": "points at", "tail_text": "node 1"},
        {"head_text": "node 2", "relation_text": "quotes from", "tail_text": "node 0"},
    ]
    triple_training_step(model, items, [1, 0], lr=0.2)
    srv = BridgeServer(model)
    threading.Thread(target=srv.serve_forever, daemon=True).start()
    yield model, srv
    srv.shutdown()
    srv.server_close()


def _graph():
    return intern_triples(
        [(f"node {i}", rel, f"node {(i + 1) % 4}")
         for i, rel in enumerate(["points at", "quotes from", "points at", "quotes from"])]
    )


def test_client_scores_match_service_model(live_server):
    model, srv = live_server
    kg = _graph()
    scorer = BridgeScorer(kg, srv.endpoint)
    triples = np.array([[0, 0, 1], [2, 1, 3], [1, 0, 0]])
    got = scorer.score_triples(triples)
    items = [
        {"head_text": kg.entity_label(h), "head_augmentations": [],
         "relation_text": kg.relation_label(r), "relation_augmentations": [],
         "tail_text": kg.entity_label(t), "tail_augmentations": []}
        for h, r, t in triples
    ]
    want = np.array([row[0] for row in score_triples(model, items)])
    assert np.max(np.abs(got - want)) <= 1e-6
    scorer.close()


def test_client_relation_distribution_matches_graph_arity(live_server):
    _, srv = live_server
    kg = _graph()
    scorer = BridgeScorer(kg, srv.endpoint)
    probs = scorer.relation_scores(0, 1)
    assert probs.shape == (kg.num_relations,)
    assert probs.sum() == pytest.approx(1.0)
    scorer.close()


def test_client_surfaces_service_errors(live_server):
    _, srv = live_server
    kg = _graph()
    scorer = BridgeScorer(kg, srv.endpoint)
    with pytest.raises(BridgeError, match="scorer service error"):
        scorer.conn.request("TRIPLE", [])
    scorer.close()
