import io
import json
import socket

import numpy as np
import pytest

from kgc_bridge import BridgeServer, serve_stdio
from kgc_bridge.model import score_pairs, score_triples, triple_training_step

import threading


@pytest.fixture
def server(fresh_model):
    # give the model non-trivial weights so equality checks are meaningful
    triple_training_step(
        fresh_model,
        [{"head_text": "alpha", "relation_text": "p", "tail_text": "beta"}],
        [1],
        lr=0.2,
    )
    srv = BridgeServer(fresh_model)
    thread = threading.Thread(target=srv.serve_forever, daemon=True)
    thread.start()
    yield srv
    srv.shutdown()
    srv.server_close()


def _connect(server):
    host, port = server.server_address
    sock = socket.create_connection((host, port), timeout=10)
    return sock, sock.makefile("r", encoding="utf-8"), sock.makefile("w", encoding="utf-8")


def _round_trip(reader, writer, payload):
    writer.write(json.dumps(payload) + "\n")
    writer.flush()
    return json.loads(reader.readline())


def test_tcp_scores_match_in_process_within_tolerance(server, fresh_model):
    items = [
        {"head_text": "Lombardy, Italy", "head_augmentations": ["region"],
         "relation_text": "has confidence interval", "relation_augmentations": [],
         "tail_text": "CI(2.9, 3.2)", "tail_augmentations": []},
        {"head_text": "alpha", "relation_text": "p", "tail_text": "beta"},
    ]
    sock, reader, writer = _connect(server)
    resp = _round_trip(reader, writer, {"request_id": "t1", "mode": "TRIPLE", "items": items})
    local = score_triples(fresh_model, items)
    assert np.max(np.abs(np.array(resp["scores"]) - np.array(local))) <= 1e-6
    pair_items = [{"head_text": "alpha", "tail_text": "beta"}]
    resp = _round_trip(reader, writer, {"request_id": "t2", "mode": "PAIR", "items": pair_items})
    assert np.max(np.abs(np.array(resp["scores"]) - np.array(score_pairs(fresh_model, pair_items)))) <= 1e-6
    sock.close()


def test_malformed_line_keeps_connection_open(server):
    sock, reader, writer = _connect(server)
    writer.write("not json at all\n")
    writer.flush()
    err = json.loads(reader.readline())
    assert "malformed JSON" in err["error"]
    ok = _round_trip(reader, writer, {
        "request_id": "after", "mode": "PAIR",
        "items": [{"head_text": "a", "tail_text": "b"}],
    })
    assert ok["request_id"] == "after"
    sock.close()


def test_pipelined_requests_answered_in_order(server):
    sock, reader, writer = _connect(server)
    for i in range(5):
        writer.write(json.dumps({
            "request_id": f"seq-{i}", "mode": "PAIR",
            "items": [{"head_text": f"head {i}", "tail_text": "tail"}],
        }) + "\n")
    writer.flush()
    for i in range(5):
        assert json.loads(reader.readline())["request_id"] == f"seq-{i}"
    sock.close()


def test_stdio_serving(fresh_model):
    lines = [
        json.dumps({"request_id": "s1", "mode": "TRIPLE",
                    "items": [{"head_text": "a", "relation_text": "r", "tail_text": "b"}]}),
        "",  # blank lines skipped
        "garbage",
    ]
    stdout = io.StringIO()
    serve_stdio(fresh_model, stdin=io.StringIO("\n".join(lines) + "\n"), stdout=stdout)
    out = [json.loads(l) for l in stdout.getvalue().splitlines()]
    assert out[0]["request_id"] == "s1"
    assert "error" in out[1]
