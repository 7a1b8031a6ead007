"""Client side of the external-scorer wire protocol.

Requests are newline-delimited JSON over a TCP socket. Element texts (not
token ids) cross the wire, so the remote model applies its own tokenizer:

    {"request_id": "r1", "mode": "TRIPLE", "items": [
        {"head_text": ..., "head_augmentations": [...],
         "relation_text": ..., "relation_augmentations": [...],
         "tail_text": ..., "tail_augmentations": [...]}]}

TRIPLE responses carry one (p0, p1) pair per item with p0 + p1 = 1; PAIR
responses carry one length-R distribution per item. Responses preserve item
order and echo the request_id.
"""

from __future__ import annotations

import itertools
import json
import socket

import numpy as np

from .kg import KgcError, KnowledgeGraph, Triple
from .textgen import element_texts

NORMALIZATION_TOL = 1e-6


class BridgeError(KgcError):
    pass


class BridgeConnection:
    """One pipelined NDJSON connection to a scorer service."""

    def __init__(self, endpoint: str, timeout: float = 60.0):
        host, _, port = endpoint.rpartition(":")
        if not host or not port.isdigit():
            raise BridgeError(f"bad endpoint (expected host:port): {endpoint}")
        self.sock = socket.create_connection((host, int(port)), timeout=timeout)
        self.reader = self.sock.makefile("r", encoding="utf-8")
        self.writer = self.sock.makefile("w", encoding="utf-8")
        self._ids = itertools.count()

    def close(self):
        self.sock.close()

    def request(self, mode: str, items: list[dict]) -> list[list[float]]:
        request_id = f"req-{next(self._ids)}"
        payload = {"request_id": request_id, "mode": mode, "items": items}
        self.writer.write(json.dumps(payload) + "\n")
        self.writer.flush()
        line = self.reader.readline()
        if not line:
            raise BridgeError("scorer service closed the connection")
        response = json.loads(line)
        if "error" in response:
            raise BridgeError(f"scorer service error: {response['error']}")
        if response.get("request_id") != request_id:
            raise BridgeError(
                f"response id {response.get('request_id')!r} does not match {request_id!r}"
            )
        scores = response["scores"]
        if len(scores) != len(items):
            raise BridgeError(f"expected {len(items)} score rows, got {len(scores)}")
        for row in scores:
            if abs(sum(row) - 1.0) > NORMALIZATION_TOL:
                raise BridgeError(f"unnormalized score row: {row}")
        return scores


class BridgeScorer:
    """Scorer backed by an external service speaking the wire protocol."""

    def __init__(self, kg: KnowledgeGraph, endpoint: str, batch_size: int = 256):
        self.kg = kg
        self.conn = BridgeConnection(endpoint)
        self.batch_size = batch_size

    def score_triples(self, triples: np.ndarray) -> np.ndarray:
        triples = np.atleast_2d(np.asarray(triples))
        out = np.empty(len(triples))
        for start in range(0, len(triples), self.batch_size):
            chunk = triples[start : start + self.batch_size]
            items = [element_texts(self.kg, Triple(*map(int, row))) for row in chunk]
            scores = self.conn.request("TRIPLE", items)
            out[start : start + len(chunk)] = [row[0] for row in scores]
        return out

    def relation_scores(self, head: int, tail: int) -> np.ndarray:
        item = element_texts(self.kg, Triple(head, 0, tail), with_relation=False)
        scores = self.conn.request("PAIR", [item])
        probs = np.asarray(scores[0], dtype=float)
        if probs.shape[0] != self.kg.num_relations:
            raise BridgeError(
                f"expected a length-{self.kg.num_relations} distribution, got {probs.shape[0]}"
            )
        return probs

    def classify_triples(self, triples: np.ndarray) -> np.ndarray:
        return (self.score_triples(triples) >= 0.5).astype(int)

    def close(self):
        self.conn.close()
