"""Newline-delimited JSON scoring protocol.

Requests:
    {"request_id": str, "mode": "TRIPLE"|"PAIR", "items": [
        {"head_text": str, "head_augmentations": [str],
         "relation_text": str, "relation_augmentations": [str],  # TRIPLE only
         "tail_text": str, "tail_augmentations": [str]}]}

Responses echo request_id and carry one score row per item, in item order:
(p0, p1) pairs for TRIPLE, length-R distributions for PAIR. Malformed input
produces {"error": ..., "echo": <raw line>} and the connection stays open.
"""

from __future__ import annotations

import json

from . import model as toy

REQUIRED_TEXTS = {"TRIPLE": ("head_text", "relation_text", "tail_text"),
                  "PAIR": ("head_text", "tail_text")}


class ProtocolError(Exception):
    pass


def validate_request(req: dict) -> None:
    if not isinstance(req, dict):
        raise ProtocolError("request must be a JSON object")
    if "request_id" not in req:
        raise ProtocolError("missing request_id")
    mode = req.get("mode")
    if mode not in REQUIRED_TEXTS:
        raise ProtocolError(f"mode must be TRIPLE or PAIR, got {mode!r}")
    items = req.get("items")
    if not isinstance(items, list) or not items:
        raise ProtocolError("items must be a non-empty list")
    for i, item in enumerate(items):
        if not isinstance(item, dict):
            raise ProtocolError(f"item {i} is not an object")
        for key in REQUIRED_TEXTS[mode]:
            text = item.get(key)
            if not isinstance(text, str) or not text.strip():
                raise ProtocolError(f"item {i} has empty or missing {key}")


def handle_request(model: toy.ToyModel, req: dict) -> dict:
    validate_request(req)
    if req["mode"] == "TRIPLE":
        scores = toy.score_triples(model, req["items"])
    else:
        scores = toy.score_pairs(model, req["items"])
    return {"request_id": req["request_id"], "scores": scores}


def handle_line(model: toy.ToyModel, line: str) -> str:
    """One request line in, one response line out; never raises on bad input."""
    try:
        req = json.loads(line)
    except json.JSONDecodeError as exc:
        return json.dumps({"error": f"malformed JSON: {exc.msg}", "echo": line.rstrip("\n")})
    try:
        response = handle_request(model, req)
    except (ProtocolError, toy.BridgeModelError) as exc:
        return json.dumps({"error": str(exc), "echo": req})
    return json.dumps(response)
