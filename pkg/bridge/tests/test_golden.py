"""Replay the committed transcript byte-for-byte against a fresh model."""

import json

from kgc_bridge import handle_line

from conftest import GOLDEN


def _pairs():
    lines = GOLDEN.read_text(encoding="utf-8").splitlines()
    assert len(lines) % 2 == 0
    return list(zip(lines[0::2], lines[1::2]))


def test_transcript_has_expected_shape():
    pairs = _pairs()
    assert len(pairs) == 6
    # every response line is valid JSON with either scores or an error echo
    for _, response in pairs:
        parsed = json.loads(response)
        assert "scores" in parsed or "error" in parsed


def test_transcript_replays_byte_exactly(fresh_model):
    for request, expected in _pairs():
        assert handle_line(fresh_model, request) == expected
