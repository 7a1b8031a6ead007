import pytest
from hypothesis import given, settings, strategies as st

from kgc_forge import KgcError, Triple, intern_triples
from kgc_forge.textgen import (
    CLS,
    SEP,
    TokenKind,
    element_sentence,
    element_texts,
    pair_sequence,
    tokenize,
    triple_sequence,
)


def _kg(head, rel, tail):
    return intern_triples([(head, rel, tail)])


def test_tokenize_region_label():
    assert tokenize("Lombardy, Italy") == ["lombardy", "italy"]


def test_tokenize_interval_label():
    assert tokenize("Confidence Interval (95%)") == ["confidence", "interval", "95%"]
    assert tokenize("CI(2.9, 3.2)") == ["ci", "2.9", "3.2"]


def test_element_sentence_plain():
    toks = element_sentence("water", [])
    assert [t.text for t in toks] == ["water"]
    assert all(t.kind is TokenKind.WORD for t in toks)


def test_element_sentence_with_augmentation():
    toks = element_sentence("water", ["liquid"])
    assert [t.text for t in toks] == ["water", "liquid"]


def test_element_sentence_empty_label():
    with pytest.raises(KgcError, match="unlabeled"):
        element_sentence("", [])
    with pytest.raises(KgcError, match="unlabeled"):
        element_sentence("(((", [])


def test_triple_layout():
    kg = _kg("Lombardy, Italy", "has confidence interval", "CI(2.9, 3.2)")
    seq = triple_sequence(kg, Triple(0, 0, 1))
    assert len(seq) == 12  # 1 CLS + 2 + 3 + 3 words + 3 SEP
    assert seq.tokens[0] == CLS
    assert seq.tokens[-1] == SEP
    assert seq.texts() == [
        "[CLS]", "lombardy", "italy", "[SEP]",
        "has", "confidence", "interval", "[SEP]",
        "ci", "2.9", "3.2", "[SEP]",
    ]
    assert seq.position_ids == tuple(range(1, 13))
    # head/tail words on segment 0, relation words on segment 1
    assert seq.segment_ids == (0, 0, 0, 0, 1, 1, 1, 1, 0, 0, 0, 0)
    assert not seq.truncated


def test_triple_single_token_elements():
    kg = _kg("a", "p", "b")
    seq = triple_sequence(kg, Triple(0, 0, 1))
    assert len(seq) == 7


def test_pair_layout():
    kg = _kg("Lombardy, Italy", "p", "CI(2.9, 3.2)")
    seq = pair_sequence(kg, 0, 1)
    assert len(seq) == 8  # 1 CLS + 2 + 3 words + 2 SEP
    assert set(seq.segment_ids) == {0}
    assert seq.position_ids == tuple(range(1, 9))


def test_pair_single_token_entities():
    kg = _kg("a", "p", "b")
    assert len(pair_sequence(kg, 0, 1)) == 5


def test_pair_same_entity_twice():
    kg = _kg("alpha beta", "p", "x")
    seq = pair_sequence(kg, 0, 0)
    assert seq.texts() == ["[CLS]", "alpha", "beta", "[SEP]", "alpha", "beta", "[SEP]"]


def test_truncation_caps_length():
    long_label = " ".join(f"w{i}" for i in range(600))
    kg = _kg(long_label, "p", "b")
    seq = triple_sequence(kg, Triple(0, 0, 1))
    assert len(seq) == 512
    assert seq.truncated
    # relation and tail survive with at least one token each
    assert "p" in seq.texts() and "b" in seq.texts()


def test_truncation_longest_first():
    kg = _kg("h1 h2 h3 h4 h5 h6", "r1 r2", "t1 t2 t3")
    # budget 8 words: head (6) loses 3 before anything else is touched
    seq = triple_sequence(kg, Triple(0, 0, 1), max_len=12)
    words = [t.text for t in seq.tokens if t.kind is TokenKind.WORD]
    assert words == ["h1", "h2", "h3", "r1", "r2", "t1", "t2", "t3"]
    assert seq.truncated


def test_max_len_too_small():
    kg = _kg("a", "p", "b")
    with pytest.raises(KgcError, match="too small"):
        triple_sequence(kg, Triple(0, 0, 1), max_len=5)


def test_augmentations_enter_sequences():
    kg = _kg("heart", "part of", "body")
    kg.entity_types[0] = ["organ"]
    kg.relation_synonyms[0] = ["component of"]
    seq = triple_sequence(kg, Triple(0, 0, 1))
    texts = seq.texts()
    assert texts[: 4] == ["[CLS]", "heart", "organ", "[SEP]"]
    assert "component" in texts and "of" in texts


def test_element_texts_payload():
    kg = _kg("heart", "part of", "body")
    kg.entity_types[0] = ["organ"]
    item = element_texts(kg, Triple(0, 0, 1))
    assert item["head_text"] == "heart"
    assert item["head_augmentations"] == ["organ"]
    assert item["relation_text"] == "part of"
    assert item["tail_augmentations"] == []
    pair_item = element_texts(kg, Triple(0, 0, 1), with_relation=False)
    assert "relation_text" not in pair_item


_label = st.text(alphabet="abc xyz0", min_size=1, max_size=30).filter(lambda s: tokenize(s))


@settings(max_examples=60)
@given(_label, _label, _label)
def test_sequence_invariants(h, r, t):
    kg = _kg(f"H {h}", f"R {r}", f"T {t}")
    seq = triple_sequence(kg, Triple(0, 0, 1))
    assert len(seq.tokens) == len(seq.segment_ids) == len(seq.position_ids) <= 512
    assert seq.position_ids == tuple(range(1, len(seq) + 1))
    assert seq == triple_sequence(kg, Triple(0, 0, 1))  # determinism


@settings(max_examples=40)
@given(_label, st.lists(_label, max_size=3))
def test_augmentation_monotonicity(label, augs):
    base = element_sentence(label, augs)
    extended = element_sentence(label, augs + ["extra words"])
    assert extended[: len(base)] == base
