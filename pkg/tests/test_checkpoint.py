import numpy as np
import pytest

from kgc_forge import KgcError
from kgc_forge.checkpoint import FORMAT_VERSION, load_model, save_model
from kgc_forge.ingest import build_bundle
from kgc_forge.training import TrainConfig, train


@pytest.fixture
def bundle():
    raw = [(f"e{i}", "p", f"e{(i + 1) % 6}") for i in range(6)]
    return build_bundle(raw[:4], [raw[4]], [raw[5]])


def _assert_models_identical(a, b):
    assert a.kind == b.kind and a.task == b.task
    assert a.config == b.config
    assert a.loss_history == b.loss_history


def test_classifier_round_trip_bit_exact(bundle, tmp_path):
    cfg = TrainConfig(batch_size=2, epochs=2, hidden=8, learning_rate=0.01, dropout=0.1)
    model = train("classifier", bundle, "tc", cfg)
    path = save_model(model, tmp_path / "clf.npz")
    loaded = load_model(path)
    _assert_models_identical(model, loaded)
    assert loaded.state.vocab == model.state.vocab
    assert loaded.state.dropout == model.state.dropout
    assert loaded.state.max_len == model.state.max_len
    for pa, pb in zip(model.state.params(), loaded.state.params()):
        assert pa.tobytes() == pb.tobytes()  # bit-exact, not approx


def test_embedding_round_trip_bit_exact(bundle, tmp_path):
    cfg = TrainConfig(batch_size=2, epochs=3, dim=4, learning_rate=0.05, norm="l1", margin=1.5)
    model = train("transe", bundle, "lp", cfg)
    path = save_model(model, tmp_path / "transe.npz")
    loaded = load_model(path)
    _assert_models_identical(model, loaded)
    assert loaded.state.kind == "transe"
    assert loaded.state.norm == "l1"
    assert loaded.state.margin == 1.5
    assert loaded.state.threshold == model.state.threshold
    assert loaded.state.entity_vectors.tobytes() == model.state.entity_vectors.tobytes()
    assert loaded.state.relation_vectors.tobytes() == model.state.relation_vectors.tobytes()


def test_saved_twice_loads_same_scores(bundle, tmp_path):
    cfg = TrainConfig(batch_size=2, epochs=2, dim=4, learning_rate=0.05)
    model = train("distmult", bundle, "tc", cfg)
    p1 = save_model(model, tmp_path / "a.npz")
    p2 = save_model(load_model(p1), tmp_path / "b.npz")
    a, b = load_model(p1), load_model(p2)
    triples = np.asarray(bundle.test)
    sa = a.scorer(bundle.graph).score_triples(triples)
    sb = b.scorer(bundle.graph).score_triples(triples)
    assert np.array_equal(sa, sb)


def test_load_missing_file(tmp_path):
    with pytest.raises(KgcError, match="no such checkpoint"):
        load_model(tmp_path / "absent.npz")


def test_load_rejects_unknown_version(bundle, tmp_path):
    import json

    cfg = TrainConfig(batch_size=2, epochs=1, dim=4)
    model = train("distmult", bundle, "tc", cfg)
    path = save_model(model, tmp_path / "m.npz")
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        arrays = {k: data[k] for k in data.files if k != "meta"}
    meta["format_version"] = FORMAT_VERSION + 1
    bad = tmp_path / "bad.npz"
    with open(bad, "wb") as f:
        np.savez(f, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)
    with pytest.raises(KgcError, match="unsupported checkpoint version"):
        load_model(bad)
