"""Model checkpoints: one .npz container per trained model, bit-exact round trip."""

from __future__ import annotations

import json
from dataclasses import asdict
from pathlib import Path

import numpy as np

from .classifier import ClassifierState
from .embeddings import EmbeddingState
from .kg import KgcError
from .training import TrainConfig, TrainedModel

FORMAT_VERSION = 1

_CLF_ARRAYS = ["tok_emb", "seg_emb", "pos_emb", "w_enc", "b_enc", "w_triple", "w_rel"]


def save_model(model: TrainedModel, path: str | Path) -> Path:
    path = Path(path)
    meta = {
        "format_version": FORMAT_VERSION,
        "kind": model.kind,
        "task": model.task,
        "config": asdict(model.config),
        "loss_history": model.loss_history,
    }
    arrays = {}
    if model.kind == "classifier":
        state: ClassifierState = model.state
        meta["vocab"] = state.vocab
        meta["dropout"] = state.dropout
        meta["max_len"] = state.max_len
        for name in _CLF_ARRAYS:
            arrays[name] = getattr(state, name)
    else:
        state: EmbeddingState = model.state
        meta["norm"] = state.norm
        meta["margin"] = state.margin
        meta["threshold"] = state.threshold
        arrays["entity_vectors"] = state.entity_vectors
        arrays["relation_vectors"] = state.relation_vectors
    with open(path, "wb") as f:
        np.savez(f, meta=np.frombuffer(json.dumps(meta).encode("utf-8"), dtype=np.uint8), **arrays)
    return path


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    if not path.exists():
        raise KgcError(f"no such checkpoint: {path}")
    with np.load(path) as data:
        meta = json.loads(bytes(data["meta"]).decode("utf-8"))
        if meta.get("format_version") != FORMAT_VERSION:
            raise KgcError(f"unsupported checkpoint version: {meta.get('format_version')}")
        cfg_dict = meta["config"]
        cfg_dict["adam_betas"] = tuple(cfg_dict["adam_betas"])
        cfg = TrainConfig(**cfg_dict)
        if meta["kind"] == "classifier":
            state = ClassifierState(
                vocab=meta["vocab"],
                dropout=meta["dropout"],
                max_len=meta["max_len"],
                **{name: data[name].copy() for name in _CLF_ARRAYS},
            )
        else:
            state = EmbeddingState(
                kind=meta["kind"],
                entity_vectors=data["entity_vectors"].copy(),
                relation_vectors=data["relation_vectors"].copy(),
                norm=meta["norm"],
                margin=meta["margin"],
                threshold=meta["threshold"],
            )
    return TrainedModel(meta["kind"], meta["task"], state, cfg, list(meta["loss_history"]))
