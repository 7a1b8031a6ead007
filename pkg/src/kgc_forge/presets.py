"""Reference training configurations for desk-scale (CPU, minutes) runs.

The library defaults mirror the fine-tuning regime (batch 32, lr 5e-5,
dropout 0.1, per-task epoch counts); these presets are what actually works
for the from-scratch desk-scale models on the bundled UMLS-shape dataset.
"""

from .training import TrainConfig

DESK_CONFIGS: dict[tuple[str, str], TrainConfig] = {
    ("transe", "lp"): TrainConfig(
        batch_size=128, learning_rate=0.01, epochs=100, negative_ratio=5,
        dim=64, margin=1.5, norm="l1", seed=0,
    ),
    ("transe", "tc"): TrainConfig(
        batch_size=128, learning_rate=0.01, epochs=100, negative_ratio=5,
        dim=64, margin=1.5, norm="l1", seed=0,
    ),
    ("distmult", "tc"): TrainConfig(
        batch_size=128, learning_rate=0.05, epochs=100, negative_ratio=2,
        dim=50, seed=0,
    ),
    ("classifier", "tc"): TrainConfig(
        batch_size=32, learning_rate=0.01, epochs=20, negative_ratio=1,
        hidden=128, dropout=0.1, seed=0,
    ),
    ("classifier", "rp"): TrainConfig(
        batch_size=32, learning_rate=0.005, epochs=20,
        hidden=128, dropout=0.1, seed=0,
    ),
}
