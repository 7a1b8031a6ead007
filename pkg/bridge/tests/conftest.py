from pathlib import Path

import pytest

from kgc_bridge import init_model

GOLDEN = Path(__file__).resolve().parents[1] / "golden" / "transcript.ndjson"


@pytest.fixture
def fresh_model():
    """Zero-head model over three relation classes, as used by the golden transcript."""
    return init_model(["p", "q", "s"], seed=0)


@pytest.fixture
def export_dir(tmp_path):
    """Tiny dataset directory in the ingest-export layout."""
    d = tmp_path / "export"
    d.mkdir()
    rows = []
    for i in range(10):
        rows.append(f"/e{i}\tp\t/e{(i + 1) % 10}")
        rows.append(f"/e{i}\tq\t/e{(i + 3) % 10}")
    (d / "train.tsv").write_text("".join(r + "\n" for r in rows), encoding="utf-8")
    (d / "entity2text.tsv").write_text(
        "".join(f"/e{i}\tentity number {i}\n" for i in range(10)), encoding="utf-8"
    )
    (d / "relation2text.tsv").write_text("p\tpoints at\nq\tquotes from\n", encoding="utf-8")
    (d / "entity2type.tsv").write_text("/e0\tspecial\n/e0\tfirst\n", encoding="utf-8")
    (d / "relation2synonyms.tsv").write_text("p\treferences\n", encoding="utf-8")
    return d
