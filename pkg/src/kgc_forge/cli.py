"""Command-line entry point: ingest -> train -> evaluate -> report.

Every command writes a manifest next to its outputs with the resolved
configuration, input checksums, and seeds, sufficient to re-run it.
Exit codes: 0 success, 1 usage error, 2 runtime error.
"""

from __future__ import annotations

import hashlib
import json
import os
import sys
import time
from pathlib import Path

import click
import numpy as np

from . import evaluation as ev
from .bridge_client import BridgeScorer
from .checkpoint import load_model, save_model
from .ingest import load_dataset, write_dataset
from .kg import KgcError
from .sampling import negative_batch
from .training import TASK_DEFAULTS, TrainConfig, train

ENV_SEED = "KGC_FORGE_SEED"


def default_seed() -> int:
    return int(os.environ.get(ENV_SEED, "0"))


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for block in iter(lambda: f.read(1 << 20), b""):
            digest.update(block)
    return digest.hexdigest()


def _input_checksums(paths) -> dict:
    out = {}
    for p in paths:
        p = Path(p)
        if p.is_dir():
            for child in sorted(p.iterdir()):
                if child.is_file():
                    out[str(child)] = _sha256(child)
        elif p.is_file():
            out[str(p)] = _sha256(p)
    return out


def write_manifest(
    out_dir: Path,
    command: str,
    config: dict,
    inputs,
    outputs,
    seed: int | None,
    deterministic: bool,
) -> Path:
    manifest = {
        "command": command,
        "argv": sys.argv[1:],
        "config": config,
        "inputs": _input_checksums(inputs),
        "outputs": [str(p) for p in outputs],
        "seed": seed,
    }
    if not deterministic:
        manifest["timestamp"] = time.strftime("%Y-%m-%dT%H:%M:%S%z")
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def _write_report(report: ev.EvalReport, out: Path) -> None:
    out.parent.mkdir(parents=True, exist_ok=True)
    out.write_text(report.to_json() + "\n", encoding="utf-8")


def _resolve_scorer(scorer, model_path, endpoint, kg):
    if scorer == "bridge":
        if not endpoint:
            raise click.UsageError("--scorer bridge requires --endpoint")
        return BridgeScorer(kg, endpoint), {"scorer": "bridge", "endpoint": endpoint}
    if not model_path:
        raise click.UsageError("an evaluation command requires --model (or --scorer bridge)")
    model = load_model(model_path)
    return model.scorer(kg), {"scorer": model.kind, "task": model.task, **model.config_echo()}


seed_option = click.option("--seed", type=int, default=None, help=f"RNG seed (default ${ENV_SEED} or 0).")
det_option = click.option("--deterministic", is_flag=True, help="Omit timestamps from manifests.")
data_option = click.option("--data", "data_dir", required=True, type=click.Path(), help="Dataset directory.")
model_option = click.option("--model", "model_path", type=click.Path(), help="Trained model checkpoint.")
scorer_eval_option = click.option("--scorer", type=click.Choice(["checkpoint", "bridge"]), default="checkpoint")
endpoint_option = click.option("--endpoint", help="host:port of an external scorer service.")
workers_option = click.option("--workers", type=int, default=os.cpu_count() or 1, show_default="cpu count")
tie_option = click.option("--tie-rule", type=click.Choice(["mean", "optimistic"]), default="mean")


@click.group()
def cli():
    """Knowledge graph completion toolkit."""


@cli.command()
@click.argument("data_dir", type=click.Path())
@click.option("--out", "out_dir", required=True, type=click.Path())
@click.option("--ratios", default="0.6,0.2,0.2", help="train,dev,test split ratios for raw dumps.")
@click.option("--no-literalize", is_flag=True, help="Skip the /literal_num rewrite.")
@seed_option
@det_option
def ingest(data_dir, out_dir, ratios, no_literalize, seed, deterministic):
    """Load a dataset directory, normalize it, and re-emit it with a manifest."""
    seed = default_seed() if seed is None else seed
    ratio_tuple = tuple(float(x) for x in ratios.split(","))
    if len(ratio_tuple) != 3:
        raise click.UsageError("--ratios must have three comma-separated values")
    bundle = load_dataset(data_dir, ratio_tuple, seed, apply_literalize=not no_literalize)
    out = Path(out_dir)
    written = write_dataset(bundle, out)
    stats = {
        "entities": bundle.graph.num_entities,
        "relations": bundle.graph.num_relations,
        "positives": len(bundle.graph.positives),
        "train": len(bundle.train),
        "dev": len(bundle.dev),
        "test": len(bundle.test),
        "literals": bundle.literal_count,
    }
    (out / "stats.json").write_text(json.dumps(stats, indent=2) + "\n", encoding="utf-8")
    write_manifest(
        out, "ingest",
        {"ratios": ratio_tuple, "literalize": not no_literalize, **stats},
        [data_dir], written + [out / "stats.json"], seed, deterministic,
    )
    click.echo(json.dumps(stats))


@cli.command("train")
@data_option
@click.option("--scorer", "scorer_kind", type=click.Choice(["classifier", "transe", "distmult"]), required=True)
@click.option("--task", type=click.Choice(["tc", "lp", "rp"]), required=True)
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--epochs", type=int, default=None, show_default="per-task default")
@click.option("--negatives", type=int, default=None, help="Negatives per positive.")
@click.option("--batch", "batch_size", type=int, default=32, show_default=True)
@click.option("--lr", "learning_rate", type=float, default=5e-5, show_default=True)
@click.option("--dropout", type=float, default=0.1, show_default=True)
@click.option("--hidden", type=int, default=128, show_default=True)
@click.option("--dim", type=int, default=50, show_default=True)
@click.option("--margin", type=float, default=1.0, show_default=True)
@click.option("--norm", type=click.Choice(["l1", "l2"]), default="l2", show_default=True)
@click.option("--resample-negatives", is_flag=True, help="Resample negatives each epoch instead of fixing them per run.")
@seed_option
@det_option
def train_cmd(data_dir, scorer_kind, task, out_path, epochs, negatives, batch_size,
              learning_rate, dropout, hidden, dim, margin, norm, resample_negatives,
              seed, deterministic):
    """Train a scorer; defaults follow the per-task regimes (tc: 3 epochs / 1
    negative, lp: 5 / 5, rp: 20)."""
    seed = default_seed() if seed is None else seed
    d_epochs, d_ratio = TASK_DEFAULTS[task]
    cfg = TrainConfig(
        batch_size=batch_size,
        learning_rate=learning_rate,
        epochs=d_epochs if epochs is None else epochs,
        negative_ratio=d_ratio if negatives is None else negatives,
        dropout=dropout,
        seed=seed,
        hidden=hidden,
        dim=dim,
        margin=margin,
        norm=norm,
        resample_negatives=resample_negatives,
    )
    bundle = load_dataset(data_dir)
    model = train(scorer_kind, bundle, task, cfg)
    out = Path(out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    save_model(model, out)
    write_manifest(
        out.parent, "train",
        {"scorer": scorer_kind, "task": task, "loss_history": model.loss_history, **model.config_echo()},
        [data_dir], [out], seed, deterministic,
    )
    click.echo(json.dumps({"model": str(out), "final_loss": model.loss_history[-1]}))


def _eval_common(data_dir, scorer, model_path, endpoint):
    bundle = load_dataset(data_dir)
    sc, config = _resolve_scorer(scorer, model_path, endpoint, bundle.graph)
    return bundle, sc, config


def _finish_eval(report, out_path, data_dir, command, seed, deterministic, extra_inputs=()):
    out = Path(out_path)
    _write_report(report, out)
    write_manifest(
        out.parent, command, report.config_echo,
        [data_dir, *extra_inputs], [out], seed, deterministic,
    )
    click.echo(report.to_json())


@cli.command("eval-tc")
@data_option
@model_option
@scorer_eval_option
@endpoint_option
@click.option("--out", "out_path", default="report.json", type=click.Path(), show_default=True)
@seed_option
@det_option
def eval_tc(data_dir, model_path, scorer, endpoint, out_path, seed, deterministic):
    """Triple classification accuracy on the test split with 1:1 sampled negatives."""
    seed = default_seed() if seed is None else seed
    bundle, sc, config = _eval_common(data_dir, scorer, model_path, endpoint)
    rng = np.random.default_rng(seed)
    labeled = negative_batch(bundle.graph, bundle.test, 1, rng)
    accuracy = ev.classification_accuracy(sc, labeled)
    report = ev.EvalReport(
        task="tc", mr=1.0, mrr=1.0, hits={}, accuracy=accuracy,
        config_echo=config, seed=seed, num_ranks=len(labeled),
    )
    _finish_eval(report, out_path, data_dir, "eval-tc", seed, deterministic,
                 [model_path] if model_path else [])


@cli.command("eval-lp")
@data_option
@model_option
@scorer_eval_option
@endpoint_option
@click.option("--hits", default="1,3,10", show_default=True, help="Comma-separated Hits@N cutoffs.")
@click.option("--out", "out_path", default="report.json", type=click.Path(), show_default=True)
@tie_option
@workers_option
@seed_option
@det_option
def eval_lp(data_dir, model_path, scorer, endpoint, hits, out_path, tie_rule, workers, seed, deterministic):
    """Filtered link prediction: head and tail ranks for every test triple."""
    seed = default_seed() if seed is None else seed
    bundle, sc, config = _eval_common(data_dir, scorer, model_path, endpoint)
    ns = [int(x) for x in hits.split(",")]
    ranks = ev.link_prediction_ranks(sc, bundle.graph, bundle.test, tie_rule=tie_rule, workers=workers)
    report = ev.aggregate(ranks, ns, task="lp", config_echo=config, seed=seed)
    report.per_cardinality = ev.ablate_cardinality(ranks, bundle.graph, bundle.train)
    _finish_eval(report, out_path, data_dir, "eval-lp", seed, deterministic,
                 [model_path] if model_path else [])


@cli.command("eval-rp")
@data_option
@model_option
@scorer_eval_option
@endpoint_option
@click.option("--hits", default="1,3,10", show_default=True)
@click.option("--out", "out_path", default="report.json", type=click.Path(), show_default=True)
@tie_option
@workers_option
@seed_option
@det_option
def eval_rp(data_dir, model_path, scorer, endpoint, hits, out_path, tie_rule, workers, seed, deterministic):
    """Filtered relation prediction ranks for every test triple."""
    seed = default_seed() if seed is None else seed
    bundle, sc, config = _eval_common(data_dir, scorer, model_path, endpoint)
    ns = [int(x) for x in hits.split(",")]
    ranks = ev.relation_prediction_ranks(sc, bundle.graph, bundle.test, tie_rule=tie_rule, workers=workers)
    report = ev.aggregate(ranks, ns, task="rp", config_echo=config, seed=seed)
    _finish_eval(report, out_path, data_dir, "eval-rp", seed, deterministic,
                 [model_path] if model_path else [])


@cli.command()
@data_option
@model_option
@scorer_eval_option
@endpoint_option
@click.option("--by", type=click.Choice(["cardinality", "relations"]), default="cardinality", show_default=True)
@click.option("--threshold", type=float, default=1.5, show_default=True, help="Cardinality branching threshold.")
@click.option("--top-k", type=int, default=10, show_default=True)
@click.option("--min-support", type=int, default=5, show_default=True)
@click.option("--out", "out_dir", default="ablation", type=click.Path(), show_default=True)
@tie_option
@workers_option
@seed_option
@det_option
def ablate(data_dir, model_path, scorer, endpoint, by, threshold, top_k, min_support,
           out_dir, tie_rule, workers, seed, deterministic):
    """Ablation breakdowns: link prediction by relation cardinality, or
    best/worst relations for relation prediction."""
    seed = default_seed() if seed is None else seed
    bundle, sc, config = _eval_common(data_dir, scorer, model_path, endpoint)
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    if by == "cardinality":
        ranks = ev.link_prediction_ranks(sc, bundle.graph, bundle.test, tie_rule=tie_rule, workers=workers)
        cells = ev.ablate_cardinality(ranks, bundle.graph, bundle.train, threshold)
        payload = {"by": "cardinality", "threshold": threshold, "cells": cells,
                   "note": "cardinality buckets use a configurable branching threshold"}
        path = out / "cardinality.json"
        path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        outputs.append(path)
        csv_path = out / "per_cardinality.csv"
        with open(csv_path, "w", encoding="utf-8", newline="") as f:
            f.write("category,side,metric,value\n")
            for cat, sides in sorted(cells.items()):
                for side, stats in sorted(sides.items()):
                    f.write(f"{cat},{side},MRR,{stats['MRR']}\n")
                    f.write(f"{cat},{side},hits@10,{stats['hits@10']}\n")
        outputs.append(csv_path)
    else:
        ranks = ev.relation_prediction_ranks(sc, bundle.graph, bundle.test, tie_rule=tie_rule, workers=workers)
        best, worst = ev.per_relation_extremes(ranks, bundle.graph, top_k, min_support)
        path = out / "relation_extremes.json"
        path.write_text(json.dumps({"best": best, "worst": worst}, indent=2) + "\n", encoding="utf-8")
        outputs.append(path)
    write_manifest(out, f"ablate --by {by}", {"by": by, "threshold": threshold, **config},
                   [data_dir] + ([model_path] if model_path else []), outputs, seed, deterministic)
    click.echo(json.dumps({"outputs": [str(p) for p in outputs]}))


@cli.command()
@click.option("--report", "report_path", required=True, type=click.Path())
@data_option
@click.option("--out", "out_dir", default="tables", type=click.Path(), show_default=True)
@det_option
def export(report_path, data_dir, out_dir, deterministic):
    """Export a report's per-relation / per-cardinality tables as CSV."""
    report_path = Path(report_path)
    if not report_path.exists():
        raise KgcError(f"no such report: {report_path}")
    raw = json.loads(report_path.read_text(encoding="utf-8"))
    bundle = load_dataset(data_dir)
    report = ev.EvalReport(
        task=raw["task"], mr=raw["MR"], mrr=raw["MRR"],
        hits={int(k): v for k, v in raw["hits"].items()},
        accuracy=raw.get("accuracy"),
        per_relation={int(k): v for k, v in raw.get("per_relation", {}).items()},
        per_cardinality=raw.get("per_cardinality", {}),
        config_echo=raw.get("config", {}), seed=raw.get("seed"),
    )
    written = ev.write_report_tables(report, bundle.graph, out_dir)
    write_manifest(Path(out_dir), "export", {"report": str(report_path)},
                   [report_path, data_dir], written, raw.get("seed"), deterministic)
    click.echo(json.dumps({"outputs": [str(p) for p in written]}))


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.exceptions.Abort:
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (KgcError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
