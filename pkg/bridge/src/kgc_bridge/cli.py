"""Command line: fine-tune a toy model on a dataset export and serve it."""

from __future__ import annotations

import json
import sys

import click

from . import model as toy
from .finetune import FinetuneError, finetune_relations, finetune_triples, load_text_dataset
from .server import serve_stdio, serve_tcp


@click.group()
def cli():
    """Toy external scorer for the kgc-forge wire protocol."""


@cli.command()
@click.argument("data_dir", type=click.Path())
@click.option("--out", "out_path", required=True, type=click.Path())
@click.option("--objective", type=click.Choice(["triples", "relations"]), default="triples", show_default=True)
@click.option("--epochs", type=int, default=3, show_default=True)
@click.option("--batch", "batch_size", type=int, default=16, show_default=True)
@click.option("--lr", type=float, default=0.05, show_default=True)
@click.option("--limit", type=int, default=None, help="Use only the first N training triples.")
@click.option("--seed", type=int, default=0, show_default=True)
def finetune(data_dir, out_path, objective, epochs, batch_size, lr, limit, seed):
    """Train the toy model on DATA_DIR (a `kgc-forge ingest` export)."""
    ds = load_text_dataset(data_dir)
    fn = finetune_triples if objective == "triples" else finetune_relations
    model, history = fn(ds, epochs=epochs, batch_size=batch_size, lr=lr, seed=seed, limit=limit)
    toy.save_model(model, out_path)
    click.echo(json.dumps({"model": out_path, "loss_history": history}))


@cli.command()
@click.option("--model", "model_path", type=click.Path(), help="Saved model; fresh zero-head model if omitted.")
@click.option("--relations", "relations_path", type=click.Path(),
              help="relation2text.tsv giving the relation classes for a fresh model.")
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=0, show_default="ephemeral")
@click.option("--stdio", is_flag=True, help="Serve over stdin/stdout instead of TCP.")
def serve(model_path, relations_path, host, port, stdio):
    """Answer NDJSON scoring requests."""
    if model_path:
        model = toy.load_model(model_path)
    elif relations_path:
        relations = [line.split("\t")[0] for line in
                     open(relations_path, encoding="utf-8").read().splitlines() if line.strip()]
        model = toy.init_model(relations)
    else:
        raise click.UsageError("serve requires --model or --relations")
    if stdio:
        serve_stdio(model)
    else:
        serve_tcp(model, host, port)


def main(argv=None) -> int:
    try:
        cli.main(args=argv, standalone_mode=False)
        return 0
    except click.UsageError as exc:
        click.echo(f"usage error: {exc.format_message()}", err=True)
        return 1
    except click.exceptions.Exit as exc:
        return exc.exit_code
    except (toy.BridgeModelError, FinetuneError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        return 2


if __name__ == "__main__":
    sys.exit(main())
