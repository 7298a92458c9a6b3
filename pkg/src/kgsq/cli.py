"""Command-line pipeline: ingest, train, eval, query, serve.

Exit codes: 0 success, 1 environment or pipeline-stage failure, 2 when a
user-supplied name cannot be resolved against a vocabulary.
"""

from __future__ import annotations

import dataclasses
import json
import sys
from pathlib import Path

import click

from . import query as semquery
from .evaluate import evaluate_link_prediction
from .graph import (
    GraphError,
    ParseError,
    Triple,
    UnknownEntityError,
    UnknownRelationError,
    augment,
    ingest_entity_types,
    ingest_triples,
    parse_triple_lines,
    render_triples,
)
from .model import OPTIMIZERS, ModelConfig
from .store import ModelFormatError, load_model_file, save_model_file
from .training import TrainingError, train

EXIT_STAGE_FAILURE = 1
EXIT_RESOLUTION_FAILURE = 2

_STAGE_ERRORS = (OSError, ParseError, GraphError, ModelFormatError, TrainingError)


def _fail(message: str, code: int) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _load_graph(triples_path: str, types_path: str | None):
    with open(triples_path, encoding="utf-8") as f:
        graph = ingest_triples(f)
    if types_path:
        with open(types_path, encoding="utf-8") as f:
            graph = ingest_entity_types(f, graph)
    return graph


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    with open(path, encoding="utf-8") as f:
        for line_no, raw in enumerate(f, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise GraphError(f"{path}: line {line_no}: expected key=value")
            key, _, value = line.partition("=")
            values[key.strip()] = value.strip()
    return values


_CONFIG_FIELDS = {f.name: f.type for f in dataclasses.fields(ModelConfig)}


def _effective_config(ctx: click.Context, config_path: str | None, flags: dict) -> ModelConfig:
    """Flags override the config file, which overrides ModelConfig defaults."""
    file_values = _read_config_file(config_path) if config_path else {}
    for key in file_values:
        if key not in _CONFIG_FIELDS:
            raise GraphError(f"unknown config key {key!r}")
    kwargs = {}
    for name in _CONFIG_FIELDS:
        source = ctx.get_parameter_source(name)
        if source is not None and source.name == "COMMANDLINE":
            kwargs[name] = flags[name]
        elif name in file_values:
            raw = file_values[name]
            caster = str if name == "optimizer" else (float if name in ("init_scale", "lr", "l2") else int)
            try:
                kwargs[name] = caster(raw)
            except ValueError:
                raise GraphError(f"config key {name}={raw!r} is not a valid {caster.__name__}")
        else:
            kwargs[name] = flags[name]
    return ModelConfig(**kwargs)


def _echo_config(config: ModelConfig) -> None:
    rendered = " ".join(
        f"{f.name}={getattr(config, f.name)}" for f in dataclasses.fields(ModelConfig)
    )
    click.echo(f"config: {rendered}", err=True)


@click.group()
def main():
    """Knowledge-graph embeddings and semantic queries."""


@main.command()
@click.argument("triples_path", type=click.Path())
@click.option("--types", "types_path", type=click.Path(), default=None, help="Entity-type file.")
@click.option("--out", "out_path", type=click.Path(), default=None, help="Write the deduplicated triples back out.")
def ingest(triples_path, types_path, out_path):
    """Parse a triple file and report vocabulary statistics."""
    try:
        graph = _load_graph(triples_path, types_path)
        if out_path:
            with open(out_path, "w", encoding="utf-8") as f:
                for line in render_triples(graph):
                    f.write(line + "\n")
    except _STAGE_ERRORS as exc:
        _fail(str(exc), EXIT_STAGE_FAILURE)
    vocab = graph.vocabulary
    click.echo(
        f"entities={vocab.n_entities} relations={vocab.n_relations} "
        f"triples={len(graph.triples)} duplicates_dropped={graph.duplicates_dropped} "
        f"typed_entities={len(vocab.entity_types)}"
    )


@main.command(name="train")
@click.option("--triples", "triples_path", type=click.Path(), required=True)
@click.option("--types", "types_path", type=click.Path(), default=None)
@click.option("--out", "out_path", type=click.Path(), required=True)
@click.option("--config", "config_path", type=click.Path(), default=None, help="key=value config file.")
@click.option("--dim", type=int, default=ModelConfig.dim)
@click.option("--init-scale", "init_scale", type=float, default=ModelConfig.init_scale)
@click.option("--lr", type=float, default=ModelConfig.lr)
@click.option("--n-neg", "n_neg", type=int, default=ModelConfig.n_neg)
@click.option("--epochs", type=int, default=ModelConfig.epochs)
@click.option("--l2", type=float, default=ModelConfig.l2)
@click.option("--seed", type=int, default=ModelConfig.seed)
@click.option("--optimizer", type=click.Choice(OPTIMIZERS), default=ModelConfig.optimizer)
@click.option("--batch-size", "batch_size", type=int, default=ModelConfig.batch_size)
@click.pass_context
def cmd_train(ctx, triples_path, types_path, out_path, config_path, **flags):
    """Ingest, augment, train, and save a model file."""
    try:
        config = _effective_config(ctx, config_path, flags)
    except (ValueError, GraphError, OSError) as exc:
        _fail(str(exc), EXIT_STAGE_FAILURE)
    _echo_config(config)
    try:
        graph = _load_graph(triples_path, types_path)
        graph = augment(graph)

        def progress(epoch: int, loss: float) -> None:
            click.echo(f"epoch={epoch} loss={loss:.6f}")

        model = train(graph, config, progress)
        written = save_model_file(model, out_path)
    except _STAGE_ERRORS as exc:
        _fail(str(exc), EXIT_STAGE_FAILURE)
    click.echo(f"wrote {out_path} ({written} bytes)", err=True)


def _resolve_triples(path: str, vocab) -> list[Triple]:
    triples = []
    with open(path, encoding="utf-8") as f:
        for head_s, rel_s, tail_s in parse_triple_lines(f):
            triples.append(
                Triple(
                    vocab.entity_id(head_s),
                    vocab.entity_id(tail_s),
                    vocab.relation_id(rel_s),
                )
            )
    return triples


@main.command(name="eval")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--test", "test_path", type=click.Path(), required=True)
@click.option("--train", "train_path", type=click.Path(), required=True)
def cmd_eval(model_path, test_path, train_path):
    """Filtered link-prediction metrics on held-out triples."""
    try:
        model = load_model_file(model_path)
        test = _resolve_triples(test_path, model.vocabulary)
        known = _resolve_triples(train_path, model.vocabulary)
        if not test:
            raise GraphError(f"{test_path}: no test triples")
        metrics = evaluate_link_prediction(model, test, set(known) | set(test))
    except (UnknownEntityError, UnknownRelationError) as exc:
        _fail(str(exc), EXIT_RESOLUTION_FAILURE)
    except (_STAGE_ERRORS, ValueError) as exc:
        _fail(str(exc), EXIT_STAGE_FAILURE)
    hits = metrics.hits_at
    click.echo(
        f"mrr={metrics.mrr:.6f} hits@1={hits[1]:.6f} hits@3={hits[3]:.6f} hits@10={hits[10]:.6f}"
    )


@main.command(name="query")
@click.argument("task", type=click.Choice(["similar", "biased", "analogy"]))
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--entity", required=True)
@click.option("--positive", "positives", multiple=True)
@click.option("--negative", "negatives", multiple=True)
@click.option("-k", "k", type=int, default=10)
@click.option("--type-filter", "type_filter", default=None)
@click.option("--include-self", is_flag=True, help="Keep the anchor and bias entities in the results.")
@click.option("--format", "fmt", type=click.Choice(["table", "json"]), default="table")
def cmd_query(task, model_path, entity, positives, negatives, k, type_filter, include_self, fmt):
    """Run a semantic query against a saved model."""
    if task == "similar" and (positives or negatives):
        _fail("task 'similar' takes no bias entities", EXIT_STAGE_FAILURE)
    if task == "biased" and negatives:
        _fail("task 'biased' takes no --negative entities", EXIT_STAGE_FAILURE)
    try:
        model = load_model_file(model_path)
        vocab = model.vocabulary
        spec = semquery.QuerySpec(
            anchor=vocab.entity_id(entity),
            positives=tuple(vocab.entity_id(n) for n in positives),
            negatives=tuple(vocab.entity_id(n) for n in negatives),
            k=k,
            type_filter=type_filter,
            exclude=not include_self,
        )
        ranked = semquery.analogy_query(spec, model)
    except (UnknownEntityError, UnknownRelationError) as exc:
        _fail(str(exc), EXIT_RESOLUTION_FAILURE)
    except (_STAGE_ERRORS, ValueError) as exc:
        _fail(str(exc), EXIT_STAGE_FAILURE)

    rows = semquery.results_payload(model, ranked)
    if fmt == "json":
        click.echo(json.dumps({"results": rows}, indent=2))
    else:
        for rank, row in enumerate(rows, start=1):
            etype = row["type"] or "-"
            click.echo(f"{rank:4d}  {row['score']: .6f}  {etype:12s}  {row['entity']}")
        if not rows:
            click.echo("(no results)", err=True)


@main.command(name="serve")
@click.option("--model", "model_path", type=click.Path(), required=True)
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8080)
@click.option("--session-ttl", "session_ttl", type=float, default=3600.0)
@click.option("--session-capacity", "session_capacity", type=int, default=10000)
def cmd_serve(model_path, host, port, session_ttl, session_capacity):
    """Serve the query API over HTTP."""
    from .service import serve

    click.echo(f"serving {model_path} on {host}:{port}", err=True)
    try:
        serve(model_path, host, port, session_ttl, session_capacity)
    except _STAGE_ERRORS as exc:
        _fail(str(exc), EXIT_STAGE_FAILURE)


if __name__ == "__main__":
    main()
