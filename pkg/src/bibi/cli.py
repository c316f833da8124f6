"""Command-line interface for the build-it/break-it harness."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import baselines
from .corpus import (
    MODIFIED,
    ORIGINAL,
    Task,
    ingest_pairs,
    ingest_parses,
    ingest_qasrl,
    ingest_sentiment,
    pair_ref,
    pair_side_text,
)
from .harness import HarnessError, PhaseError, RoundConfig, RoundStore, default_store_dir


def _store(store_dir: str | None) -> RoundStore:
    return RoundStore(Path(store_dir) if store_dir else default_store_dir())


store_option = click.option(
    "--store", "store_dir", default=None, help="Round store directory (default: $BIBI_STORE or ./bibi-store)."
)


@click.group()
def main() -> None:
    """Build It Break It shared-task harness."""


@main.command()
@click.option("--task", type=click.Choice(["sentiment", "qasrl"]), required=True)
@click.option("--train", "train_file", type=click.Path(), required=True)
@click.option("--dev", "dev_file", type=click.Path(), required=True)
@click.option("--starter", "starter_file", type=click.Path(), required=True)
@click.option("--parses", "parses_file", type=click.Path(), default=None)
@click.option("--round", "round_id", required=True)
@click.option("--force", is_flag=True)
@click.option("--train-baseline/--no-train-baseline", default=True,
              help="Train the organizer baseline for live probing.")
@click.option("--seed", default=13, show_default=True)
@click.option("--max-edit-cost", default=6, show_default=True)
@store_option
def init(task, train_file, dev_file, starter_file, parses_file, round_id, force,
         train_baseline, seed, max_edit_cost, store_dir) -> None:
    """Create a round in the BUILD phase."""
    rnd = _store(store_dir).init_round(
        round_id,
        Task(task),
        train_file,
        dev_file,
        starter_file,
        parses_file=parses_file,
        force=force,
        train_baseline=train_baseline,
        baseline_seed=seed,
        config=RoundConfig(max_edit_cost=max_edit_cost),
    )
    click.echo(f"round {rnd.round_id} created in phase {rnd.phase.value}")


@main.command("dev-submit")
@click.option("--round", "round_id", required=True)
@click.option("--system", required=True)
@click.option("--preds", "preds_file", type=click.Path(exists=True), required=True)
@store_option
def dev_submit(round_id, system, preds_file, store_dir) -> None:
    """Submit a builder's blind-dev predictions."""
    acc = _store(store_dir).load(round_id).submit_dev_predictions(system, preds_file)
    click.echo(f"{system}: dev accuracy {acc:.4f}")


@main.command()
@click.option("--round", "round_id", required=True)
@store_option
def advance(round_id, store_dir) -> None:
    """Advance the round to its next phase."""
    phase = _store(store_dir).load(round_id).advance_phase()
    click.echo(f"round {round_id} is now in phase {phase.value}")


@main.command("pairs-submit")
@click.option("--round", "round_id", required=True)
@click.option("--team", required=True)
@click.option("--pairs", "pairs_file", type=click.Path(exists=True), required=True)
@store_option
def pairs_submit(round_id, team, pairs_file, store_dir) -> None:
    """Submit a breaker team's minimal pairs."""
    report = _store(store_dir).load(round_id).submit_pairs(team, pairs_file)
    clean = sum(1 for r in report if not r["violations"])
    click.echo(f"{team}: {clean}/{len(report)} pairs accepted")
    for r in report:
        for v in r["violations"]:
            click.echo(f"  {r['pair_id']}: {v['code']}: {v['detail']}")


@main.command("test-submit")
@click.option("--round", "round_id", required=True)
@click.option("--system", required=True)
@click.option("--preds", "preds_file", type=click.Path(exists=True), required=True)
@store_option
def test_submit(round_id, system, preds_file, store_dir) -> None:
    """Submit a builder's predictions on the minimal-pair test set."""
    n = _store(store_dir).load(round_id).submit_test_predictions(system, preds_file)
    click.echo(f"{system}: {n} test predictions recorded")


@main.command()
@click.option("--round", "round_id", required=True)
@click.option("--exclude-contested", is_flag=True,
              help="Drop pairs whose breaker label is contested by external labels.")
@click.option("--external-labels", "external_labels", type=click.Path(exists=True), default=None)
@click.option("--keep-open", is_flag=True, help="Do not close the round after scoring.")
@store_option
def score(round_id, exclude_contested, external_labels, keep_open, store_dir) -> None:
    """Score the round and write report.json / report.txt."""
    rnd = _store(store_dir).load(round_id)
    report = rnd.score(
        exclude_contested=exclude_contested,
        external_labels_file=external_labels,
        keep_open=keep_open,
    )
    click.echo(report.render_text())
    click.echo(f"report written to {rnd.dir / 'report.json'}")


@main.command()
@click.option("--task", type=click.Choice(["sentiment", "qasrl"]), required=True)
@click.option("--data", "data_file", type=click.Path(exists=True), required=True)
@click.option("--parses", "parses_file", type=click.Path(exists=True), default=None)
@click.option("--out", "out_file", type=click.Path(), required=True)
@click.option("--seed", default=13, show_default=True)
def train(task, data_file, parses_file, out_file, seed) -> None:
    """Train an organizer baseline and write the model file."""
    if task == "sentiment":
        model = baselines.train_sentiment(
            ingest_sentiment(data_file), baselines.TrainConfig(seed=seed)
        )
    else:
        if not parses_file:
            raise click.UsageError("--parses is required for the QA-SRL baseline")
        model = baselines.train_qasrl(
            ingest_qasrl(data_file), ingest_parses(parses_file), baselines.QasrlConfig(seed=seed)
        )
    baselines.save_model(model, out_file)
    click.echo(f"model written to {out_file} (final loss {model.epoch_losses[-1]:.4f})")


@main.command()
@click.option("--model", "model_file", type=click.Path(exists=True), required=True)
@click.option("--input", "input_file", type=click.Path(exists=True), required=True)
@click.option("--parses", "parses_file", type=click.Path(exists=True), default=None)
@click.option("--out", "out_file", type=click.Path(), required=True)
@click.option("--system", "system_name", default=None,
              help="System column for the predictions TSV (default: the baseline name).")
def predict(model_file, input_file, parses_file, out_file, system_name) -> None:
    """Run a baseline over a dataset or a pairs file, writing a predictions TSV.

    Pairs files (records with a pair_id) produce <pair_id>:orig / :mod rows;
    dataset files produce one row per item id.
    """
    model = baselines.load_model(model_file)
    is_sentiment = isinstance(model, baselines.SentimentModel)
    system = system_name or ("bag-of-ngrams" if is_sentiment else "qasrl-baseline")

    first = None
    with open(input_file, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                first = json.loads(line)
                break
    if first is None:
        raise click.UsageError("input file is empty")
    rows: list[tuple[str, str]] = []
    if "pair_id" in first:
        for pair in ingest_pairs(input_file):
            for side in (ORIGINAL, MODIFIED):
                text = pair_side_text(pair, side)
                if is_sentiment:
                    label, _ = baselines.predict_sentiment(model, text)
                    payload = str(label)
                else:
                    raise click.UsageError(
                        "QA-SRL pair prediction needs parses for modified sentences; "
                        "predict over a dataset file with --parses instead"
                    )
                rows.append((pair_ref(pair.pair_id, side), payload))
    elif is_sentiment:
        for item in ingest_sentiment(input_file):
            label, _ = baselines.predict_sentiment(model, item.text)
            rows.append((item.id, str(label)))
    else:
        if not parses_file:
            raise click.UsageError("--parses is required for QA-SRL prediction")
        parses = ingest_parses(parses_file)
        for item in ingest_qasrl(input_file):
            parse = parses.get(item.id)
            if parse is None:
                click.echo(f"warning: no parse for {item.id}; skipped", err=True)
                continue
            rows.append((item.id, baselines.predict_qasrl(model, item, parse)))
    with open(out_file, "w", encoding="utf-8") as f:
        for ref, payload in rows:
            f.write(f"{system}\t{ref}\t{payload}\n")
    click.echo(f"{len(rows)} predictions written to {out_file}")


@main.command()
@click.option("--store", "store_dir", default=None)
@click.option("--bind", default="127.0.0.1:8000", show_default=True)
def serve(store_dir, bind) -> None:
    """Serve the HTTP API over the round store."""
    import uvicorn

    from .server import create_app

    host, _, port = bind.partition(":")
    app = create_app(_store(store_dir))
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


def entry() -> None:
    try:
        main()
    except (HarnessError, PhaseError) as e:
        click.echo(f"error: {e}", err=True)
        sys.exit(1)


if __name__ == "__main__":
    entry()
