"""dtdms command line: serve the twin API, run estimates, drive the NLP tools."""

from __future__ import annotations

import json
import sys

import click

from .city import CityFormatError, load_city
from .quake import ScenarioFormatError, load_scenario


@click.group()
def main():
    """Digital-twin disaster management simulator."""


@main.command()
@click.option("--city", "city_file", required=True, type=click.Path(exists=False))
@click.option("--scenario", "scenario_file", required=True, type=click.Path(exists=False))
@click.option("--out", "out_file", required=True, type=click.Path())
@click.option(
    "--figures",
    "figures_dir",
    type=click.Path(file_okay=False),
    default=None,
    help="Also render map/decay figures and CSV tables into this directory.",
)
def estimate(city_file, scenario_file, out_file, figures_dir):
    """Auto-select the best dispatch plan and write the outcome report."""
    from .session import run_estimate

    try:
        session = run_estimate(city_file, scenario_file, out_file)
    except (CityFormatError, ScenarioFormatError, OSError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    report = session.last_report()
    click.echo(
        f"saved {report.total_saved}/{report.total_trapped} "
        f"(success rate {report.success_rate:.3f}) -> {out_file}"
    )

    if figures_dir:
        from .report import write_report_artifacts

        timeline = session.timeline
        final = timeline.at(timeline.end_t)
        paths = write_report_artifacts(
            timeline.city, session.scenario, final, report, figures_dir
        )
        for p in paths:
            click.echo(f"wrote {p}")


@main.command()
@click.option("--city", "city_file", required=True, type=click.Path(exists=False))
@click.option("--scenario", "scenario_file", required=True, type=click.Path(exists=False))
@click.option("--port", required=True, type=int)
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--mode", type=click.Choice(["education", "estimating"]), default="education")
@click.option("--feed-port", type=int, default=None, help="Open the live TCP reading feed.")
@click.option("--replay", "replay_file", type=click.Path(), default=None)
@click.option("--speed", type=float, default=1.0, show_default=True, help="Replay pacing multiplier (inf = no pacing).")
@click.option("--ui", "ui_dir", type=click.Path(file_okay=False), default=None, help="Serve a built UI from this directory.")
def serve(city_file, scenario_file, port, host, mode, feed_port, replay_file, speed, ui_dir):
    """Run the twin API server for the operator console."""
    import threading

    import uvicorn

    from .ingest import FeedServer, replay_into
    from .service import create_app
    from .session import Session

    try:
        city = load_city(city_file)
        scenario = load_scenario(scenario_file)
    except (CityFormatError, ScenarioFormatError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)

    session = Session(city, mode=mode)

    if replay_file:
        count = 0
        if speed == float("inf"):
            count = replay_into(session.twin, replay_file, speed, lock=session.write_lock)
            click.echo(f"replayed {count} readings from {replay_file}")
        else:
            thread = threading.Thread(
                target=replay_into,
                args=(session.twin, replay_file, speed),
                kwargs={"lock": session.write_lock},
                daemon=True,
            )
            thread.start()
            click.echo(f"replaying {replay_file} at {speed}x in the background")

    session.apply_scenario(scenario)

    feed = None
    if feed_port is not None:
        feed = FeedServer(session.twin, host=host, port=feed_port, lock=session.write_lock)
        feed.start_background()
        click.echo(f"live feed listening on {host}:{feed.port}")

    app = create_app(session, ui_dir=ui_dir)
    try:
        uvicorn.run(app, host=host, port=port, log_level="warning")
    finally:
        if feed is not None:
            feed.shutdown()


@main.group()
def nlp():
    """Disaster-tweet classifier tools."""


@nlp.command("train")
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=False))
@click.option("--seed", required=True, type=int)
@click.option("--out", "model_file", required=True, type=click.Path())
def nlp_train(corpus_file, seed, model_file):
    """Train the baseline classifier on an 80:10:10 split of the corpus."""
    from .nlp import CorpusFormatError, SplitSpec, evaluate, load_corpus, save_model, split_corpus, train

    try:
        records = load_corpus(corpus_file)
        train_set, dev_set, test_set = split_corpus(records, SplitSpec(seed=seed))
        model = train(train_set)
    except (CorpusFormatError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    save_model(model, model_file)
    click.echo(f"corpus: {len(records)} records -> split {len(train_set)}/{len(dev_set)}/{len(test_set)}")
    for name, subset in (("dev", dev_set), ("test", test_set)):
        labeled = [r for r in subset if r.target is not None]
        if labeled:
            metrics = evaluate(model, labeled)
            click.echo(f"{name} accuracy: {metrics['accuracy']:.4f} (n={metrics['n']})")
    click.echo(f"model -> {model_file}")


@nlp.command("eval")
@click.option("--model", "model_file", required=True, type=click.Path(exists=False))
@click.option("--corpus", "corpus_file", required=True, type=click.Path(exists=False))
def nlp_eval(model_file, corpus_file):
    """Evaluate a saved model on every labeled row of a corpus."""
    from .nlp import CorpusFormatError, ModelFormatError, evaluate, load_corpus, load_model

    try:
        model = load_model(model_file)
        records = load_corpus(corpus_file)
        metrics = evaluate(model, records)
    except (CorpusFormatError, ModelFormatError, ValueError) as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    click.echo(json.dumps(metrics, indent=2, sort_keys=True))


@nlp.command("classify")
@click.option("--model", "model_file", required=True, type=click.Path(exists=False))
@click.option("--text", required=True)
def nlp_classify(model_file, text):
    """Classify one text: 1 = about a real disaster, 0 = not."""
    from .nlp import ModelFormatError, load_model

    try:
        model = load_model(model_file)
    except ModelFormatError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)
    label, score = model.classify(text)
    click.echo(json.dumps({"label": label, "score": score}))


if __name__ == "__main__":
    main()
