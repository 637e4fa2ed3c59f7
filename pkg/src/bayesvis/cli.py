"""Command-line entry points: service management and analysis workflow."""

from __future__ import annotations

import json
from pathlib import Path

import click
import numpy as np
import pandas as pd

from . import agents, analysis, cafe_study
from .store import StudyStore
from .tasks import parse_template


@click.group()
def main():
    """Quantitative evaluation of Bayesian model visualisations."""


def _store(db, blob_dir):
    return StudyStore(db, blob_dir)


@main.command()
@click.option("--db", default="bayesvis.db", show_default=True,
              envvar="BAYESVIS_DB")
@click.option("--blob-dir", default=None, envvar="BAYESVIS_BLOBS")
@click.option("--host", default="127.0.0.1", show_default=True,
              envvar="BAYESVIS_HOST")
@click.option("--port", default=8000, show_default=True, type=int,
              envvar="BAYESVIS_PORT")
def serve(db, blob_dir, host, port):
    """Start the study web service."""
    import uvicorn

    from .service import create_app

    app = create_app(_store(db, blob_dir))
    uvicorn.run(app, host=host, port=port, log_level="info")


@main.command("register-study")
@click.argument("template_path", type=click.Path(exists=True))
@click.option("--db", default="bayesvis.db", show_default=True)
@click.option("--blob-dir", default=None)
@click.option("--study-id", default=None)
def register_study(template_path, db, blob_dir, study_id):
    """Load a JSON study template and print its study id."""
    template = parse_template(Path(template_path).read_text())
    store = _store(db, blob_dir)
    study_id = store.register_study(template, study_id=study_id)
    click.echo(study_id)


@main.command("register-demo")
@click.option("--db", default="bayesvis.db", show_default=True)
@click.option("--blob-dir", default=None)
@click.option("--rows", default=4000, show_default=True, type=int)
@click.option("--seed", default=7, show_default=True, type=int)
@click.option("--study-id", default="cafe-demo", show_default=True)
def register_demo(db, blob_dir, rows, seed, study_id):
    """Register the worked 48-task cafe study with a fresh blob."""
    store = _store(db, blob_dir)
    blob_id = f"{study_id}-blob"
    store.blobs.register(blob_id, cafe_study.build_cafe_blob(
        n_rows=rows, seed=seed))
    template = cafe_study.study_template_48(blob_id)
    study_id = store.register_study(template, study_id=study_id)
    click.echo(study_id)


@main.command()
@click.option("--db", default="bayesvis.db", show_default=True)
@click.option("--blob-dir", default=None)
@click.option("--study", "study_id", required=True)
@click.option("--out", default="-", show_default=True)
def export(db, blob_dir, study_id, out):
    """Dump the response table for a study as CSV."""
    rows = _store(db, blob_dir).export_responses(study_id)
    frame = pd.DataFrame(rows)
    if out == "-":
        click.echo(frame.to_csv(index=False))
    else:
        frame.to_csv(out, index=False)
        click.echo(f"wrote {len(frame)} responses to {out}")


@main.command("simulate-agents")
@click.option("--db", default="bayesvis.db", show_default=True)
@click.option("--blob-dir", default=None)
@click.option("--study", "study_id", required=True)
@click.option("--agent", type=click.Choice(agents.AGENTS), default="random",
              show_default=True)
@click.option("--participants", default=22, show_default=True, type=int)
@click.option("--noise", default=0.0, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--out", default="-", show_default=True)
def simulate_agents(db, blob_dir, study_id, agent, participants, noise, seed,
                    out):
    """Simulate participants completing a study without the service."""
    store = _store(db, blob_dir)
    template = store.get_template(study_id)
    rows = agents.simulate_study(template, store.blobs.load, participants,
                                 agent=agent, seed=seed, noise=noise)
    frame = pd.DataFrame(rows)
    if out == "-":
        click.echo(frame.to_csv(index=False))
    else:
        frame.to_csv(out, index=False)
        click.echo(f"wrote {len(frame)} simulated responses to {out}")


@main.command()
@click.option("--db", default="bayesvis.db", show_default=True)
@click.option("--blob-dir", default=None)
@click.option("--study", "study_id", required=True)
@click.option("--responses", required=True, type=click.Path(exists=True))
@click.option("--agent-n", default=1000, show_default=True, type=int)
@click.option("--alpha", default=0.05, show_default=True, type=float)
@click.option("--seed", default=0, show_default=True, type=int)
def calibrate(db, blob_dir, study_id, responses, agent_n, alpha, seed):
    """Task-difficulty report against a simulated random agent."""
    store = _store(db, blob_dir)
    template = store.get_template(study_id)
    rows = pd.read_csv(responses).to_dict("records")
    seen = {r["query_id"] for r in rows}
    agent_rewards = {}
    for task in template.leaves():
        qid = task.query_id or task.id
        if qid in seen and qid not in agent_rewards:
            js = store.blobs.load(task.model_ref)
            agent_rewards[qid] = agents.simulate_random_agent(
                task, js, n=agent_n, seed=seed)
    report = analysis.calibration_report(rows, agent_rewards, alpha=alpha)
    for qid, entry in report.items():
        t = entry["test"]
        click.echo(
            f"{qid}\tmedian={entry['median_reward']:.1f}\t"
            f"U={t.statistic:.1f}\tp={t.p_value:.3g}\t"
            f"rejected={t.rejected}\ttoo_easy={entry['too_easy']}\t"
            f"random_like={entry['indistinguishable_from_random']}")


@main.command()
@click.option("--responses", required=True, type=click.Path(exists=True))
@click.option("--factor", type=click.Choice(["animation", "interactivity"]),
              required=True)
@click.option("--measure", type=click.Choice(["reward", "time"]),
              default="reward", show_default=True)
@click.option("--level", default=0.5, show_default=True, type=float)
def compare(responses, factor, measure, level):
    """Paired central intervals of within-subject differences."""
    rows = pd.read_csv(responses).to_dict("records")
    measure_key = "response_time" if measure == "time" else "reward"
    for subset in ("rationality", "comprehension"):
        try:
            lo, hi = analysis.paired_central_interval(
                rows, factor, measure=measure_key, subset=subset, level=level)
            click.echo(f"{subset}\t{int(level * 100)}%-CI of differences: "
                       f"[{lo:.2f}, {hi:.2f}]")
        except analysis.InsufficientData:
            click.echo(f"{subset}\tno paired observations")


@main.command("effect-size")
@click.option("--responses", required=True, type=click.Path(exists=True))
@click.option("--group-by", default="visualisation", show_default=True)
@click.option("--level-a", required=True)
@click.option("--level-b", required=True)
@click.option("--n-boot", default=1000, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--pooled-variance", is_flag=True)
def effect_size(responses, group_by, level_a, level_b, n_boot, seed,
                pooled_variance):
    """Bootstrap effect sizes per task between two condition levels."""
    frame = pd.read_csv(responses)
    for qid, group in frame.groupby("query_id"):
        a = group.loc[group[group_by] == level_a, "reward"].to_numpy()
        b = group.loc[group[group_by] == level_b, "reward"].to_numpy()
        if a.size == 0 or b.size == 0:
            continue
        try:
            result = analysis.bootstrap_effect_size(
                a, b, n_boot=n_boot, seed=seed,
                pooled_variance=pooled_variance)
        except analysis.UndefinedEffect:
            click.echo(f"{qid}\tundefined (zero spread)")
            continue
        click.echo(f"{qid}\teffect={result['effect']:+.3f}\t"
                   f"se={result['se']:.3f}")


if __name__ == "__main__":
    main()
