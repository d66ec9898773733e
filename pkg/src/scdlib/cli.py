"""Command-line harness: the evaluation workflow, plots, and the service."""

from __future__ import annotations

import csv
import logging
from pathlib import Path

import click

from .evaluation import (
    DEFAULT_FAULTY_FRACTION,
    run_workflow,
    synthetic_corpus,
)
from .model import serialize_model
from .service import build_corpus


@click.group()
@click.option("--verbose", is_flag=True, help="Enable info-level logging.")
def main(verbose):
    logging.basicConfig(level=logging.INFO if verbose else logging.WARNING)


@main.group("eval")
def eval_group():
    """Evaluation workflow commands."""


@eval_group.command("run")
@click.option("--corpus", "corpus_path", default=None, help="Corpus path (.txt dir or .xml); omit for the synthetic corpus.")
@click.option("--k", "k_list", required=True, help="Comma-separated target SCD counts.")
@click.option("--fraction", default=DEFAULT_FAULTY_FRACTION, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
@click.option("--save-models/--no-save-models", default=True, show_default=True)
def eval_run(corpus_path, k_list, fraction, seed, out_dir, save_models):
    """Run the faulty/refreshed/baseline comparison for every K."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    corpus = build_corpus(corpus_path) if corpus_path else synthetic_corpus(seed=seed)
    ks = [int(k.strip()) for k in k_list.split(",")]
    rows = []
    for k in ks:
        result = run_workflow(corpus, k, fraction, seed)
        rows.append(result.metrics)
        click.echo(
            f"K={k}: avg_fb={result.metrics['avg_fb']:.4f} "
            f"avg_rb={result.metrics['avg_rb']:.4f} "
            f"({result.runtime_seconds:.1f}s)"
        )
        if save_models:
            for name, model in (
                ("faulty", result.faulty),
                ("refreshed", result.refreshed),
                ("baseline", result.baseline),
            ):
                (out / f"model-k{k}-{name}.json").write_bytes(serialize_model(model))
    with open(out / "metrics.csv", "w", newline="") as fh:
        writer = csv.DictWriter(
            fh, fieldnames=["K", "pd_fb", "pd_fr", "pd_rb", "avg_fb", "avg_fr", "avg_rb"]
        )
        writer.writeheader()
        writer.writerows(rows)
    with open(out / "reduction.csv", "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["K", "reduction"])
        for row in rows:
            writer.writerow([row["K"], row["avg_fb"] - row["avg_rb"]])
    click.echo(f"wrote {out / 'metrics.csv'} and {out / 'reduction.csv'}")


@eval_group.command("plot")
@click.option("--metrics", "metrics_path", required=True, type=click.Path(exists=True, dir_okay=False))
@click.option("--out", "out_dir", required=True, type=click.Path(file_okay=False))
def eval_plot(metrics_path, out_dir):
    """Render line charts of the metrics table."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    with open(metrics_path, newline="") as fh:
        rows = [
            {k: float(v) for k, v in row.items()} for row in csv.DictReader(fh)
        ]
    rows.sort(key=lambda r: r["K"])
    ks = [r["K"] for r in rows]

    fig, (ax1, ax2) = plt.subplots(2, 1, figsize=(8, 8), sharex=True)
    for key, label, style in (
        ("avg_fb", "H(Faulty, Baseline)", "-"),
        ("avg_fr", "H(Faulty, ReFrESH)", "--"),
        ("avg_rb", "H(ReFrESH, Baseline)", "--"),
    ):
        ax1.plot(ks, [r[key] for r in rows], style, label=label)
    ax1.set_ylabel("average Hellinger distance")
    ax1.legend()
    for key, label, style in (
        ("pd_fb", "H(Faulty, Baseline)", "-"),
        ("pd_fr", "H(Faulty, ReFrESH)", "--"),
        ("pd_rb", "H(ReFrESH, Baseline)", "--"),
    ):
        ax2.plot(ks, [r[key] for r in rows], style, label=label)
    ax2.set_xlabel("number of SCDs")
    ax2.set_ylabel("proportion of different rows")
    ax2.legend()
    fig.tight_layout()
    fig.savefig(out / "metrics.png", dpi=150)

    fig2, ax = plt.subplots(figsize=(6, 4))
    ax.plot(ks, [r["avg_fb"] - r["avg_rb"] for r in rows], "-o")
    ax.set_xlabel("number of SCDs")
    ax.set_ylabel("distance reduction")
    fig2.tight_layout()
    fig2.savefig(out / "reduction.png", dpi=150)
    click.echo(f"wrote plots to {out}")


@main.command("serve")
@click.option("--config", "config_path", required=True, type=click.Path(exists=True, dir_okay=False))
def serve_cmd(config_path):
    """Start the agent HTTP service."""
    from .service import serve

    serve(config_path)


if __name__ == "__main__":
    main()
