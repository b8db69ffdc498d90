"""Command-line entry points: one subcommand per pipeline stage."""

from __future__ import annotations

import logging
import sys

import click

from . import pipeline
from .config import load_config
from .errors import HydroclimError


def _load(config, seed, out):
    return load_config(config, seed_override=seed, out_override=out)


config_opt = click.option("--config", required=True,
                          type=click.Path(exists=True, dir_okay=False),
                          help="Pipeline config YAML.")
seed_opt = click.option("--seed", type=int, default=None,
                        help="Override the config seed.")
out_opt = click.option("--out", type=click.Path(file_okay=False), default=None,
                       help="Override the config output directory.")
threads_opt = click.option("--threads", type=int, default=1,
                           help="Worker cap for within-stage parallelism "
                                "(does not affect results).")


@click.group()
@click.option("-v", "--verbose", is_flag=True, help="Verbose logging.")
def main(verbose):
    logging.basicConfig(
        level=logging.DEBUG if verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )


def _run(fn, *args, **kwargs):
    try:
        return fn(*args, **kwargs)
    except HydroclimError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@main.command("ingest-check")
@config_opt
@seed_opt
@out_opt
def ingest_check(config, seed, out):
    """Load the inputs and report station and qualifying-window counts."""
    cfg = _run(_load, config, seed, out)
    report = _run(pipeline.run_ingest_check, cfg)
    for kind, counts in report.items():
        click.echo(f"{kind}: {counts['stations']} stations, "
                   f"{counts['qualifying']} with a qualifying window")


@main.command()
@config_opt
@seed_opt
@out_opt
@threads_opt
def features(config, seed, out, threads):
    """Extract the eight features per station (plus a skip log)."""
    cfg = _run(_load, config, seed, out)
    paths = _run(pipeline.run_features, cfg, threads)
    for kind, path in paths.items():
        click.echo(f"{kind}: {path}")


@main.command()
@config_opt
@seed_opt
@out_opt
def summarize(config, seed, out):
    """Emit global/grouped summaries, counts and correlation matrices."""
    cfg = _run(_load, config, seed, out)
    written = _run(pipeline.run_summarize, cfg)
    click.echo(f"wrote {len(written)} summary files under {cfg.output_dir}")


@main.command()
@config_opt
@seed_opt
@out_opt
def importance(config, seed, out):
    """Train the six forests and write the twelve importance reports."""
    cfg = _run(_load, config, seed, out)
    paths = _run(pipeline.run_importance, cfg)
    for path in paths:
        click.echo(str(path))


@main.command("all")
@config_opt
@seed_opt
@out_opt
@threads_opt
def run_all(config, seed, out, threads):
    """Run features, summarize and importance in sequence."""
    cfg = _run(_load, config, seed, out)
    _run(pipeline.run_all, cfg, threads)
    click.echo(f"pipeline complete: {cfg.output_dir}")


if __name__ == "__main__":
    main()
