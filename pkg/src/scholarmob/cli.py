"""Command-line interface.

Subcommands mirror the pipeline stages (ingest, disambiguate, classify,
network, metrics, report) plus ``run`` for the full staged pipeline.  Every
flag overrides the corresponding key of the JSON config document passed
with --config.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from . import __version__, pipeline
from .netmetrics import read_edge_list, write_edge_list


def _build_config(config_path: str | None, **overrides) -> pipeline.PipelineConfig:
    try:
        return pipeline.load_config(config_path, **overrides)
    except pipeline.PipelineError as exc:
        raise click.ClickException(str(exc)) from exc


def _run_stage(name: str, config: pipeline.PipelineConfig) -> None:
    try:
        entry = pipeline.stage(name, config)
    except pipeline.StageError as exc:
        raise click.ClickException(str(exc)) from exc
    click.echo(f"{name}: {entry['status']} ({entry['elapsed_s']}s)")


config_option = click.option("--config", "config_path", type=click.Path(exists=True), default=None,
                             help="JSON config document; flags override its keys.")
out_dir_option = click.option("--out-dir", type=click.Path(), default=None,
                              help="Run output directory.")


@click.group()
@click.version_option(version=__version__)
def main() -> None:
    """Researcher mobility and collaboration analytics from publication metadata."""


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None, help="Line-delimited corpus.")
@click.option("--registry", type=click.Path(), default=None, help="Country registry file.")
@click.option("--window", default=None, help="Study window, e.g. 2008:2017.")
@click.option("--strict", is_flag=True, default=None, help="Abort on the first malformed input.")
def ingest(config_path, out_dir, input_path, registry, window, strict):
    """Parse, validate and window-filter the corpus."""
    config = _build_config(config_path, input=input_path, out_dir=out_dir,
                           registry=registry, window=window, strict=strict)
    _run_stage("ingest", config)


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--threshold", type=float, default=None, help="Linkage threshold override.")
@click.option("--weights", type=click.Path(), default=None, help="Scoring weights JSON.")
@click.option("--reference", type=click.Path(), default=None,
              help="Identity registry for cluster validation.")
def disambiguate(config_path, out_dir, input_path, threshold, weights, reference):
    """Cluster author mentions into researchers."""
    config = _build_config(config_path, input=input_path, out_dir=out_dir,
                           threshold=threshold, weights=weights, reference=reference)
    _run_stage("disambiguate", config)


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--age-reference", type=click.Choice(["event", "window-end"]), default=None)
@click.option("--gender-providers", default=None,
              help="Comma-separated provider chain, e.g. local,remote.")
@click.option("--gender-table", type=click.Path(), default=None, help="Local name-gender table.")
@click.option("--min-confidence", type=float, default=None)
def classify(config_path, out_dir, input_path, age_reference, gender_providers,
             gender_table, min_confidence):
    """Build timelines, classify mobility, attribute demographics."""
    providers = tuple(gender_providers.split(",")) if gender_providers else None
    config = _build_config(config_path, input=input_path, out_dir=out_dir,
                           age_reference=age_reference, gender_providers=providers,
                           gender_table=gender_table, min_confidence=min_confidence)
    _run_stage("classify", config)


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--network", "which", type=click.Choice(["collab", "mobility"]), default=None,
              help="Export only one network's edges with --export-edges.")
@click.option("--export-edges", type=click.Path(), default=None,
              help="Copy the selected network's edge list to this path.")
def network(config_path, out_dir, input_path, which, export_edges):
    """Build country-level collaboration and mobility networks."""
    config = _build_config(config_path, input=input_path, out_dir=out_dir)
    _run_stage("network", config)
    if export_edges:
        if not which:
            raise click.ClickException("--export-edges requires --network {collab|mobility}")
        source = "collab_edges.tsv" if which == "collab" else "mobility_edges.tsv"
        graph = read_edge_list(config.out_dir / source)
        write_edge_list(graph, Path(export_edges), directed=which == "mobility")
        click.echo(f"exported {which} edges to {export_edges}")


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None)
def metrics(config_path, out_dir, input_path):
    """Compute structural measures of both networks."""
    config = _build_config(config_path, input=input_path, out_dir=out_dir)
    _run_stage("metrics", config)
    click.echo((config.out_dir / "metrics.json").read_text("utf-8"))


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--report", "reports", multiple=True,
              type=click.Choice(sorted(pipeline.REPORT_NAMES) + ["all"]),
              help="Report selection; repeatable. Default: all.")
@click.option("--min-country-count", type=int, default=None)
@click.option("--age-reference", type=click.Choice(["event", "window-end"]), default=None)
def report(config_path, out_dir, input_path, reports, min_country_count, age_reference):
    """Emit the indicator suite as CSV files plus a JSON bundle."""
    config = _build_config(config_path, input=input_path, out_dir=out_dir,
                           reports=tuple(reports) or None,
                           min_country_count=min_country_count,
                           age_reference=age_reference)
    _run_stage("report", config)


@main.command()
@config_option
@out_dir_option
@click.option("--input", "input_path", type=click.Path(), default=None)
@click.option("--registry", type=click.Path(), default=None)
@click.option("--window", default=None)
@click.option("--strict", is_flag=True, default=None)
@click.option("--threshold", type=float, default=None)
@click.option("--weights", type=click.Path(), default=None)
@click.option("--reference", type=click.Path(), default=None)
@click.option("--gender-providers", default=None)
@click.option("--gender-table", type=click.Path(), default=None)
@click.option("--min-confidence", type=float, default=None)
@click.option("--age-reference", type=click.Choice(["event", "window-end"]), default=None)
@click.option("--min-country-count", type=int, default=None)
@click.option("--report", "reports", multiple=True,
              type=click.Choice(sorted(pipeline.REPORT_NAMES) + ["all"]))
def run(config_path, out_dir, input_path, registry, window, strict, threshold, weights,
        reference, gender_providers, gender_table, min_confidence, age_reference,
        min_country_count, reports):
    """Run the full pipeline with stage caching."""
    providers = tuple(gender_providers.split(",")) if gender_providers else None
    config = _build_config(config_path, input=input_path, out_dir=out_dir,
                           registry=registry, window=window, strict=strict,
                           threshold=threshold, weights=weights, reference=reference,
                           gender_providers=providers, gender_table=gender_table,
                           min_confidence=min_confidence, age_reference=age_reference,
                           min_country_count=min_country_count,
                           reports=tuple(reports) or None)
    try:
        manifest = pipeline.run_pipeline(config)
    except pipeline.PipelineError as exc:
        raise click.ClickException(str(exc)) from exc
    except Exception as exc:
        click.echo(f"pipeline failed: {exc}", err=True)
        sys.exit(1)
    for name in pipeline.STAGES:
        entry = manifest["stages"][name]
        cached = " (cached)" if entry.get("cached") else ""
        click.echo(f"{name}: {entry['status']}{cached}")
    click.echo(json.dumps({"out_dir": str(config.out_dir)}))


if __name__ == "__main__":
    main()
