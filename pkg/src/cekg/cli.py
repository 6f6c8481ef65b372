"""Command line interface.

All commands run the core in-process against a manifest file:

    cekg validate --manifest run.manifest
    cekg build    --manifest run.manifest --out out/
    cekg discover --manifest run.manifest --out out/
    cekg export   --manifest run.manifest --out out/
    cekg all      --manifest run.manifest --out out/
    cekg serve    --host 127.0.0.1 --port 8000

Exit codes: 0 on success, 1 for data problems (unreadable or inconsistent
inputs, unknown patients or classes), 2 for usage problems (bad flags, bad
manifest grammar, impossible output requests).  The output directory resolves
in order: ``--out``, the ``CEKG_OUT`` environment variable, then the
manifest's ``out_dir`` (relative to the manifest file).
"""

from __future__ import annotations

import os
import sys
from pathlib import Path

import click

from . import pipeline
from .errors import CekgError, ManifestError, PerDisorderRequiresDisorderType
from .manifest import Manifest, parse_manifest

_WRITING_COMMANDS = ("build", "discover", "export", "all")


def _load_manifest(manifest_path: str, strict: bool | None) -> Manifest:
    try:
        manifest = parse_manifest(manifest_path)
    except ManifestError as err:
        raise click.UsageError(str(err)) from err
    return manifest.with_strict(strict)


def _resolve_out_dir(out_option: str | None, manifest: Manifest) -> Path | None:
    if out_option:
        return Path(out_option)
    env = os.environ.get("CEKG_OUT")
    if env:
        return Path(env)
    if manifest.out_dir:
        return manifest.base_dir / manifest.out_dir
    return None


def _run(command: str, manifest_path: str, strict: bool | None, out_option: str | None) -> None:
    manifest = _load_manifest(manifest_path, strict)
    out_dir = _resolve_out_dir(out_option, manifest)
    if command in _WRITING_COMMANDS and out_dir is None:
        raise click.UsageError("no output directory: pass --out, set CEKG_OUT, or add out_dir to the manifest")

    try:
        if command == "validate":
            warnings = pipeline.validate(manifest)
            for warning in warnings:
                click.echo(f"warning: {warning}")
            click.echo(f"validation OK ({len(warnings)} warning(s))")
            return
        graph, report = pipeline.run_build(manifest)
        files = pipeline.collect_outputs(command, manifest, graph, report)
        written = pipeline.write_outputs(files, out_dir)
        for warning in report.warnings:
            click.echo(f"warning: {warning}")
        click.echo(f"built graph: {graph.node_count} nodes, {graph.edge_count} edges")
        for path in written:
            click.echo(f"wrote {path}")
    except (ManifestError, PerDisorderRequiresDisorderType) as err:
        raise click.UsageError(str(err)) from err
    except CekgError as err:
        click.echo(f"error: {err}", err=True)
        sys.exit(1)


def manifest_options(f):
    options = (
        click.option(
            "--manifest",
            "manifest_path",
            required=True,
            type=click.Path(exists=True, dir_okay=False),
            help="Path to the build manifest.",
        ),
        click.option(
            "--strict/--lenient",
            "strict",
            default=None,
            help="Override the manifest's strictness setting.",
        ),
        click.option(
            "--out",
            "out_option",
            type=click.Path(file_okay=False),
            default=None,
            help="Output directory; overrides CEKG_OUT and the manifest's out_dir.",
        ),
    )
    for option in reversed(options):
        f = option(f)
    return f


@click.group()
@click.version_option(package_name="cekg")
def main() -> None:
    """Build clinical event knowledge graphs and discover care pathways."""


@main.command()
@manifest_options
def validate(manifest_path: str, strict: bool | None, out_option: str | None) -> None:
    """Check the manifest's input tables without writing anything."""
    _run("validate", manifest_path, strict, out_option)


@main.command()
@manifest_options
def build(manifest_path: str, strict: bool | None, out_option: str | None) -> None:
    """Construct the graph and write cekg.graphml, cekg.cypher, report.json."""
    _run("build", manifest_path, strict, out_option)


@main.command()
@manifest_options
def discover(manifest_path: str, strict: bool | None, out_option: str | None) -> None:
    """Compute the manifest's pathway outputs and write them as JSON."""
    _run("discover", manifest_path, strict, out_option)


@main.command()
@manifest_options
def export(manifest_path: str, strict: bool | None, out_option: str | None) -> None:
    """Write the manifest's pathway outputs as DOT, GraphML, or Cypher."""
    _run("export", manifest_path, strict, out_option)


@main.command(name="all")
@manifest_options
def run_all(manifest_path: str, strict: bool | None, out_option: str | None) -> None:
    """Build, discover, and export in one run."""
    _run("all", manifest_path, strict, out_option)


@main.command()
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, type=int, show_default=True)
def serve(host: str, port: int) -> None:
    """Run the HTTP service."""
    import uvicorn

    from .service.app import create_app

    uvicorn.run(create_app(), host=host, port=port)


if __name__ == "__main__":
    main()
