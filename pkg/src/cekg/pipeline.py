"""Glue between a parsed manifest and the core modules.

The CLI and the HTTP service both run batches through these functions, so
command behavior stays identical regardless of the entry point.  Everything
returns plain data (records, graphs, ``{filename: text}`` dicts); writing to
disk is the last, separate step.
"""

from __future__ import annotations

import json
from pathlib import Path

from . import export
from .construct import BuildReport, build_all
from .discover import (
    DisorderStatusReport,
    PathwayGraph,
    admission_disorder_status,
    aggregate_pathway,
    disorder_status_graph,
    instance_pathways,
)
from .graph import PropertyGraph
from .ingest import (
    Dataset,
    load_diagnosis_table,
    load_entity_attributes,
    load_event_table,
    load_mappings,
    load_terminology,
)
from .manifest import Manifest, OutputRequest, _slugify

#: formats each command is allowed to write for a discovery output
COMMAND_FORMATS = {
    "discover": ("json",),
    "export": ("dot", "graphml", "cypher"),
    "all": ("dot", "graphml", "cypher", "json"),
}


def load_dataset(manifest: Manifest, warnings: list[str] | None = None) -> Dataset:
    """Load every table the manifest names.

    In lenient mode bad rows are skipped and described in ``warnings``; in
    strict mode the first problem raises.
    """
    strict = manifest.strict
    events = load_event_table(manifest.tables["event_log"], strict=strict, warnings=warnings)
    attributes = []
    attr_path = manifest.table("entity_attributes")
    if attr_path is not None:
        attributes = load_entity_attributes(attr_path, strict=strict, warnings=warnings)
    diagnoses = load_diagnosis_table(manifest.tables["diagnosis"], strict=strict, warnings=warnings)
    icd_codes, concepts, relationships = load_terminology(
        manifest.tables["icd10"],
        manifest.tables["snomed_concepts"],
        manifest.tables["snomed_relationships"],
        strict=strict,
        warnings=warnings,
    )
    mappings = load_mappings(manifest.mapping_paths(), strict=strict, warnings=warnings)
    return Dataset(
        events=events,
        attributes=attributes,
        diagnoses=diagnoses,
        icd_codes=icd_codes,
        concepts=concepts,
        relationships=relationships,
        mappings={table.kind: table for table in mappings},
    )


def validate(manifest: Manifest) -> list[str]:
    """Run ingest checks only.  Returns collected warnings; writes nothing."""
    warnings: list[str] = []
    load_dataset(manifest, warnings)
    return warnings


def run_build(manifest: Manifest) -> tuple[PropertyGraph, BuildReport]:
    """Load the dataset and construct the full graph.

    Ingest warnings come first in the report, construction warnings after.
    """
    ingest_warnings: list[str] = []
    dataset = load_dataset(manifest, ingest_warnings)
    graph, report = build_all(dataset, manifest.config)
    report.warnings[0:0] = [f"ingest: {w}" for w in ingest_warnings]
    return graph, report


def pathway_outputs(
    graph: PropertyGraph, request: OutputRequest
) -> tuple[list[tuple[str, PathwayGraph]], DisorderStatusReport | None]:
    """Compute the pathway graphs one output request asks for.

    Returns (file stem, graph) pairs plus, for C6, the status table.
    """
    selector = request.selector()
    variant = request.variant
    if variant == "C1":
        graphs = instance_pathways(graph, selector, combined=False)
        named = []
        for pathway in graphs:
            patient_id = next(
                node.key.split(":", 2)[2]
                for node in pathway.nodes
                if node.key.startswith("ent:PATIENT:")
            )
            named.append((f"c1_{_slugify(patient_id)}", pathway))
        return named, None
    if variant == "C2":
        (pathway,) = instance_pathways(graph, selector, combined=True)
        return [(request.slug(), pathway)], None
    if variant in ("C3", "C5"):
        pathway = aggregate_pathway(graph, selector, request.effective_entity_type())
        return [(request.slug(), pathway)], None
    if variant == "C4":
        pathway = aggregate_pathway(
            graph, selector, request.effective_entity_type(), per_disorder=True
        )
        return [(request.slug(), pathway)], None
    if variant == "C6":
        return [("c6", disorder_status_graph(graph))], admission_disorder_status(graph)
    raise ValueError(f"unknown variant {variant!r}")


def render_pathway(pathway: PathwayGraph, fmt: str) -> str:
    if fmt == "dot":
        return export.emit_dot(pathway)
    if fmt == "graphml":
        return export.emit_graphml(pathway)
    if fmt == "cypher":
        return export.emit_query_script(pathway)
    if fmt == "json":
        return json.dumps(pathway.to_json_dict(), indent=2, sort_keys=True) + "\n"
    raise ValueError(f"unknown format {fmt!r}")


def build_outputs(graph: PropertyGraph, report: BuildReport) -> dict[str, str]:
    """Files the build command writes: full graph plus the build report."""
    return {
        "cekg.graphml": export.emit_graphml(graph),
        "cekg.cypher": export.emit_query_script(graph),
        "report.json": report.to_json() + "\n",
    }


def discovery_outputs(graph: PropertyGraph, manifest: Manifest, command: str) -> dict[str, str]:
    """Files the discover/export/all commands write for the manifest's requests."""
    allowed = COMMAND_FORMATS[command]
    files: dict[str, str] = {}
    for request in manifest.outputs:
        formats = [fmt for fmt in request.formats if fmt in allowed]
        if not formats:
            continue
        named, status = pathway_outputs(graph, request)
        for stem, pathway in named:
            for fmt in formats:
                files[f"{stem}.{fmt}"] = render_pathway(pathway, fmt)
        if status is not None and "json" in formats:
            files["c6_status.json"] = (
                json.dumps(status.to_json_dict(), indent=2, sort_keys=True) + "\n"
            )
    return files


def collect_outputs(command: str, manifest: Manifest, graph: PropertyGraph, report: BuildReport) -> dict[str, str]:
    files: dict[str, str] = {}
    if command in ("build", "all"):
        files.update(build_outputs(graph, report))
    if command in ("discover", "export", "all"):
        files.update(discovery_outputs(graph, manifest, command if command != "build" else "all"))
    return files


def write_outputs(files: dict[str, str], out_dir: str | Path) -> list[Path]:
    """Write each rendered file under ``out_dir``, creating it if needed."""
    target = Path(out_dir)
    target.mkdir(parents=True, exist_ok=True)
    written = []
    for filename in sorted(files):
        path = target / filename
        path.write_text(files[filename], encoding="utf-8", newline="\n")
        written.append(path)
    return written
