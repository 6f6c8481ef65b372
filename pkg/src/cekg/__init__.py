"""Clinical event knowledge graphs from hospital event logs.

The package builds a labeled property graph out of an event log, diagnosis
table, ICD-10 catalogue, SNOMED-CT snapshot, and mapping tables, then
discovers care-pathway graphs over it and serializes everything to DOT,
GraphML, and openCypher.

Typical use::

    from cekg import BuildConfig, build_all, aggregate_pathway
    from cekg.sample import load_sample

    graph, report = build_all(load_sample(), BuildConfig())
    pathway = aggregate_pathway(graph, entity_type="ADMISSION")
"""

from .construct import (
    BuildConfig,
    BuildReport,
    admissions_in_order,
    build_all,
    build_activity_classes,
    build_domains,
    build_events_and_entities,
    build_terminology_graph,
    compute_df,
    link_terminology,
    reify_disorders,
)
from .discover import (
    CohortSelector,
    DisorderStatusReport,
    PathwayEdge,
    PathwayGraph,
    PathwayNode,
    StatusRow,
    admission_disorder_status,
    aggregate_pathway,
    df_count,
    disorder_status_graph,
    instance_pathways,
    select_patients,
)
from .errors import CekgError, ConstructError, DiscoverError, IngestError, ManifestError
from .export import emit_dot, emit_graphml, emit_query_script, load_graphml
from .graph import Edge, Node, PropertyGraph
from .ingest import (
    Dataset,
    DiagnosisRecord,
    EntityAttributeRecord,
    EventRecord,
    IcdCodeRecord,
    MappingKind,
    MappingTable,
    SnomedConceptRecord,
    SnomedRelationshipRecord,
    load_diagnosis_table,
    load_entity_attributes,
    load_event_table,
    load_mappings,
    load_terminology,
)
from .manifest import Manifest, OutputRequest, parse_manifest
from .styles import StyleMap

__version__ = "0.1.0"

__all__ = [
    "BuildConfig",
    "BuildReport",
    "CekgError",
    "CohortSelector",
    "ConstructError",
    "Dataset",
    "DiagnosisRecord",
    "DiscoverError",
    "DisorderStatusReport",
    "Edge",
    "EntityAttributeRecord",
    "EventRecord",
    "IcdCodeRecord",
    "IngestError",
    "Manifest",
    "ManifestError",
    "MappingKind",
    "MappingTable",
    "Node",
    "OutputRequest",
    "PathwayEdge",
    "PathwayGraph",
    "PathwayNode",
    "PropertyGraph",
    "SnomedConceptRecord",
    "SnomedRelationshipRecord",
    "StatusRow",
    "StyleMap",
    "admission_disorder_status",
    "admissions_in_order",
    "aggregate_pathway",
    "build_activity_classes",
    "build_all",
    "build_domains",
    "build_events_and_entities",
    "build_terminology_graph",
    "compute_df",
    "df_count",
    "disorder_status_graph",
    "emit_dot",
    "emit_graphml",
    "emit_query_script",
    "instance_pathways",
    "link_terminology",
    "load_diagnosis_table",
    "load_entity_attributes",
    "load_event_table",
    "load_graphml",
    "load_mappings",
    "load_terminology",
    "parse_manifest",
    "reify_disorders",
    "select_patients",
    "__version__",
]
