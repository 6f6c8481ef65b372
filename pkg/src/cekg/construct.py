"""Build a clinical event knowledge graph from ingested records.

Construction runs as a fixed sequence of numbered steps.  Step numbers appear
in warnings and error messages so a report line can be traced back to the
stage that produced it:

  1   event nodes from the event log
  2   entity nodes (patients, admissions) and attribute-value nodes
  3   entity-to-attribute edges
  4   activity class nodes and event-to-class OBSERVED edges
  5   activity domain nodes and class-to-domain edges
  6   ICD-10 code nodes
  7   SNOMED-CT concept nodes
  8   SNOMED-CT relationship edges (active rows only)
  9   admission-to-ICD DIAGNOSED_AS edges
  10  ICD-to-SNOMED MAPS_TO edges
  11  class-to-SNOMED CODED_AS edges (classes take the concept name as label)
  12  domain-to-SNOMED CODED_AS edges
  13  disorder reification: one Disorder entity per (patient, concept),
      TREATS edges, and event-to-disorder CORR edges via the treats mapping
  14  directly-follows edges per entity

The graph is frozen when :func:`build_all` returns; discovery and export read
it concurrently without locking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Mapping, Sequence

from . import vocab
from .errors import (
    AttributeForUnknownEntity,
    CekgError,
    ConstructError,
    DfAlreadyComputed,
    DiagnosisCodeNotInIcdTable,
    DiagnosisForUnknownAdmission,
    IcdCodeUnmappedToSnomed,
    TreatsTargetNotAConcept,
)
from .graph import NodeId, PropertyGraph
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
)


@dataclass(frozen=True)
class BuildConfig:
    """Toggles for the construction pipeline.

    ``df_entity_types`` restricts which entity types get directly-follows
    edges; ``None`` means every type present after reification.
    """

    include_event_properties: bool = True
    include_domains: bool = True
    strict_linking: bool = True
    reify_disorders: bool = True
    df_entity_types: frozenset[str] | None = None


@dataclass
class BuildReport:
    node_counts: dict[str, int] = field(default_factory=dict)
    edge_counts: dict[str, int] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    unlinked_activities: list[str] = field(default_factory=list)
    unlinked_icd_codes: list[str] = field(default_factory=list)

    def warn(self, step: str, message: str) -> None:
        self.warnings.append(f"{step}: {message}")

    def finalize_counts(self, graph: PropertyGraph) -> None:
        self.node_counts = graph.label_counts()
        self.edge_counts = graph.edge_type_counts()

    def to_json_dict(self) -> dict:
        return {
            "node_counts": self.node_counts,
            "edge_counts": self.edge_counts,
            "warnings": list(self.warnings),
            "unlinked_activities": list(self.unlinked_activities),
            "unlinked_icd_codes": list(self.unlinked_icd_codes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2, sort_keys=True)


# ---------------------------------------------------------------------------
# lookups


def _entity_node(graph: PropertyGraph, entity_type: str, entity_id: str) -> NodeId | None:
    ids = graph.match_nodes(vocab.ENTITY, {"entity_type": entity_type, "entity_id": entity_id})
    return ids[0] if ids else None


def _class_node(graph: PropertyGraph, activity: str) -> NodeId | None:
    ids = graph.match_nodes(vocab.CLASS, {"activity": activity})
    return ids[0] if ids else None


def _concept_node(graph: PropertyGraph, concept_id: str) -> NodeId | None:
    ids = graph.match_nodes(vocab.SNOMED_CONCEPT, {"concept_id": concept_id})
    return ids[0] if ids else None


def _icd_node(graph: PropertyGraph, icd_code: str) -> NodeId | None:
    ids = graph.match_nodes(vocab.ICD_CODE, {"icd_code": icd_code})
    return ids[0] if ids else None


def admissions_in_order(graph: PropertyGraph, patient_id: str) -> list[str]:
    """A patient's admission ids ordered by earliest correlated event.

    The inputs carry no admission timestamps, so admission order is derived
    from the events; ties break on admission id.
    """
    patient = _entity_node(graph, vocab.PATIENT, patient_id)
    if patient is None:
        return []
    earliest: dict[str, datetime] = {}
    for _, event in graph.adjacent(patient, vocab.CORR, "in"):
        ts = graph.node(event).properties["timestamp"]
        for _, entity in graph.adjacent(event, vocab.CORR, "out"):
            props = graph.node(entity).properties
            if props.get("entity_type") == vocab.ADMISSION:
                admission_id = str(props["entity_id"])
                if admission_id not in earliest or ts < earliest[admission_id]:
                    earliest[admission_id] = ts
    return [aid for aid, _ in sorted(earliest.items(), key=lambda item: (item[1], item[0]))]


# ---------------------------------------------------------------------------
# steps 1-3


def build_events_and_entities(
    graph: PropertyGraph,
    events: Sequence[EventRecord],
    attributes: Sequence[EntityAttributeRecord] = (),
    config: BuildConfig = BuildConfig(),
    report: BuildReport | None = None,
) -> BuildReport:
    """Create the event layer: Event nodes, patient and admission entities,
    event-to-entity CORR edges, and attribute-value nodes."""
    report = report if report is not None else BuildReport()
    if graph.match_nodes(vocab.EVENT) or graph.match_nodes(vocab.ENTITY):
        raise ConstructError("graph already contains event or entity nodes")

    for record in events:
        properties: dict = {
            "event_id": record.event_id,
            "timestamp": record.timestamp,
            "activity": record.activity,
        }
        if config.include_event_properties:
            properties.update(record.extra)
        graph.add_node([vocab.EVENT], properties)

    entity_ids: dict[tuple[str, str], NodeId] = {}

    def ensure_entity(entity_type: str, entity_id: str) -> NodeId:
        key = (entity_type, entity_id)
        if key not in entity_ids:
            entity_ids[key] = graph.add_node(
                [vocab.ENTITY], {"entity_type": entity_type, "entity_id": entity_id}
            )
        return entity_ids[key]

    event_nodes = graph.match_nodes(vocab.EVENT)
    for node_id, record in zip(event_nodes, events):
        graph.add_edge(vocab.CORR, node_id, ensure_entity(vocab.PATIENT, record.patient_id))
        graph.add_edge(vocab.CORR, node_id, ensure_entity(vocab.ADMISSION, record.admission_id))

    for record in attributes:
        entity = entity_ids.get((record.entity_type, record.entity_id))
        if entity is None:
            err = AttributeForUnknownEntity(record.entity_type, record.entity_id)
            if config.strict_linking:
                raise err
            report.warn("step 3", str(err))
            continue
        value_node = graph.add_node(
            [vocab.ATTRIBUTE_VALUE],
            {
                "entity_type": record.entity_type,
                "entity_id": record.entity_id,
                "attribute": record.attribute,
                "value": record.value,
            },
        )
        graph.add_edge(vocab.HAS_ATTRIBUTE, entity, value_node)
    return report


# ---------------------------------------------------------------------------
# step 4


def build_activity_classes(
    graph: PropertyGraph,
    events: Sequence[EventRecord],
    report: BuildReport | None = None,
) -> BuildReport:
    """One Class node per distinct activity label; OBSERVED edge per event."""
    report = report if report is not None else BuildReport()
    class_nodes: dict[str, NodeId] = {}
    for record in events:
        if record.activity not in class_nodes:
            class_nodes[record.activity] = graph.add_node(
                [vocab.CLASS], {"activity": record.activity, "display_label": record.activity}
            )
    event_nodes = graph.match_nodes(vocab.EVENT)
    for node_id, record in zip(event_nodes, events):
        graph.add_edge(vocab.OBSERVED, node_id, class_nodes[record.activity])
    return report


# ---------------------------------------------------------------------------
# step 5


def build_domains(
    graph: PropertyGraph,
    activity_domain_map: MappingTable,
    report: BuildReport | None = None,
) -> BuildReport:
    """Domain nodes for mapped activities plus class-to-domain edges.

    Mapping rows whose activity never occurs in the log are ignored with a
    warning; activities without a domain are warned about but remain valid.
    """
    report = report if report is not None else BuildReport()
    if activity_domain_map.kind != MappingKind.ACTIVITY_TO_DOMAIN:
        raise ValueError(f"expected an activity_domain mapping, got {activity_domain_map.kind.value}")
    domain_nodes: dict[str, NodeId] = {}
    mapped: set[str] = set()
    for activity, domain in activity_domain_map.rows:
        class_node = _class_node(graph, activity)
        if class_node is None:
            report.warn("step 5", f"domain mapping for activity {activity!r} ignored: activity not in log")
            continue
        if domain not in domain_nodes:
            domain_nodes[domain] = graph.add_node([vocab.DOMAIN], {"name": domain})
        graph.add_edge(vocab.HAS_DOMAIN, class_node, domain_nodes[domain])
        mapped.add(activity)
    for node_id in graph.match_nodes(vocab.CLASS):
        activity = str(graph.node(node_id).properties["activity"])
        if activity not in mapped:
            report.warn("step 5", f"activity {activity!r} has no domain mapping")
    return report


# ---------------------------------------------------------------------------
# steps 6-8


def build_terminology_graph(
    graph: PropertyGraph,
    icd_codes: Sequence[IcdCodeRecord],
    concepts: Sequence[SnomedConceptRecord],
    relationships: Sequence[SnomedRelationshipRecord],
    report: BuildReport | None = None,
) -> BuildReport:
    """ICD code nodes, SNOMED concept nodes, and SCT_REL edges.

    Inactive relationship rows are excluded; inactive concepts are kept as
    nodes with ``active`` false.
    """
    report = report if report is not None else BuildReport()
    for record in icd_codes:
        graph.add_node([vocab.ICD_CODE], {"icd_code": record.icd_code, "title": record.title})
    concept_nodes: dict[str, NodeId] = {}
    for record in concepts:
        concept_nodes[record.concept_id] = graph.add_node(
            [vocab.SNOMED_CONCEPT],
            {"concept_id": record.concept_id, "fsn": record.fsn, "active": record.active},
        )
    skipped = 0
    for record in relationships:
        if not record.active:
            skipped += 1
            continue
        graph.add_edge(
            vocab.SCT_REL,
            concept_nodes[record.source_id],
            concept_nodes[record.destination_id],
            {"type_id": record.type_id},
        )
    if skipped:
        report.warn("step 8", f"{skipped} inactive relationship row(s) excluded")
    return report


# ---------------------------------------------------------------------------
# steps 9-12


def _by_kind(maps: Iterable[MappingTable] | Mapping[MappingKind, MappingTable]) -> dict[MappingKind, MappingTable]:
    if isinstance(maps, Mapping):
        return dict(maps)
    out: dict[MappingKind, MappingTable] = {}
    for table in maps:
        if table.kind in out:
            raise ValueError(f"duplicate mapping table of kind {table.kind.value}")
        out[table.kind] = table
    return out


def link_terminology(
    graph: PropertyGraph,
    diagnoses: Sequence[DiagnosisRecord],
    maps: Iterable[MappingTable] | Mapping[MappingKind, MappingTable],
    config: BuildConfig = BuildConfig(),
    report: BuildReport | None = None,
) -> BuildReport:
    """Wire the layers together: diagnoses to ICD codes, ICD codes to SNOMED,
    activity classes to SNOMED, and domains to SNOMED.

    A class mapped to a concept takes the concept's fully specified name as
    its display label.  In strict mode a diagnosed code that is missing from
    the ICD table, or that has no SNOMED mapping, aborts the build; in
    lenient mode both become warnings and the code is reported unlinked.
    """
    report = report if report is not None else BuildReport()
    tables = _by_kind(maps)
    strict = config.strict_linking

    # step 9: admission -> ICD code
    diagnosed_codes: list[str] = []
    for record in diagnoses:
        admission = _entity_node(graph, vocab.ADMISSION, record.admission_id)
        if admission is None:
            err = DiagnosisForUnknownAdmission(record.patient_id, record.admission_id)
            if strict:
                raise err
            report.warn("step 9", str(err))
            continue
        icd = _icd_node(graph, record.icd_code)
        if icd is None:
            err = DiagnosisCodeNotInIcdTable(record.icd_code)
            if strict:
                raise err
            report.warn("step 9", str(err))
            continue
        graph.add_edge(
            vocab.DIAGNOSED_AS,
            admission,
            icd,
            {"seq_num": record.seq_num, "patient_id": record.patient_id},
        )
        if record.icd_code not in diagnosed_codes:
            diagnosed_codes.append(record.icd_code)

    # step 10: ICD code -> SNOMED concept
    icd_snomed = tables.get(MappingKind.ICD_TO_SNOMED)
    mapped_codes: set[str] = set()
    for code, concept_id in icd_snomed.rows if icd_snomed else ():
        icd = _icd_node(graph, code)
        concept = _concept_node(graph, concept_id)
        if icd is None or concept is None:
            report.warn("step 10", f"mapping row ({code!r}, {concept_id!r}) ignored: unknown endpoint")
            continue
        graph.add_edge(vocab.MAPS_TO, icd, concept)
        mapped_codes.add(code)
    for code in diagnosed_codes:
        if code not in mapped_codes:
            err = IcdCodeUnmappedToSnomed(code)
            if strict:
                raise err
            report.warn("step 10", str(err))
            if code not in report.unlinked_icd_codes:
                report.unlinked_icd_codes.append(code)
    report.unlinked_icd_codes.sort()

    # step 11: activity class -> SNOMED concept
    activity_snomed = tables.get(MappingKind.ACTIVITY_TO_SNOMED)
    relabeled: set[NodeId] = set()
    for activity, concept_id in activity_snomed.rows if activity_snomed else ():
        class_node = _class_node(graph, activity)
        concept = _concept_node(graph, concept_id)
        if class_node is None or concept is None:
            report.warn("step 11", f"mapping row ({activity!r}, {concept_id!r}) ignored: unknown endpoint")
            continue
        graph.add_edge(vocab.CODED_AS, class_node, concept)
        if class_node not in relabeled:
            graph.set_property(class_node, "display_label", str(graph.node(concept).properties["fsn"]))
            relabeled.add(class_node)
    unlinked = [
        str(graph.node(node_id).properties["activity"])
        for node_id in graph.match_nodes(vocab.CLASS)
        if not graph.adjacent(node_id, vocab.CODED_AS, "out")
    ]
    report.unlinked_activities = sorted(set(report.unlinked_activities) | set(unlinked))

    # step 12: domain -> SNOMED concept
    domain_snomed = tables.get(MappingKind.DOMAIN_TO_SNOMED)
    for domain, concept_id in domain_snomed.rows if domain_snomed else ():
        candidates = [
            node_id
            for node_id in graph.match_nodes(vocab.DOMAIN)
            if graph.node(node_id).properties.get("name") == domain
        ]
        concept = _concept_node(graph, concept_id)
        if not candidates or concept is None:
            report.warn("step 12", f"mapping row ({domain!r}, {concept_id!r}) ignored: unknown endpoint")
            continue
        graph.add_edge(vocab.CODED_AS, candidates[0], concept)
    return report


# ---------------------------------------------------------------------------
# step 13


def reify_disorders(
    graph: PropertyGraph,
    diagnoses: Sequence[DiagnosisRecord],
    treats_map: MappingTable,
    config: BuildConfig = BuildConfig(),
    report: BuildReport | None = None,
) -> BuildReport:
    """Promote diagnosed disorders to entities and correlate events to them.

    A Disorder entity is keyed by (patient, SNOMED concept): the same concept
    diagnosed for two patients yields two entities.  An event correlates to a
    disorder entity exactly when the treats mapping maps the event's activity
    to the disorder's concept and both belong to the same patient; diagnosis
    timing plays no role here (admission-level status is a discovery concern).
    """
    report = report if report is not None else BuildReport()
    if treats_map.kind != MappingKind.ACTIVITY_TREATS:
        raise ValueError(f"expected an activity_treats mapping, got {treats_map.kind.value}")
    graph.meta["disorders_reified"] = True

    diagnoses_by_admission: dict[tuple[str, str], list[DiagnosisRecord]] = {}
    for record in diagnoses:
        diagnoses_by_admission.setdefault((record.patient_id, record.admission_id), []).append(record)
    for rows in diagnoses_by_admission.values():
        rows.sort(key=lambda r: (r.seq_num, r.icd_code))

    # TREATS edges record the mapping inside the graph; surviving pairs drive
    # the event-to-disorder correlation below.
    treats: dict[str, list[str]] = {}
    for activity, concept_id in treats_map.rows:
        class_node = _class_node(graph, activity)
        concept = _concept_node(graph, concept_id)
        if concept is None:
            err = TreatsTargetNotAConcept(activity, concept_id)
            if config.strict_linking:
                raise err
            report.warn("step 13", str(err))
            continue
        if class_node is None:
            report.warn("step 13", f"treats mapping for activity {activity!r} ignored: activity not in log")
            continue
        graph.add_edge(vocab.TREATS, class_node, concept)
        treats.setdefault(activity, []).append(concept_id)

    disorders_by_patient: dict[str, list[tuple[str, NodeId]]] = {}
    for patient_node in graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.PATIENT}):
        patient_id = str(graph.node(patient_node).properties["entity_id"])
        seen: set[str] = set()
        created: list[tuple[str, NodeId]] = []
        for admission_id in admissions_in_order(graph, patient_id):
            for record in diagnoses_by_admission.get((patient_id, admission_id), []):
                icd = _icd_node(graph, record.icd_code)
                if icd is None:
                    continue
                for _, concept in graph.adjacent(icd, vocab.MAPS_TO, "out"):
                    concept_id = str(graph.node(concept).properties["concept_id"])
                    if concept_id in seen:
                        continue
                    seen.add(concept_id)
                    node_id = graph.add_node(
                        [vocab.ENTITY],
                        {
                            "entity_type": vocab.DISORDER,
                            "entity_id": f"{patient_id}:{concept_id}",
                            "patient_id": patient_id,
                            "concept_id": concept_id,
                            "first_admission_id": admission_id,
                        },
                    )
                    created.append((concept_id, node_id))
        disorders_by_patient[patient_id] = created

    for event_node in graph.match_nodes(vocab.EVENT):
        activity = str(graph.node(event_node).properties["activity"])
        treated_concepts = treats.get(activity)
        if not treated_concepts:
            continue
        for _, entity in graph.adjacent(event_node, vocab.CORR, "out"):
            props = graph.node(entity).properties
            if props.get("entity_type") == vocab.PATIENT:
                patient_id = str(props["entity_id"])
                for concept_id, disorder_node in disorders_by_patient.get(patient_id, []):
                    if concept_id in treated_concepts:
                        graph.add_edge(vocab.CORR, event_node, disorder_node)
                break
    return report


# ---------------------------------------------------------------------------
# step 14


def compute_df(
    graph: PropertyGraph,
    config: BuildConfig = BuildConfig(),
    report: BuildReport | None = None,
) -> BuildReport:
    """Directly-follows edges: for each entity, chain its correlated events in
    (timestamp, event id) order.

    An entity with k events yields exactly k-1 DF edges forming a simple
    path.  Events with equal timestamps order by event id lexicographically.
    """
    report = report if report is not None else BuildReport()
    if graph.edge_type_counts().get(vocab.DF):
        raise DfAlreadyComputed()

    present: list[str] = []
    for node_id in graph.match_nodes(vocab.ENTITY):
        entity_type = str(graph.node(node_id).properties["entity_type"])
        if entity_type not in present:
            present.append(entity_type)
    if config.df_entity_types is None:
        selected = set(present)
    else:
        unknown = sorted(set(config.df_entity_types) - set(present))
        if unknown:
            raise ConstructError(f"df_entity_types not present in graph: {unknown}")
        selected = set(config.df_entity_types)

    for entity_node in graph.match_nodes(vocab.ENTITY):
        props = graph.node(entity_node).properties
        entity_type = str(props["entity_type"])
        if entity_type not in selected:
            continue
        entity_id = str(props["entity_id"])
        events = []
        for _, event in graph.adjacent(entity_node, vocab.CORR, "in"):
            event_props = graph.node(event).properties
            events.append((event_props["timestamp"], str(event_props["event_id"]), event))
        events.sort(key=lambda item: (item[0], item[1]))
        for (_, _, a), (_, _, b) in zip(events, events[1:]):
            graph.add_edge(vocab.DF, a, b, {"entity_type": entity_type, "entity_id": entity_id})

    graph.meta["df_entity_types"] = sorted(selected)
    return report


# ---------------------------------------------------------------------------
# the whole pipeline


def build_all(dataset: Dataset, config: BuildConfig = BuildConfig()) -> tuple[PropertyGraph, BuildReport]:
    """Run steps 1 through 14 in order and return the frozen graph.

    The first hard error aborts the build with the failing step attached to
    the raised exception.
    """
    graph = PropertyGraph()
    report = BuildReport()

    steps: list[tuple[str, object]] = [
        (
            "step 1-3 (events and entities)",
            lambda: build_events_and_entities(graph, dataset.events, dataset.attributes, config, report),
        ),
        ("step 4 (activity classes)", lambda: build_activity_classes(graph, dataset.events, report)),
    ]
    if config.include_domains:
        steps.append(
            (
                "step 5 (activity domains)",
                lambda: build_domains(graph, dataset.mapping(MappingKind.ACTIVITY_TO_DOMAIN), report),
            )
        )
    steps.append(
        (
            "step 6-8 (terminology graph)",
            lambda: build_terminology_graph(
                graph, dataset.icd_codes, dataset.concepts, dataset.relationships, report
            ),
        )
    )
    steps.append(
        (
            "step 9-12 (terminology linking)",
            lambda: link_terminology(graph, dataset.diagnoses, dataset.mappings, config, report),
        )
    )
    if config.reify_disorders:
        steps.append(
            (
                "step 13 (disorder reification)",
                lambda: reify_disorders(
                    graph, dataset.diagnoses, dataset.mapping(MappingKind.ACTIVITY_TREATS), config, report
                ),
            )
        )
    steps.append(("step 14 (directly-follows)", lambda: compute_df(graph, config, report)))

    for label, step in steps:
        try:
            step()
        except CekgError as err:
            err.step = label
            raise

    report.finalize_counts(graph)
    graph.freeze()
    return graph, report
