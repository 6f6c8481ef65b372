"""Care-pathway discovery over a frozen clinical event knowledge graph.

Six pathway graph variants are supported:

  C1  one event-level pathway per patient
  C2  the event-level pathways of a cohort merged into one graph
  C3  class-level pathway for a cohort, DF edges aggregated into weights
  C4  class-level pathway split per disorder (requires disorder DF edges)
  C5  class-level pathway for the cohort sharing an exact disorder set
  C6  admission-to-disorder status graph (newly discovered / treated)

All variants return :class:`PathwayGraph`, a small render-ready structure
with stable node keys and deterministic ordering.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

from . import vocab
from .construct import admissions_in_order
from .errors import (
    DisordersNotReified,
    EntityTypeWithoutDf,
    PerDisorderRequiresDisorderType,
    UnknownClass,
    UnknownPatient,
)
from .graph import NodeId, PropertyGraph
from .styles import StyleMap

VARIANTS = ("C1", "C2", "C3", "C4", "C5", "C6")


@dataclass(frozen=True)
class PathwayNode:
    key: str
    label: str
    kind: str  # event | class | entity
    style: tuple[tuple[str, str], ...] = ()

    def style_dict(self) -> dict[str, str]:
        return dict(self.style)


@dataclass(frozen=True)
class PathwayEdge:
    source: str
    target: str
    kind: str  # df | corr | status
    weight: int = 1
    entity_type: str | None = None
    concept_id: str | None = None
    label: str | None = None


@dataclass(frozen=True)
class PathwayGraph:
    variant: str
    nodes: tuple[PathwayNode, ...]
    edges: tuple[PathwayEdge, ...]

    def node_keys(self) -> list[str]:
        return [node.key for node in self.nodes]

    def edge_weight(self, source: str, target: str, concept_id: str | None = None) -> int:
        return sum(
            edge.weight
            for edge in self.edges
            if edge.source == source and edge.target == target and edge.concept_id == concept_id
        )

    def to_json_dict(self) -> dict:
        nodes = [
            {"key": n.key, "label": n.label, "kind": n.kind, "style": n.style_dict()}
            for n in self.nodes
        ]
        edges = []
        for e in self.edges:
            entry: dict = {"source": e.source, "target": e.target, "kind": e.kind, "weight": e.weight}
            if e.entity_type is not None:
                entry["entity_type"] = e.entity_type
            if e.concept_id is not None:
                entry["concept_id"] = e.concept_id
            if e.label is not None:
                entry["label"] = e.label
            edges.append(entry)
        return {"variant": self.variant, "nodes": nodes, "edges": edges}


def _sorted_graph(variant: str, nodes: dict[str, PathwayNode], edges: list[PathwayEdge]) -> PathwayGraph:
    ordered_nodes = tuple(nodes[key] for key in sorted(nodes))
    ordered_edges = tuple(
        sorted(
            edges,
            key=lambda e: (e.source, e.target, e.kind, e.entity_type or "", e.concept_id or ""),
        )
    )
    for edge in ordered_edges:
        if edge.source not in nodes or edge.target not in nodes:
            raise ValueError(f"edge endpoint missing from pathway graph: {edge.source} -> {edge.target}")
    return PathwayGraph(variant, ordered_nodes, ordered_edges)


# ---------------------------------------------------------------------------
# cohort selection


class SelectorMode(str, Enum):
    SINGLE = "single-patient"
    PATIENT_SET = "patient-set"
    SAME_MULTIMORBIDITY = "same-multimorbidity"


@dataclass(frozen=True)
class CohortSelector:
    """Names the patients a discovery run covers.

    ``None`` in the public entry points means every patient in the graph.
    """

    mode: SelectorMode
    patient_ids: tuple[str, ...] = ()
    concept_ids: frozenset[str] = frozenset()

    @classmethod
    def patient(cls, patient_id: str) -> "CohortSelector":
        return cls(SelectorMode.SINGLE, (patient_id,))

    @classmethod
    def patients(cls, patient_ids) -> "CohortSelector":
        return cls(SelectorMode.PATIENT_SET, tuple(patient_ids))

    @classmethod
    def multimorbidity(cls, concept_ids) -> "CohortSelector":
        return cls(SelectorMode.SAME_MULTIMORBIDITY, (), frozenset(concept_ids))


def _all_patient_ids(graph: PropertyGraph) -> list[str]:
    out = []
    for node_id in graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.PATIENT}):
        out.append(str(graph.node(node_id).properties["entity_id"]))
    return out


def _patient_entity(graph: PropertyGraph, patient_id: str) -> NodeId:
    ids = graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.PATIENT, "entity_id": patient_id})
    if not ids:
        raise UnknownPatient(patient_id)
    return ids[0]


def _disorder_concepts_by_patient(graph: PropertyGraph) -> dict[str, set[str]]:
    out: dict[str, set[str]] = {}
    for node_id in graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.DISORDER}):
        props = graph.node(node_id).properties
        out.setdefault(str(props["patient_id"]), set()).add(str(props["concept_id"]))
    return out


def select_patients(graph: PropertyGraph, selector: CohortSelector | None) -> list[str]:
    """Resolve a selector to a sorted list of patient ids."""
    if selector is None:
        return sorted(_all_patient_ids(graph))
    if selector.mode is SelectorMode.SAME_MULTIMORBIDITY:
        wanted = set(selector.concept_ids)
        by_patient = _disorder_concepts_by_patient(graph)
        return sorted(
            pid for pid in _all_patient_ids(graph) if by_patient.get(pid, set()) == wanted
        )
    seen = []
    for patient_id in selector.patient_ids:
        _patient_entity(graph, patient_id)
        if patient_id not in seen:
            seen.append(patient_id)
    return sorted(seen)


# ---------------------------------------------------------------------------
# shared graph readers


def _domain_style_map(graph: PropertyGraph) -> StyleMap:
    names = [str(graph.node(n).properties["name"]) for n in graph.match_nodes(vocab.DOMAIN)]
    return StyleMap.for_domains(names)


def _class_info(graph: PropertyGraph, styles: StyleMap) -> dict[NodeId, tuple[str, str, str | None]]:
    """Class node id -> (key, display label, domain name or None)."""
    out: dict[NodeId, tuple[str, str, str | None]] = {}
    for node_id in graph.match_nodes(vocab.CLASS):
        node = graph.node(node_id)
        domain = None
        for _, domain_node in graph.adjacent(node_id, vocab.HAS_DOMAIN, "out"):
            domain = str(graph.node(domain_node).properties["name"])
            break
        out[node_id] = (vocab.node_key(node), str(node.properties["display_label"]), domain)
    return out


def _events_of_patient(graph: PropertyGraph, patient_id: str) -> list[NodeId]:
    patient = _patient_entity(graph, patient_id)
    return [event for _, event in graph.adjacent(patient, vocab.CORR, "in")]


def _class_of_event(graph: PropertyGraph, event: NodeId) -> NodeId:
    observed = graph.adjacent(event, vocab.OBSERVED, "out")
    if not observed:
        raise ValueError(f"event node {event} has no activity class")
    return observed[0][1]


def _entity_pathway_node(graph: PropertyGraph, entity: NodeId, styles: StyleMap) -> PathwayNode:
    node = graph.node(entity)
    props = node.properties
    entity_type = str(props["entity_type"])
    if entity_type == vocab.DISORDER:
        concept_id = str(props["concept_id"])
        fsn = None
        concepts = graph.match_nodes(vocab.SNOMED_CONCEPT, {"concept_id": concept_id})
        if concepts:
            fsn = str(graph.node(concepts[0]).properties["fsn"])
        label = f"{fsn or concept_id} ({props['patient_id']})"
    else:
        label = f"{entity_type} {props['entity_id']}"
    return PathwayNode(
        key=vocab.node_key(node),
        label=label,
        kind="entity",
        style=(("color", styles.entity_color(entity_type)),),
    )


# ---------------------------------------------------------------------------
# C1 / C2: event-level pathways


def instance_pathways(
    graph: PropertyGraph,
    selector: CohortSelector | None = None,
    combined: bool = False,
) -> list[PathwayGraph]:
    """Event-level pathways: one graph per patient, or one merged graph.

    Each graph holds the patient's events, the correlated patient, admission
    and disorder entities, CORR edges, and every DF edge between included
    events.  The merged form (C2) shares nothing across patients except node
    keys that genuinely coincide, so disjoint cohorts stay disjoint subgraphs.
    """
    styles = _domain_style_map(graph)
    class_info = _class_info(graph, styles)
    patients = select_patients(graph, selector)

    per_patient: list[tuple[dict[str, PathwayNode], list[PathwayEdge]]] = []
    for patient_id in patients:
        nodes: dict[str, PathwayNode] = {}
        edges: list[PathwayEdge] = []
        patient = _patient_entity(graph, patient_id)
        patient_node = _entity_pathway_node(graph, patient, styles)
        nodes[patient_node.key] = patient_node

        events = _events_of_patient(graph, patient_id)
        event_keys: dict[NodeId, str] = {}
        for event in events:
            node = graph.node(event)
            key = vocab.node_key(node)
            event_keys[event] = key
            _, display, domain = class_info[_class_of_event(graph, event)]
            style: tuple[tuple[str, str], ...] = ()
            if domain is not None:
                style = (("group", domain), ("color", styles.domain_color(domain)))
            nodes[key] = PathwayNode(
                key=key,
                label=f"{display} ({node.properties['event_id']})",
                kind="event",
                style=style,
            )

        for event in events:
            for _, entity in graph.adjacent(event, vocab.CORR, "out"):
                entity_node = _entity_pathway_node(graph, entity, styles)
                nodes.setdefault(entity_node.key, entity_node)
                edges.append(
                    PathwayEdge(
                        source=event_keys[event],
                        target=entity_node.key,
                        kind="corr",
                        entity_type=str(graph.node(entity).properties["entity_type"]),
                    )
                )

        # disorders without any treating event still belong to the picture
        for disorder in graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.DISORDER}):
            if str(graph.node(disorder).properties["patient_id"]) != patient_id:
                continue
            entity_node = _entity_pathway_node(graph, disorder, styles)
            nodes.setdefault(entity_node.key, entity_node)

        event_set = set(events)
        for event in events:
            for edge_id, target in graph.adjacent(event, vocab.DF, "out"):
                if target not in event_set:
                    continue
                props = graph.edge(edge_id).properties
                edges.append(
                    PathwayEdge(
                        source=event_keys[event],
                        target=event_keys[target],
                        kind="df",
                        entity_type=str(props["entity_type"]),
                    )
                )
        per_patient.append((nodes, edges))

    if not combined:
        return [_sorted_graph("C1", nodes, edges) for nodes, edges in per_patient]

    merged_nodes: dict[str, PathwayNode] = {}
    merged_edges: list[PathwayEdge] = []
    seen_edges: set[tuple] = set()
    for nodes, edges in per_patient:
        for key, node in nodes.items():
            merged_nodes.setdefault(key, node)
        for edge in edges:
            fingerprint = (edge.source, edge.target, edge.kind, edge.entity_type, edge.concept_id)
            if fingerprint not in seen_edges:
                seen_edges.add(fingerprint)
                merged_edges.append(edge)
    return [_sorted_graph("C2", merged_nodes, merged_edges)]


# ---------------------------------------------------------------------------
# C3 / C4 / C5: class-level pathways


def aggregate_pathway(
    graph: PropertyGraph,
    selector: CohortSelector | None = None,
    entity_type: str = vocab.ADMISSION,
    per_disorder: bool = False,
) -> PathwayGraph:
    """Class-level pathway: DF edges of one entity type lifted onto activity
    classes and counted.

    With ``per_disorder`` the disorder DF edges stay split by SNOMED concept,
    one weighted edge per (source class, target class, concept).  The variant
    tag follows the arguments: per-disorder graphs are C4, same-multimorbidity
    cohorts C5, everything else C3.
    """
    if per_disorder and entity_type != vocab.DISORDER:
        raise PerDisorderRequiresDisorderType(entity_type)
    df_types = graph.meta.get("df_entity_types") or []
    if entity_type not in df_types:
        raise EntityTypeWithoutDf(entity_type)

    styles = _domain_style_map(graph)
    class_info = _class_info(graph, styles)
    patients = select_patients(graph, selector)

    scope: set[NodeId] = set()
    for patient_id in patients:
        scope.update(_events_of_patient(graph, patient_id))

    event_class: dict[NodeId, NodeId] = {}
    nodes: dict[str, PathwayNode] = {}
    for event in sorted(scope):
        class_node = _class_of_event(graph, event)
        event_class[event] = class_node
        key, display, domain = class_info[class_node]
        if key not in nodes:
            style: tuple[tuple[str, str], ...] = ()
            if domain is not None:
                style = (("group", domain), ("color", styles.domain_color(domain)))
            nodes[key] = PathwayNode(key=key, label=display, kind="class", style=style)

    disorder_concept: dict[str, str] = {}
    if per_disorder:
        for node_id in graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.DISORDER}):
            props = graph.node(node_id).properties
            disorder_concept[str(props["entity_id"])] = str(props["concept_id"])

    weights: dict[tuple[str, str, str | None], int] = {}
    for edge in graph.edges():
        if edge.edge_type != vocab.DF:
            continue
        if str(edge.properties["entity_type"]) != entity_type:
            continue
        if edge.source not in scope or edge.target not in scope:
            continue
        source_key = class_info[event_class[edge.source]][0]
        target_key = class_info[event_class[edge.target]][0]
        concept = disorder_concept[str(edge.properties["entity_id"])] if per_disorder else None
        weights[(source_key, target_key, concept)] = weights.get((source_key, target_key, concept), 0) + 1

    edges = [
        PathwayEdge(
            source=source,
            target=target,
            kind="df",
            weight=weight,
            entity_type=entity_type,
            concept_id=concept,
        )
        for (source, target, concept), weight in weights.items()
    ]

    if per_disorder:
        variant = "C4"
    elif selector is not None and selector.mode is SelectorMode.SAME_MULTIMORBIDITY:
        variant = "C5"
    else:
        variant = "C3"
    return _sorted_graph(variant, nodes, edges)


def df_count(
    graph: PropertyGraph,
    class_a: str,
    class_b: str,
    entity_type: str = vocab.ADMISSION,
    selector: CohortSelector | None = None,
) -> int:
    """How often class_b directly follows class_a within one entity.

    Classes resolve by raw activity label first, then by display label, so
    both the log's own terms and the SNOMED names work.
    """

    def resolve(label: str) -> str:
        by_activity = graph.match_nodes(vocab.CLASS, {"activity": label})
        if by_activity:
            return vocab.node_key(graph.node(by_activity[0]))
        for node_id in graph.match_nodes(vocab.CLASS):
            node = graph.node(node_id)
            if str(node.properties["display_label"]) == label:
                return vocab.node_key(node)
        raise UnknownClass(label)

    source = resolve(class_a)
    target = resolve(class_b)
    pathway = aggregate_pathway(graph, selector, entity_type)
    return pathway.edge_weight(source, target)


# ---------------------------------------------------------------------------
# C6: admission-level disorder status


@dataclass(frozen=True)
class StatusRow:
    patient_id: str
    admission_id: str
    admission_index: int
    concept_id: str
    newly_discovered: bool
    treated: bool


@dataclass(frozen=True)
class DisorderStatusReport:
    rows: tuple[StatusRow, ...]

    def to_json_dict(self) -> dict:
        return {
            "rows": [
                {
                    "patient_id": r.patient_id,
                    "admission_id": r.admission_id,
                    "admission_index": r.admission_index,
                    "concept_id": r.concept_id,
                    "newly_discovered": r.newly_discovered,
                    "treated": r.treated,
                }
                for r in self.rows
            ]
        }


def status_label(newly_discovered: bool, treated: bool) -> str:
    if newly_discovered:
        return "newly discovered & treated" if treated else "newly discovered & untreated"
    return "treated" if treated else "untreated"


def admission_disorder_status(graph: PropertyGraph) -> DisorderStatusReport:
    """Per admission, which disorders were on the table and what happened.

    A disorder counts for an admission once its concept appears in that
    admission's diagnosis list or any earlier one of the same patient.  It is
    newly discovered on the first such admission and treated when at least
    one event correlates to both the admission and the disorder entity.
    Admissions order by their earliest event; the diagnosis sequence number
    does not define admission order.
    """
    if not graph.meta.get("disorders_reified"):
        raise DisordersNotReified()

    rows: list[StatusRow] = []
    for patient_id in sorted(_all_patient_ids(graph)):
        admissions = admissions_in_order(graph, patient_id)

        admission_events: dict[str, set[NodeId]] = {}
        admission_concepts: dict[str, set[str]] = {}
        for admission_id in admissions:
            ids = graph.match_nodes(
                vocab.ENTITY, {"entity_type": vocab.ADMISSION, "entity_id": admission_id}
            )
            admission_node = ids[0]
            admission_events[admission_id] = {
                event for _, event in graph.adjacent(admission_node, vocab.CORR, "in")
            }
            concepts: set[str] = set()
            for edge_id, icd in graph.adjacent(admission_node, vocab.DIAGNOSED_AS, "out"):
                if str(graph.edge(edge_id).properties["patient_id"]) != patient_id:
                    continue
                for _, concept in graph.adjacent(icd, vocab.MAPS_TO, "out"):
                    concepts.add(str(graph.node(concept).properties["concept_id"]))
            admission_concepts[admission_id] = concepts

        disorder_events: dict[str, set[NodeId]] = {}
        for node_id in graph.match_nodes(vocab.ENTITY, {"entity_type": vocab.DISORDER}):
            props = graph.node(node_id).properties
            if str(props["patient_id"]) != patient_id:
                continue
            disorder_events[str(props["concept_id"])] = {
                event for _, event in graph.adjacent(node_id, vocab.CORR, "in")
            }

        first_seen: dict[str, int] = {}
        for index, admission_id in enumerate(admissions):
            for concept_id in sorted(admission_concepts[admission_id]):
                first_seen.setdefault(concept_id, index)
        for index, admission_id in enumerate(admissions):
            known = sorted(c for c, first in first_seen.items() if first <= index)
            for concept_id in known:
                treated = bool(
                    admission_events[admission_id] & disorder_events.get(concept_id, set())
                )
                rows.append(
                    StatusRow(
                        patient_id=patient_id,
                        admission_id=admission_id,
                        admission_index=index,
                        concept_id=concept_id,
                        newly_discovered=first_seen[concept_id] == index,
                        treated=treated,
                    )
                )
    rows.sort(key=lambda r: (r.patient_id, r.admission_index, r.concept_id))
    return DisorderStatusReport(tuple(rows))


def disorder_status_graph(graph: PropertyGraph) -> PathwayGraph:
    """C6: admissions and disorder entities joined by labeled status edges."""
    report = admission_disorder_status(graph)
    styles = _domain_style_map(graph)

    nodes: dict[str, PathwayNode] = {}
    edges: list[PathwayEdge] = []
    for row in report.rows:
        admission_ids = graph.match_nodes(
            vocab.ENTITY, {"entity_type": vocab.ADMISSION, "entity_id": row.admission_id}
        )
        admission = _entity_pathway_node(graph, admission_ids[0], styles)
        nodes.setdefault(admission.key, admission)

        disorder_ids = graph.match_nodes(
            vocab.ENTITY,
            {"entity_type": vocab.DISORDER, "entity_id": f"{row.patient_id}:{row.concept_id}"},
        )
        disorder = _entity_pathway_node(graph, disorder_ids[0], styles)
        nodes.setdefault(disorder.key, disorder)

        edges.append(
            PathwayEdge(
                source=admission.key,
                target=disorder.key,
                kind="status",
                concept_id=row.concept_id,
                label=status_label(row.newly_discovered, row.treated),
            )
        )
    return _sorted_graph("C6", nodes, edges)
