"""An embedded labeled property graph store.

Nodes carry an ordered set of labels and a property map; edges are directed,
typed, and also carry properties.  Ids are dense integers handed out
sequentially from 0, which makes two identical build sessions produce
identical graphs and keeps golden-file tests exact.

The store is append-only: construction adds nodes and edges, then calls
:meth:`PropertyGraph.freeze`.  A frozen graph rejects mutation and can be
shared across threads for read-only discovery and export.  There is no
per-node deletion; starting over means building a new graph.

Property values are restricted to text, integers, decimals, booleans, and
timestamps.  Timestamps are normalized to UTC at insert time.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import datetime
from typing import Iterable, Iterator, Literal, Mapping, Union

from .errors import EmptyLabelSet, FrozenGraph, UnknownEdge, UnknownNode
from .timestamps import to_utc

NodeId = int
EdgeId = int
PropertyValue = Union[str, int, float, bool, datetime]
Direction = Literal["out", "in"]

#: Property keys kept in a value index for fast equality lookups.
INDEXED_KEYS = ("event_id", "entity_id", "concept_id", "icd_code", "activity")


@dataclass(frozen=True)
class Node:
    id: NodeId
    labels: tuple[str, ...]
    properties: dict[str, PropertyValue]

    def label(self) -> str:
        """The primary (first) label."""
        return self.labels[0]


@dataclass(frozen=True)
class Edge:
    id: EdgeId
    edge_type: str
    source: NodeId
    target: NodeId
    properties: dict[str, PropertyValue]


def _normalize_value(key: str, value: PropertyValue) -> PropertyValue:
    if isinstance(value, bool):
        return value
    if isinstance(value, datetime):
        return to_utc(value)
    if isinstance(value, (str, int, float)):
        return value
    raise TypeError(f"unsupported property value for {key!r}: {type(value).__name__}")


def _normalize_properties(properties: Mapping[str, PropertyValue] | None) -> dict[str, PropertyValue]:
    if not properties:
        return {}
    return {key: _normalize_value(key, value) for key, value in properties.items()}


@dataclass
class _Adjacency:
    out: dict[str, list[EdgeId]] = field(default_factory=dict)
    inc: dict[str, list[EdgeId]] = field(default_factory=dict)


class PropertyGraph:
    """In-memory labeled property graph with label and property indexes."""

    def __init__(self) -> None:
        self._nodes: list[Node] = []
        self._edges: list[Edge] = []
        self._label_index: dict[str, list[NodeId]] = {}
        self._prop_index: dict[str, dict[PropertyValue, list[NodeId]]] = {k: {} for k in INDEXED_KEYS}
        self._adjacency: list[_Adjacency] = []
        self._edge_type_counts: dict[str, int] = {}
        self._frozen = False
        #: Free-form build annotations (e.g. which entity types got DF edges).
        self.meta: dict[str, object] = {}

    # -- mutation ----------------------------------------------------------

    def add_node(self, labels: Iterable[str], properties: Mapping[str, PropertyValue] | None = None) -> NodeId:
        """Add a node and return its id (the next sequential integer)."""
        self._check_mutable()
        ordered: list[str] = []
        for label in labels:
            if label not in ordered:
                ordered.append(label)
        if not ordered:
            raise EmptyLabelSet()
        node_id = len(self._nodes)
        node = Node(node_id, tuple(ordered), _normalize_properties(properties))
        self._nodes.append(node)
        self._adjacency.append(_Adjacency())
        for label in node.labels:
            self._label_index.setdefault(label, []).append(node_id)
        for key in INDEXED_KEYS:
            if key in node.properties:
                self._prop_index[key].setdefault(node.properties[key], []).append(node_id)
        return node_id

    def add_edge(
        self,
        edge_type: str,
        source: NodeId,
        target: NodeId,
        properties: Mapping[str, PropertyValue] | None = None,
    ) -> EdgeId:
        """Add a directed edge between two existing nodes."""
        self._check_mutable()
        for endpoint in (source, target):
            if not 0 <= endpoint < len(self._nodes):
                raise UnknownNode(endpoint)
        edge_id = len(self._edges)
        edge = Edge(edge_id, edge_type, source, target, _normalize_properties(properties))
        self._edges.append(edge)
        self._adjacency[source].out.setdefault(edge_type, []).append(edge_id)
        self._adjacency[target].inc.setdefault(edge_type, []).append(edge_id)
        self._edge_type_counts[edge_type] = self._edge_type_counts.get(edge_type, 0) + 1
        return edge_id

    def set_property(self, node_id: NodeId, key: str, value: PropertyValue) -> None:
        """Update one property on an existing node (construction phase only)."""
        self._check_mutable()
        node = self.node(node_id)
        value = _normalize_value(key, value)
        if key in INDEXED_KEYS:
            old = node.properties.get(key)
            if old is not None and old != value:
                bucket = self._prop_index[key].get(old, [])
                if node_id in bucket:
                    bucket.remove(node_id)
                    if not bucket:
                        del self._prop_index[key][old]
            if old != value:
                bucket = self._prop_index[key].setdefault(value, [])
                bucket.append(node_id)
                bucket.sort()
        node.properties[key] = value

    def freeze(self) -> None:
        """Mark the graph immutable; further mutation raises."""
        self._frozen = True

    @property
    def frozen(self) -> bool:
        return self._frozen

    def _check_mutable(self) -> None:
        if self._frozen:
            raise FrozenGraph()

    # -- access ------------------------------------------------------------

    @property
    def node_count(self) -> int:
        return len(self._nodes)

    @property
    def edge_count(self) -> int:
        return len(self._edges)

    def node(self, node_id: NodeId) -> Node:
        if not 0 <= node_id < len(self._nodes):
            raise UnknownNode(node_id)
        return self._nodes[node_id]

    def edge(self, edge_id: EdgeId) -> Edge:
        if not 0 <= edge_id < len(self._edges):
            raise UnknownEdge(edge_id)
        return self._edges[edge_id]

    def nodes(self) -> Iterator[Node]:
        return iter(self._nodes)

    def edges(self) -> Iterator[Edge]:
        return iter(self._edges)

    def match_nodes(self, label: str, predicate: Mapping[str, PropertyValue] | None = None) -> list[NodeId]:
        """Ids of nodes carrying ``label`` and matching all equality constraints.

        Results are in ascending id order.  An empty result is valid.
        """
        candidates: list[NodeId] | None = None
        if predicate:
            # Narrow through the value index when an indexed key is constrained.
            for key in INDEXED_KEYS:
                if key in predicate:
                    bucket = self._prop_index[key].get(_normalize_value(key, predicate[key]), [])
                    if candidates is None or len(bucket) < len(candidates):
                        candidates = bucket
        if candidates is None:
            candidates = self._label_index.get(label, [])
        out: list[NodeId] = []
        for node_id in candidates:
            node = self._nodes[node_id]
            if label not in node.labels:
                continue
            if predicate and any(node.properties.get(k) != _normalize_value(k, v) for k, v in predicate.items()):
                continue
            out.append(node_id)
        return out

    def adjacent(self, node_id: NodeId, edge_type: str, direction: Direction) -> list[tuple[EdgeId, NodeId]]:
        """Incident ``edge_type`` edges in ``direction`` with their far endpoints.

        Pairs come back in ascending edge-id order.
        """
        self.node(node_id)
        if direction == "out":
            edge_ids = self._adjacency[node_id].out.get(edge_type, [])
            return [(eid, self._edges[eid].target) for eid in edge_ids]
        if direction == "in":
            edge_ids = self._adjacency[node_id].inc.get(edge_type, [])
            return [(eid, self._edges[eid].source) for eid in edge_ids]
        raise ValueError(f"direction must be 'out' or 'in', got {direction!r}")

    def label_counts(self) -> dict[str, int]:
        return {label: len(ids) for label, ids in sorted(self._label_index.items())}

    def edge_type_counts(self) -> dict[str, int]:
        return dict(sorted(self._edge_type_counts.items()))

    # -- audit -------------------------------------------------------------

    def audit(self) -> list[str]:
        """Cross-check indexes against a full scan; returns found problems."""
        problems: list[str] = []
        scan: dict[str, list[NodeId]] = {}
        for node in self._nodes:
            for label in node.labels:
                scan.setdefault(label, []).append(node.id)
        if scan != self._label_index:
            problems.append("label index out of sync with node collection")
        for key in INDEXED_KEYS:
            expected: dict[PropertyValue, list[NodeId]] = {}
            for node in self._nodes:
                if key in node.properties:
                    expected.setdefault(node.properties[key], []).append(node.id)
            actual = {value: sorted(ids) for value, ids in self._prop_index[key].items() if ids}
            if {v: ids for v, ids in expected.items()} != actual:
                problems.append(f"property index for {key!r} out of sync")
        for edge in self._edges:
            for endpoint in (edge.source, edge.target):
                if not 0 <= endpoint < len(self._nodes):
                    problems.append(f"edge {edge.id} has dangling endpoint {endpoint}")
        counted: dict[str, int] = {}
        for edge in self._edges:
            counted[edge.edge_type] = counted.get(edge.edge_type, 0) + 1
        if counted != self._edge_type_counts:
            problems.append("edge type counts out of sync")
        return problems
