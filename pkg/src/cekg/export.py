"""Serialize graphs to DOT, GraphML, and openCypher.

All three emitters accept either a full :class:`PropertyGraph` or a
:class:`PathwayGraph`; pathway graphs are converted to property graphs for
GraphML and Cypher so one writer covers both.  Output is deterministic: node
lines sort by a stable natural key, edge lines by endpoints plus properties,
and repeated runs over the same graph are byte-identical.

GraphML can be read back with :func:`load_graphml`.  Values round-trip
through declared attribute types; a property named ``timestamp`` is parsed
back into a timezone-aware datetime by convention, since GraphML itself has
no date type.
"""

from __future__ import annotations

import json
import xml.etree.ElementTree as ET
from datetime import datetime

from . import vocab
from .discover import PathwayGraph
from .graph import Edge, Node, PropertyGraph, PropertyValue
from .styles import StyleMap
from .timestamps import format_timestamp, parse_timestamp

GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"

#: statements every generated Cypher script starts with: a guarded wipe of
#: the target database plus one uniqueness constraint per indexed identifier
PREAMBLE_STATEMENT_COUNT = 4

_PREAMBLE = (
    "MATCH (n) DETACH DELETE n;",
    "CREATE CONSTRAINT cekg_event_id IF NOT EXISTS FOR (n:Event) REQUIRE n.event_id IS UNIQUE;",
    "CREATE CONSTRAINT cekg_concept_id IF NOT EXISTS FOR (n:SNOMEDConcept) REQUIRE n.concept_id IS UNIQUE;",
    "CREATE CONSTRAINT cekg_icd_code IF NOT EXISTS FOR (n:ICDCode) REQUIRE n.icd_code IS UNIQUE;",
)


# ---------------------------------------------------------------------------
# pathway conversion


def to_property_graph(pathway: PathwayGraph) -> PropertyGraph:
    """Lower a pathway graph into the generic property-graph form.

    Node kind becomes a secondary label, style entries become ``style_``
    properties, and edge kinds become upper-case edge types.
    """
    graph = PropertyGraph()
    ids: dict[str, int] = {}
    for node in pathway.nodes:
        properties: dict[str, PropertyValue] = {
            "key": node.key,
            "label": node.label,
            "kind": node.kind,
        }
        for style_key, style_value in node.style:
            properties[f"style_{style_key}"] = style_value
        ids[node.key] = graph.add_node(["PathwayNode", node.kind], properties)
    for edge in pathway.edges:
        properties = {"weight": edge.weight}
        if edge.entity_type is not None:
            properties["entity_type"] = edge.entity_type
        if edge.concept_id is not None:
            properties["concept_id"] = edge.concept_id
        if edge.label is not None:
            properties["label"] = edge.label
        graph.add_edge(edge.kind.upper(), ids[edge.source], ids[edge.target], properties)
    graph.meta["variant"] = pathway.variant
    graph.freeze()
    return graph


def _as_property_graph(target: PropertyGraph | PathwayGraph) -> PropertyGraph:
    if isinstance(target, PropertyGraph):
        return target
    if isinstance(target, PathwayGraph):
        return to_property_graph(target)
    raise TypeError(f"cannot export {type(target).__name__}")


def export_key(node: Node) -> str:
    """Stable string identity for a node in serialized output."""
    natural = vocab.NATURAL_KEYS.get(node.label())
    if natural and all(key in node.properties for key in natural):
        return vocab.node_key(node)
    if "key" in node.properties:
        return str(node.properties["key"])
    return f"node:{node.id}"


def _sorted_nodes(graph: PropertyGraph) -> list[tuple[str, Node]]:
    pairs = [(export_key(node), node) for node in graph.nodes()]
    pairs.sort(key=lambda pair: pair[0])
    return pairs


def _canonical_props(properties: dict) -> str:
    return json.dumps(properties, sort_keys=True, default=str)


def _sorted_edges(graph: PropertyGraph) -> list[tuple[str, str, Edge]]:
    key_of = {node.id: key for key, node in _sorted_nodes(graph)}
    triples = [(key_of[edge.source], key_of[edge.target], edge) for edge in graph.edges()]
    triples.sort(key=lambda t: (t[0], t[1], t[2].edge_type, _canonical_props(t[2].properties)))
    return triples


# ---------------------------------------------------------------------------
# DOT


def _dot_quote(text: str) -> str:
    escaped = text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n")
    return f'"{escaped}"'


_NODE_SHAPES = {
    vocab.EVENT: "box",
    vocab.ENTITY: "circle",
    vocab.CLASS: "box",
    vocab.DOMAIN: "hexagon",
    vocab.ICD_CODE: "ellipse",
    vocab.SNOMED_CONCEPT: "ellipse",
    vocab.ATTRIBUTE_VALUE: "note",
}


def _property_node_label(node: Node) -> str:
    props = node.properties
    label = node.label()
    if label == vocab.EVENT:
        return f"{props['activity']}\n{props['event_id']}"
    if label == vocab.ENTITY:
        return f"{props['entity_type']} {props['entity_id']}"
    if label == vocab.CLASS:
        return str(props["display_label"])
    if label == vocab.DOMAIN:
        return str(props["name"])
    if label == vocab.ICD_CODE:
        return str(props["icd_code"])
    if label == vocab.SNOMED_CONCEPT:
        return f"{props['fsn']}\n{props['concept_id']}"
    if label == vocab.ATTRIBUTE_VALUE:
        return f"{props['attribute']} = {props['value']}"
    return export_key(node)


def _emit_dot_property_graph(graph: PropertyGraph, style: StyleMap) -> str:
    lines = ["// cekg graph", "digraph cekg {", "  rankdir=LR;"]
    for key, node in _sorted_nodes(graph):
        label = node.label()
        attrs = [f"label={_dot_quote(_property_node_label(node))}"]
        attrs.append(f"shape={_NODE_SHAPES.get(label, 'box')}")
        if label == vocab.ENTITY:
            attrs.append("style=filled")
            attrs.append(f"fillcolor={_dot_quote(style.entity_color(str(node.properties['entity_type'])))}")
        elif label == vocab.DOMAIN:
            attrs.append("style=filled")
            attrs.append(f"fillcolor={_dot_quote(style.domain_color(str(node.properties['name'])))}")
        lines.append(f"  {_dot_quote(key)} [{', '.join(attrs)}];")
    for source, target, edge in _sorted_edges(graph):
        lines.append(
            f"  {_dot_quote(source)} -> {_dot_quote(target)} [label={_dot_quote(edge.edge_type)}];"
        )
    lines.append("}")
    return "\n".join(lines) + "\n"


def _emit_dot_pathway(pathway: PathwayGraph) -> str:
    lines = [f"// cekg pathway {pathway.variant}", "digraph cekg {", "  rankdir=LR;"]
    for node in pathway.nodes:
        style = node.style_dict()
        attrs = [f"label={_dot_quote(node.label)}"]
        attrs.append("shape=circle" if node.kind == "entity" else "shape=box")
        if "color" in style:
            attrs.append("style=filled")
            attrs.append(f"fillcolor={_dot_quote(style['color'])}")
        lines.append(f"  {_dot_quote(node.key)} [{', '.join(attrs)}];")
    for edge in pathway.edges:
        attrs = []
        if edge.kind == "df":
            if edge.concept_id is not None:
                attrs.append(f"label={_dot_quote(f'{edge.concept_id}: {edge.weight}')}")
            elif edge.weight > 1:
                attrs.append(f"label={_dot_quote(str(edge.weight))}")
        elif edge.kind == "corr":
            attrs.append("style=dashed")
            attrs.append("color=gray")
        elif edge.kind == "status":
            attrs.append("style=dotted")
            if edge.label is not None:
                attrs.append(f"label={_dot_quote(edge.label)}")
        suffix = f" [{', '.join(attrs)}]" if attrs else ""
        lines.append(f"  {_dot_quote(edge.source)} -> {_dot_quote(edge.target)}{suffix};")
    lines.append("}")
    return "\n".join(lines) + "\n"


def emit_dot(target: PropertyGraph | PathwayGraph, style: StyleMap | None = None) -> str:
    """Render a graph as Graphviz DOT.

    An empty graph renders as a bare ``digraph cekg { }`` under the header
    comment.
    """
    if isinstance(target, PathwayGraph):
        if not target.nodes:
            return f"// cekg pathway {target.variant}\ndigraph cekg {{ }}\n"
        return _emit_dot_pathway(target)
    graph = _as_property_graph(target)
    if graph.node_count == 0:
        return "// cekg graph\ndigraph cekg { }\n"
    if style is None:
        names = [str(graph.node(n).properties["name"]) for n in graph.match_nodes(vocab.DOMAIN)]
        style = StyleMap.for_domains(names)
    return _emit_dot_property_graph(graph, style)


# ---------------------------------------------------------------------------
# GraphML


def _attr_type(values: list[PropertyValue]) -> str:
    kinds = {type(v) for v in values}
    if kinds == {bool}:
        return "boolean"
    if kinds == {int}:
        return "int"
    if kinds <= {int, float}:
        return "double"
    return "string"


def _attr_text(value: PropertyValue, attr_type: str) -> str:
    if attr_type == "boolean":
        return "true" if value else "false"
    if isinstance(value, datetime):
        return format_timestamp(value)
    if attr_type == "double":
        return repr(float(value))
    return str(value)


def emit_graphml(target: PropertyGraph | PathwayGraph) -> str:
    """Serialize to GraphML with typed attribute keys.

    Node labels travel in a ``labels`` key (semicolon-joined), the edge type
    in ``edge_type``.  Datetimes serialize as ISO-8601 strings.
    """
    graph = _as_property_graph(target)
    nodes = _sorted_nodes(graph)
    edges = _sorted_edges(graph)

    node_values: dict[str, list[PropertyValue]] = {}
    for _, node in nodes:
        for name, value in node.properties.items():
            node_values.setdefault(name, []).append(value)
    edge_values: dict[str, list[PropertyValue]] = {}
    for _, _, edge in edges:
        for name, value in edge.properties.items():
            edge_values.setdefault(name, []).append(value)

    root = ET.Element("graphml", {"xmlns": GRAPHML_NS})
    key_ids: dict[tuple[str, str], str] = {}
    key_types: dict[tuple[str, str], str] = {}

    def declare(domain: str, name: str, attr_type: str) -> None:
        key_id = f"d{len(key_ids)}"
        key_ids[(domain, name)] = key_id
        key_types[(domain, name)] = attr_type
        ET.SubElement(
            root,
            "key",
            {"id": key_id, "for": domain, "attr.name": name, "attr.type": attr_type},
        )

    declare("node", "labels", "string")
    for name in sorted(node_values):
        declare("node", name, _attr_type(node_values[name]))
    declare("edge", "edge_type", "string")
    for name in sorted(edge_values):
        declare("edge", name, _attr_type(edge_values[name]))

    graph_el = ET.SubElement(root, "graph", {"id": "cekg", "edgedefault": "directed"})
    for key, node in nodes:
        node_el = ET.SubElement(graph_el, "node", {"id": key})
        labels_el = ET.SubElement(node_el, "data", {"key": key_ids[("node", "labels")]})
        labels_el.text = ";".join(node.labels)
        for name in sorted(node.properties):
            data_el = ET.SubElement(node_el, "data", {"key": key_ids[("node", name)]})
            data_el.text = _attr_text(node.properties[name], key_types[("node", name)])
    for index, (source, target_key, edge) in enumerate(edges):
        edge_el = ET.SubElement(
            graph_el, "edge", {"id": f"e{index}", "source": source, "target": target_key}
        )
        type_el = ET.SubElement(edge_el, "data", {"key": key_ids[("edge", "edge_type")]})
        type_el.text = edge.edge_type
        for name in sorted(edge.properties):
            data_el = ET.SubElement(edge_el, "data", {"key": key_ids[("edge", name)]})
            data_el.text = _attr_text(edge.properties[name], key_types[("edge", name)])

    ET.indent(root, space="  ")
    return '<?xml version="1.0" encoding="UTF-8"?>\n' + ET.tostring(root, encoding="unicode") + "\n"


def _parse_value(text: str, attr_type: str, name: str) -> PropertyValue:
    if attr_type == "boolean":
        return text == "true"
    if attr_type == "int":
        return int(text)
    if attr_type == "double":
        return float(text)
    if name == "timestamp":
        return parse_timestamp(text)
    return text


def load_graphml(text: str) -> PropertyGraph:
    """Parse GraphML produced by :func:`emit_graphml` back into a graph."""
    root = ET.fromstring(text)
    keys: dict[str, tuple[str, str]] = {}
    for key_el in root.findall("{*}key"):
        keys[key_el.attrib["id"]] = (key_el.attrib["attr.name"], key_el.attrib["attr.type"])

    graph = PropertyGraph()
    ids: dict[str, int] = {}
    graph_el = root.find("{*}graph")
    if graph_el is None:
        return graph
    for node_el in graph_el.findall("{*}node"):
        labels: list[str] = []
        properties: dict[str, PropertyValue] = {}
        for data_el in node_el.findall("{*}data"):
            name, attr_type = keys[data_el.attrib["key"]]
            text_value = data_el.text or ""
            if name == "labels":
                labels = [part for part in text_value.split(";") if part]
            else:
                properties[name] = _parse_value(text_value, attr_type, name)
        ids[node_el.attrib["id"]] = graph.add_node(labels, properties)
    for edge_el in graph_el.findall("{*}edge"):
        edge_type = ""
        properties = {}
        for data_el in edge_el.findall("{*}data"):
            name, attr_type = keys[data_el.attrib["key"]]
            text_value = data_el.text or ""
            if name == "edge_type":
                edge_type = text_value
            else:
                properties[name] = _parse_value(text_value, attr_type, name)
        graph.add_edge(edge_type, ids[edge_el.attrib["source"]], ids[edge_el.attrib["target"]], properties)
    return graph


# ---------------------------------------------------------------------------
# openCypher


def cypher_literal(value: PropertyValue) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, datetime):
        return f'datetime("{format_timestamp(value)}")'
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    text = str(value)
    escaped = (
        text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n").replace("\r", "\\r")
    )
    return f'"{escaped}"'


def _cypher_props(properties: dict, names: tuple[str, ...] | None = None) -> str:
    selected = names if names is not None else tuple(sorted(properties))
    parts = [f"{name}: {cypher_literal(properties[name])}" for name in selected]
    return "{" + ", ".join(parts) + "}"


def _match_key_names(node: Node) -> tuple[str, ...]:
    natural = vocab.NATURAL_KEYS.get(node.label())
    if natural and all(name in node.properties for name in natural):
        return natural
    if "key" in node.properties:
        return ("key",)
    return tuple(sorted(node.properties))


def emit_query_script(target: PropertyGraph | PathwayGraph) -> str:
    """Generate an executable openCypher import script.

    One statement per line, each terminated by a semicolon.  The script
    starts with a fixed preamble (wipe plus uniqueness constraints), then one
    CREATE per node and one MATCH..CREATE per edge, matching endpoints by
    their natural keys.
    """
    graph = _as_property_graph(target)
    lines = ["// cekg import script", "// statements: one per line"]
    lines.extend(_PREAMBLE)
    for _, node in _sorted_nodes(graph):
        label_expr = "".join(f":{label}" for label in node.labels)
        if node.properties:
            lines.append(f"CREATE ({label_expr} {_cypher_props(node.properties)});")
        else:
            lines.append(f"CREATE ({label_expr});")
    node_by_id = {node.id: node for node in graph.nodes()}
    for _, _, edge in _sorted_edges(graph):
        source = node_by_id[edge.source]
        target_node = node_by_id[edge.target]
        match_a = f"MATCH (a:{source.label()} {_cypher_props(source.properties, _match_key_names(source))})"
        match_b = f"MATCH (b:{target_node.label()} {_cypher_props(target_node.properties, _match_key_names(target_node))})"
        if edge.properties:
            create = f"CREATE (a)-[:{edge.edge_type} {_cypher_props(edge.properties)}]->(b);"
        else:
            create = f"CREATE (a)-[:{edge.edge_type}]->(b);"
        lines.append(f"{match_a} {match_b} {create}")
    return "\n".join(lines) + "\n"


def statement_count(script: str) -> int:
    """Number of executable statements in a generated script."""
    return sum(1 for line in script.splitlines() if line.strip().endswith(";"))
