"""The closed node-label and edge-type vocabulary of a finished graph.

Also defines the stable string keys used to address nodes in exports.  Keys
are derived from natural identifying properties rather than integer ids, so
exported files stay byte-stable even if id allocation changes.
"""

from __future__ import annotations

from .graph import Node

# node labels
EVENT = "Event"
ENTITY = "Entity"
CLASS = "Class"
DOMAIN = "Domain"
ICD_CODE = "ICDCode"
SNOMED_CONCEPT = "SNOMEDConcept"
ATTRIBUTE_VALUE = "AttributeValue"

NODE_LABELS = (EVENT, ENTITY, CLASS, DOMAIN, ICD_CODE, SNOMED_CONCEPT, ATTRIBUTE_VALUE)

# edge types
CORR = "CORR"
DF = "DF"
OBSERVED = "OBSERVED"
HAS_ATTRIBUTE = "HAS_ATTRIBUTE"
HAS_DOMAIN = "HAS_DOMAIN"
DIAGNOSED_AS = "DIAGNOSED_AS"
MAPS_TO = "MAPS_TO"
CODED_AS = "CODED_AS"
SCT_REL = "SCT_REL"
TREATS = "TREATS"

EDGE_TYPES = (CORR, DF, OBSERVED, HAS_ATTRIBUTE, HAS_DOMAIN, DIAGNOSED_AS, MAPS_TO, CODED_AS, SCT_REL, TREATS)

# entity types
PATIENT = "PATIENT"
ADMISSION = "ADMISSION"
DISORDER = "Disorder"

#: SNOMED-CT relationship type that denotes the IS-A hierarchy.
IS_A_TYPE_ID = "116680003"

#: Properties that identify a node of a given label, used both for export
#: keys and for lookup clauses in emitted query scripts.
NATURAL_KEYS: dict[str, tuple[str, ...]] = {
    EVENT: ("event_id",),
    ENTITY: ("entity_type", "entity_id"),
    CLASS: ("activity",),
    DOMAIN: ("name",),
    ICD_CODE: ("icd_code",),
    SNOMED_CONCEPT: ("concept_id",),
    ATTRIBUTE_VALUE: ("entity_type", "entity_id", "attribute"),
}

_KEY_PREFIXES = {
    EVENT: "evt",
    ENTITY: "ent",
    CLASS: "cls",
    DOMAIN: "dom",
    ICD_CODE: "icd",
    SNOMED_CONCEPT: "sct",
    ATTRIBUTE_VALUE: "att",
}


def node_key(node: Node) -> str:
    """Stable export key for a node, e.g. ``evt:E1`` or ``ent:PATIENT:P1``.

    Nodes outside the closed vocabulary fall back to ``node:<id>``.
    """
    label = node.label()
    prefix = _KEY_PREFIXES.get(label)
    if prefix is None:
        return f"node:{node.id}"
    parts = [str(node.properties.get(prop, "")) for prop in NATURAL_KEYS[label]]
    return ":".join([prefix, *parts])
