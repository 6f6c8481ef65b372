"""Exception hierarchy for the cekg package.

All errors raised by the library derive from :class:`CekgError`.  Errors that
originate from a specific input row carry ``row`` (1-based over data rows,
excluding the header) and, where meaningful, ``column``, so callers can point
users at the offending line.  When an error surfaces through the top-level
build driver, the construction step it occurred in is attached as ``step`` and
rendered in the message.
"""

from __future__ import annotations


class CekgError(Exception):
    """Base class for all cekg errors."""

    def __init__(self, message: str):
        super().__init__(message)
        self.message = message
        self.step: str | None = None

    def __str__(self) -> str:
        if self.step:
            return f"{self.step}: {self.message}"
        return self.message


# ---------------------------------------------------------------------------
# graph store


class GraphError(CekgError):
    pass


class EmptyLabelSet(GraphError):
    def __init__(self):
        super().__init__("a node must carry at least one label")


class UnknownNode(GraphError):
    def __init__(self, node_id: int):
        super().__init__(f"unknown node id {node_id}")
        self.node_id = node_id


class UnknownEdge(GraphError):
    def __init__(self, edge_id: int):
        super().__init__(f"unknown edge id {edge_id}")
        self.edge_id = edge_id


class FrozenGraph(GraphError):
    def __init__(self):
        super().__init__("graph is frozen; construction is finished")


# ---------------------------------------------------------------------------
# ingest


class IngestError(CekgError):
    """Input table failed validation.

    ``row`` is the 1-based data row (header excluded); ``column`` the column
    name, when one applies.
    """

    def __init__(self, message: str, row: int | None = None, column: str | None = None):
        where = []
        if row is not None:
            where.append(f"row {row}")
        if column is not None:
            where.append(f"column {column!r}")
        if where:
            message = f"{message} ({', '.join(where)})"
        super().__init__(message)
        self.row = row
        self.column = column


class MissingFile(IngestError):
    def __init__(self, path: str):
        super().__init__(f"input file not found: {path}")
        self.path = path


class MissingColumn(IngestError):
    def __init__(self, name: str, path: str | None = None):
        suffix = f" in {path}" if path else ""
        super().__init__(f"required column {name!r} missing{suffix}")
        self.name = name


class EmptyField(IngestError):
    def __init__(self, row: int, column: str):
        super().__init__("field must be non-empty", row=row, column=column)


class BadTimestamp(IngestError):
    def __init__(self, row: int, value: str):
        super().__init__(f"not an ISO-8601 timestamp: {value!r}", row=row, column="timestamp")
        self.value = value


class DuplicateEventId(IngestError):
    def __init__(self, event_id: str, rows: list[int]):
        super().__init__(f"event_id {event_id!r} duplicated on rows {rows}")
        self.event_id = event_id
        self.rows = rows


class DuplicateDiagnosis(IngestError):
    def __init__(self, key: tuple[str, str, str], rows: list[int]):
        super().__init__(f"diagnosis {key} duplicated on rows {rows}")
        self.key = key
        self.rows = rows


class BadSeqNum(IngestError):
    def __init__(self, row: int, value: str):
        super().__init__(f"seq_num must be a positive integer, got {value!r}", row=row, column="seq_num")
        self.value = value


class DuplicateIcdCode(IngestError):
    def __init__(self, code: str, rows: list[int]):
        super().__init__(f"icd_code {code!r} duplicated on rows {rows}")
        self.code = code
        self.rows = rows


class BadIcdCode(IngestError):
    def __init__(self, row: int, value: str):
        super().__init__(f"malformed ICD-10 code {value!r}", row=row, column="icd_code")
        self.value = value


class DuplicateConceptId(IngestError):
    def __init__(self, concept_id: str, rows: list[int]):
        super().__init__(f"concept_id {concept_id!r} duplicated on rows {rows}")
        self.concept_id = concept_id
        self.rows = rows


class BadSctid(IngestError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"not a SNOMED-CT id (decimal digits expected): {value!r}", row=row, column=column)
        self.value = value


class BadBoolean(IngestError):
    def __init__(self, row: int, column: str, value: str):
        super().__init__(f"not a boolean: {value!r}", row=row, column=column)
        self.value = value


class SelfReferentialRelationship(IngestError):
    def __init__(self, row: int, concept_id: str):
        super().__init__(f"relationship relates concept {concept_id!r} to itself", row=row)
        self.concept_id = concept_id


class UnknownConceptInRelationship(IngestError):
    def __init__(self, row: int, column: str, concept_id: str):
        super().__init__(f"relationship references unknown concept {concept_id!r}", row=row, column=column)
        self.concept_id = concept_id


class DuplicatePair(IngestError):
    def __init__(self, kind: str, pair: tuple[str, str], rows: list[int]):
        super().__init__(f"{kind} mapping pair {pair} duplicated on rows {rows}")
        self.kind = kind
        self.pair = pair
        self.rows = rows


class NonFunctionalMapping(IngestError):
    def __init__(self, activity: str, domains: list[str]):
        super().__init__(f"activity {activity!r} mapped to multiple domains {domains}")
        self.activity = activity
        self.domains = domains


class DuplicateAttribute(IngestError):
    def __init__(self, key: tuple[str, str, str], rows: list[int]):
        super().__init__(f"entity attribute {key} duplicated on rows {rows}")
        self.key = key
        self.rows = rows


# ---------------------------------------------------------------------------
# construction


class ConstructError(CekgError):
    pass


class AttributeForUnknownEntity(ConstructError):
    def __init__(self, entity_type: str, entity_id: str):
        super().__init__(f"attribute row for unknown entity ({entity_type}, {entity_id})")
        self.entity_type = entity_type
        self.entity_id = entity_id


class DiagnosisForUnknownAdmission(ConstructError):
    def __init__(self, patient_id: str, admission_id: str):
        super().__init__(f"diagnosis for admission {admission_id!r} absent from the event log (patient {patient_id!r})")
        self.patient_id = patient_id
        self.admission_id = admission_id


class DiagnosisCodeNotInIcdTable(ConstructError):
    def __init__(self, icd_code: str):
        super().__init__(f"diagnosed code {icd_code!r} not present in the ICD table")
        self.icd_code = icd_code


class IcdCodeUnmappedToSnomed(ConstructError):
    def __init__(self, icd_code: str):
        super().__init__(f"diagnosed code {icd_code!r} has no SNOMED-CT mapping")
        self.icd_code = icd_code


class TreatsTargetNotAConcept(ConstructError):
    def __init__(self, activity: str, concept_id: str):
        super().__init__(f"treatment mapping for {activity!r} targets unknown concept {concept_id!r}")
        self.activity = activity
        self.concept_id = concept_id


class DfAlreadyComputed(ConstructError):
    def __init__(self):
        super().__init__("directly-follows edges already exist in this graph")


# ---------------------------------------------------------------------------
# discovery


class DiscoverError(CekgError):
    pass


class UnknownPatient(DiscoverError):
    def __init__(self, patient_id: str):
        super().__init__(f"unknown patient {patient_id!r}")
        self.patient_id = patient_id


class UnknownClass(DiscoverError):
    def __init__(self, name: str):
        super().__init__(f"no activity class named {name!r}")
        self.name = name


class EntityTypeWithoutDf(DiscoverError):
    def __init__(self, entity_type: str):
        super().__init__(f"directly-follows edges were not computed for entity type {entity_type!r}")
        self.entity_type = entity_type


class PerDisorderRequiresDisorderType(DiscoverError):
    def __init__(self, entity_type: str):
        super().__init__(f"per-disorder aggregation requires entity type 'Disorder', got {entity_type!r}")
        self.entity_type = entity_type


class DisordersNotReified(DiscoverError):
    def __init__(self):
        super().__init__("disorder entities were not reified in this graph")


# ---------------------------------------------------------------------------
# manifest / CLI


class ManifestError(CekgError):
    """The manifest file or a requested output is malformed (a usage error)."""
