"""CSV ingestion: parse and validate the input tables into typed records.

All tables are comma-delimited UTF-8 CSV with a header row and RFC-4180
quoting.  Loading preserves file order and is idempotent.  Row numbers in
errors and warnings are 1-based over data rows (the header is row 0).

Each loader runs in strict mode by default: the first bad row raises.  With
``strict=False`` recoverable rows are skipped and a message appended to the
caller's ``warnings`` list; structural problems (missing file, missing
column) raise in either mode.
"""

from __future__ import annotations

import csv
import re
from dataclasses import dataclass, field
from datetime import datetime
from enum import Enum
from pathlib import Path
from typing import Iterable, Sequence

from . import errors
from .timestamps import format_timestamp, parse_timestamp

ICD_CODE_RE = re.compile(r"^[A-Za-z]\d{2}(\.\w{1,4})?$")
SCTID_RE = re.compile(r"^\d+$")

EVENT_COLUMNS = ("event_id", "timestamp", "activity", "patient_id", "admission_id")


# ---------------------------------------------------------------------------
# record types


@dataclass(frozen=True)
class EventRecord:
    event_id: str
    timestamp: datetime
    activity: str
    patient_id: str
    admission_id: str
    extra: dict[str, str] = field(default_factory=dict)


@dataclass(frozen=True)
class DiagnosisRecord:
    patient_id: str
    admission_id: str
    icd_code: str
    seq_num: int


@dataclass(frozen=True)
class IcdCodeRecord:
    icd_code: str
    title: str


@dataclass(frozen=True)
class SnomedConceptRecord:
    concept_id: str
    fsn: str
    active: bool


@dataclass(frozen=True)
class SnomedRelationshipRecord:
    source_id: str
    destination_id: str
    type_id: str
    active: bool


@dataclass(frozen=True)
class EntityAttributeRecord:
    entity_type: str
    entity_id: str
    attribute: str
    value: str


class MappingKind(str, Enum):
    ICD_TO_SNOMED = "icd_snomed"
    ACTIVITY_TO_SNOMED = "activity_snomed"
    ACTIVITY_TO_DOMAIN = "activity_domain"
    DOMAIN_TO_SNOMED = "domain_snomed"
    ACTIVITY_TREATS = "activity_treats"


@dataclass(frozen=True)
class MappingTable:
    """A constrained node mapping: (source, target) pairs of one kind.

    ``activity_domain`` is functional (one domain per activity); the other
    kinds may be many-to-many.
    """

    kind: MappingKind
    rows: tuple[tuple[str, str], ...]

    def targets(self, source: str) -> list[str]:
        return [t for s, t in self.rows if s == source]

    def as_dict(self) -> dict[str, list[str]]:
        out: dict[str, list[str]] = {}
        for s, t in self.rows:
            out.setdefault(s, []).append(t)
        return out


def empty_mapping(kind: MappingKind) -> MappingTable:
    return MappingTable(kind, ())


@dataclass
class Dataset:
    """All ingested tables for one build."""

    events: list[EventRecord]
    attributes: list[EntityAttributeRecord] = field(default_factory=list)
    diagnoses: list[DiagnosisRecord] = field(default_factory=list)
    icd_codes: list[IcdCodeRecord] = field(default_factory=list)
    concepts: list[SnomedConceptRecord] = field(default_factory=list)
    relationships: list[SnomedRelationshipRecord] = field(default_factory=list)
    mappings: dict[MappingKind, MappingTable] = field(default_factory=dict)

    def mapping(self, kind: MappingKind) -> MappingTable:
        return self.mappings.get(kind, empty_mapping(kind))


# ---------------------------------------------------------------------------
# shared reading machinery


def _read_rows(path: str | Path, required: Sequence[str]) -> tuple[list[str], list[dict[str, str]]]:
    """Read a CSV file, check required headers, return (header, rows)."""
    path = Path(path)
    if not path.is_file():
        raise errors.MissingFile(str(path))
    with open(path, newline="", encoding="utf-8") as handle:
        reader = csv.reader(handle)
        try:
            header = next(reader)
        except StopIteration:
            raise errors.MissingColumn(required[0], str(path)) from None
        header = [h.strip() for h in header]
        for column in required:
            if column not in header:
                raise errors.MissingColumn(column, str(path))
        rows = []
        for raw in reader:
            if not raw:
                continue
            padded = raw + [""] * (len(header) - len(raw))
            rows.append({name: padded[i].strip() for i, name in enumerate(header)})
    return header, rows


class _RowSink:
    """Dispatches row-level problems: raise when strict, warn-and-skip otherwise."""

    def __init__(self, strict: bool, warnings: list[str] | None):
        self.strict = strict
        self.warnings = warnings if warnings is not None else []

    def reject(self, error: errors.IngestError) -> None:
        if self.strict:
            raise error
        self.warnings.append(f"skipped: {error}")


def _require(row: dict[str, str], row_num: int, columns: Iterable[str]) -> None:
    for column in columns:
        if not row.get(column):
            raise errors.EmptyField(row_num, column)


# ---------------------------------------------------------------------------
# loaders


def load_event_table(
    path: str | Path,
    *,
    columns: dict[str, str] | None = None,
    include_extra: bool = True,
    strict: bool = True,
    warnings: list[str] | None = None,
) -> list[EventRecord]:
    """Load the event log.

    ``columns`` maps the logical column names (``event_id``, ``timestamp``,
    ``activity``, ``patient_id``, ``admission_id``) to the actual header names
    in the file.  Columns beyond the required five become ``extra`` properties
    when ``include_extra`` is on and are dropped otherwise.
    """
    rename = {logical: (columns or {}).get(logical, logical) for logical in EVENT_COLUMNS}
    header, rows = _read_rows(path, [rename[c] for c in EVENT_COLUMNS])
    extra_columns = [h for h in header if h not in rename.values()]
    sink = _RowSink(strict, warnings)

    records: list[EventRecord] = []
    seen: dict[str, int] = {}
    for row_num, row in enumerate(rows, start=1):
        try:
            _require(row, row_num, [rename[c] for c in EVENT_COLUMNS])
            event_id = row[rename["event_id"]]
            if event_id in seen:
                raise errors.DuplicateEventId(event_id, [seen[event_id], row_num])
            raw_ts = row[rename["timestamp"]]
            try:
                timestamp = parse_timestamp(raw_ts)
            except ValueError:
                raise errors.BadTimestamp(row_num, raw_ts) from None
            extra = {c: row[c] for c in extra_columns if row.get(c)} if include_extra else {}
            records.append(
                EventRecord(
                    event_id=event_id,
                    timestamp=timestamp,
                    activity=row[rename["activity"]],
                    patient_id=row[rename["patient_id"]],
                    admission_id=row[rename["admission_id"]],
                    extra=extra,
                )
            )
            seen[event_id] = row_num
        except errors.IngestError as err:
            sink.reject(err)
    return records


def load_diagnosis_table(
    path: str | Path,
    *,
    strict: bool = True,
    warnings: list[str] | None = None,
) -> list[DiagnosisRecord]:
    _, rows = _read_rows(path, ("patient_id", "admission_id", "icd_code", "seq_num"))
    sink = _RowSink(strict, warnings)
    records: list[DiagnosisRecord] = []
    seen: dict[tuple[str, str, str], int] = {}
    for row_num, row in enumerate(rows, start=1):
        try:
            _require(row, row_num, ("patient_id", "admission_id", "icd_code", "seq_num"))
            key = (row["patient_id"], row["admission_id"], row["icd_code"])
            if key in seen:
                raise errors.DuplicateDiagnosis(key, [seen[key], row_num])
            try:
                seq_num = int(row["seq_num"])
            except ValueError:
                raise errors.BadSeqNum(row_num, row["seq_num"]) from None
            if seq_num < 1:
                raise errors.BadSeqNum(row_num, row["seq_num"])
            records.append(DiagnosisRecord(key[0], key[1], key[2], seq_num))
            seen[key] = row_num
        except errors.IngestError as err:
            sink.reject(err)
    return records


def load_entity_attributes(
    path: str | Path,
    *,
    strict: bool = True,
    warnings: list[str] | None = None,
) -> list[EntityAttributeRecord]:
    _, rows = _read_rows(path, ("entity_type", "entity_id", "attribute", "value"))
    sink = _RowSink(strict, warnings)
    records: list[EntityAttributeRecord] = []
    seen: dict[tuple[str, str, str], int] = {}
    for row_num, row in enumerate(rows, start=1):
        try:
            _require(row, row_num, ("entity_type", "entity_id", "attribute"))
            key = (row["entity_type"], row["entity_id"], row["attribute"])
            if key in seen:
                raise errors.DuplicateAttribute(key, [seen[key], row_num])
            records.append(EntityAttributeRecord(key[0], key[1], key[2], row.get("value", "")))
            seen[key] = row_num
        except errors.IngestError as err:
            sink.reject(err)
    return records


def _parse_bool(row_num: int, column: str, value: str) -> bool:
    lowered = value.lower()
    if lowered in ("true", "1", "yes"):
        return True
    if lowered in ("false", "0", "no"):
        return False
    raise errors.BadBoolean(row_num, column, value)


def load_terminology(
    icd_path: str | Path,
    concepts_path: str | Path,
    relationships_path: str | Path,
    *,
    strict: bool = True,
    warnings: list[str] | None = None,
) -> tuple[list[IcdCodeRecord], list[SnomedConceptRecord], list[SnomedRelationshipRecord]]:
    """Load the ICD-10 table and a SNOMED-CT snapshot (concepts + relationships).

    Relationship endpoints are cross-validated against the concept table.
    Inactive rows are retained and flagged via their ``active`` field.
    """
    sink = _RowSink(strict, warnings)

    _, rows = _read_rows(icd_path, ("icd_code", "title"))
    icd_records: list[IcdCodeRecord] = []
    seen_codes: dict[str, int] = {}
    for row_num, row in enumerate(rows, start=1):
        try:
            _require(row, row_num, ("icd_code",))
            code = row["icd_code"]
            if not ICD_CODE_RE.match(code):
                raise errors.BadIcdCode(row_num, code)
            if code in seen_codes:
                raise errors.DuplicateIcdCode(code, [seen_codes[code], row_num])
            icd_records.append(IcdCodeRecord(code, row.get("title", "")))
            seen_codes[code] = row_num
        except errors.IngestError as err:
            sink.reject(err)

    _, rows = _read_rows(concepts_path, ("concept_id", "fsn", "active"))
    concept_records: list[SnomedConceptRecord] = []
    seen_concepts: dict[str, int] = {}
    for row_num, row in enumerate(rows, start=1):
        try:
            _require(row, row_num, ("concept_id", "fsn", "active"))
            concept_id = row["concept_id"]
            if not SCTID_RE.match(concept_id):
                raise errors.BadSctid(row_num, "concept_id", concept_id)
            if concept_id in seen_concepts:
                raise errors.DuplicateConceptId(concept_id, [seen_concepts[concept_id], row_num])
            active = _parse_bool(row_num, "active", row["active"])
            concept_records.append(SnomedConceptRecord(concept_id, row["fsn"], active))
            seen_concepts[concept_id] = row_num
        except errors.IngestError as err:
            sink.reject(err)

    known = {c.concept_id for c in concept_records}
    _, rows = _read_rows(relationships_path, ("source_id", "destination_id", "type_id", "active"))
    relationship_records: list[SnomedRelationshipRecord] = []
    for row_num, row in enumerate(rows, start=1):
        try:
            _require(row, row_num, ("source_id", "destination_id", "type_id", "active"))
            source_id, destination_id = row["source_id"], row["destination_id"]
            for column, value in (("source_id", source_id), ("destination_id", destination_id), ("type_id", row["type_id"])):
                if not SCTID_RE.match(value):
                    raise errors.BadSctid(row_num, column, value)
            if source_id == destination_id:
                raise errors.SelfReferentialRelationship(row_num, source_id)
            for column, value in (("source_id", source_id), ("destination_id", destination_id)):
                if value not in known:
                    raise errors.UnknownConceptInRelationship(row_num, column, value)
            active = _parse_bool(row_num, "active", row["active"])
            relationship_records.append(SnomedRelationshipRecord(source_id, destination_id, row["type_id"], active))
        except errors.IngestError as err:
            sink.reject(err)

    return icd_records, concept_records, relationship_records


def load_mappings(
    paths: dict[MappingKind, str | Path],
    *,
    strict: bool = True,
    warnings: list[str] | None = None,
) -> list[MappingTable]:
    """Load one mapping table per provided kind, with per-kind constraints.

    Every file has columns ``source,target``.  The activity-to-domain table
    must be functional; activity-treats targets must be SNOMED-CT ids.
    """
    sink = _RowSink(strict, warnings)
    tables: list[MappingTable] = []
    for kind in MappingKind:
        if kind not in paths:
            continue
        _, rows = _read_rows(paths[kind], ("source", "target"))
        pairs: list[tuple[str, str]] = []
        seen: dict[tuple[str, str], int] = {}
        domain_of: dict[str, tuple[str, int]] = {}
        for row_num, row in enumerate(rows, start=1):
            try:
                _require(row, row_num, ("source", "target"))
                pair = (row["source"], row["target"])
                if pair in seen:
                    raise errors.DuplicatePair(kind.value, pair, [seen[pair], row_num])
                if kind == MappingKind.ACTIVITY_TREATS and not SCTID_RE.match(pair[1]):
                    raise errors.BadSctid(row_num, "target", pair[1])
                if kind == MappingKind.ACTIVITY_TO_DOMAIN:
                    previous = domain_of.get(pair[0])
                    if previous is not None and previous[0] != pair[1]:
                        raise errors.NonFunctionalMapping(pair[0], [previous[0], pair[1]])
                    domain_of[pair[0]] = (pair[1], row_num)
                pairs.append(pair)
                seen[pair] = row_num
            except errors.IngestError as err:
                sink.reject(err)
        tables.append(MappingTable(kind, tuple(pairs)))
    return tables


# ---------------------------------------------------------------------------
# writers (round-trip counterparts of the loaders)


def _write_csv(path: str | Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> None:
    with open(path, "w", newline="", encoding="utf-8") as handle:
        writer = csv.writer(handle)
        writer.writerow(header)
        writer.writerows(rows)


def write_event_table(records: Sequence[EventRecord], path: str | Path) -> None:
    extra_columns: list[str] = []
    for record in records:
        for column in record.extra:
            if column not in extra_columns:
                extra_columns.append(column)
    header = list(EVENT_COLUMNS) + extra_columns
    rows = [
        [r.event_id, format_timestamp(r.timestamp), r.activity, r.patient_id, r.admission_id]
        + [r.extra.get(c, "") for c in extra_columns]
        for r in records
    ]
    _write_csv(path, header, rows)


def write_diagnosis_table(records: Sequence[DiagnosisRecord], path: str | Path) -> None:
    _write_csv(
        path,
        ("patient_id", "admission_id", "icd_code", "seq_num"),
        ([r.patient_id, r.admission_id, r.icd_code, str(r.seq_num)] for r in records),
    )


def write_entity_attributes(records: Sequence[EntityAttributeRecord], path: str | Path) -> None:
    _write_csv(
        path,
        ("entity_type", "entity_id", "attribute", "value"),
        ([r.entity_type, r.entity_id, r.attribute, r.value] for r in records),
    )


def write_icd_table(records: Sequence[IcdCodeRecord], path: str | Path) -> None:
    _write_csv(path, ("icd_code", "title"), ([r.icd_code, r.title] for r in records))


def write_concepts(records: Sequence[SnomedConceptRecord], path: str | Path) -> None:
    _write_csv(
        path,
        ("concept_id", "fsn", "active"),
        ([r.concept_id, r.fsn, "true" if r.active else "false"] for r in records),
    )


def write_relationships(records: Sequence[SnomedRelationshipRecord], path: str | Path) -> None:
    _write_csv(
        path,
        ("source_id", "destination_id", "type_id", "active"),
        ([r.source_id, r.destination_id, r.type_id, "true" if r.active else "false"] for r in records),
    )


def write_mapping(table: MappingTable, path: str | Path) -> None:
    _write_csv(path, ("source", "target"), ([s, t] for s, t in table.rows))
