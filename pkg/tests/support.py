"""Shared test helpers: randomized datasets and independent oracles.

The oracles work directly on ingest records with plain sorting and counting,
no shared code with the construction or discovery modules, so agreement is
meaningful evidence.
"""

from __future__ import annotations

import random
from datetime import datetime, timedelta, timezone

from cekg import vocab
from cekg.export import export_key
from cekg.graph import PropertyGraph
from cekg.ingest import (
    Dataset,
    DiagnosisRecord,
    EventRecord,
    IcdCodeRecord,
    MappingKind,
    MappingTable,
    SnomedConceptRecord,
)

ACTIVITY_POOL = ("ALPHA", "BETA", "GAMMA", "DELTA", "OMEGA")
DISORDER_CONCEPTS = ("111001", "222002", "333003")
ICD_CODES = ("A00.0", "B11.1", "C22.2")
BASE_TIME = datetime(2024, 3, 1, 8, 0, tzinfo=timezone.utc)


def random_dataset(rng: random.Random) -> Dataset:
    """A small random but internally consistent dataset.

    Up to 20 events over up to 4 admissions owned by up to 4 patients, with
    frequent timestamp collisions to exercise the event-id tie-break, random
    diagnosis lists, and a random treats mapping.
    """
    n_patients = rng.randint(1, 4)
    patients = [f"P{i}" for i in range(1, n_patients + 1)]
    n_admissions = rng.randint(1, 4)
    admissions = [f"A{i}" for i in range(1, n_admissions + 1)]
    owner = {admission: rng.choice(patients) for admission in admissions}

    n_events = rng.randint(n_admissions, 20)
    rows = list(admissions)
    rows += [rng.choice(admissions) for _ in range(n_events - n_admissions)]
    rng.shuffle(rows)
    events = []
    for index, admission in enumerate(rows, start=1):
        events.append(
            EventRecord(
                event_id=f"E{index}",
                timestamp=BASE_TIME + timedelta(hours=rng.randint(0, 12)),
                activity=rng.choice(ACTIVITY_POOL),
                patient_id=owner[admission],
                admission_id=admission,
                extra={},
            )
        )

    icd_rows = [(code, concept) for code, concept in zip(ICD_CODES, DISORDER_CONCEPTS)]
    if rng.random() < 0.4:
        icd_rows.append((ICD_CODES[2], DISORDER_CONCEPTS[0]))

    diagnoses = []
    for admission in admissions:
        codes = rng.sample(ICD_CODES, rng.randint(0, len(ICD_CODES)))
        for seq, code in enumerate(codes, start=1):
            diagnoses.append(DiagnosisRecord(owner[admission], admission, code, seq))

    treats_rows = [
        (activity, concept)
        for activity in ACTIVITY_POOL
        for concept in DISORDER_CONCEPTS
        if rng.random() < 0.35
    ]

    return Dataset(
        events=events,
        diagnoses=diagnoses,
        icd_codes=[IcdCodeRecord(code, f"title {code}") for code in ICD_CODES],
        concepts=[SnomedConceptRecord(c, f"concept {c}", True) for c in DISORDER_CONCEPTS],
        relationships=[],
        mappings={
            MappingKind.ICD_TO_SNOMED: MappingTable(MappingKind.ICD_TO_SNOMED, tuple(icd_rows)),
            MappingKind.ACTIVITY_TREATS: MappingTable(
                MappingKind.ACTIVITY_TREATS, tuple(treats_rows)
            ),
        },
    )


# ---------------------------------------------------------------------------
# record-level derivations (oracle building blocks)


def _sorted_events(records: list[EventRecord]) -> list[EventRecord]:
    return sorted(records, key=lambda r: (r.timestamp, r.event_id))


def events_by_patient(dataset: Dataset) -> dict[str, list[EventRecord]]:
    out: dict[str, list[EventRecord]] = {}
    for record in dataset.events:
        out.setdefault(record.patient_id, []).append(record)
    return out


def events_by_admission(dataset: Dataset) -> dict[str, list[EventRecord]]:
    out: dict[str, list[EventRecord]] = {}
    for record in dataset.events:
        out.setdefault(record.admission_id, []).append(record)
    return out


def icd_concept_map(dataset: Dataset) -> dict[str, list[str]]:
    return dataset.mapping(MappingKind.ICD_TO_SNOMED).as_dict()


def treats_map(dataset: Dataset) -> dict[str, list[str]]:
    return dataset.mapping(MappingKind.ACTIVITY_TREATS).as_dict()


def oracle_admission_order(dataset: Dataset, patient_id: str) -> list[str]:
    earliest: dict[str, datetime] = {}
    for record in dataset.events:
        if record.patient_id != patient_id:
            continue
        current = earliest.get(record.admission_id)
        if current is None or record.timestamp < current:
            earliest[record.admission_id] = record.timestamp
    return [a for a, _ in sorted(earliest.items(), key=lambda item: (item[1], item[0]))]


def oracle_disorder_events(dataset: Dataset) -> dict[tuple[str, str], list[EventRecord]]:
    """(patient, concept) -> the patient's events whose activity treats it.

    Only concepts diagnosed at one of the patient's own event-bearing
    admissions count; disorders never diagnosed for the patient do not exist.
    """
    by_patient = events_by_patient(dataset)
    concepts = icd_concept_map(dataset)
    treating = treats_map(dataset)

    out: dict[tuple[str, str], list[EventRecord]] = {}
    for patient_id, records in by_patient.items():
        patient_admissions = {r.admission_id for r in records}
        diagnosed: set[str] = set()
        for diagnosis in dataset.diagnoses:
            if diagnosis.patient_id != patient_id:
                continue
            if diagnosis.admission_id not in patient_admissions:
                continue
            diagnosed.update(concepts.get(diagnosis.icd_code, []))
        for concept in diagnosed:
            out[(patient_id, concept)] = [
                r for r in records if concept in treating.get(r.activity, [])
            ]
    return out


def _entity_event_groups(dataset: Dataset, entity_type: str) -> dict[tuple, list[EventRecord]]:
    if entity_type == vocab.PATIENT:
        return {(pid,): records for pid, records in events_by_patient(dataset).items()}
    if entity_type == vocab.ADMISSION:
        return {(aid,): records for aid, records in events_by_admission(dataset).items()}
    if entity_type == vocab.DISORDER:
        return dict(oracle_disorder_events(dataset))
    raise ValueError(entity_type)


def oracle_aggregate(
    dataset: Dataset,
    entity_type: str,
    per_disorder: bool = False,
    patients: set[str] | None = None,
) -> dict[tuple, int]:
    """Class-level DF weights computed straight from sorted record lists.

    DF pairs always come from an entity's full ordered event list; a patient
    scope then drops pairs whose endpoints are not both in-scope, the same
    per-edge filtering the aggregation applies.  Keys are
    (activity_a, activity_b) or, per disorder, plus the concept id.
    """

    def in_scope(record: EventRecord) -> bool:
        return patients is None or record.patient_id in patients

    weights: dict[tuple, int] = {}
    for key, records in _entity_event_groups(dataset, entity_type).items():
        ordered = _sorted_events(records)
        for first, second in zip(ordered, ordered[1:]):
            if not (in_scope(first) and in_scope(second)):
                continue
            if per_disorder:
                pair = (first.activity, second.activity, key[1])
            else:
                pair = (first.activity, second.activity)
            weights[pair] = weights.get(pair, 0) + 1
    return weights


def oracle_df_count(
    dataset: Dataset,
    class_a: str,
    class_b: str,
    entity_type: str,
    patients: set[str] | None = None,
) -> int:
    return oracle_aggregate(dataset, entity_type, patients=patients).get((class_a, class_b), 0)


def oracle_status(dataset: Dataset) -> list[tuple[str, str, int, str, bool, bool]]:
    """Brute-force admission-level disorder status from the raw records."""
    concepts = icd_concept_map(dataset)
    treating = treats_map(dataset)
    by_patient = events_by_patient(dataset)

    rows = []
    for patient_id in sorted(by_patient):
        order = oracle_admission_order(dataset, patient_id)
        diagnosed_at: dict[str, set[str]] = {a: set() for a in order}
        for diagnosis in dataset.diagnoses:
            if diagnosis.patient_id == patient_id and diagnosis.admission_id in diagnosed_at:
                diagnosed_at[diagnosis.admission_id].update(
                    concepts.get(diagnosis.icd_code, [])
                )
        first_seen: dict[str, int] = {}
        for index, admission_id in enumerate(order):
            for concept in sorted(diagnosed_at[admission_id]):
                first_seen.setdefault(concept, index)
        for index, admission_id in enumerate(order):
            for concept in sorted(c for c, f in first_seen.items() if f <= index):
                treated = any(
                    r.admission_id == admission_id
                    and r.patient_id == patient_id
                    and concept in treating.get(r.activity, [])
                    for r in dataset.events
                )
                rows.append(
                    (patient_id, admission_id, index, concept, first_seen[concept] == index, treated)
                )
    return rows


# ---------------------------------------------------------------------------
# graph-level checks


def df_violations(graph: PropertyGraph) -> list[str]:
    """Structural DF check: per entity, a temporally monotone simple path.

    Monotone order plus in/out degree at most one plus exactly k-1 edges
    forces a single chain, so no separate connectivity walk is needed.
    """
    problems: list[str] = []
    groups: dict[tuple[str, str], list] = {}
    for edge in graph.edges():
        if edge.edge_type != vocab.DF:
            continue
        key = (str(edge.properties["entity_type"]), str(edge.properties["entity_id"]))
        groups.setdefault(key, []).append(edge)

    for entity in graph.match_nodes(vocab.ENTITY):
        props = graph.node(entity).properties
        key = (str(props["entity_type"]), str(props["entity_id"]))
        events = [event for _, event in graph.adjacent(entity, vocab.CORR, "in")]
        df_edges = groups.pop(key, [])
        if len(df_edges) != max(0, len(events) - 1):
            problems.append(f"{key}: {len(df_edges)} DF edges for {len(events)} events")
        event_set = set(events)
        out_degree: dict[int, int] = {}
        in_degree: dict[int, int] = {}
        for edge in df_edges:
            if edge.source not in event_set or edge.target not in event_set:
                problems.append(f"{key}: DF endpoint not correlated to the entity")
            out_degree[edge.source] = out_degree.get(edge.source, 0) + 1
            in_degree[edge.target] = in_degree.get(edge.target, 0) + 1
            source = graph.node(edge.source).properties
            target = graph.node(edge.target).properties
            a = (source["timestamp"], str(source["event_id"]))
            b = (target["timestamp"], str(target["event_id"]))
            if not a < b:
                problems.append(f"{key}: DF edge {a} -> {b} not temporally monotone")
        if any(v > 1 for v in out_degree.values()) or any(v > 1 for v in in_degree.values()):
            problems.append(f"{key}: branching DF chain")
    if groups:
        problems.append(f"DF edges reference unknown entities: {sorted(groups)}")
    return problems


def canon(graph: PropertyGraph) -> tuple:
    """Canonical form for isomorphism comparison, independent of node ids."""
    nodes = sorted(
        (export_key(node), node.labels, tuple(sorted(node.properties.items())))
        for node in graph.nodes()
    )
    key_of = {node.id: export_key(node) for node in graph.nodes()}
    edges = sorted(
        (
            key_of[edge.source],
            key_of[edge.target],
            edge.edge_type,
            tuple(sorted(edge.properties.items())),
        )
        for edge in graph.edges()
    )
    return tuple(nodes), tuple(edges)
