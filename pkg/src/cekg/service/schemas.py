"""Request and response bodies for the HTTP service."""

from __future__ import annotations

from pydantic import BaseModel, Field

from ..construct import BuildReport
from ..discover import DisorderStatusReport, PathwayGraph


class HealthResponse(BaseModel):
    status: str = "ok"


class ValidateRequest(BaseModel):
    manifest_path: str
    strict: bool | None = None


class ValidateResponse(BaseModel):
    valid: bool
    warnings: list[str] = Field(default_factory=list)
    error: str | None = None


class BuildRequest(BaseModel):
    manifest_path: str
    strict: bool | None = None


class BuildReportModel(BaseModel):
    node_counts: dict[str, int]
    edge_counts: dict[str, int]
    warnings: list[str]
    unlinked_activities: list[str]
    unlinked_icd_codes: list[str]

    @classmethod
    def from_report(cls, report: BuildReport) -> "BuildReportModel":
        return cls(**report.to_json_dict())


class SessionInfo(BaseModel):
    session_id: str
    created_at: str
    manifest_path: str
    node_count: int
    edge_count: int


class SessionDetail(SessionInfo):
    report: BuildReportModel


class SessionList(BaseModel):
    sessions: list[SessionInfo]


class PathwayNodeModel(BaseModel):
    key: str
    label: str
    kind: str
    style: dict[str, str] = Field(default_factory=dict)


class PathwayEdgeModel(BaseModel):
    source: str
    target: str
    kind: str
    weight: int = 1
    entity_type: str | None = None
    concept_id: str | None = None
    label: str | None = None


class PathwayGraphModel(BaseModel):
    variant: str
    nodes: list[PathwayNodeModel]
    edges: list[PathwayEdgeModel]

    @classmethod
    def from_pathway(cls, pathway: PathwayGraph) -> "PathwayGraphModel":
        return cls(
            variant=pathway.variant,
            nodes=[
                PathwayNodeModel(key=n.key, label=n.label, kind=n.kind, style=n.style_dict())
                for n in pathway.nodes
            ],
            edges=[
                PathwayEdgeModel(
                    source=e.source,
                    target=e.target,
                    kind=e.kind,
                    weight=e.weight,
                    entity_type=e.entity_type,
                    concept_id=e.concept_id,
                    label=e.label,
                )
                for e in pathway.edges
            ],
        )


class StatusRowModel(BaseModel):
    patient_id: str
    admission_id: str
    admission_index: int
    concept_id: str
    newly_discovered: bool
    treated: bool


class StatusResponse(BaseModel):
    rows: list[StatusRowModel]

    @classmethod
    def from_report(cls, report: DisorderStatusReport) -> "StatusResponse":
        return cls(rows=[StatusRowModel(**row) for row in report.to_json_dict()["rows"]])


class PathwayRequest(BaseModel):
    variant: str
    patients: list[str] | None = None
    multimorbidity: list[str] | None = None
    entity_type: str | None = None


class PathwayResponse(BaseModel):
    graphs: list[PathwayGraphModel]
    status_rows: list[StatusRowModel] | None = None


class DfCountResponse(BaseModel):
    class_a: str
    class_b: str
    entity_type: str
    count: int
