"""FastAPI application: build once, query many times.

A build registers a session holding the frozen graph; discovery and export
endpoints read sessions concurrently.  Manifest paths are resolved on the
server's filesystem.

Error mapping: unknown sessions are 404, unreadable or inconsistent input
data is 400, and impossible requests (bad variant, bad cohort, bad format)
are 422.
"""

from __future__ import annotations

import threading
from dataclasses import dataclass
from datetime import datetime, timezone
from typing import Literal

from fastapi import FastAPI, HTTPException, Query, Response
from fastapi.responses import JSONResponse, PlainTextResponse

from .. import export as export_mod
from ..construct import BuildReport
from ..discover import VARIANTS, CohortSelector, admission_disorder_status, df_count
from ..errors import CekgError, DiscoverError, ManifestError
from ..graph import PropertyGraph
from ..manifest import OutputRequest, parse_manifest
from ..pipeline import pathway_outputs, run_build, validate as validate_manifest
from .schemas import (
    BuildReportModel,
    BuildRequest,
    DfCountResponse,
    HealthResponse,
    PathwayGraphModel,
    PathwayRequest,
    PathwayResponse,
    SessionDetail,
    SessionInfo,
    SessionList,
    StatusResponse,
    StatusRowModel,
    ValidateRequest,
    ValidateResponse,
)

_EXPORT_MEDIA_TYPES = {
    "dot": "text/vnd.graphviz",
    "graphml": "application/xml",
    "cypher": "text/plain",
}


@dataclass
class Session:
    session_id: str
    created_at: str
    manifest_path: str
    graph: PropertyGraph
    report: BuildReport


class SessionStore:
    """Thread-safe registry of built graphs."""

    def __init__(self) -> None:
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}
        self._counter = 0

    def add(self, manifest_path: str, graph: PropertyGraph, report: BuildReport) -> Session:
        with self._lock:
            self._counter += 1
            session = Session(
                session_id=f"s{self._counter}",
                created_at=datetime.now(timezone.utc).isoformat(timespec="seconds"),
                manifest_path=manifest_path,
                graph=graph,
                report=report,
            )
            self._sessions[session.session_id] = session
            return session

    def get(self, session_id: str) -> Session:
        with self._lock:
            session = self._sessions.get(session_id)
        if session is None:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
        return session

    def remove(self, session_id: str) -> None:
        with self._lock:
            if session_id not in self._sessions:
                raise HTTPException(status_code=404, detail=f"unknown session {session_id!r}")
            del self._sessions[session_id]

    def list(self) -> list[Session]:
        with self._lock:
            return list(self._sessions.values())


def _session_info(session: Session) -> SessionInfo:
    return SessionInfo(
        session_id=session.session_id,
        created_at=session.created_at,
        manifest_path=session.manifest_path,
        node_count=session.graph.node_count,
        edge_count=session.graph.edge_count,
    )


def _session_detail(session: Session) -> SessionDetail:
    return SessionDetail(
        **_session_info(session).model_dump(),
        report=BuildReportModel.from_report(session.report),
    )


def create_app() -> FastAPI:
    app = FastAPI(title="cekg service", version="0.1.0")
    store = SessionStore()

    @app.exception_handler(CekgError)
    async def on_cekg_error(request, exc: CekgError):
        status = 422 if isinstance(exc, (ManifestError, DiscoverError)) else 400
        return JSONResponse(status_code=status, content={"detail": str(exc)})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse()

    @app.post("/validate", response_model=ValidateResponse)
    def validate(body: ValidateRequest) -> ValidateResponse:
        manifest = parse_manifest(body.manifest_path).with_strict(body.strict)
        try:
            warnings = validate_manifest(manifest)
        except CekgError as err:
            if isinstance(err, (ManifestError, DiscoverError)):
                raise
            return ValidateResponse(valid=False, error=str(err))
        return ValidateResponse(valid=True, warnings=warnings)

    @app.post("/sessions", response_model=SessionDetail, status_code=201)
    def create_session(body: BuildRequest) -> SessionDetail:
        manifest = parse_manifest(body.manifest_path).with_strict(body.strict)
        graph, report = run_build(manifest)
        session = store.add(body.manifest_path, graph, report)
        return _session_detail(session)

    @app.get("/sessions", response_model=SessionList)
    def list_sessions() -> SessionList:
        return SessionList(sessions=[_session_info(s) for s in store.list()])

    @app.get("/sessions/{session_id}", response_model=SessionDetail)
    def get_session(session_id: str) -> SessionDetail:
        return _session_detail(store.get(session_id))

    @app.delete("/sessions/{session_id}", status_code=204, response_class=Response)
    def delete_session(session_id: str) -> Response:
        store.remove(session_id)
        return Response(status_code=204)

    @app.post("/sessions/{session_id}/pathways", response_model=PathwayResponse)
    def pathways(session_id: str, body: PathwayRequest) -> PathwayResponse:
        session = store.get(session_id)
        if body.variant not in VARIANTS:
            raise HTTPException(
                status_code=422,
                detail=f"unknown variant {body.variant!r}, expected one of {', '.join(VARIANTS)}",
            )
        if body.patients is not None and body.multimorbidity is not None:
            raise HTTPException(
                status_code=422, detail="patients and multimorbidity are mutually exclusive"
            )
        if body.variant == "C5" and body.multimorbidity is None:
            raise HTTPException(status_code=422, detail="C5 requires a multimorbidity concept set")
        request = OutputRequest(
            variant=body.variant,
            formats=("json",),
            entity_type=body.entity_type,
            patients=tuple(body.patients) if body.patients is not None else None,
            multimorbidity=frozenset(body.multimorbidity) if body.multimorbidity is not None else None,
        )
        named, status = pathway_outputs(session.graph, request)
        response = PathwayResponse(
            graphs=[PathwayGraphModel.from_pathway(p) for _, p in named]
        )
        if status is not None:
            response.status_rows = [
                StatusRowModel(**row) for row in status.to_json_dict()["rows"]
            ]
        return response

    @app.get("/sessions/{session_id}/status", response_model=StatusResponse)
    def status(session_id: str) -> StatusResponse:
        session = store.get(session_id)
        return StatusResponse.from_report(admission_disorder_status(session.graph))

    @app.get("/sessions/{session_id}/df-count", response_model=DfCountResponse)
    def df_count_endpoint(
        session_id: str,
        class_a: str = Query(...),
        class_b: str = Query(...),
        entity_type: str = Query("ADMISSION"),
        patients: str | None = Query(None, description="comma-separated patient ids"),
    ) -> DfCountResponse:
        session = store.get(session_id)
        selector = None
        if patients:
            selector = CohortSelector.patients([p for p in patients.split(",") if p])
        count = df_count(session.graph, class_a, class_b, entity_type, selector)
        return DfCountResponse(class_a=class_a, class_b=class_b, entity_type=entity_type, count=count)

    @app.get("/sessions/{session_id}/export")
    def export_graph(
        session_id: str, fmt: Literal["dot", "graphml", "cypher"] = Query(...)
    ) -> PlainTextResponse:
        session = store.get(session_id)
        if fmt == "dot":
            text = export_mod.emit_dot(session.graph)
        elif fmt == "graphml":
            text = export_mod.emit_graphml(session.graph)
        else:
            text = export_mod.emit_query_script(session.graph)
        return PlainTextResponse(text, media_type=_EXPORT_MEDIA_TYPES[fmt])

    return app
