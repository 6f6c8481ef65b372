"""HTTP service: sessions, discovery endpoints, error mapping."""

import shutil

import pytest
from fastapi.testclient import TestClient

from cekg.sample import SAMPLE_DIR, sample_manifest_path
from cekg.service import create_app


@pytest.fixture
def client():
    return TestClient(create_app())


@pytest.fixture
def session_id(client):
    response = client.post("/sessions", json={"manifest_path": str(sample_manifest_path())})
    assert response.status_code == 201
    return response.json()["session_id"]


@pytest.fixture
def workspace(tmp_path):
    target = tmp_path / "data"
    shutil.copytree(SAMPLE_DIR, target)
    return target


def test_health(client):
    response = client.get("/health")
    assert response.status_code == 200
    assert response.json() == {"status": "ok"}


# ---------------------------------------------------------------------------
# validate


def test_validate_ok(client):
    response = client.post("/validate", json={"manifest_path": str(sample_manifest_path())})
    assert response.status_code == 200
    assert response.json() == {"valid": True, "warnings": [], "error": None}


def test_validate_reports_data_problems(client, workspace):
    (workspace / "event_log.csv").unlink()
    response = client.post(
        "/validate", json={"manifest_path": str(workspace / "sample.manifest")}
    )
    assert response.status_code == 200
    body = response.json()
    assert body["valid"] is False
    assert "input file not found" in body["error"]


def test_validate_bad_manifest_is_422(client, tmp_path):
    response = client.post("/validate", json={"manifest_path": str(tmp_path / "nope.manifest")})
    assert response.status_code == 422
    assert "cannot read manifest" in response.json()["detail"]


# ---------------------------------------------------------------------------
# sessions


def test_session_lifecycle(client):
    created = client.post("/sessions", json={"manifest_path": str(sample_manifest_path())})
    assert created.status_code == 201
    body = created.json()
    assert body["session_id"] == "s1"
    assert body["node_count"] == 44
    assert body["edge_count"] == 79
    assert body["report"]["node_counts"]["Event"] == 8

    second = client.post("/sessions", json={"manifest_path": str(sample_manifest_path())})
    assert second.json()["session_id"] == "s2"

    listed = client.get("/sessions").json()
    assert [s["session_id"] for s in listed["sessions"]] == ["s1", "s2"]

    fetched = client.get("/sessions/s1")
    assert fetched.status_code == 200
    assert fetched.json()["session_id"] == "s1"

    deleted = client.delete("/sessions/s1")
    assert deleted.status_code == 204
    assert client.get("/sessions/s1").status_code == 404
    assert client.delete("/sessions/s1").status_code == 404


def test_unknown_session_is_404(client):
    assert client.get("/sessions/s99").status_code == 404


def test_build_failure_is_400(client, workspace):
    (workspace / "event_log.csv").unlink()
    response = client.post(
        "/sessions", json={"manifest_path": str(workspace / "sample.manifest")}
    )
    assert response.status_code == 400
    assert "input file not found" in response.json()["detail"]


# ---------------------------------------------------------------------------
# pathways


def test_pathways_c1(client, session_id):
    response = client.post(f"/sessions/{session_id}/pathways", json={"variant": "C1"})
    assert response.status_code == 200
    graphs = response.json()["graphs"]
    assert len(graphs) == 2
    assert {g["variant"] for g in graphs} == {"C1"}


def test_pathways_c3(client, session_id):
    response = client.post(f"/sessions/{session_id}/pathways", json={"variant": "C3"})
    body = response.json()
    (graph,) = body["graphs"]
    assert graph["variant"] == "C3"
    assert len(graph["nodes"]) == 4
    assert len(graph["edges"]) == 5
    assert body["status_rows"] is None


def test_pathways_c4_defaults_to_disorder(client, session_id):
    response = client.post(f"/sessions/{session_id}/pathways", json={"variant": "C4"})
    (graph,) = response.json()["graphs"]
    assert graph["variant"] == "C4"
    assert {e["concept_id"] for e in graph["edges"]} == {"1085006"}


def test_pathways_c5(client, session_id):
    response = client.post(
        f"/sessions/{session_id}/pathways",
        json={"variant": "C5", "multimorbidity": ["1085006", "94181007"]},
    )
    (graph,) = response.json()["graphs"]
    assert graph["variant"] == "C5"
    assert len(graph["edges"]) == 3


def test_pathways_c6_includes_status_rows(client, session_id):
    response = client.post(f"/sessions/{session_id}/pathways", json={"variant": "C6"})
    body = response.json()
    assert body["graphs"][0]["variant"] == "C6"
    assert len(body["status_rows"]) == 6


def test_pathways_guards(client, session_id):
    url = f"/sessions/{session_id}/pathways"
    assert client.post(url, json={"variant": "C9"}).status_code == 422
    assert (
        client.post(
            url, json={"variant": "C3", "patients": ["P1"], "multimorbidity": ["1"]}
        ).status_code
        == 422
    )
    assert client.post(url, json={"variant": "C5"}).status_code == 422
    assert (
        client.post(url, json={"variant": "C4", "entity_type": "PATIENT"}).status_code == 422
    )
    assert client.post(url, json={"variant": "C1", "patients": ["P9"]}).status_code == 422


# ---------------------------------------------------------------------------
# status and df-count


def test_status_endpoint(client, session_id):
    response = client.get(f"/sessions/{session_id}/status")
    rows = response.json()["rows"]
    assert len(rows) == 6
    assert rows[0] == {
        "patient_id": "P1",
        "admission_id": "A1",
        "admission_index": 0,
        "concept_id": "1085006",
        "newly_discovered": True,
        "treated": True,
    }


def test_df_count_endpoint(client, session_id):
    response = client.get(
        f"/sessions/{session_id}/df-count",
        params={"class_a": "ABG", "class_b": "MICRO"},
    )
    assert response.json() == {
        "class_a": "ABG",
        "class_b": "MICRO",
        "entity_type": "ADMISSION",
        "count": 1,
    }

    scoped = client.get(
        f"/sessions/{session_id}/df-count",
        params={"class_a": "CXR", "class_b": "HGB", "patients": "P1"},
    )
    assert scoped.json()["count"] == 0


def test_df_count_unknown_class_is_422(client, session_id):
    response = client.get(
        f"/sessions/{session_id}/df-count",
        params={"class_a": "ABG", "class_b": "NO_SUCH"},
    )
    assert response.status_code == 422


# ---------------------------------------------------------------------------
# export


def test_export_media_types(client, session_id):
    cases = {
        "dot": ("text/vnd.graphviz", "// cekg graph"),
        "graphml": ("application/xml", "<?xml"),
        "cypher": ("text/plain", "// cekg import script"),
    }
    for fmt, (media_type, prefix) in cases.items():
        response = client.get(f"/sessions/{session_id}/export", params={"fmt": fmt})
        assert response.status_code == 200
        assert response.headers["content-type"].startswith(media_type)
        assert response.text.startswith(prefix)


def test_export_bad_format_is_422(client, session_id):
    response = client.get(f"/sessions/{session_id}/export", params={"fmt": "svg"})
    assert response.status_code == 422
