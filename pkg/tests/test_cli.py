"""End-to-end CLI runs against the bundled sample data."""

import json
import shutil

import pytest
from click.testing import CliRunner

from cekg.cli import main
from cekg.sample import SAMPLE_DIR, sample_manifest_path

ALL_FILES = {
    "c1_P1.dot",
    "c1_P1.json",
    "c1_P2.dot",
    "c1_P2.json",
    "c2.dot",
    "c2.json",
    "c3_ADMISSION.dot",
    "c3_ADMISSION.json",
    "c4_Disorder.dot",
    "c4_Disorder.json",
    "c5_ADMISSION_mm-1085006-94181007.json",
    "c6.dot",
    "c6.json",
    "c6_status.json",
    "cekg.cypher",
    "cekg.graphml",
    "report.json",
}


@pytest.fixture
def runner():
    return CliRunner()


@pytest.fixture
def workspace(tmp_path):
    """A modifiable copy of the sample inputs."""
    target = tmp_path / "data"
    shutil.copytree(SAMPLE_DIR, target)
    return target


def run(runner, *args, env=None):
    return runner.invoke(main, list(args), env=env)


def test_version(runner):
    result = run(runner, "--version")
    assert result.exit_code == 0
    assert "0.1.0" in result.output


def test_validate_sample(runner):
    result = run(runner, "validate", "--manifest", str(sample_manifest_path()))
    assert result.exit_code == 0
    assert "validation OK (0 warning(s))" in result.output


def test_all_writes_everything(runner, tmp_path):
    out = tmp_path / "out"
    result = run(runner, "all", "--manifest", str(sample_manifest_path()), "--out", str(out))
    assert result.exit_code == 0
    assert "built graph: 44 nodes, 79 edges" in result.output
    assert {p.name for p in out.iterdir()} == ALL_FILES
    report = json.loads((out / "report.json").read_text())
    assert report["node_counts"]["Event"] == 8
    status = json.loads((out / "c6_status.json").read_text())
    assert len(status["rows"]) == 6


def test_build_writes_graph_files_only(runner, tmp_path):
    out = tmp_path / "out"
    result = run(runner, "build", "--manifest", str(sample_manifest_path()), "--out", str(out))
    assert result.exit_code == 0
    assert {p.name for p in out.iterdir()} == {"cekg.graphml", "cekg.cypher", "report.json"}


def test_discover_writes_json_only(runner, tmp_path):
    out = tmp_path / "out"
    result = run(runner, "discover", "--manifest", str(sample_manifest_path()), "--out", str(out))
    assert result.exit_code == 0
    names = {p.name for p in out.iterdir()}
    expected = {name for name in ALL_FILES if name.endswith(".json")} - {"report.json"}
    assert names == expected


def test_export_writes_graph_formats_only(runner, tmp_path):
    out = tmp_path / "out"
    result = run(runner, "export", "--manifest", str(sample_manifest_path()), "--out", str(out))
    assert result.exit_code == 0
    names = {p.name for p in out.iterdir()}
    # the C5 request asks for json only, so export skips it entirely
    assert names == {name for name in ALL_FILES if name.endswith(".dot")}


def test_repeat_runs_are_byte_identical(runner, tmp_path):
    first, second = tmp_path / "a", tmp_path / "b"
    for out in (first, second):
        result = run(runner, "all", "--manifest", str(sample_manifest_path()), "--out", str(out))
        assert result.exit_code == 0
    for path in sorted(first.iterdir()):
        assert path.read_bytes() == (second / path.name).read_bytes()


# ---------------------------------------------------------------------------
# output directory resolution


def test_out_flag_beats_env_and_manifest(runner, workspace, tmp_path):
    manifest = workspace / "sample.manifest"
    manifest.write_text(manifest.read_text() + "out_dir = from-manifest\n")
    flag_dir = tmp_path / "flagged"
    env_dir = tmp_path / "envved"
    result = run(
        runner,
        "build",
        "--manifest",
        str(manifest),
        "--out",
        str(flag_dir),
        env={"CEKG_OUT": str(env_dir)},
    )
    assert result.exit_code == 0
    assert flag_dir.is_dir()
    assert not env_dir.exists()
    assert not (workspace / "from-manifest").exists()


def test_env_beats_manifest_out_dir(runner, workspace, tmp_path):
    manifest = workspace / "sample.manifest"
    manifest.write_text(manifest.read_text() + "out_dir = from-manifest\n")
    env_dir = tmp_path / "envved"
    result = run(runner, "build", "--manifest", str(manifest), env={"CEKG_OUT": str(env_dir)})
    assert result.exit_code == 0
    assert env_dir.is_dir()
    assert not (workspace / "from-manifest").exists()


def test_manifest_out_dir_is_relative_to_manifest(runner, workspace):
    manifest = workspace / "sample.manifest"
    manifest.write_text(manifest.read_text() + "out_dir = nested/out\n")
    result = run(runner, "build", "--manifest", str(manifest))
    assert result.exit_code == 0
    assert (workspace / "nested" / "out" / "report.json").is_file()


def test_missing_out_dir_is_usage_error(runner):
    result = run(runner, "build", "--manifest", str(sample_manifest_path()))
    assert result.exit_code == 2
    assert "no output directory" in result.output


# ---------------------------------------------------------------------------
# failure modes


def test_missing_manifest_file(runner, tmp_path):
    result = run(runner, "validate", "--manifest", str(tmp_path / "nope.manifest"))
    assert result.exit_code == 2


def test_bad_manifest_grammar(runner, workspace):
    manifest = workspace / "sample.manifest"
    manifest.write_text(manifest.read_text() + "frobnicate = yes\n")
    result = run(runner, "validate", "--manifest", str(manifest))
    assert result.exit_code == 2
    assert "unknown key" in result.output


def test_missing_input_file_is_data_error(runner, workspace, tmp_path):
    (workspace / "event_log.csv").unlink()
    result = run(
        runner, "build", "--manifest", str(workspace / "sample.manifest"), "--out", str(tmp_path / "o")
    )
    assert result.exit_code == 1
    assert "error: input file not found" in result.output


def test_impossible_per_disorder_request_is_usage_error(runner, workspace, tmp_path):
    manifest = workspace / "sample.manifest"
    manifest.write_text(manifest.read_text() + "output = C4 json entity_type=PATIENT\n")
    result = run(runner, "discover", "--manifest", str(manifest), "--out", str(tmp_path / "o"))
    assert result.exit_code == 2
    assert "requires entity type 'Disorder'" in result.output


def test_unknown_patient_is_data_error(runner, workspace, tmp_path):
    manifest = workspace / "sample.manifest"
    manifest.write_text(manifest.read_text() + "output = C1 json patients=P9\n")
    result = run(runner, "discover", "--manifest", str(manifest), "--out", str(tmp_path / "o"))
    assert result.exit_code == 1
    assert "error:" in result.output


# ---------------------------------------------------------------------------
# strictness override


def test_lenient_flag_downgrades_linking_errors(runner, workspace, tmp_path):
    diagnosis = workspace / "diagnosis.csv"
    diagnosis.write_text(diagnosis.read_text() + "P1,A9,J44.9,9\n")
    manifest = str(workspace / "sample.manifest")

    result = run(runner, "build", "--manifest", manifest, "--out", str(tmp_path / "strict"))
    assert result.exit_code == 1

    result = run(
        runner, "build", "--manifest", manifest, "--lenient", "--out", str(tmp_path / "lenient")
    )
    assert result.exit_code == 0
    assert "warning: step 9:" in result.output
    assert (tmp_path / "lenient" / "report.json").is_file()


def test_lenient_validate_reports_skipped_rows(runner, workspace):
    diagnosis = workspace / "diagnosis.csv"
    diagnosis.write_text(diagnosis.read_text() + "P1,A1,I10,bogus\n")
    manifest = str(workspace / "sample.manifest")

    result = run(runner, "validate", "--manifest", manifest)
    assert result.exit_code == 1

    result = run(runner, "validate", "--manifest", manifest, "--lenient")
    assert result.exit_code == 0
    assert "warning: skipped:" in result.output
    assert "validation OK (1 warning(s))" in result.output
