import base64

import pytest
from streamlit.testing.v1 import AppTest

from conftest import REPO_ROOT
from cutquad.cli import main
from cutquad.dashboard import (
    comparison_counts,
    filter_measurements,
    has_artifacts,
    load_artifacts,
    status_counts,
    svg_data_uri,
)

RUN = ["run", "--integrator", "flux,quadtree", "--testcase", "circle", "--meshes", "2", "--output", "out"]


@pytest.fixture
def artifacts(workdir):
    assert main(RUN) == 0
    assert main(["baseline", "--measurements", "out/csv/measurements.csv", "--out", "base.json"]) == 0
    assert main(RUN + ["--baseline", "base.json"]) == 0
    return workdir / "out"


def test_load_artifacts(artifacts):
    loaded = load_artifacts(str(artifacts))
    assert len(loaded.measurements) == 12
    assert loaded.comparison["passed"] is True
    assert loaded.plots and all(p.endswith(".svg") for p in loaded.plots)
    assert status_counts(loaded.measurements) == {"ok": 4, "unsupported": 8, "failed": 0}
    assert comparison_counts(loaded.comparison) == {"passed": 12, "failed": 0}


def test_filter_measurements(artifacts):
    frame = load_artifacts(str(artifacts)).measurements
    assert len(filter_measurements(frame)) == 12
    assert len(filter_measurements(frame, integrators=["flux"])) == 6
    assert len(filter_measurements(frame, integrators=["flux"], statuses=["ok"])) == 3
    assert filter_measurements(frame, testcases=["ellipse"]).empty


def test_helpers_without_artifacts(tmp_path):
    assert not has_artifacts(str(tmp_path))
    assert comparison_counts(None) == {"passed": 0, "failed": 0}
    path = tmp_path / "tiny.svg"
    path.write_text('<svg xmlns="http://www.w3.org/2000/svg"/>')
    uri = svg_data_uri(str(path))
    assert uri.startswith("data:image/svg+xml;base64,")
    assert base64.b64decode(uri.split(",", 1)[1]) == path.read_bytes()


def test_app_warns_on_empty_directory(tmp_path, monkeypatch):
    monkeypatch.setenv("CUTQUAD_OUTPUT_DIR", str(tmp_path))
    app = AppTest.from_file(str(REPO_ROOT / "ui.py")).run(timeout=30)
    assert not app.exception
    assert len(app.warning) == 1


def test_app_shows_run(artifacts, monkeypatch):
    monkeypatch.setenv("CUTQUAD_OUTPUT_DIR", str(artifacts))
    app = AppTest.from_file(str(REPO_ROOT / "ui.py")).run(timeout=30)
    assert not app.exception
    assert len(app.metric) == 4
    assert app.metric[0].value == "4"
