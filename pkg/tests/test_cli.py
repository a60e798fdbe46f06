import json
import logging
import os

import pytest
import yaml

from conftest import CATALOG_DIR, read_lines
from cutquad._version import __version__
from cutquad.cli import main
from cutquad.harness import load_baseline, read_measurements_csv, save_baseline
from cutquad.harness.baseline import perturbed
from cutquad.integrators import Status
from cutquad.reporting.artifacts import read_manifest

QUADTREE_RUN = ["run", "--integrator", "quadtree", "--param", "quadtree.depth=2", "--testcase", "circle",
                "--operation", "area2d", "--meshes", "2,4", "--output", "out"]


def manifest_kinds(output_dir):
    return sorted({a["kind"] for a in read_manifest(output_dir)["artifacts"]})


def test_list(workdir, capsys):
    assert main(["list", "--testcases"]) == 0
    out = capsys.readouterr().out
    for name in ("quadtree-tri", "momentfit", "montecarlo", "parametric", "circle", "sphere"):
        assert name in out


def test_list_with_catalog_directory(workdir, capsys):
    assert main(["list", "--testcases", "--catalog", str(CATALOG_DIR)]) == 0
    assert "ellipse" in capsys.readouterr().out


def test_version(workdir, monkeypatch, capsys):
    monkeypatch.setenv("CUTQUAD_REVISION", "abc123")
    assert main(["--version"]) == 0
    assert capsys.readouterr().out.strip() == f"cutquad {__version__} (abc123)"


def test_missing_command(workdir):
    assert main([]) == 2


def test_quick_run(workdir, capsys):
    assert main(["run", "--tier", "quick", "--integrator", "flux", "--testcase", "circle", "--output", "out"]) == 0
    assert manifest_kinds("out") == ["csv", "html", "svg"]
    measurements = read_measurements_csv("out/csv/measurements.csv")
    assert len(measurements) == 6
    assert {m.mesh_divisions for m in measurements} == {2}
    assert sum(m.status is Status.OK for m in measurements) == 3
    assert os.path.isfile("out/plots/points-circle-flux-area2d.svg")
    assert "[OK] Manifest saved" in capsys.readouterr().out


def test_run_uses_output_dir_from_environment(workdir, monkeypatch):
    monkeypatch.setenv("CUTQUAD_OUTPUT_DIR", str(workdir / "env-out"))
    assert main(["run", "--integrator", "flux", "--testcase", "circle", "--operation", "area2d",
                 "--meshes", "2"]) == 0
    assert os.path.isfile(workdir / "env-out" / "csv" / "measurements.csv")


def test_run_with_config_file(workdir):
    config = workdir / "cutquad.json"
    config.write_text(json.dumps({"integrators": ["flux"], "testcases": ["circle"], "operations": ["area2d"],
                                  "meshes": [2, 4]}))
    assert main(["run", "--config", str(config), "--output", "out"]) == 0
    assert len(read_measurements_csv("out/csv/measurements.csv")) == 2


@pytest.fixture
def root_logger():
    root = logging.getLogger()
    level = root.level
    yield root
    root.setLevel(level)


def test_log_level_applies_while_settings_load(workdir, monkeypatch, caplog, root_logger):
    monkeypatch.setenv("CUTQUAD_LOG_LEVEL", "INFO")
    config = workdir / "cutquad.json"
    config.write_text(json.dumps({"log_level": "DEBUG"}))
    assert main(["list", "--config", str(config)]) == 0
    assert "Loaded config file" in caplog.text
    assert root_logger.level == logging.DEBUG


def test_baseline_then_gated_run(workdir, capsys):
    assert main(QUADTREE_RUN) == 0
    assert main(["baseline", "--measurements", "out/csv/measurements.csv", "--out", "baselines/base.json",
                 "--output", "out"]) == 0
    assert len(load_baseline("baselines/base.json").entries) == 2
    assert main(QUADTREE_RUN + ["--baseline", "baselines/base.json"]) == 0
    assert "summary/comparison.json" in [a["path"] for a in read_manifest("out")["artifacts"]]


def test_compare_detects_regression(workdir, capsys):
    assert main(QUADTREE_RUN) == 0
    assert main(["baseline", "--measurements", "out/csv/measurements.csv", "--out", "base.json"]) == 0
    assert main(["compare", "--baseline", "base.json", "--measurements", "out/csv/measurements.csv",
                 "--output", "out"]) == 0

    save_baseline(perturbed(load_baseline("base.json"), ("circle", "quadtree", "area2d", 4), 0.1), "tight.json")
    capsys.readouterr()
    assert main(["compare", "--baseline", "tight.json", "--measurements", "out/csv/measurements.csv",
                 "--output", "out"]) == 1
    out = capsys.readouterr().out
    assert "FAIL circle / quadtree / area2d / 4" in out
    with open("out/summary/comparison.json") as file:
        assert json.load(file)["n_failures"] == 1


def test_crashing_integrator_exits_2(workdir, monkeypatch, crashing_registry):
    monkeypatch.setattr("cutquad.cli.default_registry", lambda: crashing_registry)
    argv = ["run", "--integrator", "flux,crash", "--testcase", "circle", "--operation", "area2d",
            "--meshes", "2", "--output", "out"]
    assert main(argv) == 2
    statuses = [m.status for m in read_measurements_csv("out/csv/measurements.csv")]
    assert statuses == [Status.OK, Status.FAILED]


@pytest.mark.parametrize("argv", [
    ["run", "--integrator", "sparse-grid"],
    ["run", "--meshes", "4,2"],
    ["run", "--meshes", "two"],
    ["run", "--testcase", "torus"],
    ["run", "--operation", "perimeter"],
    ["run", "--param", "quadtree.resolution=3"],
    ["run", "--tier", "nightly"],
    ["run", "--baseline", "missing.json"],
    ["shift", "--testcase", "circle", "--integrator", "flux", "--steps", "5", "--end=0.5,0"],
    ["shift", "--testcase", "circle", "--integrator", "flux", "--steps", "5", "--divisions", "0"],
    ["convergence", "--testcase", "circle", "--meshes", "8"],
    ["compare", "--baseline", "missing.json", "--measurements", "missing.csv"],
    ["ci-init", "--integrator", "flux", "--tag", "quadtree=linux-runner"],
])
def test_invalid_arguments_exit_2_without_output(workdir, argv):
    assert main(argv + ["--output", "out"]) == 2
    assert not os.path.exists("out")


def test_convergence(workdir, capsys):
    argv = ["convergence", "--testcase", "circle", "--integrator", "flux,linear", "--meshes", "2,4,8",
            "--output", "out"]
    assert main(argv) == 0
    out = capsys.readouterr().out
    assert "order=saturated" in out
    lines = read_lines("out/csv/convergence.csv")
    assert len(lines) == 1 + 6 + 1
    assert os.path.isfile("out/plots/convergence-circle-area2d.svg")


def test_shift(workdir):
    argv = ["shift", "--testcase", "circle", "--integrator", "flux,quadtree", "--steps", "5", "--divisions", "4",
            "--start=-0.25,0", "--end=0.25,0", "--output", "out"]
    assert main(argv) == 0
    lines = read_lines("out/csv/shift.csv")
    assert len(lines) == 1 + 10 + 1
    assert lines[1].startswith("circle,flux,area2d,4,0,-0.25,0,")
    assert manifest_kinds("out") == ["csv", "svg"]


def test_report(workdir):
    assert main(QUADTREE_RUN) == 0
    assert main(["baseline", "--measurements", "out/csv/measurements.csv", "--out", "base.json"]) == 0
    assert main(["report", "--measurements", "out/csv/measurements.csv", "--baseline", "base.json",
                 "--output", "report"]) == 0
    paths = [a["path"] for a in read_manifest("report")["artifacts"]]
    assert "summary/summary.html" in paths
    assert "plots/convergence-circle-area2d.svg" in paths
    assert "summary/comparison.json" in paths


def test_ci_init(workdir, capsys):
    argv = ["ci-init", "--integrator", "quadtree,flux", "--testcase", "circle", "--operation", "area2d",
            "--meshes", "2,4", "--tag", "quadtree=linux-runner", "--out", "ci.yml",
            "--baseline-out", "baselines/b.json", "--output", "out"]
    assert main(argv) == 0
    with open("ci.yml") as file:
        document = yaml.safe_load(file)
    assert document["quick-quadtree"]["tags"] == ["linux-runner"]
    assert "tags" not in document["quick-flux"]
    assert len(load_baseline("baselines/b.json").entries) == 4
    assert "[OK] Pipeline saved: ci.yml (6 jobs)" in capsys.readouterr().out
