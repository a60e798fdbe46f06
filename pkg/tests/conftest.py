import math
import os
from pathlib import Path

import pytest

from cutquad.config import ENV_VARS
from cutquad.geometry.catalog import builtin_catalog
from cutquad.geometry.testcase import make_circle_testcase
from cutquad.harness.suite import Measurement
from cutquad.integrators.base import Integrator, InterfaceType, Operation, Status
from cutquad.integrators.registry import default_registry

REPO_ROOT = Path(__file__).resolve().parents[1]
CATALOG_DIR = REPO_ROOT / "catalog"
UNIT_SQUARE = ((0.0, 0.0), (1.0, 1.0))
CIRCLE_AREA = math.pi * 0.2**2
CIRCLE_PERIMETER = 2.0 * math.pi * 0.2


class CrashingIntegrator(Integrator):
    """Raises on every supported call."""

    name = "crash"
    interface_type = InterfaceType.IMPLICIT
    supported_dims = frozenset({2})
    capabilities = frozenset({Operation.AREA_2D})

    def integrate(self, operation, tc, mesh, order):
        raise RuntimeError("boom")


@pytest.fixture(autouse=True)
def clean_environment(monkeypatch):
    for name in ENV_VARS.values():
        monkeypatch.delenv(name, raising=False)


@pytest.fixture
def circle():
    return make_circle_testcase((0.5, 0.5), 0.2, UNIT_SQUARE, divisions_hint=2)


@pytest.fixture
def catalog():
    return builtin_catalog()


@pytest.fixture
def registry():
    return default_registry()


@pytest.fixture
def crashing_registry():
    registry = default_registry()
    registry.register(CrashingIntegrator)
    return registry


@pytest.fixture
def workdir(tmp_path, monkeypatch):
    """Empty working directory, so the CLI falls back to the built-in catalog."""
    monkeypatch.chdir(tmp_path)
    return tmp_path


def make_measurement(rel_error=1e-6, status=Status.OK, testcase="circle", integrator="quadtree",
                     operation="area2d", divisions=8, n_points=100):
    ok = status is Status.OK
    return Measurement(
        testcase_id=testcase,
        integrator_name=integrator,
        operation=operation,
        mesh_divisions=divisions,
        value=CIRCLE_AREA * (1.0 + rel_error) if ok else math.nan,
        reference=CIRCLE_AREA,
        rel_error=rel_error if ok else math.nan,
        n_points=n_points if ok else 0,
        runtime_s=0.0,
        status=status,
    )


def read_lines(path):
    with open(path, "r", newline="") as file:
        return file.read().split("\n")


def file_bytes(path):
    with open(os.fspath(path), "rb") as file:
        return file.read()
