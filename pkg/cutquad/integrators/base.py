"""The integrator contract shared by every cut-cell method."""
import logging
import math
import time
from abc import ABC, abstractmethod
from dataclasses import dataclass, field
from enum import Enum
from typing import ClassVar, Dict, FrozenSet, Optional, Tuple

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.testcase import MeasureKind, TestCase
from cutquad.quadrature import QuadratureData

logger = logging.getLogger(__name__)


class Operation(str, Enum):
    AREA_2D = "area2d"
    VOLUME_3D = "volume3d"
    CURVE_LENGTH = "curve_length"
    SURFACE_AREA = "surface_area"
    AREA_FLUX_2D = "area_flux2d"
    VOLUME_FLUX_3D = "volume_flux3d"

    @property
    def dim(self) -> int:
        return 2 if self in (Operation.AREA_2D, Operation.CURVE_LENGTH, Operation.AREA_FLUX_2D) else 3

    @property
    def measure(self) -> MeasureKind:
        return {
            Operation.AREA_2D: MeasureKind.AREA,
            Operation.VOLUME_3D: MeasureKind.VOLUME,
            Operation.CURVE_LENGTH: MeasureKind.PERIMETER,
            Operation.SURFACE_AREA: MeasureKind.SURFACE_AREA,
            Operation.AREA_FLUX_2D: MeasureKind.AREA,
            Operation.VOLUME_FLUX_3D: MeasureKind.VOLUME,
        }[self]

    @property
    def method_name(self) -> str:
        return {
            Operation.AREA_2D: "compute_area_2d",
            Operation.VOLUME_3D: "compute_volume_3d",
            Operation.CURVE_LENGTH: "compute_interface_curve_length",
            Operation.SURFACE_AREA: "compute_interface_surface_area",
            Operation.AREA_FLUX_2D: "compute_area_via_flux_2d",
            Operation.VOLUME_FLUX_3D: "compute_volume_via_flux_3d",
        }[self]


class InterfaceType(str, Enum):
    IMPLICIT = "implicit"
    PARAMETRIC = "parametric"


class Status(str, Enum):
    OK = "ok"
    UNSUPPORTED = "unsupported"
    FAILED = "failed"


@dataclass(frozen=True)
class IntegratorDescriptor:
    name: str
    interface_type: InterfaceType
    supported_dims: FrozenSet[int]
    capabilities: FrozenSet[Operation]
    parameters: Dict[str, object] = field(default_factory=dict)

    @property
    def property_string(self) -> str:
        return ", ".join(f"{key}={value}" for key, value in self.parameters.items())

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "interface_type": self.interface_type.value,
            "supported_dims": sorted(self.supported_dims),
            "capabilities": [op.value for op in Operation if op in self.capabilities],
            "parameters": dict(self.parameters),
            "property_string": self.property_string,
        }


@dataclass(frozen=True)
class IntegrationResult:
    value: float
    quadrature: Optional[QuadratureData]
    n_points: int
    runtime: float
    status: Status
    message: str = ""

    @classmethod
    def unsupported(cls, message: str) -> "IntegrationResult":
        return cls(math.nan, None, 0, 0.0, Status.UNSUPPORTED, message)

    @classmethod
    def failed(cls, message: str, runtime: float = 0.0) -> "IntegrationResult":
        return cls(math.nan, None, 0, runtime, Status.FAILED, message)

    @property
    def ok(self) -> bool:
        return self.status is Status.OK


class Integrator(ABC):
    """One cut-cell quadrature method behind the six contract operations.

    Subclasses declare their metadata as class attributes and implement
    `integrate`; the base class answers unsupported combinations, times the
    call and turns exceptions into a failed status. Instances hold only their
    parameters and may be shared between threads.
    """

    name: ClassVar[str]
    interface_type: ClassVar[InterfaceType]
    supported_dims: ClassVar[FrozenSet[int]]
    capabilities: ClassVar[FrozenSet[Operation]]
    defaults: ClassVar[Dict[str, object]] = {}

    def __init__(self, **params):
        unknown = sorted(set(params) - set(self.defaults))
        if unknown:
            raise ArgumentError(f"Unknown parameter(s) for integrator {self.name}: {', '.join(unknown)}")
        self.params = dict(self.defaults)
        for key, value in params.items():
            self.params[key] = _coerce_parameter(self.name, key, value, self.defaults[key])
        self.validate_params()

    def validate_params(self):
        pass

    @property
    def descriptor(self) -> IntegratorDescriptor:
        return IntegratorDescriptor(
            self.name, self.interface_type, frozenset(self.supported_dims), frozenset(self.capabilities), dict(self.params)
        )

    def supports(self, operation, tc: TestCase) -> Tuple[bool, str]:
        operation = Operation(operation)
        if operation not in self.capabilities:
            return False, f"{self.name} does not implement {operation.value}"
        if tc.dim not in self.supported_dims or tc.dim != operation.dim:
            return False, f"{self.name} cannot run {operation.value} on the {tc.dim}D test case {tc.id}"
        if self.interface_type is InterfaceType.PARAMETRIC and tc.loop is None:
            return False, f"{self.name} needs a parametric loop, {tc.id} has none"
        return True, ""

    def compute(self, operation, tc: TestCase, mesh: CartesianMesh, order: int = 5) -> IntegrationResult:
        operation = Operation(operation)
        supported, reason = self.supports(operation, tc)
        if not supported:
            return IntegrationResult.unsupported(reason)

        start = time.perf_counter_ns()
        try:
            value, quadrature, message = self.integrate(operation, tc, mesh, order)
        except Exception as e:
            runtime = (time.perf_counter_ns() - start) * 1e-9
            logger.warning("%s failed on %s/%s: %s", self.name, tc.id, operation.value, e)
            return IntegrationResult.failed(f"{type(e).__name__}: {e}", runtime)
        runtime = (time.perf_counter_ns() - start) * 1e-9

        if not np.isfinite(value):
            return IntegrationResult.failed(f"non-finite value {value}", runtime)
        return IntegrationResult(float(value), quadrature, quadrature.n_points, runtime, Status.OK, message)

    @abstractmethod
    def integrate(
        self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int
    ) -> Tuple[float, QuadratureData, str]:
        """(value, quadrature, message) for a supported operation; may raise."""

    def compute_area_2d(self, tc, mesh, order=5) -> IntegrationResult:
        return self.compute(Operation.AREA_2D, tc, mesh, order)

    def compute_volume_3d(self, tc, mesh, order=5) -> IntegrationResult:
        return self.compute(Operation.VOLUME_3D, tc, mesh, order)

    def compute_interface_curve_length(self, tc, mesh, order=5) -> IntegrationResult:
        return self.compute(Operation.CURVE_LENGTH, tc, mesh, order)

    def compute_interface_surface_area(self, tc, mesh, order=5) -> IntegrationResult:
        return self.compute(Operation.SURFACE_AREA, tc, mesh, order)

    def compute_area_via_flux_2d(self, tc, mesh, order=5) -> IntegrationResult:
        return self.compute(Operation.AREA_FLUX_2D, tc, mesh, order)

    def compute_volume_via_flux_3d(self, tc, mesh, order=5) -> IntegrationResult:
        return self.compute(Operation.VOLUME_FLUX_3D, tc, mesh, order)


def check_mesh(tc: TestCase, mesh: CartesianMesh):
    """Mesh-based methods need the whole interface inside the background mesh."""
    if mesh.dim != tc.dim:
        raise ArgumentError(f"{mesh.dim}D mesh for the {tc.dim}D test case {tc.id}")
    lo, hi = tc.level_set.bounding_box()
    if not mesh.bounds.contains_box_strictly(lo, hi):
        raise ArgumentError(f"Mesh {mesh.bounds.lo}-{mesh.bounds.hi} does not cover the interface of {tc.id}")


def mesh_boxes(mesh: CartesianMesh) -> Tuple[np.ndarray, np.ndarray]:
    """(lo, hi) arrays of all cells in row-major order, matching mesh_cells."""
    lines = mesh.grid_lines()
    index = np.array(list(np.ndindex(*mesh.divisions)), dtype=int).reshape(-1, mesh.dim)
    lo = np.stack([lines[a][index[:, a]] for a in range(mesh.dim)], axis=-1)
    hi = np.stack([lines[a][index[:, a] + 1] for a in range(mesh.dim)], axis=-1)
    return lo, hi


def _coerce_parameter(integrator: str, key: str, value, default):
    try:
        if isinstance(default, bool):
            if isinstance(value, str):
                return value.strip().lower() in ("1", "true", "yes", "on")
            return bool(value)
        if isinstance(default, int):
            if isinstance(value, float) and not value.is_integer():
                raise ValueError(value)
            return int(value)
        if isinstance(default, float):
            return float(value)
    except (TypeError, ValueError):
        raise ArgumentError(f"Parameter {integrator}.{key} expects {type(default).__name__}, got {value!r}")
    return value
