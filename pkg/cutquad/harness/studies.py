"""Mesh-refinement convergence and geometry-shift robustness studies."""
import logging
import math
from dataclasses import dataclass
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.testcase import TestCase, translate_testcase
from cutquad.integrators.base import Integrator, Operation, Status
from cutquad.harness.suite import BenchmarkSuite, Measurement, measure, run_suite

logger = logging.getLogger(__name__)

ERROR_FLOOR = 1e-14
SATURATED = "saturated"
NOT_AVAILABLE = "n/a"


def estimate_order(h: Sequence[float], errors: Sequence[float]) -> Optional[float]:
    """Least-squares slope p of log(error) over log(h), error ~ C h**p; None when saturated.

    Only errors above 1e-14 take part; fewer than two of them means the
    method sits at the floating-point floor.
    """
    h = np.asarray(h, dtype=float)
    errors = np.asarray(errors, dtype=float)
    usable = np.isfinite(errors) & (errors > ERROR_FLOOR)
    if usable.sum() < 2:
        return None
    slope, _ = np.polyfit(np.log(h[usable]), np.log(errors[usable]), 1)
    return float(slope)


@dataclass(frozen=True)
class ConvergenceTable:
    testcase_id: str
    integrator_name: str
    operation: str
    h: Tuple[float, ...]
    rows: Tuple[Measurement, ...]
    order: Optional[float]

    @property
    def saturated(self) -> bool:
        return self.order is None

    @property
    def order_label(self) -> str:
        if not any(m.status is Status.OK for m in self.rows):
            return NOT_AVAILABLE
        return SATURATED if self.order is None else f"{self.order:.4f}"

    @property
    def rel_errors(self) -> np.ndarray:
        return np.array([m.rel_error for m in self.rows])

    @property
    def n_points(self) -> Tuple[int, ...]:
        return tuple(m.n_points for m in self.rows)


def convergence_study(tc: TestCase, integrator: Integrator, operation, mesh_plan: Sequence[int], order: int = 5,
                      timing: bool = False) -> ConvergenceTable:
    mesh_plan = tuple(int(n) for n in mesh_plan)
    if len(mesh_plan) < 2:
        raise ArgumentError(f"A convergence study needs at least two meshes, got {mesh_plan}")
    operation = Operation(operation)
    suite = BenchmarkSuite((tc,), (integrator,), (operation,), mesh_plan, order=order, timing=timing)
    rows = tuple(run_suite(suite))
    width = tc.domain.widths[0]
    h = tuple(float(width / n) for n in mesh_plan)
    table = ConvergenceTable(tc.id, integrator.name, operation.value, h, rows,
                             estimate_order(h, [m.rel_error for m in rows]))
    logger.info("Convergence %s/%s/%s: order %s", tc.id, integrator.name, operation.value, table.order_label)
    return table


def tables_from_measurements(measurements: Iterable[Measurement],
                             widths: Optional[Dict[str, float]] = None) -> List[ConvergenceTable]:
    """Regroup suite rows into one table per (test case, integrator, operation) with two or more meshes.

    widths maps test-case ids to their domain width; unknown ids use 1.
    """
    widths = widths or {}
    groups: Dict[Tuple[str, str, str], List[Measurement]] = {}
    for m in measurements:
        groups.setdefault((m.testcase_id, m.integrator_name, m.operation), []).append(m)

    tables = []
    for (testcase_id, integrator_name, operation), rows in groups.items():
        rows = sorted(rows, key=lambda m: m.mesh_divisions)
        if len({m.mesh_divisions for m in rows}) != len(rows) or len(rows) < 2:
            continue
        width = widths.get(testcase_id, 1.0)
        h = tuple(width / m.mesh_divisions for m in rows)
        tables.append(ConvergenceTable(testcase_id, integrator_name, operation, h, tuple(rows),
                                       estimate_order(h, [m.rel_error for m in rows])))
    return tables


@dataclass(frozen=True)
class ShiftSummary:
    max_rel_error: float
    median_rel_error: float
    min_rel_error: float
    failed: int
    unsupported: int

    @property
    def spread(self) -> float:
        return self.max_rel_error - self.min_rel_error


@dataclass(frozen=True)
class ShiftSeries:
    testcase_id: str
    integrator_name: str
    operation: str
    divisions: int
    offsets: Tuple[Tuple[float, ...], ...]
    measurements: Tuple[Measurement, ...]

    @property
    def rel_errors(self) -> np.ndarray:
        return np.array([m.rel_error for m in self.measurements])

    def summary(self) -> ShiftSummary:
        errors = self.rel_errors
        finite = errors[np.isfinite(errors)]
        return ShiftSummary(
            max_rel_error=float(np.max(finite)) if len(finite) else math.nan,
            median_rel_error=float(np.median(finite)) if len(finite) else math.nan,
            min_rel_error=float(np.min(finite)) if len(finite) else math.nan,
            failed=sum(m.status is Status.FAILED for m in self.measurements),
            unsupported=sum(m.status is Status.UNSUPPORTED for m in self.measurements),
        )


def shift_offsets(start: Sequence[float], end: Sequence[float], steps: int) -> np.ndarray:
    """offset_k = start + k / (steps - 1) (end - start); a single step stays at start."""
    if steps < 1:
        raise ArgumentError(f"steps must be >= 1, got {steps}")
    start = np.asarray(start, dtype=float)
    end = np.asarray(end, dtype=float)
    if start.shape != end.shape:
        raise ArgumentError("Start and end offsets must have the same dimension")
    if steps == 1:
        return start[None, :]
    k = np.arange(steps)[:, None]
    return start + k / (steps - 1) * (end - start)


def shift_study(tc: TestCase, integrator: Integrator, operation, divisions: int, steps: int,
                start_offset: Sequence[float], end_offset: Sequence[float], order: int = 5,
                timing: bool = False) -> ShiftSeries:
    """Move the interface through a fixed mesh; every position is validated before the first run."""
    operation = Operation(operation)
    offsets = shift_offsets(start_offset, end_offset, steps)
    cases = []
    for k, offset in enumerate(offsets):
        try:
            cases.append(translate_testcase(tc, offset))
        except ArgumentError as e:
            raise ArgumentError(f"Shift step {k} (offset {offset.tolist()}) is invalid: {e}")

    measurements = tuple(measure(integrator, operation, case, divisions, order, timing) for case in cases)
    series = ShiftSeries(tc.id, integrator.name, operation.value, int(divisions),
                         tuple(tuple(float(v) for v in o) for o in offsets), measurements)
    summary = series.summary()
    logger.info(
        "Shift %s/%s/%s over %d steps: max %.3e, median %.3e, %d failed, %d unsupported",
        tc.id, integrator.name, operation.value, steps,
        summary.max_rel_error, summary.median_rel_error, summary.failed, summary.unsupported,
    )
    return series
