"""Run the test-case x integrator matrix and record one measurement per element."""
import logging
import math
import statistics
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, List, Sequence, Tuple, Union

import pandas as pd

from cutquad.errors import ArgumentError
from cutquad.geometry.testcase import TestCase, mesh_for
from cutquad.integrators.base import IntegrationResult, Integrator, Operation, Status
from cutquad.quadrature import MAX_GAUSS_POINTS

logger = logging.getLogger(__name__)

MEASUREMENT_COLUMNS = (
    "testcase",
    "integrator",
    "operation",
    "divisions",
    "value",
    "reference",
    "rel_error",
    "n_points",
    "runtime_s",
    "status",
)
TIMING_REPEATS = 3
TIERS = ("quick", "extensive", "all")

MeasurementKey = Tuple[str, str, str, int]


@dataclass(frozen=True)
class BenchmarkSuite:
    testcases: Tuple[TestCase, ...]
    integrators: Tuple[Integrator, ...]
    operations: Tuple[Operation, ...]
    mesh_plan: Tuple[int, ...]
    tier: str = "all"
    order: int = 5
    timing: bool = False
    jobs: int = 1

    def __post_init__(self):
        object.__setattr__(self, "testcases", tuple(self.testcases))
        object.__setattr__(self, "integrators", tuple(self.integrators))
        object.__setattr__(self, "operations", tuple(Operation(op) for op in self.operations))
        object.__setattr__(self, "mesh_plan", tuple(int(n) for n in self.mesh_plan))

        if not self.testcases:
            raise ArgumentError("A suite needs at least one test case")
        if not self.integrators:
            raise ArgumentError("A suite needs at least one integrator")
        if not self.operations:
            raise ArgumentError("A suite needs at least one operation")
        if not self.mesh_plan or self.mesh_plan[0] < 1:
            raise ArgumentError(f"Mesh plan must hold positive division counts, got {self.mesh_plan}")
        if any(b <= a for a, b in zip(self.mesh_plan, self.mesh_plan[1:])):
            raise ArgumentError(f"Mesh plan must be strictly increasing, got {self.mesh_plan}")
        _check_unique([tc.id for tc in self.testcases], "test case")
        _check_unique([a.name for a in self.integrators], "integrator")
        _check_unique([op.value for op in self.operations], "operation")
        if self.tier not in TIERS:
            raise ArgumentError(f"Tier must be one of {', '.join(TIERS)}, got {self.tier}")
        if not 1 <= self.order <= MAX_GAUSS_POINTS:
            raise ArgumentError(f"Quadrature order must be in 1..{MAX_GAUSS_POINTS}, got {self.order}")
        if self.jobs < 1:
            raise ArgumentError(f"jobs must be >= 1, got {self.jobs}")

    @property
    def size(self) -> int:
        return len(self.testcases) * len(self.integrators) * len(self.operations) * len(self.mesh_plan)


def _check_unique(names, what):
    duplicates = sorted({n for n in names if names.count(n) > 1})
    if duplicates:
        raise ArgumentError(f"Duplicate {what} names in suite: {', '.join(duplicates)}")


@dataclass(frozen=True)
class Measurement:
    testcase_id: str
    integrator_name: str
    operation: str
    mesh_divisions: int
    value: float
    reference: float
    rel_error: float
    n_points: int
    runtime_s: float
    status: Status
    message: str = ""

    @property
    def key(self) -> MeasurementKey:
        return self.testcase_id, self.integrator_name, self.operation, self.mesh_divisions

    def to_row(self) -> dict:
        return dict(zip(MEASUREMENT_COLUMNS, (
            self.testcase_id,
            self.integrator_name,
            self.operation,
            self.mesh_divisions,
            self.value,
            self.reference,
            self.rel_error,
            self.n_points,
            self.runtime_s,
            self.status.value,
        )))


def relative_error(value: float, reference: float) -> float:
    if not (math.isfinite(value) and math.isfinite(reference)) or reference == 0:
        return math.nan
    return abs(value - reference) / abs(reference)


def run_case(integrator: Integrator, operation, tc: TestCase, divisions: int, order: int = 5,
             timing: bool = False) -> IntegrationResult:
    """One guarded call; in timing mode the median of three repeats is reported."""
    mesh = mesh_for(tc, divisions)
    repeats = TIMING_REPEATS if timing else 1
    results = []
    for _ in range(repeats):
        try:
            result = integrator.compute(operation, tc, mesh, order)
        except Exception as e:
            logger.warning("%s raised outside its contract on %s: %s", integrator.name, tc.id, e)
            result = IntegrationResult.failed(f"{type(e).__name__}: {e}")
        results.append(result)
        if result.status is not Status.OK:
            break
    first = results[0]
    runtime = statistics.median(r.runtime for r in results) if timing else 0.0
    return IntegrationResult(first.value, first.quadrature, first.n_points, runtime, first.status, first.message)


def measure(integrator: Integrator, operation, tc: TestCase, divisions: int, order: int = 5,
            timing: bool = False) -> Measurement:
    operation = Operation(operation)
    result = run_case(integrator, operation, tc, divisions, order, timing)
    reference = tc.reference(operation.measure)
    reference = math.nan if reference is None else reference
    ok = result.status is Status.OK
    measurement = Measurement(
        testcase_id=tc.id,
        integrator_name=integrator.name,
        operation=operation.value,
        mesh_divisions=int(divisions),
        value=result.value if ok else math.nan,
        reference=reference,
        rel_error=relative_error(result.value, reference) if ok else math.nan,
        n_points=result.n_points if ok else 0,
        runtime_s=result.runtime if timing else 0.0,
        status=result.status,
        message=result.message,
    )
    logger.debug("%s %s %s %d: %s rel_error=%s", *measurement.key, measurement.status.value, measurement.rel_error)
    return measurement


def _run_pair(suite: BenchmarkSuite, tc: TestCase, integrator: Integrator) -> List[Measurement]:
    return [
        measure(integrator, op, tc, divisions, suite.order, suite.timing)
        for op in suite.operations
        for divisions in suite.mesh_plan
    ]


def run_suite(suite: BenchmarkSuite) -> List[Measurement]:
    """One measurement per (test case, integrator, operation, mesh), in that nesting order.

    Pairs fan out over a thread pool when jobs > 1 and timing is off; the
    output order does not depend on it.
    """
    pairs = [(tc, a) for tc in suite.testcases for a in suite.integrators]
    if suite.jobs > 1 and not suite.timing:
        with ThreadPoolExecutor(max_workers=suite.jobs) as executor:
            chunks = list(executor.map(lambda pair: _run_pair(suite, *pair), pairs))
    else:
        if suite.jobs > 1:
            logger.info("Timing mode on: running %d pairs serially", len(pairs))
        chunks = [_run_pair(suite, tc, a) for tc, a in pairs]

    measurements = [m for chunk in chunks for m in chunk]
    counts = {status: sum(m.status is status for m in measurements) for status in Status}
    logger.info(
        "Suite finished: %d measurements (%d ok, %d unsupported, %d failed)",
        len(measurements), counts[Status.OK], counts[Status.UNSUPPORTED], counts[Status.FAILED],
    )
    return measurements


def measurements_frame(measurements: Iterable[Measurement]) -> pd.DataFrame:
    return pd.DataFrame([m.to_row() for m in measurements], columns=list(MEASUREMENT_COLUMNS))


def read_measurements_csv(paths: Union[str, Sequence[str]]) -> List[Measurement]:
    """Parse back one or more measurement CSVs, concatenated in the given order."""
    if isinstance(paths, str):
        paths = [paths]
    measurements = []
    for path in paths:
        frame = pd.read_csv(path, keep_default_na=False, dtype=str)
        missing = [c for c in MEASUREMENT_COLUMNS if c not in frame.columns]
        if missing:
            raise ArgumentError(f"{path}: not a measurements CSV (missing columns {', '.join(missing)})")
        for row in frame.itertuples(index=False):
            row = row._asdict()
            try:
                measurements.append(Measurement(
                    testcase_id=row["testcase"],
                    integrator_name=row["integrator"],
                    operation=row["operation"],
                    mesh_divisions=int(row["divisions"]),
                    value=_parse_float(row["value"]),
                    reference=_parse_float(row["reference"]),
                    rel_error=_parse_float(row["rel_error"]),
                    n_points=int(row["n_points"]),
                    runtime_s=_parse_float(row["runtime_s"]),
                    status=Status(row["status"]),
                ))
            except ValueError as e:
                raise ArgumentError(f"{path}: bad measurement row {row}: {e}")
    return measurements


def _parse_float(text: str) -> float:
    return math.nan if text == "" else float(text)
