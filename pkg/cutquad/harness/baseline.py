"""Stored reference measurements and the regression comparison against them."""
import json
import logging
import math
import os
from dataclasses import dataclass, field
from datetime import datetime, timezone
from typing import Dict, Iterable, List, Optional, Tuple

from cutquad._version import REVISION
from cutquad.errors import ArgumentError, BaselineError
from cutquad.harness.suite import Measurement, MeasurementKey
from cutquad.integrators.base import Status

logger = logging.getLogger(__name__)

SCHEMA_VERSION = 1
DEFAULT_ABS_SLACK = 1e-12
DEFAULT_MULT_SLACK = 0.25
GENERATED_WARNING = "Machine-generated by `cutquad baseline`; re-record it instead of editing by hand."


@dataclass(frozen=True)
class TolerancePolicy:
    abs_slack: float = DEFAULT_ABS_SLACK
    mult_slack: float = DEFAULT_MULT_SLACK

    def __post_init__(self):
        if not (self.abs_slack > 0 and self.mult_slack > 0):
            raise ArgumentError(f"Tolerances must be positive, got abs={self.abs_slack}, mult={self.mult_slack}")

    def allowed(self, expected: float) -> float:
        return expected * (1.0 + self.mult_slack) + self.abs_slack


@dataclass(frozen=True)
class BaselineEntry:
    testcase_id: str
    integrator_name: str
    operation: str
    mesh_divisions: int
    expected_rel_error: Optional[float]
    expected_status: Status = Status.OK

    @property
    def key(self) -> MeasurementKey:
        return self.testcase_id, self.integrator_name, self.operation, self.mesh_divisions

    def to_dict(self) -> dict:
        return {
            "testcase": self.testcase_id,
            "integrator": self.integrator_name,
            "operation": self.operation,
            "divisions": self.mesh_divisions,
            "expected_rel_error": self.expected_rel_error,
            "expected_status": self.expected_status.value,
        }


@dataclass(frozen=True)
class BaselineFile:
    entries: Tuple[BaselineEntry, ...]
    policy: TolerancePolicy = field(default_factory=TolerancePolicy)
    schema_version: int = SCHEMA_VERSION
    generated_at: str = ""
    revision: str = ""

    def __post_init__(self):
        object.__setattr__(self, "entries", tuple(self.entries))
        keys = [e.key for e in self.entries]
        if len(set(keys)) != len(keys):
            duplicates = sorted({k for k in keys if keys.count(k) > 1})
            raise ArgumentError(f"Duplicate baseline entries: {duplicates}")

    def to_dict(self) -> dict:
        return {
            "_warning": GENERATED_WARNING,
            "generated_at": self.generated_at,
            "revision": self.revision,
            "schema_version": self.schema_version,
            "tolerance": {"abs_slack": self.policy.abs_slack, "mult_slack": self.policy.mult_slack},
            "entries": [e.to_dict() for e in self.entries],
        }


def record_baseline(measurements: Iterable[Measurement], policy: Optional[TolerancePolicy] = None,
                    revision: str = REVISION) -> BaselineFile:
    """Expected values are the measured relative errors, stamped with time and revision."""
    entries = [
        BaselineEntry(
            m.testcase_id,
            m.integrator_name,
            m.operation,
            m.mesh_divisions,
            m.rel_error if math.isfinite(m.rel_error) else None,
            m.status,
        )
        for m in measurements
    ]
    generated_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    return BaselineFile(tuple(entries), policy or TolerancePolicy(), SCHEMA_VERSION, generated_at, revision)


def save_baseline(baseline: BaselineFile, file_path: str) -> str:
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w", newline="\n") as file:
        json.dump(baseline.to_dict(), file, indent=2)
        file.write("\n")
    return file_path


def load_baseline(file_path: str) -> BaselineFile:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"The file {file_path} does not exist.")
    with open(file_path, "r") as file:
        text = file.read()
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise BaselineError(file_path, e.msg, e.lineno, e.colno)

    if not isinstance(data, dict):
        raise BaselineError(file_path, "a baseline must be a JSON object")
    version = data.get("schema_version")
    if version != SCHEMA_VERSION:
        raise BaselineError(file_path, f"unsupported schema_version {version!r} (expected {SCHEMA_VERSION})")

    try:
        tolerance = data.get("tolerance") or {}
        policy = TolerancePolicy(
            float(tolerance.get("abs_slack", DEFAULT_ABS_SLACK)),
            float(tolerance.get("mult_slack", DEFAULT_MULT_SLACK)),
        )
    except (TypeError, ValueError, ArgumentError) as e:
        raise BaselineError(file_path, f"tolerance: {e}")

    entries = []
    for index, raw in enumerate(data.get("entries", [])):
        try:
            expected = raw.get("expected_rel_error")
            entries.append(BaselineEntry(
                str(raw["testcase"]),
                str(raw["integrator"]),
                str(raw["operation"]),
                int(raw["divisions"]),
                None if expected is None else float(expected),
                Status(raw.get("expected_status", Status.OK.value)),
            ))
        except KeyError as e:
            raise BaselineError(file_path, f"entry {index}: missing field {e}")
        except (AttributeError, TypeError, ValueError) as e:
            raise BaselineError(file_path, f"entry {index}: {e}")

    try:
        return BaselineFile(tuple(entries), policy, version, str(data.get("generated_at", "")),
                            str(data.get("revision", "")))
    except ArgumentError as e:
        raise BaselineError(file_path, str(e))


@dataclass(frozen=True)
class EntryResult:
    entry: BaselineEntry
    measurement: Optional[Measurement]
    passed: bool
    reason: str = ""


@dataclass(frozen=True)
class ComparisonReport:
    results: Tuple[EntryResult, ...]
    extras: Tuple[MeasurementKey, ...] = ()
    failed_measurements: Tuple[MeasurementKey, ...] = ()

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def n_failures(self) -> int:
        return sum(not r.passed for r in self.results)

    def result_for(self, key: MeasurementKey) -> Optional[EntryResult]:
        for r in self.results:
            if r.entry.key == key:
                return r
        return None

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "n_entries": len(self.results),
            "n_failures": self.n_failures,
            "results": [
                {**r.entry.to_dict(), "rel_error": _json_float(r.measurement.rel_error) if r.measurement else None,
                 "status": r.measurement.status.value if r.measurement else None,
                 "passed": r.passed, "reason": r.reason}
                for r in self.results
            ],
            "extras": [list(k) for k in self.extras],
            "failed_measurements": [list(k) for k in self.failed_measurements],
        }


def _json_float(value: float) -> Optional[float]:
    return value if math.isfinite(value) else None


def _check_entry(entry: BaselineEntry, m: Optional[Measurement], policy: TolerancePolicy) -> EntryResult:
    if m is None:
        return EntryResult(entry, None, False, "missing measurement")
    if m.status is not entry.expected_status:
        return EntryResult(entry, m, False, f"status {m.status.value}, expected {entry.expected_status.value}")
    if m.status is not Status.OK or entry.expected_rel_error is None:
        return EntryResult(entry, m, True)
    allowed = policy.allowed(entry.expected_rel_error)
    if not m.rel_error <= allowed:
        return EntryResult(entry, m, False, f"rel_error {m.rel_error:.3e} > allowed {allowed:.3e}")
    return EntryResult(entry, m, True)


def compare_to_baseline(measurements: Iterable[Measurement], baseline: BaselineFile) -> ComparisonReport:
    """Per-entry verdicts; measurements without an entry are listed as extras."""
    measurements = list(measurements)
    by_key: Dict[MeasurementKey, Measurement] = {m.key: m for m in measurements}
    results = tuple(_check_entry(e, by_key.get(e.key), baseline.policy) for e in baseline.entries)
    known = {e.key for e in baseline.entries}
    extras = tuple(m.key for m in measurements if m.key not in known)
    failed = tuple(m.key for m in measurements if m.status is Status.FAILED)
    report = ComparisonReport(results, extras, failed)
    logger.info("Baseline comparison: %d entries, %d failures, %d extras", len(results), report.n_failures, len(extras))
    return report


def perturbed(baseline: BaselineFile, key: MeasurementKey, factor: float) -> BaselineFile:
    """Copy with one expected error scaled; used to rehearse the regression gate."""
    entries: List[BaselineEntry] = []
    for e in baseline.entries:
        if e.key == key and e.expected_rel_error is not None:
            e = BaselineEntry(e.testcase_id, e.integrator_name, e.operation, e.mesh_divisions,
                              e.expected_rel_error * factor, e.expected_status)
        entries.append(e)
    return BaselineFile(tuple(entries), baseline.policy, baseline.schema_version, baseline.generated_at,
                        baseline.revision)
