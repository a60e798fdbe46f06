"""Neutral data artifacts: measurement, convergence and shift CSVs plus the comparison JSON."""
import json
import logging
import os
from typing import Iterable, Optional, Sequence

import pandas as pd

from cutquad.harness.baseline import ComparisonReport
from cutquad.harness.studies import ConvergenceTable, ShiftSeries
from cutquad.harness.suite import Measurement, measurements_frame
from cutquad.reporting.artifacts import ArtifactManifest

logger = logging.getLogger(__name__)

FLOAT_FORMAT = "%.17g"
CONVERGENCE_COLUMNS = ("testcase", "integrator", "operation", "divisions", "h", "rel_error", "n_points", "order")
AXIS_NAMES = ("x", "y", "z")


def _write_frame(frame: pd.DataFrame, path: str):
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    frame.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n")


def _register(path: str, kind: str, manifest: Optional[ArtifactManifest], command: str) -> str:
    if manifest is not None:
        manifest.add(path, kind, command)
    logger.info("Wrote %s", path)
    return path


def write_measurements_csv(measurements: Iterable[Measurement], path: str,
                           manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    _write_frame(measurements_frame(measurements), path)
    return _register(path, "csv", manifest, command)


def convergence_frame(tables: Sequence[ConvergenceTable]) -> pd.DataFrame:
    rows = [
        {
            "testcase": t.testcase_id,
            "integrator": t.integrator_name,
            "operation": t.operation,
            "divisions": m.mesh_divisions,
            "h": h,
            "rel_error": m.rel_error,
            "n_points": m.n_points,
            "order": t.order_label,
        }
        for t in tables
        for h, m in zip(t.h, t.rows)
    ]
    return pd.DataFrame(rows, columns=list(CONVERGENCE_COLUMNS))


def write_convergence_csv(tables: Sequence[ConvergenceTable], path: str,
                          manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    _write_frame(convergence_frame(tables), path)
    return _register(path, "csv", manifest, command)


def shift_frame(series: Sequence[ShiftSeries]) -> pd.DataFrame:
    dim = len(series[0].offsets[0]) if series and series[0].offsets else 2
    offset_columns = [f"offset_{a}" for a in AXIS_NAMES[:dim]]
    columns = ["testcase", "integrator", "operation", "divisions", "step", *offset_columns,
               "rel_error", "n_points", "status"]
    rows = []
    for s in series:
        for step, (offset, m) in enumerate(zip(s.offsets, s.measurements)):
            rows.append({
                "testcase": s.testcase_id,
                "integrator": s.integrator_name,
                "operation": s.operation,
                "divisions": s.divisions,
                "step": step,
                **dict(zip(offset_columns, offset)),
                "rel_error": m.rel_error,
                "n_points": m.n_points,
                "status": m.status.value,
            })
    return pd.DataFrame(rows, columns=columns)


def write_shift_csv(series: Sequence[ShiftSeries], path: str,
                    manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    _write_frame(shift_frame(series), path)
    return _register(path, "csv", manifest, command)


def write_comparison_json(report: ComparisonReport, path: str,
                          manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(path, "w", newline="\n") as file:
        json.dump(report.to_dict(), file, indent=2)
        file.write("\n")
    return _register(path, "json", manifest, command)
