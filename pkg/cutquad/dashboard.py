"""Loading helpers behind the Streamlit artifact browser (ui.py)."""
import base64
import json
import logging
import os
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import pandas as pd

from cutquad.harness.suite import measurements_frame, read_measurements_csv
from cutquad.integrators.base import Status
from cutquad.reporting.artifacts import MANIFEST_NAME, read_manifest

logger = logging.getLogger(__name__)


@dataclass
class ArtifactSet:
    output_dir: str
    manifest: dict
    measurements: pd.DataFrame
    comparison: Optional[dict] = None
    plots: List[str] = field(default_factory=list)


def has_artifacts(output_dir: str) -> bool:
    return os.path.isfile(os.path.join(output_dir, MANIFEST_NAME))


def _listed(manifest: dict, kind: str, name: Optional[str] = None) -> List[str]:
    return [
        item["path"] for item in manifest.get("artifacts", [])
        if item["kind"] == kind and (name is None or os.path.basename(item["path"]) == name)
    ]


def load_artifacts(output_dir: str) -> ArtifactSet:
    """Manifest, merged measurement CSVs, comparison verdicts and plot paths of one run."""
    manifest = read_manifest(output_dir)
    csvs = [os.path.join(output_dir, p) for p in _listed(manifest, "csv", "measurements.csv")]
    frame = measurements_frame(read_measurements_csv(csvs)) if csvs else measurements_frame([])

    comparison = None
    listed = _listed(manifest, "json", "comparison.json")
    if listed:
        with open(os.path.join(output_dir, listed[0]), "r") as file:
            comparison = json.load(file)

    plots = [os.path.join(output_dir, p) for p in _listed(manifest, "svg")]
    logger.info("Loaded %d measurements and %d plots from %s", len(frame), len(plots), output_dir)
    return ArtifactSet(output_dir, manifest, frame, comparison, plots)


def filter_measurements(frame: pd.DataFrame, testcases: Sequence[str] = (), integrators: Sequence[str] = (),
                        statuses: Sequence[str] = ()) -> pd.DataFrame:
    """Rows matching every non-empty selection."""
    mask = pd.Series(True, index=frame.index)
    if testcases:
        mask &= frame["testcase"].isin(testcases)
    if integrators:
        mask &= frame["integrator"].isin(integrators)
    if statuses:
        mask &= frame["status"].isin(statuses)
    return frame[mask]


def status_counts(frame: pd.DataFrame) -> Dict[str, int]:
    counts = frame["status"].value_counts()
    return {status.value: int(counts.get(status.value, 0)) for status in Status}


def comparison_counts(comparison: Optional[dict]) -> Dict[str, int]:
    if not comparison:
        return {"passed": 0, "failed": 0}
    failed = sum(not r["passed"] for r in comparison.get("results", []))
    return {"passed": len(comparison.get("results", [])) - failed, "failed": failed}


def svg_data_uri(path: str) -> str:
    with open(path, "rb") as file:
        encoded = base64.b64encode(file.read()).decode("utf-8")
    return f"data:image/svg+xml;base64,{encoded}"
