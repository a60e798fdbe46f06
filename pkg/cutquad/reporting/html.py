"""Self-contained HTML summary of a benchmark run."""
import logging
import math
import os
from datetime import datetime, timezone
from typing import Iterable, Optional, Sequence

from jinja2 import Environment, PackageLoader, StrictUndefined

from cutquad._version import REVISION
from cutquad.harness.baseline import ComparisonReport
from cutquad.harness.suite import Measurement
from cutquad.integrators.base import Status
from cutquad.reporting.artifacts import ArtifactManifest

logger = logging.getLogger(__name__)

TEMPLATE_NAME = "summary.html.j2"

_environment = Environment(
    loader=PackageLoader("cutquad.reporting", "templates"),
    autoescape=True,
    undefined=StrictUndefined,
    trim_blocks=True,
    lstrip_blocks=True,
    keep_trailing_newline=True,
)


def _fmt(value: float, spec: str) -> str:
    return format(value, spec) if math.isfinite(value) else "-"


def _row(m: Measurement, report: Optional[ComparisonReport]) -> dict:
    verdict, reason = "untracked", ""
    if report is not None:
        result = report.result_for(m.key)
        if result is not None:
            verdict = "pass" if result.passed else "fail"
            reason = result.reason
    return {
        "testcase": m.testcase_id,
        "integrator": m.integrator_name,
        "operation": m.operation,
        "divisions": m.mesh_divisions,
        "value": _fmt(m.value, ".15g"),
        "reference": _fmt(m.reference, ".15g"),
        "rel_error": _fmt(m.rel_error, ".3e"),
        "n_points": m.n_points,
        "runtime": _fmt(m.runtime_s, ".3g") if m.runtime_s else "-",
        "status": m.status.value,
        "verdict": verdict,
        "reason": reason,
    }


def render_summary(measurements: Sequence[Measurement], report: Optional[ComparisonReport] = None,
                   plots: Sequence[dict] = (), revision: str = REVISION, generated_at: Optional[str] = None,
                   title: str = "cutquad benchmark summary") -> str:
    measurements = list(measurements)
    comparison = None
    missing = []
    if report is not None:
        comparison = {
            "passed": report.passed,
            "n_failures": report.n_failures,
            "n_entries": len(report.results),
            "n_extras": len(report.extras),
        }
        missing = [r.entry.to_dict() for r in report.results if r.measurement is None]
    counts = {
        "total": len(measurements),
        "ok": sum(m.status is Status.OK for m in measurements),
        "unsupported": sum(m.status is Status.UNSUPPORTED for m in measurements),
        "failed": sum(m.status is Status.FAILED for m in measurements),
    }
    template = _environment.get_template(TEMPLATE_NAME)
    return template.render(
        title=title,
        generated_at=generated_at or datetime.now(timezone.utc).isoformat(timespec="seconds"),
        revision=revision,
        counts=counts,
        comparison=comparison,
        rows=[_row(m, report) for m in measurements],
        missing=missing,
        plots=list(plots),
    )


def html_summary(measurements: Iterable[Measurement], report: Optional[ComparisonReport], plot_paths: Sequence[str],
                 path: str, manifest: Optional[ArtifactManifest] = None, command: str = "",
                 revision: str = REVISION, generated_at: Optional[str] = None) -> str:
    """Write the summary page; plot links are made relative to the page."""
    directory = os.path.dirname(path) or "."
    os.makedirs(directory, exist_ok=True)
    plots = [
        {"name": os.path.basename(p), "href": os.path.relpath(p, directory).replace(os.sep, "/")}
        for p in plot_paths
    ]
    text = render_summary(list(measurements), report, plots, revision, generated_at)
    with open(path, "w", encoding="utf-8", newline="\n") as file:
        file.write(text)
    if manifest is not None:
        manifest.add(path, "html", command)
    logger.info("Wrote %s", path)
    return path
