"""Tiered CI pipeline generation and the gate that turns a comparison into an exit status.

Exit codes of the gate (stable, also used by the CLI):

    0  every baseline entry passed
    1  at least one tolerance or status mismatch
    2  at least one integrator crashed (failed measurement), or an execution error
"""
import logging
import os
import re
import shlex
from dataclasses import dataclass, field, replace
from typing import Dict, List, Mapping, Optional, Tuple

import yaml

from cutquad.errors import ArgumentError
from cutquad.geometry.testcase import TestCase, Tier, translate_testcase
from cutquad.harness.baseline import ComparisonReport
from cutquad.harness.suite import BenchmarkSuite
from cutquad.integrators.base import Integrator, Operation

logger = logging.getLogger(__name__)

STAGES = ("build", "quick", "extensive", "report")
DEFAULT_RETENTION = "2 days"
DEFAULT_IMAGE = "python:3.11"
DEFAULT_BASELINE = "baselines/baseline.json"
SHIFT_STEPS = 1000
SHIFT_DIVISIONS = 8
SHIFT_TRAVEL = 0.25

EXIT_PASS = 0
EXIT_TOLERANCE = 1
EXIT_ERROR = 2

_RETENTION = re.compile(r"^\s*(\d+)\s*(sec|min|hour|day|week|month|year)s?\s*$")


@dataclass(frozen=True)
class CiJob:
    name: str
    stage: str
    script: Tuple[str, ...]
    tags: Tuple[str, ...] = ()
    artifacts: Tuple[str, ...] = ()
    expire_in: str = DEFAULT_RETENTION
    needs: Tuple[str, ...] = ()

    def to_dict(self) -> dict:
        job = {"stage": self.stage}
        if self.needs:
            job["needs"] = list(self.needs)
        if self.tags:
            job["tags"] = list(self.tags)
        job["script"] = list(self.script)
        if self.artifacts:
            job["artifacts"] = {"when": "always", "paths": list(self.artifacts), "expire_in": self.expire_in}
        return job


@dataclass(frozen=True)
class PipelineSpec:
    jobs: Tuple[CiJob, ...]
    build_job: CiJob
    stages: Tuple[str, ...] = STAGES
    retention: str = DEFAULT_RETENTION
    variables: Dict[str, str] = field(default_factory=dict)
    image: str = DEFAULT_IMAGE

    def __post_init__(self):
        names = [self.build_job.name] + [j.name for j in self.jobs]
        if len(set(names)) != len(names):
            raise ArgumentError(f"Job names must be unique, got {names}")
        rank = {stage: i for i, stage in enumerate(self.stages)}
        by_name = {j.name: j for j in (self.build_job, *self.jobs)}
        for job in by_name.values():
            if job.stage not in rank:
                raise ArgumentError(f"Job {job.name} uses unknown stage {job.stage}")
            for need in job.needs:
                if need not in by_name:
                    raise ArgumentError(f"Job {job.name} needs unknown job {need}")
                if rank[by_name[need].stage] >= rank[job.stage]:
                    raise ArgumentError(f"Job {job.name} needs {need} from a later or equal stage")
        retention_seconds(self.retention)

    def job(self, name: str) -> CiJob:
        for j in (self.build_job, *self.jobs):
            if j.name == name:
                return j
        raise KeyError(name)

    def to_dict(self) -> dict:
        document = {
            "stages": list(self.stages),
            "variables": dict(self.variables),
            "default": {"image": self.image, "before_script": ["pip install -r requirements.txt"]},
            self.build_job.name: self.build_job.to_dict(),
        }
        for job in self.jobs:
            document[job.name] = job.to_dict()
        return document

    def to_yaml(self) -> str:
        return yaml.safe_dump(self.to_dict(), sort_keys=False, default_flow_style=False)


def retention_seconds(retention: str) -> int:
    match = _RETENTION.match(retention or "")
    if not match or int(match.group(1)) <= 0:
        raise ArgumentError(f"Retention must look like '2 days' with a positive count, got {retention!r}")
    unit = {"sec": 1, "min": 60, "hour": 3600, "day": 86400, "week": 604800, "month": 2592000, "year": 31536000}
    return int(match.group(1)) * unit[match.group(2)]


def _command(*tokens) -> str:
    return " ".join(shlex.quote(str(t)) for t in tokens)


def _param_flags(integrator: Integrator) -> List[str]:
    flags = []
    for key, value in integrator.params.items():
        if value != integrator.defaults[key]:
            flags += ["--param", f"{integrator.name}.{key}={value}"]
    return flags


def _run_command(suite: BenchmarkSuite, integrator: Integrator, tier: str, output: str) -> str:
    return _command(
        "python", "-m", "cutquad", "run",
        "--tier", tier,
        "--integrator", integrator.name,
        "--testcase", ",".join(tc.id for tc in suite.testcases),
        "--operation", ",".join(op.value for op in suite.operations),
        "--meshes", ",".join(str(n) for n in suite.mesh_plan),
        "--order", suite.order,
        *_param_flags(integrator),
        "--output", output,
    )


def shift_travel(tc: TestCase) -> Optional[float]:
    """Horizontal travel +-t that keeps the interface inside the domain; None if there is no room."""
    lo, hi = tc.level_set.bounding_box()
    clearance = min(lo[0] - tc.domain.lo[0], tc.domain.hi[0] - hi[0])
    travel = min(SHIFT_TRAVEL, 0.9 * clearance)
    if travel <= 0:
        return None
    try:
        for sign in (-1.0, 1.0):
            translate_testcase(tc, (sign * travel,) + (0.0,) * (tc.dim - 1))
    except ArgumentError:
        return None
    return travel


def _shift_commands(suite: BenchmarkSuite, integrator: Integrator, output: str) -> List[str]:
    commands = []
    for tc in suite.testcases:
        for op in suite.operations:
            if op is not Operation.AREA_2D or not integrator.supports(op, tc)[0]:
                continue
            travel = shift_travel(tc)
            if travel is None:
                continue
            commands.append(_command(
                "python", "-m", "cutquad", "shift",
                "--testcase", tc.id,
                "--integrator", integrator.name,
                "--operation", op.value,
                "--divisions", SHIFT_DIVISIONS,
                "--steps", SHIFT_STEPS,
                f"--start=-{travel:g},0",
                f"--end={travel:g},0",
                "--order", suite.order,
                *_param_flags(integrator),
                "--output", f"{output}/shift-{tc.id}",
            ))
    return commands


def generate_pipeline(suite: BenchmarkSuite, runner_tags: Mapping[str, str], out_path: Optional[str] = None,
                      retention: str = DEFAULT_RETENTION,
                      baseline_path: str = DEFAULT_BASELINE) -> Tuple[PipelineSpec, str]:
    """Build, quick and extensive jobs per integrator, and one report job gating on the baseline."""
    names = [a.name for a in suite.integrators]
    unknown = sorted(set(runner_tags) - set(names))
    if unknown:
        raise ArgumentError(f"Runner tags given for integrators outside the suite: {', '.join(unknown)}")
    retention_seconds(retention)

    build = CiJob(
        "build", "build",
        ("python -m cutquad --version", "python -m cutquad list"),
        expire_in=retention,
    )
    quick_jobs, extensive_jobs = [], []
    for integrator in suite.integrators:
        tags = (runner_tags[integrator.name],) if integrator.name in runner_tags else ()
        quick_out = f"artifacts/quick-{integrator.name}"
        extensive_out = f"artifacts/extensive-{integrator.name}"
        quick_jobs.append(CiJob(
            f"quick-{integrator.name}", "quick",
            (_run_command(suite, integrator, "quick", quick_out),),
            tags, (quick_out + "/",), retention, ("build",),
        ))
        extensive_jobs.append(CiJob(
            f"extensive-{integrator.name}", "extensive",
            (_run_command(suite, integrator, "extensive", extensive_out),
             *_shift_commands(suite, integrator, extensive_out)),
            tags, (extensive_out + "/",), retention, (f"quick-{integrator.name}",),
        ))

    csvs = [f"artifacts/extensive-{name}/csv/measurements.csv" for name in names]
    report = CiJob(
        "report", "report",
        (
            _command("python", "-m", "cutquad", "report", "--measurements", *csvs,
                     "--baseline", baseline_path, "--output", "artifacts/report"),
            _command("python", "-m", "cutquad", "compare", "--baseline", baseline_path,
                     "--measurements", *csvs, "--output", "artifacts/report"),
        ),
        (), ("artifacts/report/",), retention, tuple(j.name for j in extensive_jobs),
    )

    spec = PipelineSpec(
        tuple(quick_jobs + extensive_jobs + [report]),
        build,
        STAGES,
        retention,
        {"CUTQUAD_REVISION": "$CI_COMMIT_SHORT_SHA"},
    )
    text = spec.to_yaml()
    if out_path:
        write_pipeline(text, out_path)
    return spec, text


def write_pipeline(text: str, out_path: str) -> str:
    directory = os.path.dirname(out_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(out_path, "w", newline="\n") as file:
        file.write(text)
    logger.info("Wrote pipeline to %s", out_path)
    return out_path


def tier_filter(suite: BenchmarkSuite, tier: str) -> Optional[BenchmarkSuite]:
    """quick: quick-tier cases on the coarsest mesh; extensive: everything; all: unchanged.

    Returns None, with a warning, when no test case is left.
    """
    if tier == "all":
        return suite
    if tier == "extensive":
        return replace(suite, tier="extensive")
    if tier != "quick":
        raise ArgumentError(f"Unknown tier {tier}; expected quick, extensive or all")
    testcases = tuple(tc for tc in suite.testcases if tc.tier is Tier.QUICK)
    if not testcases:
        logger.warning("Quick tier selects no test case from %s", ", ".join(tc.id for tc in suite.testcases))
        return None
    return replace(suite, testcases=testcases, mesh_plan=suite.mesh_plan[:1], tier="quick")


def gate_exit_code(report: ComparisonReport) -> int:
    if report.failed_measurements:
        return EXIT_ERROR
    if not report.passed:
        return EXIT_TOLERANCE
    return EXIT_PASS
