"""Command-line entry point: `python -m cutquad <subcommand> ...`.

Exit codes: 0 success, 1 baseline tolerance failure, 2 argument/file errors or
failed measurements.
"""
import argparse
import logging
import os
import shlex
import sys
from dataclasses import replace
from typing import Dict, List, Optional, Sequence

from cutquad._version import __version__
from cutquad.ci import EXIT_ERROR, EXIT_PASS, gate_exit_code, generate_pipeline, tier_filter, write_pipeline
from cutquad.config import ENV_VARS, Settings, load_settings
from cutquad.errors import ArgumentError, BaselineError, CatalogError
from cutquad.geometry.catalog import builtin_catalog, load_catalog
from cutquad.geometry.testcase import TestCase, mesh_for
from cutquad.harness.baseline import (
    DEFAULT_ABS_SLACK,
    DEFAULT_MULT_SLACK,
    TolerancePolicy,
    compare_to_baseline,
    load_baseline,
    record_baseline,
    save_baseline,
)
from cutquad.harness.studies import convergence_study, shift_study, tables_from_measurements
from cutquad.harness.suite import BenchmarkSuite, Measurement, read_measurements_csv, run_suite
from cutquad.integrators.base import Integrator, Operation, Status
from cutquad.integrators.registry import IntegratorRegistry, default_registry, parse_param_overrides
from cutquad.reporting.artifacts import ArtifactManifest, write_manifest
from cutquad.reporting.html import html_summary
from cutquad.reporting.svg import plot_convergence_svg, plot_points_svg, plot_shift_svg
from cutquad.reporting.tables import (
    write_comparison_json,
    write_convergence_csv,
    write_measurements_csv,
    write_shift_csv,
)

logger = logging.getLogger(__name__)

DEFAULT_MESHES = "2,4,8"
DEFAULT_CONVERGENCE_MESHES = "2,4,8,16,32"
DEFAULT_CATALOG_DIR = "catalog"
POINT_PLOT_LIMIT = 20000
MEASUREMENTS_CSV = "measurements.csv"


def _split(text) -> List[str]:
    if isinstance(text, (list, tuple)):
        return [str(t).strip() for t in text if str(t).strip()]
    return [t.strip() for t in str(text).split(",") if t.strip()]


def _ints(text, what: str) -> List[int]:
    try:
        return [int(t) for t in _split(text)]
    except ValueError:
        raise ArgumentError(f"{what} must be a comma-separated list of integers, got {text!r}")


def _floats(text, what: str) -> List[float]:
    try:
        return [float(t) for t in _split(text)]
    except ValueError:
        raise ArgumentError(f"{what} must be a comma-separated list of numbers, got {text!r}")


def _choose(flag, settings: Settings, key: str, default):
    """Flag value if given, else the config-file selection, else the default."""
    if flag is not None:
        return flag
    return settings.selection.get(key, default)


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="JSON config file; flags given here win over it")
    common.add_argument("--output", help="Artifact directory (default: CUTQUAD_OUTPUT_DIR or ./artifacts)")
    common.add_argument("--catalog", help="Directory of test-case documents (default: ./catalog)")
    common.add_argument("-v", "--verbose", action="count", default=0, help="-v for INFO, -vv for DEBUG logging")

    selection = argparse.ArgumentParser(add_help=False)
    selection.add_argument("--order", type=int, help="Gauss points per direction in each cell (default 5)")
    selection.add_argument("--param", action="append", default=None, metavar="NAME.KEY=VALUE",
                           help="Integrator parameter override, e.g. quadtree.depth=6; repeatable")
    selection.add_argument("--seed", type=int, help="Seed of the Monte-Carlo integrator (default 42)")
    selection.add_argument("--timing", action=argparse.BooleanOptionalAction, default=None,
                           help="Median-of-3 wall-clock timing, serial execution")
    selection.add_argument("--jobs", type=int, help="Worker threads when timing is off (default 1)")

    parser = argparse.ArgumentParser(prog="cutquad", description="Cut-cell quadrature benchmarking toolkit.")
    parser.add_argument("--version", action="store_true", help="Print the code revision and exit")
    subparsers = parser.add_subparsers(dest="command", metavar="COMMAND")

    p = subparsers.add_parser("list", parents=[common], help="List integrators (and test cases)")
    p.add_argument("--testcases", action="store_true", help="Also list the catalog test cases")

    p = subparsers.add_parser("run", parents=[common, selection], help="Run the benchmark matrix")
    p.add_argument("--integrator", help="Comma-separated integrator names (default: all)")
    p.add_argument("--testcase", help="Comma-separated test-case ids (default: whole catalog)")
    p.add_argument("--operation", help="Comma-separated operations (default: all six)")
    p.add_argument("--meshes", help=f"Comma-separated division counts (default {DEFAULT_MESHES})")
    p.add_argument("--tier", choices=("quick", "extensive", "all"), default="all")
    p.add_argument("--baseline", help="Compare against this baseline and gate the exit code")

    p = subparsers.add_parser("convergence", parents=[common, selection], help="Mesh-refinement study")
    p.add_argument("--testcase", required=True)
    p.add_argument("--integrator", help="Comma-separated integrator names (default: all)")
    p.add_argument("--operation", default="area2d")
    p.add_argument("--meshes", help=f"Comma-separated division counts (default {DEFAULT_CONVERGENCE_MESHES})")

    p = subparsers.add_parser("shift", parents=[common, selection], help="Geometry-shift robustness study")
    p.add_argument("--testcase", required=True)
    p.add_argument("--integrator", help="Comma-separated integrator names (default: all)")
    p.add_argument("--operation", default="area2d")
    p.add_argument("--divisions", type=int, default=8)
    p.add_argument("--steps", type=int, default=1000)
    p.add_argument("--start", default="-0.25,0", help="Start offset; write negative values as --start=-0.25,0")
    p.add_argument("--end", default="0.25,0", help="End offset, e.g. --end=0.25,0")

    p = subparsers.add_parser("compare", parents=[common], help="Compare measurements with a baseline")
    p.add_argument("--baseline", required=True)
    p.add_argument("--measurements", nargs="+", required=True, metavar="CSV")

    p = subparsers.add_parser("baseline", parents=[common], help="Record a baseline from measurements")
    p.add_argument("--measurements", nargs="+", required=True, metavar="CSV")
    p.add_argument("--out", required=True, help="Baseline file to write")
    p.add_argument("--abs-slack", type=float, default=DEFAULT_ABS_SLACK)
    p.add_argument("--mult-slack", type=float, default=DEFAULT_MULT_SLACK)

    p = subparsers.add_parser("report", parents=[common], help="HTML summary and plots from measurements")
    p.add_argument("--measurements", nargs="+", required=True, metavar="CSV")
    p.add_argument("--baseline", help="Add pass/fail badges from this baseline")

    p = subparsers.add_parser("ci-init", parents=[common, selection], help="Write a CI pipeline and starter baseline")
    p.add_argument("--integrator", help="Comma-separated integrator names (default: all)")
    p.add_argument("--testcase", help="Comma-separated test-case ids (default: whole catalog)")
    p.add_argument("--operation", help="Comma-separated operations (default: all six)")
    p.add_argument("--meshes", help=f"Comma-separated division counts (default {DEFAULT_MESHES})")
    p.add_argument("--tag", action="append", default=[], metavar="NAME=TAG",
                   help="Runner tag per integrator, e.g. quadtree=linux-runner; repeatable")
    p.add_argument("--out", default=".gitlab-ci.yml", help="Pipeline file to write")
    p.add_argument("--baseline-out", default="baselines/baseline.json", help="Starter baseline to write")
    p.add_argument("--retention", default="2 days", help="Artifact retention (default '2 days')")

    return parser


def _configure_logging(args, settings: Optional[Settings] = None):
    """Flags first, then the settings level, or CUTQUAD_LOG_LEVEL before settings exist."""
    verbose = getattr(args, "verbose", 0)
    if verbose >= 2:
        level = logging.DEBUG
    elif verbose == 1:
        level = logging.INFO
    else:
        name = settings.log_level if settings is not None else os.getenv(ENV_VARS["log_level"]) or "WARNING"
        level = getattr(logging, str(name).upper(), logging.WARNING)
    logging.basicConfig(level=level, format="%(asctime)s %(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    logging.getLogger().setLevel(level)


def _settings(args) -> Settings:
    settings = load_settings(getattr(args, "config", None))
    updates = {}
    if getattr(args, "output", None):
        updates["output_dir"] = args.output
    if getattr(args, "catalog", None):
        updates["catalog_dir"] = args.catalog
    for name in ("jobs", "seed", "order", "timing"):
        value = getattr(args, name, None)
        if value is not None:
            updates[name] = value
    return replace(settings, **updates)


def _catalog(settings: Settings) -> List[TestCase]:
    if settings.catalog_dir == DEFAULT_CATALOG_DIR and not os.path.isdir(DEFAULT_CATALOG_DIR):
        logger.info("No ./catalog directory; using the built-in catalog")
        return builtin_catalog()
    return load_catalog(settings.catalog_dir)


def _select_testcases(catalog: Sequence[TestCase], ids) -> List[TestCase]:
    by_id = {tc.id: tc for tc in catalog}
    if ids is None:
        return list(catalog)
    selected = []
    for i in _split(ids):
        if i not in by_id:
            raise ArgumentError(f"Unknown test case {i} (known: {', '.join(by_id)})")
        selected.append(by_id[i])
    return selected


def _select_operations(names) -> List[Operation]:
    if names is None:
        return list(Operation)
    try:
        return [Operation(n) for n in _split(names)]
    except ValueError:
        raise ArgumentError(f"Unknown operation in {names!r} (known: {', '.join(op.value for op in Operation)})")


def _select_integrators(registry: IntegratorRegistry, args, settings: Settings) -> List[Integrator]:
    names = _split(_choose(args.integrator, settings, "integrators", ",".join(registry.names())))
    pairs = args.param if args.param is not None else settings.selection.get("params", [])
    overrides = parse_param_overrides(pairs, registry)
    if "montecarlo" in names and "seed" not in overrides.get("montecarlo", {}):
        overrides.setdefault("montecarlo", {})["seed"] = settings.seed
    return registry.resolve(names, overrides)


def _command_line(argv: Sequence[str]) -> str:
    return "cutquad " + " ".join(shlex.quote(a) for a in argv)


def _plot_points(manifest: ArtifactManifest, measurements: Sequence[Measurement], testcases: Sequence[TestCase],
                 integrators: Sequence[Integrator], order: int, command: str) -> List[str]:
    """Point plots for 2D cases at the coarsest mesh; large rules are skipped."""
    by_tc = {tc.id: tc for tc in testcases}
    by_name = {a.name: a for a in integrators}
    coarsest = min((m.mesh_divisions for m in measurements), default=None)
    paths = []
    for m in measurements:
        tc = by_tc.get(m.testcase_id)
        if tc is None or tc.dim != 2 or m.mesh_divisions != coarsest or m.status is not Status.OK:
            continue
        if m.n_points > POINT_PLOT_LIMIT:
            logger.info("Skipping point plot for %s/%s: %d points", m.testcase_id, m.integrator_name, m.n_points)
            continue
        mesh = mesh_for(tc, m.mesh_divisions)
        result = by_name[m.integrator_name].compute(m.operation, tc, mesh, order)
        if not result.ok or result.quadrature is None:
            continue
        path = os.path.join(manifest.subdir("plots"), f"points-{tc.id}-{m.integrator_name}-{m.operation}.svg")
        paths.append(plot_points_svg(tc, mesh, result.quadrature, path, manifest, command))
    return paths


def _summary(manifest: ArtifactManifest, measurements, report, plots, settings: Settings, command: str) -> str:
    path = os.path.join(manifest.subdir("summary"), "summary.html")
    return html_summary(measurements, report, plots, path, manifest, command, settings.revision)


def _finish(manifest: ArtifactManifest):
    path = write_manifest(manifest)
    print(f"[OK] Manifest saved: {path}")


def _failed_exit(measurements: Sequence[Measurement]) -> int:
    return EXIT_ERROR if any(m.status is Status.FAILED for m in measurements) else EXIT_PASS


def cmd_list(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    for d in registry.descriptors():
        caps = ",".join(op.value for op in Operation if op in d.capabilities)
        dims = ",".join(str(n) for n in sorted(d.supported_dims))
        print(f"{d.name:<14} {d.interface_type.value:<11} dims={dims:<4} caps={caps}  [{d.property_string}]")
    if args.testcases:
        for tc in _catalog(settings):
            refs = ", ".join(f"{k}={v:.12g}" for k, v in tc.references.items())
            print(f"{tc.id:<14} dim={tc.dim} tier={tc.tier.value:<9} {refs}")
    return EXIT_PASS


def _suite(args, settings: Settings, registry: IntegratorRegistry):
    catalog = _catalog(settings)
    testcases = _select_testcases(catalog, _choose(args.testcase, settings, "testcases", None))
    operations = _select_operations(_choose(args.operation, settings, "operations", None))
    meshes = _ints(_choose(args.meshes, settings, "meshes", DEFAULT_MESHES), "--meshes")
    integrators = _select_integrators(registry, args, settings)
    suite = BenchmarkSuite(testcases, integrators, operations, meshes, order=settings.order,
                           timing=settings.timing, jobs=settings.jobs)
    return suite


def cmd_run(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    suite = tier_filter(_suite(args, settings, registry), args.tier)
    baseline = load_baseline(args.baseline) if args.baseline else None

    manifest = ArtifactManifest.open(settings.output_dir)
    measurements = run_suite(suite) if suite is not None else []
    csv_path = os.path.join(manifest.subdir("csv"), MEASUREMENTS_CSV)
    print(f"[OK] Measurements saved: {write_measurements_csv(measurements, csv_path, manifest, command)}")

    plots = []
    if suite is not None:
        plots = _plot_points(manifest, measurements, suite.testcases, suite.integrators, suite.order, command)

    report = None
    if baseline is not None:
        report = compare_to_baseline(measurements, baseline)
        write_comparison_json(report, os.path.join(manifest.subdir("summary"), "comparison.json"), manifest, command)
    print(f"[OK] Summary saved: {_summary(manifest, measurements, report, plots, settings, command)}")
    _finish(manifest)
    return gate_exit_code(report) if report is not None else _failed_exit(measurements)


def cmd_convergence(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    tc = _select_testcases(_catalog(settings), args.testcase)[0]
    operation = _select_operations(args.operation)[0]
    meshes = _ints(_choose(args.meshes, settings, "meshes", DEFAULT_CONVERGENCE_MESHES), "--meshes")
    if len(meshes) < 2:
        raise ArgumentError(f"A convergence study needs at least two meshes, got {meshes}")
    integrators = _select_integrators(registry, args, settings)
    BenchmarkSuite((tc,), integrators, (operation,), meshes, order=settings.order)

    manifest = ArtifactManifest.open(settings.output_dir)
    tables = [convergence_study(tc, a, operation, meshes, settings.order, settings.timing) for a in integrators]
    measurements = [m for t in tables for m in t.rows]
    for t in tables:
        print(f"{t.integrator_name:<14} order={t.order_label}")
    write_measurements_csv(measurements, os.path.join(manifest.subdir("csv"), MEASUREMENTS_CSV), manifest, command)
    write_convergence_csv(tables, os.path.join(manifest.subdir("csv"), "convergence.csv"), manifest, command)
    plot = plot_convergence_svg(
        tables, os.path.join(manifest.subdir("plots"), f"convergence-{tc.id}-{operation.value}.svg"), manifest, command
    )
    _summary(manifest, measurements, None, [plot], settings, command)
    _finish(manifest)
    return _failed_exit(measurements)


def cmd_shift(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    tc = _select_testcases(_catalog(settings), args.testcase)[0]
    operation = _select_operations(args.operation)[0]
    start = _floats(args.start, "--start")
    end = _floats(args.end, "--end")
    integrators = _select_integrators(registry, args, settings)
    BenchmarkSuite((tc,), integrators, (operation,), (args.divisions,), order=settings.order)

    series = [shift_study(tc, a, operation, args.divisions, args.steps, start, end, settings.order, settings.timing)
              for a in integrators]

    manifest = ArtifactManifest.open(settings.output_dir)
    for s in series:
        summary = s.summary()
        print(f"{s.integrator_name:<14} max={summary.max_rel_error:.3e} median={summary.median_rel_error:.3e} "
              f"failed={summary.failed} unsupported={summary.unsupported}")
    write_shift_csv(series, os.path.join(manifest.subdir("csv"), "shift.csv"), manifest, command)
    plot_shift_svg(series, os.path.join(manifest.subdir("plots"), f"shift-{tc.id}-{operation.value}.svg"),
                   manifest, command)
    _finish(manifest)
    return _failed_exit([m for s in series for m in s.measurements])


def _report_lines(report):
    for r in report.results:
        if not r.passed:
            print("FAIL " + " / ".join(str(k) for k in r.entry.key) + f": {r.reason}")
    for key in report.failed_measurements:
        print("ERROR " + " / ".join(str(k) for k in key) + ": integrator failed")
    verdict = "PASS" if report.passed else "FAIL"
    print(f"{verdict}: {len(report.results) - report.n_failures}/{len(report.results)} entries passed, "
          f"{len(report.extras)} untracked")


def cmd_compare(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    baseline = load_baseline(args.baseline)
    measurements = read_measurements_csv(args.measurements)

    manifest = ArtifactManifest.open(settings.output_dir)
    report = compare_to_baseline(measurements, baseline)
    write_comparison_json(report, os.path.join(manifest.subdir("summary"), "comparison.json"), manifest, command)
    _report_lines(report)
    _finish(manifest)
    return gate_exit_code(report)


def cmd_baseline(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    measurements = read_measurements_csv(args.measurements)
    policy = TolerancePolicy(args.abs_slack, args.mult_slack)

    manifest = ArtifactManifest.open(settings.output_dir)
    baseline = record_baseline(measurements, policy, settings.revision)
    save_baseline(baseline, args.out)
    manifest.add(args.out, "json", command)
    print(f"[OK] Baseline saved: {args.out} ({len(baseline.entries)} entries)")
    _finish(manifest)
    return EXIT_PASS


def cmd_report(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    measurements = read_measurements_csv(args.measurements)
    baseline = load_baseline(args.baseline) if args.baseline else None
    try:
        widths: Dict[str, float] = {tc.id: float(tc.domain.widths[0]) for tc in _catalog(settings)}
    except (ArgumentError, CatalogError, FileNotFoundError) as e:
        logger.warning("Catalog unavailable, assuming unit domains: %s", e)
        widths = {}

    manifest = ArtifactManifest.open(settings.output_dir)
    report = None
    if baseline is not None:
        report = compare_to_baseline(measurements, baseline)
        write_comparison_json(report, os.path.join(manifest.subdir("summary"), "comparison.json"), manifest, command)

    plots = []
    groups: Dict[tuple, list] = {}
    for table in tables_from_measurements(measurements, widths):
        groups.setdefault((table.testcase_id, table.operation), []).append(table)
    for (testcase_id, operation), tables in groups.items():
        if any(t.order_label != "n/a" for t in tables):
            path = os.path.join(manifest.subdir("plots"), f"convergence-{testcase_id}-{operation}.svg")
            plots.append(plot_convergence_svg(tables, path, manifest, command))
    print(f"[OK] Summary saved: {_summary(manifest, measurements, report, plots, settings, command)}")
    _finish(manifest)
    return EXIT_PASS


def _runner_tags(pairs: Sequence[str]) -> Dict[str, str]:
    tags = {}
    for pair in pairs:
        name, sep, tag = pair.partition("=")
        if not sep or not name.strip() or not tag.strip():
            raise ArgumentError(f"Runner tag must look like integrator=tag, got {pair!r}")
        tags[name.strip()] = tag.strip()
    return tags


def cmd_ci_init(args, settings: Settings, registry: IntegratorRegistry, command: str) -> int:
    suite = _suite(args, settings, registry)
    tags = _runner_tags(args.tag)
    spec, text = generate_pipeline(suite, tags, None, args.retention, args.baseline_out)

    manifest = ArtifactManifest.open(settings.output_dir)
    write_pipeline(text, args.out)
    manifest.add(args.out, "yaml", command)
    print(f"[OK] Pipeline saved: {args.out} ({len(spec.jobs) + 1} jobs)")

    measurements = run_suite(suite)
    write_measurements_csv(measurements, os.path.join(manifest.subdir("csv"), MEASUREMENTS_CSV), manifest, command)
    save_baseline(record_baseline(measurements, revision=settings.revision), args.baseline_out)
    manifest.add(args.baseline_out, "json", command)
    print(f"[OK] Baseline saved: {args.baseline_out}")
    _finish(manifest)
    return _failed_exit(measurements)


COMMANDS = {
    "list": cmd_list,
    "run": cmd_run,
    "convergence": cmd_convergence,
    "shift": cmd_shift,
    "compare": cmd_compare,
    "baseline": cmd_baseline,
    "report": cmd_report,
    "ci-init": cmd_ci_init,
}


def main(argv: Optional[Sequence[str]] = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_ERROR

    _configure_logging(args)
    try:
        settings = _settings(args)
        if args.version:
            print(f"cutquad {__version__} ({settings.revision})")
            return EXIT_PASS
        if args.command is None:
            parser.print_help(sys.stderr)
            return EXIT_ERROR
        _configure_logging(args, settings)
        return COMMANDS[args.command](args, settings, default_registry(), _command_line(argv))
    except (ArgumentError, CatalogError, BaselineError, FileNotFoundError) as e:
        print(f"cutquad: error: {e}", file=sys.stderr)
        return EXIT_ERROR
