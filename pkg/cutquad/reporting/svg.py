"""Vector plots: quadrature points over the mesh, convergence and shift-error curves.

Each plot has a figure builder and an SVG writer. The writer saves with a fixed
hash salt and no date stamp, so identical inputs give identical bytes.
"""
import logging
import math
import os
from typing import Optional, Sequence

import matplotlib
import numpy as np
from matplotlib.figure import Figure

from cutquad.errors import ArgumentError
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.nurbs import sample_loop
from cutquad.geometry.testcase import TestCase
from cutquad.harness.studies import ConvergenceTable, ShiftSeries
from cutquad.quadrature import QuadratureData
from cutquad.reporting.artifacts import ArtifactManifest

logger = logging.getLogger(__name__)

INTERFACE_SAMPLES = 256
ERROR_DISPLAY_FLOOR = 1e-16
SVG_HASH_SALT = "cutquad"
SVG_RC = {"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}


def _clamp(error: float) -> float:
    return max(error, ERROR_DISPLAY_FLOOR)


def save_svg(figure, path: str, manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    """Write the figure as SVG and record it in the manifest."""
    directory = os.path.dirname(path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with matplotlib.rc_context(SVG_RC):
        figure.savefig(path, format="svg", metadata={"Date": None}, bbox_inches="tight")
    if manifest is not None:
        manifest.add(path, "svg", command)
    logger.info("Wrote %s", path)
    return path


def points_figure(tc: TestCase, mesh: CartesianMesh, quadrature: QuadratureData):
    """Mesh grid, one cross per quadrature point and the interface as a red dashed curve."""
    if tc.dim != 2 or mesh.dim != 2:
        raise ArgumentError(f"Point plots are 2D only, got the {tc.dim}D test case {tc.id}")
    if quadrature.n_points and quadrature.dim != 2:
        raise ArgumentError("Point plots need a 2D quadrature rule")

    (x0, y0), (x1, y1) = tc.domain.lo, tc.domain.hi
    fig = Figure(figsize=(5, max(1.0, 5 * (y1 - y0) / (x1 - x0))))
    ax = fig.subplots()
    xs, ys = mesh.grid_lines()
    ax.vlines(xs, ys[0], ys[-1], colors="#999999", linewidths=0.5, gid="grid-x")
    ax.hlines(ys, xs[0], xs[-1], colors="#999999", linewidths=0.5, gid="grid-y")

    points = quadrature.points.reshape(-1, 2)
    ax.plot(points[:, 0], points[:, 1], "x", color="black", markersize=4, gid="points")

    if tc.loop is not None:
        samples = sample_loop(tc.loop, INTERFACE_SAMPLES)
        samples = np.vstack([samples, samples[:1]])
        ax.plot(samples[:, 0], samples[:, 1], "--", color="red", linewidth=1.5, gid="interface")

    ax.set_xlim(x0, x1)
    ax.set_ylim(y0, y1)
    ax.set_aspect("equal")
    ax.set_title(f"{tc.id}: {quadrature.n_points} quadrature points")
    return fig


def plot_points_svg(tc: TestCase, mesh: CartesianMesh, quadrature: QuadratureData, path: str,
                    manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    return save_svg(points_figure(tc, mesh, quadrature), path, manifest, command)


def convergence_figure(tables: Sequence[ConvergenceTable]):
    """Log-log h against relative error, one series per table, markers annotated with n_points.

    Non-finite errors are dropped; zero errors sit on the display floor.
    """
    if not tables:
        raise ArgumentError("A convergence plot needs at least one table")

    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.subplots()
    for table in tables:
        finite = [(h, _clamp(m.rel_error), m.n_points)
                  for h, m in zip(table.h, table.rows) if math.isfinite(m.rel_error)]
        hs = [p[0] for p in finite]
        errors = [p[1] for p in finite]
        (line,) = ax.plot(hs, errors, marker="o", markersize=3, linewidth=1.5,
                          label=f"{table.integrator_name} ({table.order_label})",
                          gid=f"series-{table.integrator_name}")
        for h, error, n_points in finite:
            ax.annotate(str(n_points), (h, error), xytext=(4, 4), textcoords="offset points",
                        fontsize=7, color=line.get_color())
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("mesh size h")
    ax.set_ylabel("relative error")
    ax.set_title(f"Convergence: {tables[0].testcase_id} / {tables[0].operation}")
    ax.legend(loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=8)
    return fig


def plot_convergence_svg(tables: Sequence[ConvergenceTable], path: str,
                         manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    return save_svg(convergence_figure(tables), path, manifest, command)


def shift_figure(series: Sequence[ShiftSeries]):
    """Step index (linear) against relative error (log), one series per integrator."""
    if not series:
        raise ArgumentError("A shift plot needs at least one series")

    fig = Figure(figsize=(6.4, 4.8))
    ax = fig.subplots()
    for s in series:
        points = [(k, _clamp(e)) for k, e in enumerate(s.rel_errors) if math.isfinite(e)]
        ax.plot([p[0] for p in points], [p[1] for p in points], linewidth=1.0,
                label=s.integrator_name, gid=f"series-{s.integrator_name}")
    ax.set_yscale("log")
    ax.set_xlabel("step")
    ax.set_ylabel("relative error")
    ax.set_title(f"Shift study: {series[0].testcase_id} / {series[0].operation}")
    ax.legend(loc="upper left", bbox_to_anchor=(1.01, 1.0), fontsize=8)
    return fig


def plot_shift_svg(series: Sequence[ShiftSeries], path: str,
                   manifest: Optional[ArtifactManifest] = None, command: str = "") -> str:
    return save_svg(shift_figure(series), path, manifest, command)
