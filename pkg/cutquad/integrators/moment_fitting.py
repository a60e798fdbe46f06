"""Moment fitting: weights at fixed tensor Gauss nodes matching the moments of the cut region.

Moments of the reference monomials xi**i * eta**j (i + j <= degree), with
xi = (x - cx) / hx and eta = (y - cy) / hy on the cell's half widths, are
computed exactly on the reconstructed inside polygons through the divergence
theorem. Fitted weights may be negative.
"""
import logging
from typing import List

import numpy as np
from scipy.linalg import lstsq

from cutquad.errors import ArgumentError, MomentFittingError
from cutquad.geometry.levelset import ImplicitFunction
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.testcase import TestCase
from cutquad.integrators.base import Integrator, InterfaceType, Operation, check_mesh, mesh_boxes
from cutquad.integrators.reconstruction import marching_squares_polygon
from cutquad.quadrature import (
    CellClass,
    QuadratureData,
    box_bounds,
    classify_boxes,
    classify_cell,
    gauss_legendre,
    rule_total,
    tensor_rule,
    tensor_rules,
)

logger = logging.getLogger(__name__)

RESIDUAL_TOLERANCE = 1e-10


def exponents(degree: int):
    return [(i, d - i) for d in range(degree + 1) for i in range(d, -1, -1)]


def monomials(points: np.ndarray, lo: np.ndarray, hi: np.ndarray, degree: int) -> np.ndarray:
    """Rows: reference monomials, columns: points."""
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    xi = (points[:, 0] - center[0]) / half[0]
    eta = (points[:, 1] - center[1]) / half[1]
    return np.array([xi**i * eta**j for i, j in exponents(degree)])


def polygon_moments(polygons: List[np.ndarray], lo: np.ndarray, hi: np.ndarray, degree: int) -> np.ndarray:
    """Integral of every reference monomial over the union of the polygons.

    With G = hx xi**(i+1) / (i+1) eta**j, dG/dx = xi**i eta**j and the area
    integral becomes the closed line integral of G dy along each polygon.
    """
    center = 0.5 * (lo + hi)
    half = 0.5 * (hi - lo)
    nodes, weights = gauss_legendre(degree // 2 + 2)
    s = 0.5 * (nodes + 1.0)
    w = 0.5 * weights

    moments = np.zeros(len(exponents(degree)))
    for polygon in polygons:
        start = np.asarray(polygon, dtype=float)
        end = np.roll(start, -1, axis=0)
        points = start[:, None, :] + s[None, :, None] * (end - start)[:, None, :]
        dy = (end - start)[:, 1]
        xi = (points[..., 0] - center[0]) / half[0]
        eta = (points[..., 1] - center[1]) / half[1]
        for k, (i, j) in enumerate(exponents(degree)):
            g = half[0] * xi ** (i + 1) / (i + 1) * eta**j
            moments[k] += float(np.sum(dy[:, None] * w[None, :] * g))
    return moments


def fit_weights(points: np.ndarray, moments: np.ndarray, lo: np.ndarray, hi: np.ndarray, degree: int) -> np.ndarray:
    basis = monomials(points, lo, hi, degree)
    solution, _, rank, _ = lstsq(basis, moments)
    if rank < len(moments):
        raise MomentFittingError(f"moment system is rank deficient ({rank} < {len(moments)})")
    measure = float(np.prod(hi - lo))
    residual = float(np.max(np.abs(basis @ solution - moments)))
    if residual > RESIDUAL_TOLERANCE * measure:
        raise MomentFittingError(f"moment residual {residual:.3e} above {RESIDUAL_TOLERANCE:g} x cell measure")
    return solution


def moment_fit_cell(ls: ImplicitFunction, cell, degree: int, order: int, samples_per_axis: int = 3,
                    generator: str = "momentfit") -> QuadratureData:
    """Weights at the order x order tensor Gauss nodes of the cell reproducing the cut moments.

    Inside cells short-circuit to the plain tensor rule, Outside cells to an
    empty rule.
    """
    if degree < 0 or degree > order:
        raise ArgumentError(f"Moment degree must be in 0..order ({order}), got {degree}")
    lo, hi = box_bounds(cell)
    cls = classify_cell(ls, (lo, hi), samples_per_axis)
    if cls is CellClass.INSIDE:
        return tensor_rule(order, (lo, hi), generator)
    if cls is CellClass.OUTSIDE:
        return QuadratureData.empty(2, generator)

    rec = marching_squares_polygon(ls, (lo, hi))
    if not rec.polygons:
        return QuadratureData.empty(2, generator)
    moments = polygon_moments(rec.polygons, lo, hi, degree)
    nodes = tensor_rule(order, (lo, hi), generator).points
    return QuadratureData(nodes, fit_weights(nodes, moments, lo, hi, degree), None, generator)


class MomentFittingIntegrator(Integrator):
    name = "momentfit"
    interface_type = InterfaceType.IMPLICIT
    supported_dims = frozenset({2})
    capabilities = frozenset({Operation.AREA_2D})
    defaults = {"degree": 2, "samples": 3}

    def validate_params(self):
        if self.params["degree"] < 0:
            raise ArgumentError("momentfit.degree must be >= 0")
        if self.params["samples"] < 2:
            raise ArgumentError("momentfit.samples must be >= 2")

    def integrate(self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int):
        check_mesh(tc, mesh)
        ls = tc.level_set
        degree, samples = self.params["degree"], self.params["samples"]
        lo, hi = mesh_boxes(mesh)
        classes = classify_boxes(ls, lo, hi, samples)

        inside = np.flatnonzero(classes == CellClass.INSIDE)
        points, weights = tensor_rules(order, lo[inside], hi[inside])
        parts = [QuadratureData(points, weights, np.repeat(inside, order**2), self.name)]
        for k in np.flatnonzero(classes == CellClass.CUT):
            parts.append(moment_fit_cell(ls, (lo[k], hi[k]), degree, order, samples, self.name).with_cell(k))
        logger.debug("%s: fitted %d cut cells", tc.id, len(parts) - 1)

        rule = QuadratureData.concatenate(parts, 2, self.name)
        return rule_total(rule), rule, ""
