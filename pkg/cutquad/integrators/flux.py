"""Green's theorem on the parametric loop: mesh-free area, length and flux rules."""
from typing import Tuple

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.nurbs import NurbsLoop, nurbs_derivative, nurbs_eval
from cutquad.geometry.testcase import TestCase
from cutquad.integrators.base import Integrator, InterfaceType, Operation
from cutquad.quadrature import MAX_GAUSS_POINTS, QuadratureData, gauss_on_interval, rule_total, sequential_sum


def loop_rule(loop: NurbsLoop, order: int):
    """Gauss(order) on every non-degenerate knot span of every curve.

    Returns points x(t), velocities x'(t) and parameter weights.
    """
    if not 1 <= order <= MAX_GAUSS_POINTS:
        raise ArgumentError(f"Curve quadrature order must be in 1..{MAX_GAUSS_POINTS}, got {order}")
    points, velocities, weights = [], [], []
    for curve in loop.curves:
        for a, b in curve.spans():
            nodes, w = gauss_on_interval(order, a, b)
            for t in nodes:
                points.append(nurbs_eval(curve, t))
                velocities.append(nurbs_derivative(curve, t))
            weights.append(w)
    return np.array(points), np.array(velocities), np.concatenate(weights)


def _interface_rule(points, velocities, weights, generator) -> QuadratureData:
    speed = np.linalg.norm(velocities, axis=1)
    normals = np.stack([velocities[:, 1], -velocities[:, 0]], axis=-1) / speed[:, None]
    return QuadratureData(points, weights * speed, None, generator, normals)


def flux_area_parametric(loop: NurbsLoop, order: int, generator: str = "flux") -> Tuple[float, QuadratureData]:
    """Area as the closed line integral of x dy; negative for a clockwise loop."""
    points, velocities, weights = loop_rule(loop, order)
    value = sequential_sum(weights * points[:, 0] * velocities[:, 1])
    return value, _interface_rule(points, velocities, weights, generator)


def flux_area_symmetric(loop: NurbsLoop, order: int, generator: str = "flux") -> Tuple[float, QuadratureData]:
    """Area as 1/2 of the closed line integral of (x dy - y dx)."""
    points, velocities, weights = loop_rule(loop, order)
    integrand = points[:, 0] * velocities[:, 1] - points[:, 1] * velocities[:, 0]
    value = 0.5 * sequential_sum(weights * integrand)
    return value, _interface_rule(points, velocities, weights, generator)


def curve_length_parametric(loop: NurbsLoop, order: int, generator: str = "flux") -> Tuple[float, QuadratureData]:
    points, velocities, weights = loop_rule(loop, order)
    rule = _interface_rule(points, velocities, weights, generator)
    return rule_total(rule), rule


class ParametricFluxIntegrator(Integrator):
    """Works on the NURBS loop alone; the background mesh is ignored."""

    name = "flux"
    interface_type = InterfaceType.PARAMETRIC
    supported_dims = frozenset({2})
    capabilities = frozenset({Operation.AREA_2D, Operation.CURVE_LENGTH, Operation.AREA_FLUX_2D})
    defaults = {"curve_order": 20}

    def validate_params(self):
        if not 1 <= self.params["curve_order"] <= MAX_GAUSS_POINTS:
            raise ArgumentError(f"flux.curve_order must be in 1..{MAX_GAUSS_POINTS}")

    def integrate(self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int):
        curve_order = self.params["curve_order"]
        if operation is Operation.AREA_2D:
            value, rule = flux_area_symmetric(tc.loop, curve_order, self.name)
        elif operation is Operation.AREA_FLUX_2D:
            value, rule = flux_area_parametric(tc.loop, curve_order, self.name)
        else:
            value, rule = curve_length_parametric(tc.loop, curve_order, self.name)
        return value, rule, ""
