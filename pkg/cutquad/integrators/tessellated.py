"""Quadtree refinement whose lowest level is triangulated along the reconstructed interface."""
import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.testcase import TestCase
from cutquad.integrators.base import Integrator, InterfaceType, Operation, check_mesh, mesh_boxes
from cutquad.integrators.quadtree import MAX_DEPTH, refine
from cutquad.integrators.reconstruction import flux_area, reconstruct_leaves
from cutquad.quadrature import QuadratureData, rule_total, tensor_rules


class TessellatedQuadtreeIntegrator(Integrator):
    name = "quadtree-tri"
    interface_type = InterfaceType.IMPLICIT
    supported_dims = frozenset({2})
    capabilities = frozenset({Operation.AREA_2D, Operation.CURVE_LENGTH, Operation.AREA_FLUX_2D})
    defaults = {"depth": 3, "samples": 3}

    def validate_params(self):
        if not 0 <= self.params["depth"] <= MAX_DEPTH:
            raise ArgumentError(f"quadtree-tri.depth must be in 0..{MAX_DEPTH}")
        if self.params["samples"] < 2:
            raise ArgumentError("quadtree-tri.samples must be >= 2")

    def integrate(self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int):
        check_mesh(tc, mesh)
        lo, hi = mesh_boxes(mesh)
        leaves = refine(tc.level_set, lo, hi, np.arange(len(lo)), self.params["depth"], self.params["samples"])
        rules = reconstruct_leaves(tc.level_set, *leaves.cut, order, self.name)
        message = f"{rules.fallbacks} fallback leaves" if rules.fallbacks else ""

        if operation is Operation.CURVE_LENGTH:
            return rule_total(rules.interface), rules.interface, message
        if operation is Operation.AREA_FLUX_2D:
            return flux_area(rules.interface), rules.interface, message

        inside_lo, inside_hi, inside_ids = leaves.inside
        points, weights = tensor_rules(order, inside_lo, inside_hi)
        inside = QuadratureData(points, weights, np.repeat(inside_ids, order**2), self.name)
        rule = QuadratureData.concatenate([inside, rules.volume], 2, self.name)
        return rule_total(rule), rule, message
