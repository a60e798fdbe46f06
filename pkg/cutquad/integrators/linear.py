"""Linear interface reconstruction on a uniform sub-grid of each cut background cell.

Every cut cell is split into subdivisions x subdivisions sub-cells and the
interface is replaced by straight segments between edge roots, so area and
length converge as O(h**2) in the background mesh width.
"""
import logging

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.testcase import TestCase
from cutquad.integrators.base import Integrator, InterfaceType, Operation, check_mesh, mesh_boxes
from cutquad.integrators.reconstruction import flux_area, reconstruct_leaves
from cutquad.quadrature import CellClass, QuadratureData, classify_boxes, rule_total, tensor_rules

logger = logging.getLogger(__name__)


def subdivide(lo: np.ndarray, hi: np.ndarray, ids: np.ndarray, n: int):
    """n x n uniform sub-boxes per box, shared edges computed identically."""
    t = np.arange(n + 1) / n
    nodes_x = lo[:, 0:1] + (hi[:, 0:1] - lo[:, 0:1]) * t[None, :]
    nodes_y = lo[:, 1:2] + (hi[:, 1:2] - lo[:, 1:2]) * t[None, :]
    nodes_x[:, -1] = hi[:, 0]
    nodes_y[:, -1] = hi[:, 1]
    i, j = np.meshgrid(np.arange(n), np.arange(n), indexing="ij")
    i, j = i.ravel(), j.ravel()
    sub_lo = np.stack([nodes_x[:, i], nodes_y[:, j]], axis=-1).reshape(-1, 2)
    sub_hi = np.stack([nodes_x[:, i + 1], nodes_y[:, j + 1]], axis=-1).reshape(-1, 2)
    return sub_lo, sub_hi, np.repeat(ids, n * n)


class LinearReconstructionIntegrator(Integrator):
    name = "linear"
    interface_type = InterfaceType.IMPLICIT
    supported_dims = frozenset({2})
    capabilities = frozenset({Operation.AREA_2D, Operation.CURVE_LENGTH, Operation.AREA_FLUX_2D})
    defaults = {"subdivisions": 4, "samples": 3}

    def validate_params(self):
        if self.params["subdivisions"] < 1:
            raise ArgumentError("linear.subdivisions must be >= 1")
        if self.params["samples"] < 2:
            raise ArgumentError("linear.samples must be >= 2")

    def integrate(self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int):
        check_mesh(tc, mesh)
        ls = tc.level_set
        samples = self.params["samples"]
        lo, hi = mesh_boxes(mesh)
        ids = np.arange(len(lo))

        classes = classify_boxes(ls, lo, hi, samples)
        inside = classes == CellClass.INSIDE
        cut = classes == CellClass.CUT
        sub_lo, sub_hi, sub_ids = subdivide(lo[cut], hi[cut], ids[cut], self.params["subdivisions"])
        sub_classes = classify_boxes(ls, sub_lo, sub_hi, samples) if len(sub_lo) else np.zeros(0, dtype=np.int8)
        sub_inside = sub_classes == CellClass.INSIDE
        sub_cut = sub_classes == CellClass.CUT
        logger.debug("%s: %d cut cells, %d cut sub-cells", tc.id, int(cut.sum()), int(np.sum(sub_cut)))

        rules = reconstruct_leaves(ls, sub_lo[sub_cut], sub_hi[sub_cut], sub_ids[sub_cut], order, self.name)
        message = f"{rules.fallbacks} fallback sub-cells" if rules.fallbacks else ""

        if operation is Operation.CURVE_LENGTH:
            return rule_total(rules.interface), rules.interface, message
        if operation is Operation.AREA_FLUX_2D:
            return flux_area(rules.interface), rules.interface, message

        box_lo = np.concatenate([lo[inside], sub_lo[sub_inside]])
        box_hi = np.concatenate([hi[inside], sub_hi[sub_inside]])
        box_ids = np.concatenate([ids[inside], sub_ids[sub_inside]])
        points, weights = tensor_rules(order, box_lo, box_hi)
        full = QuadratureData(points, weights, np.repeat(box_ids, order**2), self.name)
        rule = QuadratureData.concatenate([full, rules.volume], 2, self.name)
        return rule_total(rule), rule, message
