"""Quadtree / octree refinement of cut cells with center-sample leaves."""
import logging
from dataclasses import dataclass
from typing import Tuple

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.levelset import ImplicitFunction
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.testcase import TestCase
from cutquad.integrators.base import Integrator, InterfaceType, Operation, check_mesh, mesh_boxes
from cutquad.quadrature import CellClass, QuadratureData, box_bounds, classify_boxes, rule_total, tensor_rules

logger = logging.getLogger(__name__)

MAX_DEPTH = 12


@dataclass
class QuadtreeLeaves:
    """Boxes left after refinement: (lo, hi, owning cell) per class."""

    inside: Tuple[np.ndarray, np.ndarray, np.ndarray]
    cut: Tuple[np.ndarray, np.ndarray, np.ndarray]


def _children(lo: np.ndarray, hi: np.ndarray, ids: np.ndarray):
    dim = lo.shape[1]
    mid = 0.5 * (lo + hi)
    child_lo, child_hi = [], []
    for corner in np.ndindex(*(2,) * dim):
        upper = np.asarray(corner, dtype=bool)
        child_lo.append(np.where(upper, mid, lo))
        child_hi.append(np.where(upper, hi, mid))
    # keep children of one parent together
    child_lo = np.stack(child_lo, axis=1).reshape(-1, dim)
    child_hi = np.stack(child_hi, axis=1).reshape(-1, dim)
    return child_lo, child_hi, np.repeat(ids, 2**dim)


def refine(ls: ImplicitFunction, lo: np.ndarray, hi: np.ndarray, ids: np.ndarray, depth: int,
           samples_per_axis: int = 3) -> QuadtreeLeaves:
    """Bisect Cut boxes level by level until depth; Outside boxes are dropped."""
    if not 0 <= depth <= MAX_DEPTH:
        raise ArgumentError(f"Refinement depth must be in 0..{MAX_DEPTH}, got {depth}")
    dim = lo.shape[1]
    inside_lo, inside_hi, inside_ids = [np.zeros((0, dim))], [np.zeros((0, dim))], [np.zeros(0, dtype=int)]

    level = 0
    while True:
        classes = classify_boxes(ls, lo, hi, samples_per_axis)
        is_inside = classes == CellClass.INSIDE
        is_cut = classes == CellClass.CUT
        inside_lo.append(lo[is_inside])
        inside_hi.append(hi[is_inside])
        inside_ids.append(ids[is_inside])
        lo, hi, ids = lo[is_cut], hi[is_cut], ids[is_cut]
        logger.debug("level %d: %d inside, %d cut", level, int(is_inside.sum()), len(lo))
        if level == depth or not len(lo):
            break
        lo, hi, ids = _children(lo, hi, ids)
        level += 1

    inside = (np.concatenate(inside_lo), np.concatenate(inside_hi), np.concatenate(inside_ids))
    return QuadtreeLeaves(inside, (lo, hi, ids))


def _rule_on_leaves(ls, leaves: QuadtreeLeaves, order: int, generator: str) -> QuadratureData:
    lo, hi, ids = leaves.inside
    cut_lo, cut_hi, cut_ids = leaves.cut
    if len(cut_lo):
        center_inside = ls.evaluate(0.5 * (cut_lo + cut_hi)) <= 0
        lo = np.concatenate([lo, cut_lo[center_inside]])
        hi = np.concatenate([hi, cut_hi[center_inside]])
        ids = np.concatenate([ids, cut_ids[center_inside]])
    dim = lo.shape[1]
    if not len(lo):
        return QuadratureData.empty(dim, generator)
    points, weights = tensor_rules(order, lo, hi)
    per_box = order**dim
    return QuadratureData(points, weights, np.repeat(ids, per_box), generator)


def quadtree_quadrature(ls: ImplicitFunction, cell, depth: int, order: int, samples_per_axis: int = 3,
                        generator: str = "quadtree") -> QuadratureData:
    """Tensor rules on Inside boxes plus Cut leaves whose center is inside."""
    lo, hi = box_bounds(cell)
    leaves = refine(ls, lo[None, :], hi[None, :], np.zeros(1, dtype=int), depth, samples_per_axis)
    return _rule_on_leaves(ls, leaves, order, generator)


class QuadtreeIntegrator(Integrator):
    name = "quadtree"
    interface_type = InterfaceType.IMPLICIT
    supported_dims = frozenset({2, 3})
    capabilities = frozenset({Operation.AREA_2D, Operation.VOLUME_3D})
    defaults = {"depth": 4, "samples": 3}

    def validate_params(self):
        if not 0 <= self.params["depth"] <= MAX_DEPTH:
            raise ArgumentError(f"quadtree.depth must be in 0..{MAX_DEPTH}")
        if self.params["samples"] < 2:
            raise ArgumentError("quadtree.samples must be >= 2")

    def integrate(self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int):
        check_mesh(tc, mesh)
        lo, hi = mesh_boxes(mesh)
        leaves = refine(tc.level_set, lo, hi, np.arange(len(lo)), self.params["depth"], self.params["samples"])
        rule = _rule_on_leaves(tc.level_set, leaves, order, self.name)
        return rule_total(rule), rule, ""
