"""Linear interface reconstruction on 2D cells (marching squares) and rules on the pieces.

Corners are numbered counter-clockwise, c0 = (x0, y0), c1 = (x1, y0),
c2 = (x1, y1), c3 = (x0, y1); edge k joins corner k to corner k + 1. Roots are
searched on canonically oriented edges (left to right, bottom to top) so two
cells sharing an edge find bit-identical roots and the reconstructed interface
is watertight across the mesh.
"""
import logging
from dataclasses import dataclass, field
from typing import List, Sequence

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.levelset import ImplicitFunction
from cutquad.quadrature import QuadratureData, box_bounds, gauss_legendre, sequential_sum

logger = logging.getLogger(__name__)

ROOT_TOLERANCE = 1e-13
BISECTION_ITERATIONS = 50
DEGENERATE_AREA = 1e-16

# canonical endpoints (start corner, end corner) of walk edge k
CANONICAL_EDGES = ((0, 1), (1, 2), (3, 2), (0, 3))


@dataclass
class CellReconstruction:
    polygons: List[np.ndarray] = field(default_factory=list)
    segments: np.ndarray = field(default_factory=lambda: np.zeros((0, 2, 2)))
    fallback: bool = False

    @property
    def area(self) -> float:
        return sum(polygon_area(p) for p in self.polygons)

    @property
    def interface_length(self) -> float:
        if not len(self.segments):
            return 0.0
        return float(np.sum(np.linalg.norm(self.segments[:, 1] - self.segments[:, 0], axis=1)))


def edge_roots(ls: ImplicitFunction, a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Bisection on the segments a[k] -> b[k], each with a sign change of phi.

    Stops per edge once |phi| <= 1e-13 or after 50 halvings.
    """
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    fa = ls.evaluate(a)
    fb = ls.evaluate(b)
    inside_a = fa <= 0

    lo = np.zeros(len(a))
    hi = np.ones(len(a))
    t = np.where(np.abs(fa) <= ROOT_TOLERANCE, 0.0, np.where(np.abs(fb) <= ROOT_TOLERANCE, 1.0, 0.5))
    done = (np.abs(fa) <= ROOT_TOLERANCE) | (np.abs(fb) <= ROOT_TOLERANCE)

    for _ in range(BISECTION_ITERATIONS):
        if done.all():
            break
        active = ~done
        mid = 0.5 * (lo + hi)
        fm = ls.evaluate(a + mid[:, None] * (b - a))
        t = np.where(active, mid, t)
        done = done | (active & (np.abs(fm) <= ROOT_TOLERANCE))
        same = (fm <= 0) == inside_a
        lo = np.where(active & same, mid, lo)
        hi = np.where(active & ~same, mid, hi)

    return a + t[:, None] * (b - a)


def polygon_area(polygon: np.ndarray) -> float:
    """Signed shoelace area; positive for counter-clockwise vertex order."""
    polygon = np.asarray(polygon, dtype=float)
    x, y = polygon[:, 0], polygon[:, 1]
    return 0.5 * float(np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def _dedupe(vertices: Sequence[np.ndarray]) -> np.ndarray:
    kept = []
    for v in vertices:
        if not kept or not np.array_equal(v, kept[-1]):
            kept.append(v)
    if len(kept) > 1 and np.array_equal(kept[0], kept[-1]):
        kept.pop()
    return np.array(kept).reshape(-1, 2)


def marching_squares_polygon(ls: ImplicitFunction, cell) -> CellReconstruction:
    """Inside polygon(s) and interface segments of one cut 2D cell.

    Segments run with the inside on their left, so (dy, -dx) is the outward
    normal. A saddle (diagonal sign pairs) is resolved by the sign at the cell
    center: inside joins the two inside corners into one polygon, outside
    leaves one triangle per inside corner. Without any corner sign change the
    cell is taken whole or empty by its center sign and flagged as fallback.
    """
    lo, hi = box_bounds(cell)
    if len(lo) != 2:
        raise ArgumentError("Marching squares works on 2D cells")
    (x0, y0), (x1, y1) = lo, hi
    corners = np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]])
    inside = ls.evaluate(corners) <= 0

    changes = [k for k in range(4) if inside[k] != inside[(k + 1) % 4]]
    if not changes:
        center_inside = float(ls.evaluate(0.5 * (lo + hi))) <= 0
        polygons = [corners] if center_inside else []
        return CellReconstruction(polygons, np.zeros((0, 2, 2)), fallback=True)

    starts = np.array([corners[CANONICAL_EDGES[k][0]] for k in changes])
    ends = np.array([corners[CANONICAL_EDGES[k][1]] for k in changes])
    roots = dict(zip(changes, edge_roots(ls, starts, ends)))

    saddle = len(changes) == 4
    if saddle and not float(ls.evaluate(0.5 * (lo + hi))) <= 0:
        polygons, segments = [], []
        for k in range(4):
            if inside[k]:
                before, after = roots[(k - 1) % 4], roots[k]
                polygons.append(_dedupe([before, corners[k], after]))
                segments.append((after, before))
        return _finish(polygons, segments)

    vertices, kinds = [], []
    for k in range(4):
        if inside[k]:
            vertices.append(corners[k])
            kinds.append("corner")
        if k in roots:
            vertices.append(roots[k])
            kinds.append("exit" if inside[k] else "entry")

    segments = []
    for i, kind in enumerate(kinds):
        following = (i + 1) % len(kinds)
        if kind == "exit" and kinds[following] == "entry":
            segments.append((vertices[i], vertices[following]))
    return _finish([_dedupe(vertices)], segments)


def _finish(polygons, segments) -> CellReconstruction:
    polygons = [p for p in polygons if len(p) >= 3]
    segments = [s for s in segments if not np.array_equal(s[0], s[1])]
    return CellReconstruction(polygons, np.array(segments, dtype=float).reshape(-1, 2, 2), fallback=False)


def polygon_quadrature(polygon, order: int, generator: str = "polygon") -> QuadratureData:
    """Fan triangulation from the area centroid, collapsed tensor Gauss per triangle.

    Each triangle is the image of the unit square under
    (u, w) -> v0 + u ((1 - w)(v1 - v0) + w (v2 - v0)), Jacobian 2 |T| u.
    """
    polygon = np.asarray(polygon, dtype=float)
    if polygon.ndim != 2 or polygon.shape[1] != 2 or len(polygon) < 3:
        raise ArgumentError("A polygon needs at least 3 planar vertices")
    area = polygon_area(polygon)
    if abs(area) < DEGENERATE_AREA:
        return QuadratureData.empty(2, generator)

    x, y = polygon[:, 0], polygon[:, 1]
    cross = x * np.roll(y, -1) - np.roll(x, -1) * y
    centroid = np.array([
        np.sum((x + np.roll(x, -1)) * cross),
        np.sum((y + np.roll(y, -1)) * cross),
    ]) / (6.0 * area)

    nodes, weights = gauss_legendre(order)
    u = 0.5 * (nodes + 1.0)
    wu = 0.5 * weights
    U, W = np.meshgrid(u, u, indexing="ij")
    WU = np.multiply.outer(wu, wu)
    U, W, WU = U.ravel(), W.ravel(), WU.ravel()

    points, rule_weights = [], []
    for v1, v2 in zip(polygon, np.roll(polygon, -1, axis=0)):
        e1 = v1 - centroid
        e2 = v2 - centroid
        tri_area = 0.5 * (e1[0] * e2[1] - e1[1] * e2[0])
        if tri_area == 0.0:
            continue
        points.append(centroid + U[:, None] * ((1.0 - W)[:, None] * e1 + W[:, None] * e2))
        rule_weights.append(2.0 * tri_area * U * WU)

    if not points:
        return QuadratureData.empty(2, generator)
    return QuadratureData(np.concatenate(points), np.concatenate(rule_weights), None, generator)


def segment_rule(segments: np.ndarray, order: int, generator: str = "segments") -> QuadratureData:
    """Gauss rule on straight segments with arc-length weights and outward normals (dy, -dx)/len."""
    segments = np.asarray(segments, dtype=float).reshape(-1, 2, 2)
    if not len(segments):
        return QuadratureData.empty(2, generator, with_normals=True)
    nodes, weights = gauss_legendre(order)
    start, end = segments[:, 0], segments[:, 1]
    delta = end - start
    length = np.linalg.norm(delta, axis=1)
    keep = length > 0
    start, delta, length = start[keep], delta[keep], length[keep]

    s = 0.5 * (nodes + 1.0)
    points = start[:, None, :] + s[None, :, None] * delta[:, None, :]
    w = 0.5 * length[:, None] * weights[None, :]
    normal = np.stack([delta[:, 1], -delta[:, 0]], axis=-1) / length[:, None]
    normals = np.repeat(normal[:, None, :], len(nodes), axis=1)
    return QuadratureData(points.reshape(-1, 2), w.reshape(-1), None, generator, normals.reshape(-1, 2))


@dataclass
class LeafRules:
    volume: QuadratureData
    interface: QuadratureData
    fallbacks: int = 0


def reconstruct_leaves(ls: ImplicitFunction, lo: np.ndarray, hi: np.ndarray, ids: np.ndarray, order: int,
                       generator: str = "") -> LeafRules:
    """Polygon and segment rules on every cut leaf, tagged with the owning mesh cell."""
    volume, interface = [], []
    fallbacks = 0
    for k in range(len(lo)):
        rec = marching_squares_polygon(ls, (lo[k], hi[k]))
        fallbacks += rec.fallback
        for polygon in rec.polygons:
            volume.append(polygon_quadrature(polygon, order, generator).with_cell(ids[k]))
        if len(rec.segments):
            interface.append(segment_rule(rec.segments, order, generator).with_cell(ids[k]))
    if fallbacks:
        logger.debug("%d cut leaves fell back to center-sign classification", fallbacks)
    volume_rule = QuadratureData.concatenate(volume, 2, generator)
    interface_rule = QuadratureData.concatenate(interface, 2, generator)
    if interface_rule.normals is None:
        interface_rule = QuadratureData.empty(2, generator, with_normals=True)
    return LeafRules(volume_rule, interface_rule, fallbacks)


def flux_area(interface: QuadratureData) -> float:
    """Divergence theorem with F = (x, 0): area = sum w x n_x."""
    if interface.normals is None:
        raise ArgumentError("Flux quadrature needs an interface rule with normals")
    if not interface.n_points:
        return 0.0
    return sequential_sum(interface.weights * interface.points[:, 0] * interface.normals[:, 0])
