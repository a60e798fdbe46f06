"""Reference quadrature rules, cell classification and the quadrature-data container."""
import logging
from dataclasses import dataclass
from enum import IntEnum
from functools import lru_cache
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from cutquad.errors import ArgumentError
from cutquad.geometry.levelset import ImplicitFunction
from cutquad.geometry.mesh import Box

logger = logging.getLogger(__name__)

MAX_GAUSS_POINTS = 64
NEWTON_TOLERANCE = 1e-15
ZERO_TOLERANCE = 1e-14
AXES = ("x", "y", "z")


class CellClass(IntEnum):
    """Values double as the int8 codes returned by classify_boxes."""

    INSIDE = 0
    OUTSIDE = 1
    CUT = 2


@dataclass
class QuadratureData:
    """Points and weights of one generated rule.

    cell_index holds the row-major linear index of the background cell each
    point came from (None for mesh-free rules). normals is set for interface
    rules only (unit outward normals). Moment-fitted rules may carry negative
    weights; all other volume rules are non-negative.
    """

    points: np.ndarray
    weights: np.ndarray
    cell_index: Optional[np.ndarray] = None
    generator: str = ""
    normals: Optional[np.ndarray] = None

    def __post_init__(self):
        self.weights = np.asarray(self.weights, dtype=float).reshape(-1)
        self.points = np.asarray(self.points, dtype=float)
        if self.points.ndim == 1 and len(self.weights) == 1:
            self.points = self.points[None, :]
        if self.points.ndim != 2 or len(self.points) != len(self.weights):
            raise ArgumentError(
                f"points must have shape (n_points, dim), got {self.points.shape} for {len(self.weights)} weights"
            )
        if self.cell_index is not None:
            self.cell_index = np.asarray(self.cell_index, dtype=np.int64).reshape(-1)
            if len(self.cell_index) != len(self.weights):
                raise ArgumentError("cell_index must have one entry per point")
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=float).reshape(self.points.shape)
        if not np.all(np.isfinite(self.weights)):
            raise ArgumentError("Quadrature weights must be finite")

    @classmethod
    def empty(cls, dim: int, generator: str = "", with_normals: bool = False):
        return cls(
            np.zeros((0, dim)),
            np.zeros(0),
            np.zeros(0, dtype=np.int64),
            generator,
            np.zeros((0, dim)) if with_normals else None,
        )

    @classmethod
    def concatenate(cls, parts: Sequence["QuadratureData"], dim: int, generator: str = ""):
        parts = [p for p in parts if p.n_points]
        if not parts:
            return cls.empty(dim, generator)
        cells = None
        if all(p.cell_index is not None for p in parts):
            cells = np.concatenate([p.cell_index for p in parts])
        normals = None
        if all(p.normals is not None for p in parts):
            normals = np.concatenate([p.normals for p in parts])
        return cls(
            np.concatenate([p.points for p in parts]),
            np.concatenate([p.weights for p in parts]),
            cells,
            generator,
            normals,
        )

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    @property
    def n_points(self) -> int:
        return len(self.weights)

    def with_cell(self, cell: int) -> "QuadratureData":
        return QuadratureData(self.points, self.weights, np.full(self.n_points, cell), self.generator, self.normals)

    def integrate(self, f) -> float:
        """sum w_i f(x_i) for a vectorized f."""
        if not self.n_points:
            return 0.0
        return sequential_sum(self.weights * np.asarray(f(self.points), dtype=float))


@lru_cache(maxsize=None)
def _gauss_legendre(n: int) -> Tuple[Tuple[float, ...], Tuple[float, ...]]:
    k = np.arange(1, n + 1)
    x = np.cos(np.pi * (k - 0.25) / (n + 0.5))

    for _ in range(100):
        p, dp = _legendre(n, x)
        dx = p / dp
        x = x - dx
        if np.max(np.abs(dx)) <= NEWTON_TOLERANCE:
            break
    else:
        raise RuntimeError(f"Failed to converge Gauss-Legendre nodes for n={n}")

    # symmetric about 0
    x = np.sort(x)
    x = 0.5 * (x - x[::-1])
    _, dp = _legendre(n, x)
    w = 2.0 / ((1.0 - x * x) * dp**2)
    w = 0.5 * (w + w[::-1])
    return tuple(x.tolist()), tuple(w.tolist())


def _legendre(n: int, x: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """P_n(x) and P_n'(x) by the three-term recurrence."""
    p0 = np.ones_like(x)
    p1 = x.copy()
    for j in range(2, n + 1):
        p0, p1 = p1, ((2 * j - 1) * x * p1 - (j - 1) * p0) / j
    return p1, n * (x * p1 - p0) / (x * x - 1.0)


def gauss_legendre(n: int) -> Tuple[np.ndarray, np.ndarray]:
    """Nodes (ascending) and weights on [-1, 1], Newton iteration on P_n."""
    if not isinstance(n, (int, np.integer)) or not 1 <= n <= MAX_GAUSS_POINTS:
        raise ArgumentError(f"Gauss-Legendre point count must be in 1..{MAX_GAUSS_POINTS}, got {n}")
    nodes, weights = _gauss_legendre(int(n))
    return np.array(nodes), np.array(weights)


def gauss_on_interval(n: int, a: float, b: float) -> Tuple[np.ndarray, np.ndarray]:
    nodes, weights = gauss_legendre(n)
    half = 0.5 * (b - a)
    return a + half * (nodes + 1.0), half * weights


def box_bounds(box) -> Tuple[np.ndarray, np.ndarray]:
    if isinstance(box, Box):
        return np.asarray(box.lo), np.asarray(box.hi)
    lo, hi = box
    return np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)


def tensor_rules(n: int, lo: np.ndarray, hi: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Tensor Gauss rules on a batch of boxes lo[k], hi[k] of shape (m, D).

    Points come box by box, n**D per box, so the owner of point i is i // n**D.
    """
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    dim = lo.shape[1]
    nodes, weights = gauss_legendre(n)
    ref_grid = np.meshgrid(*([nodes] * dim), indexing="ij")
    ref_points = np.stack([g.ravel() for g in ref_grid], axis=-1)  # (n**D, D)
    ref_weights = weights
    for _ in range(dim - 1):
        ref_weights = np.multiply.outer(ref_weights, weights)
    ref_weights = ref_weights.ravel()

    half = 0.5 * (hi - lo)
    points = lo[:, None, :] + half[:, None, :] * (ref_points[None, :, :] + 1.0)
    w = np.prod(half, axis=1)[:, None] * ref_weights[None, :]
    return points.reshape(-1, dim), w.reshape(-1)


def tensor_rule(n: int, box, generator: str = "tensor") -> QuadratureData:
    """n**D Gauss points affinely mapped onto box."""
    lo, hi = box_bounds(box)
    if len(lo) not in (2, 3):
        raise ArgumentError(f"Tensor rules are built for 2D and 3D boxes, got {len(lo)}D")
    points, weights = tensor_rules(n, lo[None, :], hi[None, :])
    return QuadratureData(points, weights, None, generator)


def lattice_points(lo: np.ndarray, hi: np.ndarray, samples_per_axis: int) -> np.ndarray:
    """samples_per_axis**D lattice points per box, corners included; shape (m, s**D, D)."""
    lo = np.atleast_2d(np.asarray(lo, dtype=float))
    hi = np.atleast_2d(np.asarray(hi, dtype=float))
    t = np.linspace(0.0, 1.0, samples_per_axis)
    grid = np.meshgrid(*([t] * lo.shape[1]), indexing="ij")
    unit = np.stack([g.ravel() for g in grid], axis=-1)
    # exact corners
    return np.where(unit[None] == 1.0, hi[:, None, :], lo[:, None, :] + unit[None] * (hi - lo)[:, None, :])


def classify_boxes(ls: ImplicitFunction, lo: np.ndarray, hi: np.ndarray, samples_per_axis: int = 3) -> np.ndarray:
    """CellClass codes (int8) per box, vectorized over the batch; compare against CellClass members."""
    if samples_per_axis < 2:
        raise ArgumentError(f"samples_per_axis must be >= 2, got {samples_per_axis}")
    samples = lattice_points(lo, hi, samples_per_axis)
    values = ls.evaluate(samples.reshape(-1, samples.shape[-1])).reshape(samples.shape[:2])
    inside = np.all(values < 0, axis=1)
    outside = np.all(values > 0, axis=1)
    touching = np.any(np.abs(values) < ZERO_TOLERANCE, axis=1)
    classes = np.full(len(values), CellClass.CUT, dtype=np.int8)
    classes[inside & ~touching] = CellClass.INSIDE
    classes[outside & ~touching] = CellClass.OUTSIDE
    return classes


def classify_cell(ls: ImplicitFunction, box, samples_per_axis: int = 3) -> CellClass:
    """Sign pattern of phi on a samples_per_axis**D lattice that includes the corners.

    All negative is Inside, all positive is Outside; mixed signs or any
    |phi| < 1e-14 give Cut. Thin features slipping between lattice samples are
    classified by the samples alone; refine the lattice for such shapes.
    """
    lo, hi = box_bounds(box)
    return CellClass(int(classify_boxes(ls, lo[None, :], hi[None, :], samples_per_axis)[0]))


def sequential_sum(values) -> float:
    """Left-to-right float sum in index order."""
    values = np.asarray(values, dtype=float).reshape(-1)
    return float(np.cumsum(values)[-1]) if len(values) else 0.0


def rule_total(q: QuadratureData) -> float:
    """Sum of weights in index order, i.e. the rule applied to f = 1."""
    return sequential_sum(q.weights)


def write_quadrature_csv(q: QuadratureData, file_path: str) -> str:
    columns = {AXES[a]: q.points[:, a] for a in range(q.dim)}
    columns["weight"] = q.weights
    cells = q.cell_index if q.cell_index is not None else [None] * q.n_points
    columns["cell"] = pd.array(cells, dtype="Int64")
    frame = pd.DataFrame(columns, columns=[*AXES[: q.dim], "weight", "cell"])
    frame.to_csv(file_path, index=False, float_format="%.17g", lineterminator="\n")
    return file_path


def read_quadrature_csv(file_path: str, generator: str = "") -> QuadratureData:
    frame = pd.read_csv(file_path, float_precision="round_trip", dtype={"cell": "Int64"})
    axes = [a for a in AXES if a in frame.columns]
    cells = None
    if len(frame) and not frame["cell"].isna().any():
        cells = frame["cell"].to_numpy(dtype=np.int64)
    return QuadratureData(frame[axes].to_numpy(dtype=float), frame["weight"].to_numpy(dtype=float), cells, generator)
