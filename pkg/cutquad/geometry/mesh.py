from dataclasses import dataclass
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from cutquad.errors import ArgumentError


@dataclass(frozen=True)
class Box:
    """Axis-aligned box [lo, hi]."""

    lo: Tuple[float, ...]
    hi: Tuple[float, ...]

    def __post_init__(self):
        lo = tuple(float(v) for v in self.lo)
        hi = tuple(float(v) for v in self.hi)
        if len(lo) != len(hi) or len(lo) not in (1, 2, 3):
            raise ArgumentError(f"Box bounds must have equal length 1, 2 or 3, got {lo} / {hi}")
        if not all(a < b for a, b in zip(lo, hi)):
            raise ArgumentError(f"Box needs lo < hi componentwise, got {lo} / {hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    @property
    def dim(self) -> int:
        return len(self.lo)

    @cached_property
    def widths(self) -> np.ndarray:
        return np.asarray(self.hi) - np.asarray(self.lo)

    @property
    def measure(self) -> float:
        return float(np.prod(self.widths))

    @property
    def center(self) -> np.ndarray:
        return 0.5 * (np.asarray(self.lo) + np.asarray(self.hi))

    @property
    def diameter(self) -> float:
        return float(np.linalg.norm(self.widths))

    def lattice(self, samples_per_axis: int) -> np.ndarray:
        """Tensor lattice of samples_per_axis**D points, corners included."""
        axes = [np.linspace(a, b, samples_per_axis) for a, b in zip(self.lo, self.hi)]
        grid = np.meshgrid(*axes, indexing="ij")
        return np.stack([g.ravel() for g in grid], axis=-1)

    def children(self) -> List["Box"]:
        """The 2**D boxes of one bisection step, in lexicographic order."""
        lo = np.asarray(self.lo)
        mid = self.center
        hi = np.asarray(self.hi)
        result = []
        for corner in np.ndindex(*(2,) * self.dim):
            c = np.asarray(corner)
            result.append(Box(tuple(np.where(c == 0, lo, mid)), tuple(np.where(c == 0, mid, hi))))
        return result

    def translated(self, offset) -> "Box":
        offset = np.asarray(offset, dtype=float)
        return Box(tuple(np.asarray(self.lo) + offset), tuple(np.asarray(self.hi) + offset))

    def contains_box_strictly(self, lo, hi) -> bool:
        return all(a < l for a, l in zip(self.lo, lo)) and all(h < b for h, b in zip(hi, self.hi))


@dataclass(frozen=True)
class Cell:
    index: Tuple[int, ...]
    box: Box


@dataclass(frozen=True)
class CartesianMesh:
    bounds: Box
    divisions: Tuple[int, ...]

    def __post_init__(self):
        divisions = tuple(int(d) for d in self.divisions)
        if len(divisions) != self.bounds.dim:
            raise ArgumentError(f"Need one division count per axis, got {divisions} for a {self.bounds.dim}D box")
        if not all(d >= 1 for d in divisions):
            raise ArgumentError(f"Division counts must be >= 1, got {divisions}")
        object.__setattr__(self, "divisions", divisions)

    @classmethod
    def uniform(cls, bounds: Box, n: int) -> "CartesianMesh":
        return cls(bounds, (n,) * bounds.dim)

    @property
    def dim(self) -> int:
        return self.bounds.dim

    @property
    def cell_width(self) -> np.ndarray:
        return self.bounds.widths / np.asarray(self.divisions)

    @property
    def n_cells(self) -> int:
        return int(np.prod(self.divisions))

    def shifted(self, offset: Sequence[float]) -> "CartesianMesh":
        return CartesianMesh(self.bounds.translated(offset), self.divisions)

    def grid_lines(self) -> List[np.ndarray]:
        """Node coordinates per axis; the last node is exactly bounds.hi."""
        lines = []
        for lo, hi, n in zip(self.bounds.lo, self.bounds.hi, self.divisions):
            nodes = lo + (hi - lo) * np.arange(n + 1) / n
            nodes[-1] = hi
            lines.append(nodes)
        return lines


def mesh_cells(mesh: CartesianMesh) -> List[Cell]:
    """All cells in row-major (C) order of their multi-index.

    Cells are half-open [lo, hi) except on the upper domain faces, so no face is
    owned twice; the stored boxes carry the closed coordinates.
    """
    lines = mesh.grid_lines()
    cells = []
    for index in np.ndindex(*mesh.divisions):
        lo = tuple(float(lines[a][i]) for a, i in enumerate(index))
        hi = tuple(float(lines[a][i + 1]) for a, i in enumerate(index))
        cells.append(Cell(tuple(int(i) for i in index), Box(lo, hi)))
    return cells
