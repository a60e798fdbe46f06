"""Implicit interface representations.

The enclosed domain is A = {x : phi(x) <= 0}; phi is negative strictly inside,
positive strictly outside and zero on the interface.
"""
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Protocol, Sequence, Tuple

import numpy as np

from cutquad.errors import ArgumentError


class ImplicitFunction(Protocol):
    dim: int

    def evaluate(self, points: np.ndarray) -> np.ndarray:
        ...


class LevelSetKind(str, Enum):
    CIRCLE = "circle"
    SPHERE = "sphere"
    ELLIPSE = "ellipse"


def _as_tuple(values, name) -> Tuple[float, ...]:
    try:
        return tuple(float(v) for v in values)
    except TypeError:
        raise ArgumentError(f"{name} must be a coordinate sequence, got {values!r}")


@dataclass(frozen=True)
class LevelSet:
    kind: LevelSetKind
    center: Tuple[float, ...]
    radii: Tuple[float, ...]
    shift: Tuple[float, ...] = ()

    def __post_init__(self):
        kind = LevelSetKind(self.kind)
        center = _as_tuple(self.center, "center")
        dim = len(center)
        radii = _as_tuple(self.radii, "radii")
        if kind in (LevelSetKind.CIRCLE, LevelSetKind.SPHERE) and len(radii) == 1:
            radii = radii * dim
        shift = _as_tuple(self.shift, "shift") if self.shift else (0.0,) * dim

        expected_dim = {LevelSetKind.CIRCLE: (2,), LevelSetKind.SPHERE: (3,), LevelSetKind.ELLIPSE: (2, 3)}[kind]
        if dim not in expected_dim:
            raise ArgumentError(f"A {kind.value} level set needs a center of length {expected_dim}, got {dim}")
        if len(radii) != dim or len(shift) != dim:
            raise ArgumentError(f"radii and shift must have length {dim}")
        if kind is not LevelSetKind.ELLIPSE and len(set(radii)) != 1:
            raise ArgumentError(f"A {kind.value} level set has a single radius")
        if not all(r > 0 for r in radii):
            raise ArgumentError(f"All radii must be positive, got {radii}")

        object.__setattr__(self, "kind", kind)
        object.__setattr__(self, "center", center)
        object.__setattr__(self, "radii", radii)
        object.__setattr__(self, "shift", shift)

    @classmethod
    def circle(cls, center, radius):
        return cls(LevelSetKind.CIRCLE, center, (radius,))

    @classmethod
    def sphere(cls, center, radius):
        return cls(LevelSetKind.SPHERE, center, (radius,))

    @classmethod
    def ellipse(cls, center, radii):
        return cls(LevelSetKind.ELLIPSE, center, radii)

    @property
    def dim(self) -> int:
        return len(self.center)

    @cached_property
    def origin(self) -> np.ndarray:
        """Current center, i.e. center + shift."""
        return np.asarray(self.center) + np.asarray(self.shift)

    def translated(self, offset: Sequence[float]) -> "LevelSet":
        offset = _as_tuple(offset, "offset")
        if len(offset) != self.dim:
            raise ArgumentError(f"Offset of length {len(offset)} for a {self.dim}D level set")
        shift = tuple(s + o for s, o in zip(self.shift, offset))
        return LevelSet(self.kind, self.center, self.radii, shift)

    def bounding_box(self):
        origin = self.origin
        radii = np.asarray(self.radii)
        return origin - radii, origin + radii

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ArgumentError(f"Points of dimension {points.shape[-1]} for a {self.dim}D level set")
        rel = points - self.origin
        if self.kind is LevelSetKind.ELLIPSE:
            return np.sqrt(np.sum((rel / np.asarray(self.radii)) ** 2, axis=-1)) - 1.0
        return np.sqrt(np.sum(rel * rel, axis=-1)) - self.radii[0]


@dataclass(frozen=True)
class HalfSpace:
    """phi(x) = normal . (x - point); the inside is the side the normal points away from."""

    point: Tuple[float, ...]
    normal: Tuple[float, ...]

    def __post_init__(self):
        point = _as_tuple(self.point, "point")
        normal = _as_tuple(self.normal, "normal")
        if len(point) != len(normal) or len(point) not in (2, 3):
            raise ArgumentError("point and normal must both have length 2 or 3")
        if not any(normal):
            raise ArgumentError("normal must be non-zero")
        object.__setattr__(self, "point", point)
        object.__setattr__(self, "normal", normal)

    @property
    def dim(self) -> int:
        return len(self.point)

    def evaluate(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.shape[-1] != self.dim:
            raise ArgumentError(f"Points of dimension {points.shape[-1]} for a {self.dim}D half space")
        return (points - np.asarray(self.point)) @ np.asarray(self.normal)


def levelset_eval(ls: ImplicitFunction, x: Sequence[float]) -> float:
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != ls.dim:
        raise ArgumentError(f"Point {x.tolist()} does not match the {ls.dim}D level set")
    return float(ls.evaluate(x))
