"""Benchmark problems carrying both interface representations."""
import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Optional, Sequence

import numpy as np
from scipy.special import ellipe

from cutquad.errors import ArgumentError
from cutquad.geometry.levelset import LevelSet
from cutquad.geometry.mesh import Box, CartesianMesh
from cutquad.geometry.nurbs import NurbsLoop, circle_loop, polyline_signed_area, sample_loop

logger = logging.getLogger(__name__)

CONSISTENCY_TOLERANCE = 1e-10
CONSISTENCY_SAMPLES = 64


class MeasureKind(str, Enum):
    AREA = "area"
    PERIMETER = "perimeter"
    VOLUME = "volume"
    SURFACE_AREA = "surface_area"


class Tier(str, Enum):
    QUICK = "quick"
    EXTENSIVE = "extensive"


def as_box(domain) -> Box:
    if isinstance(domain, Box):
        return domain
    lo, hi = domain
    return Box(tuple(lo), tuple(hi))


@dataclass(frozen=True)
class TestCase:
    id: str
    dim: int
    domain: Box
    level_set: LevelSet
    loop: Optional[NurbsLoop] = None
    references: Dict[str, float] = field(default_factory=dict)
    tier: Tier = Tier.EXTENSIVE
    divisions_hint: Optional[int] = None

    # keeps pytest from collecting this class
    __test__ = False

    def __post_init__(self):
        object.__setattr__(self, "domain", as_box(self.domain))
        object.__setattr__(self, "tier", Tier(self.tier))
        references = {MeasureKind(k).value: float(v) for k, v in dict(self.references).items()}
        object.__setattr__(self, "references", references)

        if self.dim not in (2, 3):
            raise ArgumentError(f"Test case {self.id}: dimension must be 2 or 3, got {self.dim}")
        if self.domain.dim != self.dim or self.level_set.dim != self.dim:
            raise ArgumentError(f"Test case {self.id}: domain and level set must be {self.dim}D")
        if self.dim == 2 and self.loop is None:
            raise ArgumentError(f"Test case {self.id}: 2D test cases need the parametric loop as well")
        if self.dim == 3 and self.loop is not None:
            raise ArgumentError(f"Test case {self.id}: 3D test cases are implicit only")
        for kind, value in references.items():
            if not value > 0:
                raise ArgumentError(f"Test case {self.id}: reference {kind} must be positive, got {value}")

        lo, hi = self.level_set.bounding_box()
        if not self.domain.contains_box_strictly(lo, hi):
            raise ArgumentError(f"Test case {self.id}: interface must lie strictly inside the domain")
        if self.loop is not None:
            points = sample_loop(self.loop, CONSISTENCY_SAMPLES)
            _check_samples(self, points)
            if not polyline_signed_area(points) > 0:
                raise ArgumentError(f"Test case {self.id}: loop must be counter-clockwise")

    def reference(self, kind) -> Optional[float]:
        return self.references.get(MeasureKind(kind).value)


def check_representation_consistency(tc: TestCase, n_samples: int = CONSISTENCY_SAMPLES) -> float:
    """Largest |phi| on loop samples; raises when above 1e-10 x domain diameter."""
    if tc.loop is None:
        return 0.0
    return _check_samples(tc, sample_loop(tc.loop, n_samples))


def _check_samples(tc: TestCase, points: np.ndarray) -> float:
    worst = float(np.max(np.abs(tc.level_set.evaluate(points))))
    if worst > CONSISTENCY_TOLERANCE * tc.domain.diameter:
        raise ArgumentError(f"Test case {tc.id}: loop and level set disagree (|phi| up to {worst:.3e})")
    return worst


def make_circle_testcase(center, radius, domain, divisions_hint=None, id="circle", tier=Tier.QUICK) -> TestCase:
    radius = float(radius)
    return TestCase(
        id=id,
        dim=2,
        domain=as_box(domain),
        level_set=LevelSet.circle(center, radius),
        loop=circle_loop(center, (radius, radius)),
        references={
            MeasureKind.AREA: math.pi * radius**2,
            MeasureKind.PERIMETER: 2.0 * math.pi * radius,
        },
        tier=tier,
        divisions_hint=divisions_hint,
    )


def ellipse_perimeter(a: float, b: float) -> float:
    a, b = max(a, b), min(a, b)
    return 4.0 * a * float(ellipe(1.0 - (b / a) ** 2))


def make_ellipse_testcase(center, radii, domain, divisions_hint=None, id="ellipse", tier=Tier.EXTENSIVE) -> TestCase:
    a, b = (float(r) for r in radii)
    return TestCase(
        id=id,
        dim=2,
        domain=as_box(domain),
        level_set=LevelSet.ellipse(center, (a, b)),
        loop=circle_loop(center, (a, b)),
        references={
            MeasureKind.AREA: math.pi * a * b,
            MeasureKind.PERIMETER: ellipse_perimeter(a, b),
        },
        tier=tier,
        divisions_hint=divisions_hint,
    )


def make_sphere_testcase(center, radius, domain, divisions_hint=None, id="sphere", tier=Tier.EXTENSIVE) -> TestCase:
    radius = float(radius)
    return TestCase(
        id=id,
        dim=3,
        domain=as_box(domain),
        level_set=LevelSet.sphere(center, radius),
        loop=None,
        references={
            MeasureKind.VOLUME: 4.0 * math.pi * radius**3 / 3.0,
            MeasureKind.SURFACE_AREA: 4.0 * math.pi * radius**2,
        },
        tier=tier,
        divisions_hint=divisions_hint,
    )


def translate_testcase(tc: TestCase, offset: Sequence[float]) -> TestCase:
    """Shift both representations; reference measures are translation invariant."""
    offset = tuple(float(o) for o in offset)
    if len(offset) != tc.dim:
        raise ArgumentError(f"Offset {offset} does not match the {tc.dim}D test case {tc.id}")
    return TestCase(
        id=tc.id,
        dim=tc.dim,
        domain=tc.domain,
        level_set=tc.level_set.translated(offset),
        loop=tc.loop.translated(offset) if tc.loop is not None else None,
        references=dict(tc.references),
        tier=tc.tier,
        divisions_hint=tc.divisions_hint,
    )


def mesh_for(tc: TestCase, divisions: int) -> CartesianMesh:
    return CartesianMesh.uniform(tc.domain, divisions)
