"""Seeded Monte-Carlo measure of {phi <= 0}: the brute-force oracle."""
import math
from typing import Tuple

import numpy as np

from cutquad.errors import ArgumentError
from cutquad.geometry.levelset import ImplicitFunction
from cutquad.geometry.mesh import CartesianMesh
from cutquad.geometry.testcase import TestCase
from cutquad.integrators.base import Integrator, InterfaceType, Operation
from cutquad.quadrature import QuadratureData, box_bounds

CHUNK_SIZE = 1_000_000


def _sample_hits(ls: ImplicitFunction, box, n_samples: int, seed: int):
    if n_samples < 1:
        raise ArgumentError(f"Monte-Carlo sample count must be >= 1, got {n_samples}")
    lo, hi = box_bounds(box)
    rng = np.random.default_rng(seed)
    hits = []
    remaining = n_samples
    while remaining:
        m = min(remaining, CHUNK_SIZE)
        points = lo + rng.random((m, len(lo))) * (hi - lo)
        hits.append(points[ls.evaluate(points) <= 0])
        remaining -= m
    return np.concatenate(hits), float(np.prod(hi - lo))


def monte_carlo_measure(ls: ImplicitFunction, box, n_samples: int, seed: int) -> float:
    """box measure x (hits with phi <= 0) / n, reproducible for a fixed seed."""
    hits, measure = _sample_hits(ls, box, n_samples, seed)
    return measure * (len(hits) / n_samples)


def binomial_sigma(value: float, measure: float, n_samples: int) -> float:
    """Standard deviation of the estimate for a hit fraction value / measure."""
    p = min(max(value / measure, 0.0), 1.0)
    return measure * math.sqrt(p * (1.0 - p) / n_samples)


def monte_carlo_rule(ls: ImplicitFunction, box, n_samples: int, seed: int,
                     generator: str = "montecarlo") -> Tuple[float, QuadratureData]:
    """The estimate together with its hits as equal-weight quadrature points."""
    hits, measure = _sample_hits(ls, box, n_samples, seed)
    value = measure * (len(hits) / n_samples)
    return value, QuadratureData(hits, np.full(len(hits), measure / n_samples), None, generator)


class MonteCarloIntegrator(Integrator):
    """Samples the whole test-case domain; the mesh is only used for its bounds."""

    name = "montecarlo"
    interface_type = InterfaceType.IMPLICIT
    supported_dims = frozenset({2, 3})
    capabilities = frozenset({Operation.AREA_2D, Operation.VOLUME_3D})
    defaults = {"samples": 1_000_000, "seed": 42}

    def validate_params(self):
        if self.params["samples"] < 1:
            raise ArgumentError("montecarlo.samples must be >= 1")

    def integrate(self, operation: Operation, tc: TestCase, mesh: CartesianMesh, order: int):
        n = self.params["samples"]
        value, rule = monte_carlo_rule(tc.level_set, tc.domain, n, self.params["seed"], self.name)
        sigma = binomial_sigma(value, tc.domain.measure, n)
        return value, rule, f"sigma={sigma:.3e}"
