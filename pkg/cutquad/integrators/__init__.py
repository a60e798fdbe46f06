from cutquad.integrators.base import (
    IntegrationResult,
    Integrator,
    IntegratorDescriptor,
    InterfaceType,
    Operation,
    Status,
)
from cutquad.integrators.flux import (
    ParametricFluxIntegrator,
    curve_length_parametric,
    flux_area_parametric,
    flux_area_symmetric,
)
from cutquad.integrators.linear import LinearReconstructionIntegrator
from cutquad.integrators.moment_fitting import MomentFittingIntegrator, moment_fit_cell
from cutquad.integrators.montecarlo import MonteCarloIntegrator, monte_carlo_measure
from cutquad.integrators.quadtree import QuadtreeIntegrator, quadtree_quadrature
from cutquad.integrators.reconstruction import marching_squares_polygon, polygon_quadrature
from cutquad.integrators.registry import IntegratorRegistry, default_registry, parse_param_overrides
from cutquad.integrators.tessellated import TessellatedQuadtreeIntegrator
