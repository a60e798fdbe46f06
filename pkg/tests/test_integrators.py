import dataclasses
import math

import numpy as np
import pytest

from conftest import CIRCLE_AREA, CIRCLE_PERIMETER
from cutquad.errors import ArgumentError, MomentFittingError
from cutquad.geometry import (
    Box,
    CartesianMesh,
    HalfSpace,
    LevelSet,
    NurbsCurve,
    NurbsLoop,
    builtin_catalog,
    mesh_cells,
    mesh_for,
    translate_testcase,
)
from cutquad.geometry.testcase import make_sphere_testcase
from cutquad.integrators import (
    LinearReconstructionIntegrator,
    MomentFittingIntegrator,
    MonteCarloIntegrator,
    Operation,
    ParametricFluxIntegrator,
    QuadtreeIntegrator,
    Status,
    TessellatedQuadtreeIntegrator,
    curve_length_parametric,
    flux_area_parametric,
    flux_area_symmetric,
    marching_squares_polygon,
    moment_fit_cell,
    monte_carlo_measure,
    polygon_quadrature,
    quadtree_quadrature,
)
from cutquad.integrators.base import InterfaceType
from cutquad.integrators.linear import subdivide
from cutquad.integrators.moment_fitting import RESIDUAL_TOLERANCE, monomials, polygon_moments
from cutquad.integrators.montecarlo import binomial_sigma, monte_carlo_rule
from cutquad.integrators.reconstruction import polygon_area, segment_rule
from cutquad.quadrature import rule_total, tensor_rule

CIRCLE_LS = LevelSet.circle((0.5, 0.5), 0.2)
UNIT_CUBE = ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0))


@pytest.fixture
def sphere():
    return make_sphere_testcase((0.5, 0.5, 0.5), 0.3, UNIT_CUBE)


def unit_square_loop():
    corners = [(0.0, 0.0), (1.0, 0.0), (1.0, 1.0), (0.0, 1.0)]
    return NurbsLoop(tuple(
        NurbsCurve(1, (0.0, 0.0, 1.0, 1.0), (corners[k], corners[(k + 1) % 4]), (1.0, 1.0)) for k in range(4)
    ))


# quadtree


def test_quadtree_inside_and_outside_cells():
    inside = quadtree_quadrature(CIRCLE_LS, Box((0.45, 0.45), (0.55, 0.55)), depth=5, order=3)
    assert inside.n_points == 9
    assert rule_total(inside) == pytest.approx(0.01, rel=1e-14)
    outside = quadtree_quadrature(CIRCLE_LS, Box((0.0, 0.0), (0.1, 0.1)), depth=5, order=3)
    assert outside.n_points == 0
    assert rule_total(outside) == 0.0


def test_quadtree_single_cell_depth_8():
    rule = quadtree_quadrature(CIRCLE_LS, Box((0, 0), (1, 1)), depth=8, order=5)
    assert rule_total(rule) == pytest.approx(CIRCLE_AREA, rel=5e-3)
    assert np.all(rule.weights > 0)


def test_quadtree_rejects_depth_out_of_range():
    with pytest.raises(ArgumentError):
        quadtree_quadrature(CIRCLE_LS, Box((0, 0), (1, 1)), depth=13, order=2)
    with pytest.raises(ArgumentError):
        QuadtreeIntegrator(depth=-1)


def test_quadtree_circle_8x8_depth_6(circle):
    result = QuadtreeIntegrator(depth=6).compute_area_2d(circle, mesh_for(circle, 8), 5)
    assert result.status is Status.OK
    assert result.value == pytest.approx(0.1256637, abs=5e-4)
    assert result.n_points == result.quadrature.n_points
    assert result.quadrature.cell_index.max() < 64


def test_quadtree_circle_32x32_depth_6(circle):
    result = QuadtreeIntegrator(depth=6).compute_area_2d(circle, mesh_for(circle, 32), 5)
    assert result.value == pytest.approx(CIRCLE_AREA, rel=1e-3)


def test_quadtree_error_drops_with_depth(circle):
    mesh = mesh_for(circle, 8)
    coarse = QuadtreeIntegrator(depth=2).compute_area_2d(circle, mesh, 5)
    fine = QuadtreeIntegrator(depth=6).compute_area_2d(circle, mesh, 5)
    assert abs(fine.value - CIRCLE_AREA) < abs(coarse.value - CIRCLE_AREA)


def test_octree_sphere_volume(sphere):
    result = QuadtreeIntegrator(depth=4).compute_volume_3d(sphere, mesh_for(sphere, 8), 2)
    assert result.status is Status.OK
    reference = sphere.reference("volume")
    bound = 2.0 * sphere.reference("surface_area") * (0.125 / 2**4) / reference
    assert abs(result.value - reference) / reference <= bound
    assert result.value == pytest.approx(reference, rel=2e-2)


# linear reconstruction


def test_marching_squares_half_plane():
    rec = marching_squares_polygon(HalfSpace((0.5, 0.0), (1.0, 0.0)), Box((0, 0), (1, 1)))
    assert len(rec.polygons) == 1
    np.testing.assert_allclose(rec.polygons[0], [[0, 0], [0.5, 0], [0.5, 1], [0, 1]], atol=1e-15)
    assert polygon_area(rec.polygons[0]) == 0.5
    assert rec.segments.shape == (1, 2, 2)
    assert rec.interface_length == pytest.approx(1.0)
    rule = segment_rule(rec.segments, 2)
    np.testing.assert_allclose(rule.normals, [[1.0, 0.0], [1.0, 0.0]])


def test_marching_squares_roots_lie_on_circle():
    rec = marching_squares_polygon(CIRCLE_LS, Box((0.25, 0.375), (0.5, 0.625)))
    assert not rec.fallback
    endpoints = rec.segments.reshape(-1, 2)
    assert len(endpoints)
    assert np.max(np.abs(CIRCLE_LS.evaluate(endpoints))) <= 1e-13


def test_polygon_quadrature():
    square = np.array([[0, 0], [1, 0], [1, 1], [0, 1]], dtype=float)
    assert rule_total(polygon_quadrature(square, 2)) == pytest.approx(1.0, abs=1e-14)
    triangle = np.array([[0, 0], [1, 0], [0, 1]], dtype=float)
    assert polygon_quadrature(triangle, 3).integrate(lambda p: p[:, 0]) == pytest.approx(1.0 / 6.0, abs=1e-13)
    collinear = np.array([[0, 0], [1, 0], [2, 0]], dtype=float)
    assert polygon_quadrature(collinear, 3).n_points == 0
    with pytest.raises(ArgumentError):
        polygon_quadrature(square[:2], 3)


def test_subdivide_covers_each_box():
    lo = np.array([[0.0, 0.0], [0.5, 0.0]])
    hi = np.array([[0.5, 0.5], [1.0, 0.5]])
    sub_lo, sub_hi, ids = subdivide(lo, hi, np.array([3, 7]), 4)
    assert len(sub_lo) == 32
    assert ids.tolist() == [3] * 16 + [7] * 16
    assert np.prod(sub_hi - sub_lo, axis=1).sum() == pytest.approx(0.5, abs=1e-15)


def test_linear_reconstruction_32x32(circle):
    integrator = LinearReconstructionIntegrator()
    mesh = mesh_for(circle, 32)
    area = integrator.compute_area_2d(circle, mesh, 5)
    length = integrator.compute_interface_curve_length(circle, mesh, 5)
    flux = integrator.compute_area_via_flux_2d(circle, mesh, 5)
    assert area.value == pytest.approx(CIRCLE_AREA, rel=1e-3)
    assert length.value == pytest.approx(CIRCLE_PERIMETER, rel=1e-3)
    assert flux.value == pytest.approx(CIRCLE_AREA, rel=5e-3)
    assert flux.quadrature.normals is not None


def test_tessellated_quadtree(circle):
    integrator = TessellatedQuadtreeIntegrator()
    mesh = mesh_for(circle, 8)
    area = integrator.compute_area_2d(circle, mesh, 5)
    length = integrator.compute_interface_curve_length(circle, mesh, 5)
    flux = integrator.compute_area_via_flux_2d(circle, mesh, 5)
    assert area.value == pytest.approx(CIRCLE_AREA, rel=5e-3)
    assert length.value == pytest.approx(CIRCLE_PERIMETER, rel=5e-3)
    assert flux.value == pytest.approx(area.value, rel=1e-10)


# parametric flux


def test_flux_on_unit_square_loop():
    value, rule = flux_area_parametric(unit_square_loop(), 4)
    assert value == pytest.approx(1.0, abs=1e-14)
    assert rule.normals.shape == rule.points.shape


def test_flux_on_circle(circle):
    value, _ = flux_area_parametric(circle.loop, 20)
    assert value == pytest.approx(0.125663706143592, abs=1e-12)
    length, rule = curve_length_parametric(circle.loop, 20)
    assert length == pytest.approx(1.2566370614359, abs=1e-10)
    np.testing.assert_allclose(np.linalg.norm(rule.normals, axis=1), 1.0, rtol=1e-14)


def test_flux_identity_on_catalog_loops(catalog):
    for tc in catalog:
        if tc.loop is None:
            continue
        parametric, _ = flux_area_parametric(tc.loop, 20)
        symmetric, _ = flux_area_symmetric(tc.loop, 20)
        assert abs(parametric - symmetric) <= 1e-12
        assert parametric == pytest.approx(tc.reference("area"), abs=1e-12)


def test_reversed_loop_negates_area(catalog):
    for tc in catalog:
        if tc.loop is None:
            continue
        forward, _ = flux_area_parametric(tc.loop, 20)
        backward, _ = flux_area_parametric(tc.loop.reversed(), 20)
        assert backward < 0
        assert backward == pytest.approx(-forward, rel=1e-14)


def test_flux_integrator_is_mesh_free(circle):
    integrator = ParametricFluxIntegrator()
    values = {integrator.compute_area_2d(circle, mesh_for(circle, n), 5).value for n in (2, 8, 32)}
    assert len(values) == 1
    assert values.pop() == pytest.approx(CIRCLE_AREA, abs=1e-12)
    result = integrator.compute_area_via_flux_2d(circle, mesh_for(circle, 2))
    assert result.value == pytest.approx(CIRCLE_AREA, abs=1e-12)
    assert result.quadrature.cell_index is None


def test_flux_rejects_bad_curve_order():
    with pytest.raises(ArgumentError):
        ParametricFluxIntegrator(curve_order=65)
    with pytest.raises(ArgumentError):
        flux_area_parametric(unit_square_loop(), 0)


# moment fitting


def test_moment_fitting_half_plane_triangle():
    # inside region is the triangle (0, 0), (0.3, 0), (0, 0.6)
    ls = HalfSpace((0.3, 0.0), (1.0, 0.5))
    rule = moment_fit_cell(ls, Box((0, 0), (1, 1)), degree=2, order=3)
    a, b = 0.3, 0.6
    expected = {
        (0, 0): a * b / 2,
        (1, 0): a * a * b / 6,
        (0, 1): a * b * b / 6,
        (2, 0): a**3 * b / 12,
        (1, 1): a * a * b * b / 24,
        (0, 2): a * b**3 / 12,
    }
    for (i, j), value in expected.items():
        assert abs(rule.integrate(lambda p: p[:, 0] ** i * p[:, 1] ** j) - value) <= 1e-10


def test_moment_fitting_half_cell():
    rule = moment_fit_cell(HalfSpace((0.5, 0.0), (1.0, 0.0)), Box((0, 0), (1, 1)), degree=2, order=5)
    assert rule.n_points == 25
    assert rule.integrate(lambda p: p[:, 0]) == pytest.approx(0.125, abs=1e-10)
    assert rule_total(rule) == pytest.approx(0.5, abs=1e-10)


def test_moment_fitting_uncut_cells():
    inside = moment_fit_cell(CIRCLE_LS, Box((0.45, 0.45), (0.55, 0.55)), degree=2, order=4)
    plain = tensor_rule(4, Box((0.45, 0.45), (0.55, 0.55)))
    assert np.array_equal(inside.weights, plain.weights)
    assert moment_fit_cell(CIRCLE_LS, Box((0, 0), (0.1, 0.1)), degree=2, order=4).n_points == 0


def test_moment_fitting_reproduces_targets_on_circle_cells(circle):
    mesh = mesh_for(circle, 8)
    checked = 0
    for cell in mesh_cells(mesh):
        lo, hi = np.asarray(cell.box.lo), np.asarray(cell.box.hi)
        rec = marching_squares_polygon(CIRCLE_LS, cell.box)
        if not rec.polygons or rec.fallback:
            continue
        rule = moment_fit_cell(CIRCLE_LS, cell.box, degree=2, order=5)
        targets = polygon_moments(rec.polygons, lo, hi, 2)
        achieved = monomials(rule.points, lo, hi, 2) @ rule.weights
        assert np.max(np.abs(achieved - targets)) <= RESIDUAL_TOLERANCE * cell.box.measure
        checked += 1
    assert checked > 0


def test_moment_fitting_degree_above_order():
    with pytest.raises(ArgumentError):
        moment_fit_cell(CIRCLE_LS, Box((0.25, 0.375), (0.5, 0.625)), degree=4, order=3)


def test_moment_fitting_rank_deficiency():
    # one node cannot match three moments
    with pytest.raises(MomentFittingError):
        moment_fit_cell(HalfSpace((0.5, 0.0), (1.0, 0.0)), Box((0, 0), (1, 1)), degree=1, order=1)


def test_moment_fitting_integrator(circle):
    result = MomentFittingIntegrator().compute_area_2d(circle, mesh_for(circle, 32), 5)
    assert result.status is Status.OK
    assert result.value == pytest.approx(CIRCLE_AREA, rel=1e-2)


# Monte-Carlo oracle


def test_monte_carlo_trivial_regions():
    box = Box((0, 0), (1, 1))
    assert monte_carlo_measure(HalfSpace((2.0, 0.0), (1.0, 0.0)), box, 1000, 3) == 1.0
    assert monte_carlo_measure(HalfSpace((2.0, 0.0), (-1.0, 0.0)), box, 1000, 3) == 0.0
    with pytest.raises(ArgumentError):
        monte_carlo_measure(CIRCLE_LS, box, 0, 3)


def test_monte_carlo_circle_within_four_sigma():
    n = 1_000_000
    value = monte_carlo_measure(CIRCLE_LS, Box((0, 0), (1, 1)), n, 1)
    p = CIRCLE_AREA
    assert abs(value - CIRCLE_AREA) <= 4.0 * math.sqrt(p * (1.0 - p) / n)


def test_monte_carlo_is_reproducible():
    box = Box((0, 0), (1, 1))
    assert monte_carlo_measure(CIRCLE_LS, box, 10_000, 42) == monte_carlo_measure(CIRCLE_LS, box, 10_000, 42)
    _, first = monte_carlo_rule(CIRCLE_LS, box, 1000, 42)
    assert np.array_equal(first.points, monte_carlo_rule(CIRCLE_LS, box, 1000, 42)[1].points)
    assert not np.array_equal(first.points, monte_carlo_rule(CIRCLE_LS, box, 1000, 43)[1].points)


def test_monte_carlo_integrator_sphere(sphere):
    n = 1_000_000
    result = MonteCarloIntegrator(samples=n).compute_volume_3d(sphere, mesh_for(sphere, 2))
    assert result.status is Status.OK
    assert "sigma=" in result.message
    reference = sphere.reference("volume")
    assert abs(result.value - reference) <= 4.0 * binomial_sigma(reference, 1.0, n)


def test_quadtree_agrees_with_oracle(circle, sphere):
    n = 1_000_000
    area = QuadtreeIntegrator(depth=6).compute_area_2d(circle, mesh_for(circle, 8), 5).value
    oracle = monte_carlo_measure(circle.level_set, circle.domain, n, 42)
    bound = 2.0 * CIRCLE_PERIMETER * (0.125 / 2**6)
    assert abs(area - oracle) <= 5.0 * (binomial_sigma(oracle, 1.0, n) + bound)

    volume = QuadtreeIntegrator(depth=4).compute_volume_3d(sphere, mesh_for(sphere, 8), 2).value
    oracle = monte_carlo_measure(sphere.level_set, sphere.domain, n, 42)
    bound = 2.0 * sphere.reference("surface_area") * (0.125 / 2**4)
    assert abs(volume - oracle) <= 5.0 * (binomial_sigma(oracle, 1.0, n) + bound)


ORACLE_SAMPLES = 1_000_000


@pytest.fixture(scope="module")
def oracle_areas():
    return {
        tc.id: monte_carlo_measure(tc.level_set, tc.domain, ORACLE_SAMPLES, 42)
        for tc in builtin_catalog() if tc.dim == 2
    }


@pytest.mark.parametrize("name, params, divisions, rel_bound", [
    ("quadtree", {"depth": 6}, 8, 2e-2),
    ("quadtree-tri", {}, 8, 1e-2),
    ("linear", {}, 16, 1e-2),
    ("momentfit", {}, 32, 2e-2),
])
def test_area_agrees_with_oracle_across_catalog(registry, oracle_areas, name, params, divisions, rel_bound):
    assert {"circle", "ellipse"} <= set(oracle_areas)
    integrator = registry.create(name, **params)
    for tc in builtin_catalog():
        if tc.dim != 2:
            continue
        oracle = oracle_areas[tc.id]
        sigma = binomial_sigma(oracle, tc.domain.measure, ORACLE_SAMPLES)
        assert abs(oracle - tc.reference("area")) <= 5.0 * sigma
        result = integrator.compute_area_2d(tc, mesh_for(tc, divisions), 5)
        assert result.status is Status.OK, (tc.id, result.message)
        assert abs(result.value - oracle) <= 5.0 * sigma + rel_bound * oracle, tc.id


@pytest.mark.slow
def test_monte_carlo_ten_million_samples(sphere):
    n = 10_000_000
    result = MonteCarloIntegrator(samples=n, seed=42).compute_volume_3d(sphere, mesh_for(sphere, 2))
    reference = sphere.reference("volume")
    assert abs(result.value - reference) <= 3.0 * binomial_sigma(reference, 1.0, n)


# contract


def test_contract_totality(catalog, registry):
    for cls in (registry.get(name) for name in registry.names()):
        integrator = cls(samples=10_000) if cls is MonteCarloIntegrator else cls()
        for tc in catalog:
            mesh = mesh_for(tc, 4)
            for op in Operation:
                result = getattr(integrator, op.method_name)(tc, mesh, 3)
                declared = (
                    op in integrator.capabilities
                    and tc.dim in integrator.supported_dims
                    and op.dim == tc.dim
                    and (integrator.interface_type is InterfaceType.IMPLICIT or tc.loop is not None)
                )
                expected = Status.OK if declared else Status.UNSUPPORTED
                assert result.status is expected, (integrator.name, tc.id, op.value, result.message)
                if result.ok:
                    assert math.isfinite(result.value)
                    assert result.n_points == result.quadrature.n_points
                else:
                    assert math.isnan(result.value)
                    assert result.quadrature is None


def moved_with_domain(tc, offset):
    moved = translate_testcase(tc, offset)
    return dataclasses.replace(moved, domain=moved.domain.translated(offset))


@pytest.mark.parametrize("name", ["quadtree", "quadtree-tri", "linear", "flux", "momentfit", "montecarlo"])
def test_results_follow_a_translated_case_and_mesh(catalog, registry, name):
    integrator = registry.create(name, samples=20_000) if name == "montecarlo" else registry.create(name)
    offset = (0.25, 0.125, 0.375)
    checked = 0
    for tc in catalog:
        delta = offset[: tc.dim]
        mesh = mesh_for(tc, 8 if tc.dim == 2 else 4)
        moved_tc, moved_mesh = moved_with_domain(tc, delta), mesh.shifted(delta)
        for op in sorted(integrator.capabilities, key=lambda o: o.value):
            if not integrator.supports(op, tc)[0]:
                continue
            base = integrator.compute(op, tc, mesh, 4)
            moved = integrator.compute(op, moved_tc, moved_mesh, 4)
            assert base.status is moved.status is Status.OK, (tc.id, op.value, moved.message)
            assert moved.value == pytest.approx(base.value, rel=1e-12, abs=1e-14), (tc.id, op.value)
            assert moved.n_points == base.n_points
            if base.n_points:
                shifted_back = moved.quadrature.points - np.asarray(delta)
                np.testing.assert_allclose(shifted_back, base.quadrature.points, atol=1e-12)
            checked += 1
    assert checked > 0


def test_surface_operations_are_unsupported_everywhere(sphere, registry):
    mesh = mesh_for(sphere, 2)
    for integrator in registry.resolve(registry.names()):
        assert integrator.compute_interface_surface_area(sphere, mesh).status is Status.UNSUPPORTED
        assert integrator.compute_volume_via_flux_3d(sphere, mesh).status is Status.UNSUPPORTED


def test_parametric_integrator_on_sphere_is_unsupported(sphere):
    result = ParametricFluxIntegrator().compute_volume_3d(sphere, mesh_for(sphere, 2))
    assert result.status is Status.UNSUPPORTED
    assert "flux" in result.message


def test_mesh_not_covering_interface_fails(circle):
    small = CartesianMesh.uniform(Box((0.0, 0.0), (0.5, 0.5)), 4)
    result = QuadtreeIntegrator().compute_area_2d(circle, small)
    assert result.status is Status.FAILED
    assert "ArgumentError" in result.message


def test_unknown_parameter_is_rejected():
    with pytest.raises(ArgumentError):
        QuadtreeIntegrator(resolution=3)
    with pytest.raises(ArgumentError):
        QuadtreeIntegrator(depth="deep")
    assert QuadtreeIntegrator(depth="5").params["depth"] == 5


def test_descriptor(registry):
    descriptor = registry.create("quadtree").descriptor
    assert descriptor.interface_type is InterfaceType.IMPLICIT
    assert descriptor.supported_dims == frozenset({2, 3})
    assert descriptor.property_string == "depth=4, samples=3"
    assert descriptor.to_dict()["capabilities"] == ["area2d", "volume3d"]
