import json
import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import CATALOG_DIR, CIRCLE_AREA, CIRCLE_PERIMETER, UNIT_SQUARE
from cutquad.errors import ArgumentError, CatalogError
from cutquad.geometry import catalog as catalog_io
from cutquad.geometry import (
    Box,
    CartesianMesh,
    LevelSet,
    NurbsCurve,
    NurbsLoop,
    builtin_catalog,
    check_representation_consistency,
    circle_loop,
    levelset_eval,
    load_catalog,
    load_testcase,
    make_circle_testcase,
    make_ellipse_testcase,
    make_sphere_testcase,
    mesh_cells,
    nurbs_derivative,
    nurbs_eval,
    sample_loop,
    save_testcase,
    translate_testcase,
)
from cutquad.geometry.testcase import ellipse_perimeter

LINE = NurbsCurve(1, (0.0, 0.0, 1.0, 1.0), ((0.0, 0.0), (1.0, 0.0)), (1.0, 1.0))


def test_levelset_eval_on_circle_and_sphere():
    circle = LevelSet.circle((0.5, 0.5), 0.2)
    assert levelset_eval(circle, (0.5, 0.7)) == pytest.approx(0.0, abs=1e-15)
    assert levelset_eval(circle, (0.5, 0.5)) == pytest.approx(-0.2)
    assert levelset_eval(LevelSet.sphere((0.0, 0.0, 0.0), 1.0), (2.0, 0.0, 0.0)) == pytest.approx(1.0)


def test_levelset_eval_rejects_wrong_dimension():
    with pytest.raises(ArgumentError):
        levelset_eval(LevelSet.circle((0.5, 0.5), 0.2), (0.5, 0.5, 0.5))


def test_levelset_validation():
    with pytest.raises(ArgumentError):
        LevelSet.circle((0.5, 0.5), -0.1)
    with pytest.raises(ArgumentError):
        LevelSet.sphere((0.5, 0.5), 0.1)
    with pytest.raises(ValueError):
        LevelSet("torus", (0.5, 0.5), (0.1,))


def test_translated_levelset_moves_origin():
    moved = LevelSet.circle((0.25, 0.5), 0.2).translated((0.5, 0.0))
    assert_allclose(moved.origin, [0.75, 0.5])
    assert moved.center == (0.25, 0.5)
    assert levelset_eval(moved, (0.75, 0.5)) == pytest.approx(-0.2)


def test_nurbs_linear_curve():
    assert_allclose(nurbs_eval(LINE, 0.5), [0.5, 0.0])
    assert_allclose(nurbs_eval(LINE, 1.0), [1.0, 0.0])
    for t in (0.0, 0.3, 1.0):
        assert_allclose(nurbs_derivative(LINE, t), [1.0, 0.0])


def test_nurbs_rejects_parameter_outside_knots():
    with pytest.raises(ArgumentError):
        nurbs_eval(LINE, 1.5)


def test_nurbs_zero_length_knot_range():
    degenerate = NurbsCurve(1, (0.0, 0.0, 0.0, 0.0), ((0.0, 0.0), (1.0, 0.0)), (1.0, 1.0))
    with pytest.raises(ArgumentError):
        nurbs_derivative(degenerate, 0.0)


CUBIC = NurbsCurve(
    3,
    (0.0, 0.0, 0.0, 0.0, 0.3, 0.5, 0.5, 1.0, 1.0, 1.0, 1.0),
    ((0.0, 0.0), (0.2, 0.6), (0.5, 0.9), (0.8, 0.7), (1.0, 0.2), (0.7, -0.3), (0.3, -0.1)),
    (1.0, 0.7, 1.6, 0.9, 1.2, 0.5, 1.0),
)


def test_nurbs_derivative_matches_central_difference():
    step = 1e-6
    ts = np.random.default_rng(3).uniform(0.01, 0.99, 40)
    curves = (CUBIC, *circle_loop((0.5, 0.5), (0.3, 0.1)).curves)
    for curve in curves:
        for t in ts:
            difference = (nurbs_eval(curve, t + step) - nurbs_eval(curve, t - step)) / (2 * step)
            exact = nurbs_derivative(curve, t)
            assert np.linalg.norm(difference - exact) <= 1e-6 * np.linalg.norm(exact)


def test_nurbs_basis_partition_of_unity():
    ts = np.concatenate([np.random.default_rng(5).uniform(0.0, 1.0, 50), [0.0, 0.3, 0.5, 1.0]])
    for t in ts:
        basis = CUBIC.basis_functions(CUBIC.find_span(t), t)
        assert len(basis) == 4
        assert np.all(basis >= -1e-15)
        assert basis.sum() == pytest.approx(1.0, abs=1e-13)

    flat = NurbsCurve(CUBIC.degree, CUBIC.knots, ((0.3, -0.7),) * 7, CUBIC.weights)
    for t in ts:
        assert_allclose(nurbs_eval(flat, t), [0.3, -0.7], atol=1e-13)


def test_nurbs_interior_knot_breaks():
    kinked = NurbsCurve(1, (0.0, 0.0, 0.5, 1.0, 1.0), ((0.0, 0.0), (1.0, 1.0), (2.0, 0.0)), (1.0, 1.0, 1.0))
    assert_allclose(nurbs_eval(kinked, 0.5), [1.0, 1.0])
    assert_allclose(nurbs_derivative(kinked, 0.25), [2.0, 2.0])
    with pytest.raises(ArgumentError, match="multiplicity 1"):
        nurbs_derivative(kinked, 0.5)

    split = NurbsCurve(1, (0.0, 0.0, 0.5, 0.5, 1.0, 1.0),
                       ((0.0, 0.0), (1.0, 1.0), (2.0, 1.0), (3.0, 0.0)), (1.0, 1.0, 1.0, 1.0))
    assert_allclose(nurbs_eval(split, 0.75), [2.5, 0.5])
    with pytest.raises(ArgumentError, match="multiplicity 2"):
        nurbs_eval(split, 0.5)


def test_nurbs_curve_validation():
    with pytest.raises(ArgumentError):
        NurbsCurve(2, (0.0, 0.0, 1.0, 1.0), ((0.0, 0.0), (1.0, 0.0)), (1.0, 1.0))
    with pytest.raises(ArgumentError):
        NurbsCurve(1, (0.0, 0.0, 1.0, 1.0), ((0.0, 0.0), (1.0, 0.0)), (1.0, -1.0))
    with pytest.raises(ArgumentError):
        NurbsCurve(1, (0.0, 0.5, 0.4, 1.0), ((0.0, 0.0), (1.0, 0.0)), (1.0, 1.0))


def test_circle_loop_points_lie_on_circle():
    loop = circle_loop((0.5, 0.5), (0.2, 0.2))
    for curve in loop.curves:
        for t in np.linspace(0.0, 1.0, 17):
            assert np.linalg.norm(nurbs_eval(curve, t) - [0.5, 0.5]) == pytest.approx(0.2, abs=1e-13)


def test_circle_loop_tangent_is_orthogonal_to_radius():
    loop = circle_loop((0.5, 0.5), (0.2, 0.2))
    for curve in loop.curves:
        point = nurbs_eval(curve, 0.5)
        velocity = nurbs_derivative(curve, 0.5)
        assert abs(np.dot(point - [0.5, 0.5], velocity)) <= 1e-10
        assert np.linalg.norm(velocity) > 0


def test_loop_orientation_and_closure():
    loop = circle_loop((0.5, 0.5), (0.2, 0.2))
    assert loop.is_counter_clockwise()
    assert not loop.reversed().is_counter_clockwise()
    with pytest.raises(ArgumentError):
        NurbsLoop((LINE,))


def test_sample_loop_count_excludes_endpoint():
    loop = circle_loop((0.5, 0.5), (0.2, 0.2))
    samples = sample_loop(loop, 256)
    assert samples.shape == (256, 2)
    assert len({tuple(p) for p in np.round(samples, 12)}) == 256


def test_make_circle_testcase_references():
    tc = make_circle_testcase((0.5, 0.5), 0.2, UNIT_SQUARE, divisions_hint=2)
    assert tc.reference("area") == pytest.approx(0.12566370614359172, rel=1e-15)
    assert tc.reference("perimeter") == pytest.approx(1.2566370614359172, rel=1e-15)
    assert tc.reference("volume") is None
    assert check_representation_consistency(tc) <= 1e-10 * tc.domain.diameter


def test_representation_consistency_on_256_samples(catalog):
    for tc in catalog:
        if tc.loop is None:
            continue
        samples = sample_loop(tc.loop, 256)
        assert np.max(np.abs(tc.level_set.evaluate(samples))) <= 1e-10 * tc.domain.diameter


def test_circle_leaving_domain_is_rejected():
    with pytest.raises(ArgumentError):
        make_circle_testcase((0.95, 0.5), 0.2, UNIT_SQUARE)


def test_make_sphere_testcase_references():
    tc = make_sphere_testcase((0.5, 0.5, 0.5), 0.3, ((0, 0, 0), (1, 1, 1)))
    assert tc.reference("volume") == pytest.approx(0.1130973355292326, rel=1e-15)
    assert tc.reference("surface_area") == pytest.approx(1.1309733552923256, rel=1e-15)
    assert tc.loop is None
    with pytest.raises(ArgumentError):
        make_sphere_testcase((0.5, 0.5, 0.5), 0.6, ((0, 0, 0), (1, 1, 1)))


def test_ellipse_perimeter():
    assert ellipse_perimeter(0.2, 0.2) == pytest.approx(2.0 * math.pi * 0.2, rel=1e-14)
    a, b = 0.3, 0.15
    h = ((a - b) / (a + b)) ** 2
    ramanujan = math.pi * (a + b) * (1.0 + 3.0 * h / (10.0 + math.sqrt(4.0 - 3.0 * h)))
    assert ellipse_perimeter(a, b) == pytest.approx(ramanujan, rel=1e-9)
    assert ellipse_perimeter(b, a) == ellipse_perimeter(a, b)


def test_ellipse_testcase_consistency():
    tc = make_ellipse_testcase((0.5, 0.5), (0.3, 0.15), UNIT_SQUARE)
    assert tc.reference("area") == pytest.approx(math.pi * 0.3 * 0.15)
    assert check_representation_consistency(tc, 256) <= 1e-10 * tc.domain.diameter


def test_clockwise_loop_is_rejected(circle):
    document = catalog_io.testcase_to_document(circle)
    document["loop"]["curves"] = [
        {"degree": c.degree, "knots": list(c.knots), "control_points": [list(p) for p in c.control_points],
         "weights": list(c.weights)}
        for c in circle.loop.reversed().curves
    ]
    with pytest.raises(CatalogError, match="counter-clockwise"):
        catalog_io.testcase_from_document(document)


def test_translate_testcase():
    tc = make_circle_testcase((0.25, 0.5), 0.2, UNIT_SQUARE)
    moved = translate_testcase(tc, (0.5, 0.0))
    assert_allclose(moved.level_set.origin, [0.75, 0.5])
    assert moved.references == tc.references
    assert check_representation_consistency(moved) <= 1e-10 * tc.domain.diameter
    assert translate_testcase(tc, (0.0, 0.0)) == tc
    with pytest.raises(ArgumentError):
        translate_testcase(tc, (0.7, 0.0))
    with pytest.raises(ArgumentError):
        translate_testcase(tc, (0.1,))


def test_mesh_cells_partition_the_domain():
    cells = mesh_cells(CartesianMesh.uniform(Box((0, 0), (1, 1)), 2))
    assert len(cells) == 4
    assert cells[0].index == (0, 0)
    assert cells[0].box == Box((0.0, 0.0), (0.5, 0.5))

    mesh = CartesianMesh.uniform(Box((0, 0), (1, 1)), 8)
    cells = mesh_cells(mesh)
    assert len(cells) == 64
    assert all(c.box.widths.tolist() == [0.125, 0.125] for c in cells)
    assert sum(c.box.measure for c in cells) == pytest.approx(1.0, abs=1e-14)


def test_mesh_and_box_validation():
    with pytest.raises(ArgumentError):
        Box((0.0, 0.0), (0.0, 1.0))
    with pytest.raises(ArgumentError):
        CartesianMesh(Box((0, 0), (1, 1)), (2,))
    with pytest.raises(ArgumentError):
        CartesianMesh.uniform(Box((0, 0), (1, 1)), 0)


def test_grid_lines_end_exactly_on_bounds():
    mesh = CartesianMesh.uniform(Box((0.1, 0.0), (0.7, 0.3)), 7)
    xs, ys = mesh.grid_lines()
    assert xs[-1] == 0.7 and ys[-1] == 0.3
    assert len(xs) == 8


def test_catalog_directory_matches_builtin():
    loaded = load_catalog(str(CATALOG_DIR))
    assert [tc.id for tc in loaded] == ["circle", "ellipse", "sphere"]
    for tc, builtin in zip(loaded, builtin_catalog()):
        assert tc.dim == builtin.dim
        assert tc.tier == builtin.tier
        assert tc.divisions_hint == builtin.divisions_hint
        for kind, value in builtin.references.items():
            assert tc.references[kind] == pytest.approx(value, rel=1e-14)
    assert loaded[0].reference("area") == pytest.approx(CIRCLE_AREA)
    assert loaded[0].reference("perimeter") == pytest.approx(CIRCLE_PERIMETER)


def test_save_and_load_testcase(tmp_path, circle):
    path = save_testcase(circle, str(tmp_path / "circle.json"))
    assert load_testcase(path) == circle


def test_load_testcase_errors(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_testcase(str(tmp_path / "missing.json"))

    wrong = tmp_path / "circle.yaml"
    wrong.write_text("id: circle\n")
    with pytest.raises(CatalogError, match="Unsupported file type"):
        load_testcase(str(wrong))

    broken = tmp_path / "broken.json"
    broken.write_text('{"id": "circle",\n  "dim": }\n')
    with pytest.raises(CatalogError, match="line 2"):
        load_testcase(str(broken))

    partial = tmp_path / "partial.json"
    partial.write_text(json.dumps({"id": "circle", "dim": 2}))
    with pytest.raises(CatalogError, match="missing fields"):
        load_testcase(str(partial))


def test_duplicate_ids_in_catalog(tmp_path, circle):
    save_testcase(circle, str(tmp_path / "a.json"))
    save_testcase(circle, str(tmp_path / "b.json"))
    with pytest.raises(CatalogError, match="duplicate"):
        load_catalog(str(tmp_path))
