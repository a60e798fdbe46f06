from cutquad.geometry.catalog import (
    builtin_catalog,
    load_catalog,
    load_testcase,
    save_testcase,
    testcase_from_document,
    testcase_to_document,
)
from cutquad.geometry.levelset import HalfSpace, ImplicitFunction, LevelSet, LevelSetKind, levelset_eval
from cutquad.geometry.mesh import Box, CartesianMesh, Cell, mesh_cells
from cutquad.geometry.nurbs import (
    NurbsCurve,
    NurbsLoop,
    circle_loop,
    loop_signed_area,
    nurbs_derivative,
    nurbs_eval,
    sample_loop,
)
from cutquad.geometry.testcase import (
    MeasureKind,
    TestCase,
    Tier,
    check_representation_consistency,
    make_circle_testcase,
    make_ellipse_testcase,
    make_sphere_testcase,
    mesh_for,
    translate_testcase,
)
