"""Test-case documents (one JSON object per file) and the built-in catalog.

Document fields:

    id, dim, tier, divisions_hint
    domain:     {"lo": [...], "hi": [...]}
    level_set:  {"kind": "circle"|"sphere"|"ellipse", "center": [...], "radii": [...], "shift": [...]}
    loop:       {"curves": [{"degree", "knots", "control_points", "weights"}, ...]} or null (3D)
    references: {"area"?, "perimeter"?, "volume"?, "surface_area"?}
"""
import json
import logging
import os
from typing import List

from cutquad.errors import ArgumentError, CatalogError
from cutquad.geometry.levelset import LevelSet
from cutquad.geometry.mesh import Box
from cutquad.geometry.nurbs import NurbsCurve, NurbsLoop
from cutquad.geometry.testcase import (
    TestCase,
    Tier,
    make_circle_testcase,
    make_ellipse_testcase,
    make_sphere_testcase,
)

logger = logging.getLogger(__name__)

REQUIRED_FIELDS = ("id", "dim", "domain", "level_set")


def testcase_to_document(tc: TestCase) -> dict:
    document = {
        "id": tc.id,
        "dim": tc.dim,
        "tier": tc.tier.value,
        "divisions_hint": tc.divisions_hint,
        "domain": {"lo": list(tc.domain.lo), "hi": list(tc.domain.hi)},
        "level_set": {
            "kind": tc.level_set.kind.value,
            "center": list(tc.level_set.center),
            "radii": list(tc.level_set.radii),
            "shift": list(tc.level_set.shift),
        },
        "loop": None,
        "references": dict(tc.references),
    }
    if tc.loop is not None:
        document["loop"] = {
            "curves": [
                {
                    "degree": c.degree,
                    "knots": list(c.knots),
                    "control_points": [list(p) for p in c.control_points],
                    "weights": list(c.weights),
                }
                for c in tc.loop.curves
            ]
        }
    return document


def testcase_from_document(document: dict, file_path="<document>") -> TestCase:
    if not isinstance(document, dict):
        raise CatalogError(file_path, "a test-case document must be a JSON object")
    missing = [name for name in REQUIRED_FIELDS if name not in document]
    if missing:
        raise CatalogError(file_path, f"missing fields: {', '.join(missing)}")

    try:
        domain = Box(tuple(document["domain"]["lo"]), tuple(document["domain"]["hi"]))
        ls = document["level_set"]
        level_set = LevelSet(ls["kind"], ls["center"], ls["radii"], ls.get("shift") or ())
        loop = None
        if document.get("loop"):
            loop = NurbsLoop(
                tuple(
                    NurbsCurve(c["degree"], c["knots"], c["control_points"], c["weights"])
                    for c in document["loop"]["curves"]
                )
            )
        return TestCase(
            id=str(document["id"]),
            dim=int(document["dim"]),
            domain=domain,
            level_set=level_set,
            loop=loop,
            references=document.get("references") or {},
            tier=document.get("tier", Tier.EXTENSIVE.value),
            divisions_hint=document.get("divisions_hint"),
        )
    except KeyError as e:
        raise CatalogError(file_path, f"missing field {e}")
    except (ArgumentError, TypeError, ValueError) as e:
        raise CatalogError(file_path, str(e))


def load_testcase(file_path: str) -> TestCase:
    if not os.path.exists(file_path):
        raise FileNotFoundError(f"The file {file_path} does not exist.")

    _, file_extension = os.path.splitext(file_path)
    if file_extension.lower() != ".json":
        raise CatalogError(file_path, f"Unsupported file type: {file_extension}")

    with open(file_path, "r") as file:
        try:
            document = json.load(file)
        except json.JSONDecodeError as e:
            raise CatalogError(file_path, f"line {e.lineno}: {e.msg}")
    return testcase_from_document(document, file_path)


def save_testcase(tc: TestCase, file_path: str) -> str:
    directory = os.path.dirname(file_path)
    if directory:
        os.makedirs(directory, exist_ok=True)
    with open(file_path, "w", newline="\n") as file:
        json.dump(testcase_to_document(tc), file, indent=2)
        file.write("\n")
    return file_path


def load_catalog(directory: str) -> List[TestCase]:
    """Every *.json document in directory, sorted by file name; ids must be unique."""
    if not os.path.isdir(directory):
        raise FileNotFoundError(f"The catalog directory {directory} does not exist.")

    testcases = []
    for filename in sorted(os.listdir(directory)):
        if filename.endswith(".json"):
            testcases.append(load_testcase(os.path.join(directory, filename)))

    ids = [tc.id for tc in testcases]
    duplicates = sorted({i for i in ids if ids.count(i) > 1})
    if duplicates:
        raise CatalogError(directory, f"duplicate test-case ids: {', '.join(duplicates)}")
    logger.info("Loaded %d test cases from %s", len(testcases), directory)
    return testcases


def builtin_catalog() -> List[TestCase]:
    unit_square = ((0.0, 0.0), (1.0, 1.0))
    return [
        make_circle_testcase((0.5, 0.5), 0.2, unit_square, divisions_hint=2, id="circle", tier=Tier.QUICK),
        make_ellipse_testcase((0.5, 0.5), (0.3, 0.15), unit_square, divisions_hint=8, id="ellipse"),
        make_sphere_testcase((0.5, 0.5, 0.5), 0.3, ((0.0, 0.0, 0.0), (1.0, 1.0, 1.0)), divisions_hint=8, id="sphere"),
    ]
