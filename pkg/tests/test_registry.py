import pytest

from conftest import CrashingIntegrator
from cutquad.errors import ArgumentError
from cutquad.integrators import MonteCarloIntegrator, QuadtreeIntegrator
from cutquad.integrators.registry import IntegratorRegistry, parse_param_overrides, parse_value


def test_default_registry_order(registry):
    assert registry.names() == ["quadtree", "quadtree-tri", "linear", "flux", "momentfit", "montecarlo"]


def test_get_and_create(registry):
    assert registry.get("quadtree") is QuadtreeIntegrator
    assert registry.create("montecarlo", seed=7).params["seed"] == 7
    with pytest.raises(ArgumentError, match="Unsupported integrator choice"):
        registry.get("sparse-grid")


def test_register_rejects_duplicates(registry):
    registry.register(CrashingIntegrator)
    assert registry.names()[-1] == "crash"
    with pytest.raises(ArgumentError):
        registry.register(CrashingIntegrator)


def test_resolve_applies_overrides(registry):
    quadtree, montecarlo = registry.resolve(["quadtree", "montecarlo"], {"quadtree": {"depth": 6}})
    assert quadtree.params["depth"] == 6
    assert isinstance(montecarlo, MonteCarloIntegrator)
    assert montecarlo.params == MonteCarloIntegrator.defaults


def test_resolve_rejects_overrides_for_unselected(registry):
    with pytest.raises(ArgumentError, match="not selected"):
        registry.resolve(["flux"], {"quadtree": {"depth": 6}})


def test_parse_value():
    assert parse_value("6") == 6
    assert parse_value(" 1e-3 ") == 1e-3
    assert parse_value("True") is True
    assert parse_value("false") is False
    assert parse_value("fine") == "fine"


def test_parse_param_overrides(registry):
    overrides = parse_param_overrides(["quadtree.depth=6", "montecarlo.seed=1", "quadtree.samples=4"], registry)
    assert overrides == {"quadtree": {"depth": 6, "samples": 4}, "montecarlo": {"seed": 1}}


@pytest.mark.parametrize("pair", ["quadtree.depth", "depth=6", ".depth=6", "quadtree.=6"])
def test_parse_param_overrides_rejects_bad_format(pair):
    with pytest.raises(ArgumentError, match="name.key=value"):
        parse_param_overrides([pair])


def test_parse_param_overrides_rejects_unknown_names(registry):
    with pytest.raises(ArgumentError, match="no parameter"):
        parse_param_overrides(["quadtree.resolution=3"], registry)
    with pytest.raises(ArgumentError):
        parse_param_overrides(["sparse-grid.level=3"], registry)


def test_descriptors(registry):
    descriptors = {d.name: d for d in registry.descriptors()}
    assert list(descriptors) == registry.names()
    assert descriptors["flux"].to_dict()["interface_type"] == "parametric"
    assert descriptors["flux"].supported_dims == frozenset({2})
    assert "samples=1000000" in descriptors["montecarlo"].property_string


def test_empty_registry():
    assert IntegratorRegistry().names() == []
