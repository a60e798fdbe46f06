import logging
from typing import Dict, Iterable, List, Optional, Type

from cutquad.errors import ArgumentError
from cutquad.integrators.base import Integrator, IntegratorDescriptor
from cutquad.integrators.flux import ParametricFluxIntegrator
from cutquad.integrators.linear import LinearReconstructionIntegrator
from cutquad.integrators.moment_fitting import MomentFittingIntegrator
from cutquad.integrators.montecarlo import MonteCarloIntegrator
from cutquad.integrators.quadtree import QuadtreeIntegrator
from cutquad.integrators.tessellated import TessellatedQuadtreeIntegrator

logger = logging.getLogger(__name__)


class IntegratorRegistry:
    """Integrator classes addressable by name."""

    def __init__(self, classes: Iterable[Type[Integrator]] = ()):
        self._classes: Dict[str, Type[Integrator]] = {}
        for cls in classes:
            self.register(cls)

    def register(self, cls: Type[Integrator]) -> Type[Integrator]:
        if cls.name in self._classes:
            raise ArgumentError(f"Integrator {cls.name} is already registered")
        self._classes[cls.name] = cls
        return cls

    def names(self) -> List[str]:
        return list(self._classes)

    def get(self, name: str) -> Type[Integrator]:
        try:
            return self._classes[name]
        except KeyError:
            raise ArgumentError(f"Unsupported integrator choice: {name} (known: {', '.join(self.names())})")

    def create(self, name: str, **params) -> Integrator:
        return self.get(name)(**params)

    def descriptors(self) -> List[IntegratorDescriptor]:
        return [cls().descriptor for cls in self._classes.values()]

    def resolve(self, names: Iterable[str], overrides: Optional[Dict[str, dict]] = None) -> List[Integrator]:
        """Instances for names, in order, with name.key=value overrides applied."""
        overrides = overrides or {}
        names = list(names)
        stray = sorted(set(overrides) - set(names))
        if stray:
            raise ArgumentError(f"Parameters given for integrators not selected: {', '.join(stray)}")
        return [self.create(name, **overrides.get(name, {})) for name in names]


def parse_value(raw: str):
    text = raw.strip()
    if text.lower() in ("true", "false"):
        return text.lower() == "true"
    for convert in (int, float):
        try:
            return convert(text)
        except ValueError:
            pass
    return text


def parse_param_overrides(pairs: Iterable[str], registry: Optional[IntegratorRegistry] = None) -> Dict[str, dict]:
    """["quadtree.depth=6", "montecarlo.seed=1"] -> {"quadtree": {"depth": 6}, "montecarlo": {"seed": 1}}."""
    overrides: Dict[str, dict] = {}
    for pair in pairs:
        key, sep, value = pair.partition("=")
        name, dot, param = key.strip().partition(".")
        if not sep or not dot or not name or not param:
            raise ArgumentError(f"Parameter override must look like name.key=value, got {pair!r}")
        if registry is not None:
            cls = registry.get(name)
            if param not in cls.defaults:
                raise ArgumentError(f"Integrator {name} has no parameter {param} (known: {', '.join(cls.defaults)})")
        overrides.setdefault(name, {})[param] = parse_value(value)
    return overrides


def default_registry() -> IntegratorRegistry:
    return IntegratorRegistry([
        QuadtreeIntegrator,
        TessellatedQuadtreeIntegrator,
        LinearReconstructionIntegrator,
        ParametricFluxIntegrator,
        MomentFittingIntegrator,
        MonteCarloIntegrator,
    ])
