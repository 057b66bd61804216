"""Bundled surfaces and diagrams: pentagon, dP5, V1, V2 and toric P2.

A fixture file holds a surface, optional extra walls on it, the default
order, named generators for relation discovery and, for the pentagon, the
plane seed.  ``canonical_rays`` adds one outgoing wall per ray carrying the
exceptional curves on it.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Mapping, Optional, Tuple

from ..affine_base import TropicalSurface, surface_from_json, surface_to_json
from ..canonical import Seed, canonical_diagram, seed_from_json
from ..scattering import ScatteringDiagram, diagram_from_json

FIXTURES = ("pentagon", "dp5", "v1", "v2", "toric_p2")


class FixtureError(ValueError):
    pass


@dataclass
class Fixture:
    name: str
    surface: TropicalSurface
    order: int
    generators: List[Tuple[str, str]]
    relation_order: int
    charge_bound: int = 2
    seed: Optional[Seed] = None
    canonical_rays: bool = True
    walls: list = field(default_factory=list)
    description: str = ""

    def diagram(self, N: Optional[int] = None) -> ScatteringDiagram:
        N = self.order if N is None else N
        if self.canonical_rays:
            base = canonical_diagram(None, self.surface, N).walls
        else:
            base = ()
        extra = diagram_from_json({"order": N, "surface": surface_to_json(self.surface), "walls": self.walls}).walls
        extra = tuple(w for w in extra if not w.f.is_one())
        return ScatteringDiagram(tuple(base) + extra, N, self.surface.labels, self.surface)

    def to_json(self) -> dict:
        out = {
            "name": self.name,
            "description": self.description,
            "order": self.order,
            "surface": surface_to_json(self.surface),
            "canonical_rays": self.canonical_rays,
            "walls": self.walls,
            "generators": [list(g) for g in self.generators],
            "relation_order": self.relation_order,
            "charge_bound": self.charge_bound,
        }
        if self.seed is not None:
            from ..canonical import seed_to_json

            out["seed"] = seed_to_json(self.seed)
        return out


def fixture_from_json(obj: Mapping) -> Fixture:
    if not isinstance(obj, Mapping) or "surface" not in obj:
        raise FixtureError("a fixture is an object with a 'surface'")
    surface = surface_from_json(obj["surface"])
    order = int(obj.get("order", 3))
    return Fixture(
        name=str(obj.get("name", surface.name)),
        surface=surface,
        order=order,
        generators=[(str(a), str(b)) for a, b in obj.get("generators", [])],
        relation_order=int(obj.get("relation_order", order)),
        charge_bound=int(obj.get("charge_bound", 2)),
        seed=seed_from_json(obj["seed"]) if obj.get("seed") else None,
        canonical_rays=bool(obj.get("canonical_rays", True)),
        walls=list(obj.get("walls", [])),
        description=str(obj.get("description", "")),
    )


def fixture_text(name: str) -> str:
    if name not in FIXTURES:
        raise FixtureError(f"unknown fixture {name!r}; expected one of {', '.join(FIXTURES)}")
    return resources.files(__package__).joinpath(f"{name}.json").read_text()


def load_fixture(name: str) -> Fixture:
    return fixture_from_json(json.loads(fixture_text(name)))
