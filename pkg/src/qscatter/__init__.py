"""Quantum scattering diagrams on log Calabi-Yau surfaces.

Modules: qcoeff (coefficients in q^(1/2)), qtorus (quantum torus and
wall-crossing), affine_base (the integral affine surface B), scattering
(diagrams, completion, consistency), canonical (seeds and canonical
diagrams), brokenlines (quantum broken lines and structure constants),
mirror_algebra (theta algebra and relations), cli.
"""

from .affine_base import build_surface, parse_point
from .brokenlines import structure_constants
from .canonical import Seed, canonical_diagram
from .fixtures import load_fixture
from .mirror_algebra import build_algebra, derive_relations
from .qcoeff import QScalar, q_power, s_power
from .qtorus import QTorusElement
from .scattering import ScatteringDiagram, Wall, complete

__version__ = "0.1.0"

__all__ = [
    "QScalar",
    "QTorusElement",
    "ScatteringDiagram",
    "Seed",
    "Wall",
    "build_algebra",
    "build_surface",
    "canonical_diagram",
    "complete",
    "derive_relations",
    "load_fixture",
    "parse_point",
    "q_power",
    "s_power",
    "structure_constants",
]
