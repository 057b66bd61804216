"""Canonical quantum scattering diagrams from toric-model seed data.

A seed is a list of primitive vectors m_1, ..., m_n in Z^2, one per blow-up
of a point on the toric boundary divisor of the ray -R_{>=0} m_j.  On the
plane each blow-up contributes the factor 1 + q^(-1/2) z^(-m_j) [E_j] on the
whole line R m_j.  Exceptional classes enter the plane model through proxies:
the class recorded as +E_j stands for the inverted variable, so every class
stays effective and the completion runs with ordinary degree bookkeeping.

On B the canonical diagram modulo the boundary ideal consists of one
outgoing wall per boundary ray, prod_E (1 + q^(-1/2) z^(E - phi(v_rho))).
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

from .affine_base import (
    SurfaceError,
    TropicalSurface,
    build_surface,
    det,
)
from .qcoeff import ONE, s_power
from .qtorus import QTorusElement, primitive, rescale
from .scattering import (
    INGOING,
    OUTGOING,
    DiagramError,
    ScatteringDiagram,
    Wall,
    complete,
    pseudo_angle,
)

__all__ = [
    "Seed",
    "SeedError",
    "seed_from_json",
    "seed_to_json",
    "build_seed_diagram",
    "surface_from_seed",
    "canonical_diagram",
    "ray_functions",
    "ray_images",
    "rho_presentation",
]


class SeedError(ValueError):
    """Invalid seed data or a seed that does not match the surface."""


@dataclass(frozen=True)
class Seed:
    """Blow-up directions with their exceptional labels, plus extra fan rays."""

    vectors: Tuple[Tuple[int, int], ...]
    labels: Tuple[str, ...]
    extra_rays: Tuple[Tuple[int, int], ...] = ()

    def __post_init__(self):
        if len(self.vectors) != len(self.labels):
            raise SeedError("one label per seed vector")
        if len(set(self.labels)) != len(self.labels):
            raise SeedError("duplicate blow-up labels")
        for m in self.vectors:
            if m == (0, 0) or primitive(m)[1] != 1:
                raise SeedError(f"seed vector {m} is not primitive")
        for v in self.extra_rays:
            if v == (0, 0) or primitive(v)[1] != 1:
                raise SeedError(f"extra ray {v} is not primitive")

    def fan_rays(self) -> List[Tuple[int, int]]:
        """Distinct rays -m_j and the extra rays, counterclockwise from +x."""
        rays = {(-m[0], -m[1]) for m in self.vectors} | set(self.extra_rays)
        return sorted(rays, key=pseudo_angle)

    def blowups_on(self, ray: Tuple[int, int]) -> List[str]:
        return [lab for m, lab in zip(self.vectors, self.labels) if (-m[0], -m[1]) == ray]


def seed_from_json(obj: Mapping) -> Seed:
    """Parse {"seed_vectors": [...], "blowups": [{"dir": m, "class": E}], "extra_rays": [...]}."""
    if not isinstance(obj, Mapping):
        raise SeedError("seed JSON must be an object")
    try:
        vectors = [tuple(int(x) for x in m) for m in obj.get("seed_vectors", [])]
        extra = [tuple(int(x) for x in v) for v in obj.get("extra_rays", [])]
    except (TypeError, ValueError):
        raise SeedError("seed vectors must be integer pairs") from None
    for v in vectors + extra:
        if len(v) != 2:
            raise SeedError("seed vectors must be integer pairs")
    blowups = obj.get("blowups")
    if blowups is None:
        labels = [f"E{i + 1}" for i in range(len(vectors))]
    else:
        # blow-ups are matched to seed vectors in order of appearance
        labels = [None] * len(vectors)
        for b in blowups:
            d = tuple(int(x) for x in b["dir"])
            slot = next((i for i, m in enumerate(vectors) if m == d and labels[i] is None), None)
            if slot is None:
                raise SeedError(f"blow-up direction {list(d)} has no free seed vector")
            labels[slot] = str(b["class"])
        if any(lab is None for lab in labels):
            raise SeedError("every seed vector needs a blow-up label")
    return Seed(tuple(vectors), tuple(labels), tuple(extra))


def seed_to_json(seed: Seed) -> dict:
    return {
        "seed_vectors": [list(m) for m in seed.vectors],
        "blowups": [{"dir": list(m), "class": lab} for m, lab in zip(seed.vectors, seed.labels)],
        "extra_rays": [list(v) for v in seed.extra_rays],
    }


def _line_function(seed: Seed, m: Tuple[int, int], N: int) -> QTorusElement:
    rank = len(seed.labels)
    zero = (0,) * rank
    f = QTorusElement.one(N, None, rank)
    for mm, lab in zip(seed.vectors, seed.labels):
        if mm != m:
            continue
        cls = [0] * rank
        cls[seed.labels.index(lab)] = 1
        factor = QTorusElement({(0, 0, zero): ONE, (-m[0], -m[1], tuple(cls)): s_power(-1)}, N, None, rank)
        f = f * factor
    return f


def build_seed_diagram(seed: Seed, N: int) -> ScatteringDiagram:
    """The plane diagram of the seed: one line per distinct seed direction.

    The line R m carries prod_j (1 + q^(-1/2) z^(-m) [E_j]) over the blow-ups
    with m_j = m; it is stored as an ingoing ray on -m and an outgoing ray on
    +m with the same function.
    """
    walls = []
    for m in sorted(set(seed.vectors), key=pseudo_angle):
        f = _line_function(seed, m, N)
        if f.is_one():
            continue
        walls.append(Wall((-m[0], -m[1]), f, INGOING))
        walls.append(Wall(m, f, OUTGOING))
    return ScatteringDiagram(tuple(walls), N, tuple(seed.labels), None)


def surface_from_seed(seed: Seed, name: str = "") -> TropicalSurface:
    """The surface B of the blown-up toric model.

    Self-intersections are the toric ones minus the number of blow-ups on the
    ray; kinks are the boundary classes D_1, ..., D_r.
    """
    fan = seed.fan_rays()
    r = len(fan)
    if r < 3:
        raise SeedError("the fan needs at least three rays")
    for j in range(r):
        if det(fan[j], fan[(j + 1) % r]) != 1:
            raise SeedError(f"fan is not smooth and complete between {fan[j]} and {fan[(j + 1) % r]}")
    selfint = []
    for j in range(r):
        u, v, w = fan[j - 1], fan[j], fan[(j + 1) % r]
        s = (u[0] + w[0], u[1] + w[1])
        # u + w = -dbar * v
        dbar = -(s[0] // v[0]) if v[0] else -(s[1] // v[1])
        if (s[0] + dbar * v[0], s[1] + dbar * v[1]) != (0, 0):
            raise SeedError("fan is not smooth")
        selfint.append(dbar - len(seed.blowups_on(v)))
    dlabels = [f"D{j + 1}" for j in range(r)]
    if set(dlabels) & set(seed.labels):
        raise SeedError("blow-up labels clash with boundary labels D1..Dr")
    labels = dlabels + list(seed.labels)
    return build_surface(
        selfint,
        [{dlabels[j]: 1} for j in range(r)],
        labels=labels,
        exceptionals=[seed.blowups_on(v) for v in fan],
        fan=fan,
        name=name,
    )


def _check_match(seed: Seed, surface: TropicalSurface) -> None:
    expected = surface_from_seed(seed)
    if (expected.selfint, expected.fan) != (surface.selfint, surface.fan):
        raise SeedError("surface does not match the seed")
    for j in range(surface.r):
        want = sorted(seed.blowups_on(expected.fan[j]))
        have = sorted(surface.labels[i] for i in surface.exceptionals[j])
        if want != have:
            raise SeedError(f"exceptional curves on ray {j} do not match the seed")


def _ray_wall(surface: TropicalSurface, j: int, N: int) -> Optional[Wall]:
    rank = surface.class_rank
    zero = (0,) * rank
    f = QTorusElement.one(N, j, rank)
    for i in surface.exceptionals[j]:
        cls = [0] * rank
        cls[i] = 1
        f = f * QTorusElement({(0, 0, zero): ONE, (-1, 0, tuple(cls)): s_power(-1)}, N, j, rank)
    if f.is_one():
        return None
    return Wall((1, 0), f, OUTGOING, j, j)


def _to_chart(fan, c: int, v: Tuple[int, int]) -> Tuple[int, int]:
    """Coordinates of v in the basis (fan[c], fan[c+1])."""
    u, w = fan[c], fan[(c + 1) % len(fan)]
    d = det(u, w)
    a = det(v, w) // d
    b = det(u, v) // d
    if (a * u[0] + b * w[0], a * u[1] + b * w[1]) != tuple(v):
        raise SeedError("fan cone is not unimodular")
    return a, b


def _cone_of(fan, v) -> Optional[int]:
    """Index c of the open cone (fan[c], fan[c+1]) containing v, or None on a ray."""
    for c in range(len(fan)):
        u, w = fan[c], fan[(c + 1) % len(fan)]
        if det(u, v) > 0 and det(v, w) > 0:
            return c
    return None


def canonical_diagram(
    seed: Optional[Seed],
    surface: Optional[TropicalSurface] = None,
    N: int = 1,
    *,
    include_interior: bool = False,
) -> ScatteringDiagram:
    """The canonical diagram on B, modulo the boundary ideal.

    Each ray rho_j with exceptional curves E carries the outgoing wall
    prod_E (1 + q^(-1/2) z^(E - phi(v_j))).  With ``include_interior`` the
    seed diagram is completed on the plane and its new walls that are not on
    fan rays are carried over into the cone charts, tangent re-expressed in
    the cone basis and class kept as is.
    """
    if seed is None and surface is None:
        raise SeedError("need a seed or a surface")
    if surface is None:
        surface = surface_from_seed(seed)
    elif seed is not None:
        _check_match(seed, surface)
    walls = [w for w in (_ray_wall(surface, j, N) for j in range(surface.r)) if w is not None]
    if include_interior:
        if seed is None or surface.fan is None:
            raise SeedError("interior walls need a seed with a fan")
        plane = complete(build_seed_diagram(seed, N), N)
        fan = surface.fan
        index = {lab: i for i, lab in enumerate(surface.labels)}
        for w in plane.walls:
            if not w.added:
                continue
            c = _cone_of(fan, w.direction)
            if c is None:
                continue
            terms = {}
            for (a, b, beta), coeff in w.f.terms.items():
                ta, tb = _to_chart(fan, c, (a, b))
                cls = [0] * surface.class_rank
                for lab, v in zip(plane.labels, beta):
                    cls[index[lab]] += v
                terms[(ta, tb, tuple(cls))] = coeff
            f = QTorusElement(terms, N, c, surface.class_rank)
            walls.append(Wall(_to_chart(fan, c, w.direction), f, w.orientation, c, None, True))
    return ScatteringDiagram(tuple(walls), N, tuple(surface.labels), surface)


# ---------------------------------------------------------------------------
# the ray algebra at rho_j


def ray_functions(diagram: ScatteringDiagram, j: int, N: Optional[int] = None):
    """(f_out, f_in) of ray j as elements of chart j, in the variable X = z^(v_j)."""
    surface = diagram.surface
    if surface is None:
        raise DiagramError("ray algebras live on B")
    N = diagram.order if N is None else N
    rank = diagram.rank
    j = j % surface.r
    f_out = QTorusElement.one(N, j, rank)
    f_in = QTorusElement.one(N, j, rank)
    for w in diagram.ray_walls(j):
        f = QTorusElement._raw(w.f.terms, w.f.order, j, rank, w.f.classical).truncate(N)
        if w.orientation == OUTGOING:
            f_out = f_out * f
        else:
            f_in = f_in * f
    classical = any(w.f.classical for w in diagram.walls)
    if classical:
        f_out, f_in = f_out.classical_limit(), f_in.classical_limit()
    return f_out, f_in


def _along(f: QTorusElement, chart: int, swap: bool, shift: int) -> QTorusElement:
    """f(q^shift X) with X = z^(v_j), written in the given chart."""
    if shift:
        f = rescale(f, (1, 0), shift)
    if swap:
        terms = {(b, a, beta): c for (a, b, beta), c in f.terms.items()}
    else:
        terms = dict(f.terms)
    return QTorusElement._raw(terms, f.order, chart, f.rank, f.classical)


def ray_images(diagram: ScatteringDiagram, j: int, N: Optional[int] = None) -> dict:
    """Images of X, X_+, X_- under the two maps of the ray algebra at rho_j.

    "minus" is the chart before rho_j, with coordinates (alpha, k) for
    alpha*v_{j-1} + k*v_j; "plus" the chart after, with (k, beta) for
    k*v_j + beta*v_{j+1}.
    """
    surface = diagram.surface
    N = diagram.order if N is None else N
    r = surface.r
    j = j % r
    rank = diagram.rank
    d = surface.selfint[j]
    kappa = surface.kinks[j]
    zero = (0,) * rank
    f_out, f_in = ray_functions(diagram, j, N)
    classical = f_out.classical
    cm, cp = (j - 1) % r, j

    def mono(chart, a, b, cls):
        return QTorusElement({(a, b, tuple(cls)): ONE}, N, chart, rank, classical)

    # v_{j+1} = -v_{j-1} - d v_j in the chart before; the class is the kink
    x_plus = mono(cm, -1, -d, kappa) * _along(f_in, cm, True, 1) * _along(f_out, cm, True, 0)
    # v_{j-1} = -v_{j+1} - d v_j in the chart after
    x_minus = mono(cp, -d, -1, kappa) * _along(f_out, cp, False, -1) * _along(f_in, cp, False, 0)
    return {
        "minus": {"X": mono(cm, 0, 1, zero), "X_minus": mono(cm, 1, 0, zero), "X_plus": x_plus},
        "plus": {"X": mono(cp, 1, 0, zero), "X_plus": mono(cp, 0, 1, zero), "X_minus": x_minus},
    }


def rho_presentation(diagram: ScatteringDiagram, j: int, N: Optional[int] = None) -> dict:
    """Defining relations of the ray algebra at rho_j and their verification.

    The relations are X X_+ = q X_+ X, X_- X = q X X_-,
    X_+ X_- = q^(d/2) z^kappa f_out(q^-1 X) f_in(X) X^-d and
    X_- X_+ = q^(-d/2) z^kappa f_out(X) f_in(q X) X^-d.
    Both maps must send each relation to an identity.
    """
    surface = diagram.surface
    if surface is None:
        raise DiagramError("ray algebras live on B")
    if not isinstance(j, int) or not 0 <= j < surface.r:
        raise DiagramError(f"{j!r} is not a boundary ray index")
    N = diagram.order if N is None else N
    d = surface.selfint[j]
    kappa = surface.kinks[j]
    rank = diagram.rank
    f_out, f_in = ray_functions(diagram, j, N)
    imgs = ray_images(diagram, j, N)
    labels = diagram.labels
    classical = f_out.classical

    def rhs(side: str, chart: int, swap: bool, sign: int):
        tw = 0 if classical else sign * d
        lead = QTorusElement({(0, 0, tuple(kappa)): s_power(tw)}, N, chart, rank, classical)
        xd = QTorusElement({((0, -d) if swap else (-d, 0)) + (tuple((0,) * rank),): ONE}, N, chart, rank, classical)
        if sign > 0:
            g = _along(f_out, chart, swap, -1) * _along(f_in, chart, swap, 0)
        else:
            g = _along(f_out, chart, swap, 0) * _along(f_in, chart, swap, 1)
        return lead * g * xd

    checks = {}
    ok = True
    for side, chart, swap in (("minus", (j - 1) % surface.r, True), ("plus", j, False)):
        im = imgs[side]
        X, Xp, Xm = im["X"], im["X_plus"], im["X_minus"]
        q = QTorusElement({(0, 0, tuple((0,) * rank)): s_power(0 if classical else 2)}, N, chart, rank, classical)
        results = {
            "X X_+ = q X_+ X": X * Xp == q * Xp * X,
            "X_- X = q X X_-": Xm * X == q * X * Xm,
            "X_+ X_- = q^(d/2) z^kappa f_out(q^-1 X) f_in(X) X^-d": Xp * Xm == rhs(side, chart, swap, 1),
            "X_- X_+ = q^(-d/2) z^kappa f_out(X) f_in(q X) X^-d": Xm * Xp == rhs(side, chart, swap, -1),
        }
        checks[side] = results
        ok = ok and all(results.values())
    return {
        "ray": j,
        "selfint": d,
        "kink": surface.class_to_dict(kappa),
        "order": N,
        "f_out": f_out.to_json(labels),
        "f_in": f_in.to_json(labels),
        "relations": [
            "X*X_+ = q*X_+*X",
            "X_-*X = q*X*X_-",
            f"X_+*X_- = q^({d}/2)*z^kappa*f_out(q^-1*X)*f_in(X)*X^({-d})",
            f"X_-*X_+ = q^({-d}/2)*z^kappa*f_out(X)*f_in(q*X)*X^({-d})",
        ],
        "images": {
            side: {k: v.to_json(labels) for k, v in im.items()} for side, im in imgs.items()
        },
        "checks": checks,
        "pass": ok,
    }
