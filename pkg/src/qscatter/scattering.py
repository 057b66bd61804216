"""Scattering diagrams, path-ordered products and consistency.

A diagram lives either on the plane (``surface is None``; the smooth toric
model) or on a :class:`~qscatter.affine_base.TropicalSurface`.  Every wall is
a ray from the origin.  On B a wall either lies on a boundary ray rho_j (then
``ray == j``, and it is described in chart j where rho_j is the a-axis) or in
the interior of a cone (``ray is None``).

The Hamiltonian direction of a wall is its ray direction d when it is
outgoing and -d when it is ingoing.  Terms of the wall function have tangent
l*m(H) with l < 0.

Orders follow the torus convention: terms of class degree >= N are dropped,
so ``complete(D, N)`` makes the loop trivial in all degrees below N.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .affine_base import (
    NonGenericPath,
    TropicalSurface,
    det,
    surface_from_json,
    surface_to_json,
)
from .qcoeff import ONE, QScalar, s_power
from .qtorus import QTorusElement, QTorusError, primitive, wallcross_apply

__all__ = [
    "Wall",
    "ScatteringDiagram",
    "DiagramError",
    "pseudo_angle",
    "path_ordered_product",
    "loop_product",
    "complete",
    "check_loop_identity",
    "consistency_check_on_B",
    "diagram_from_json",
    "diagram_to_json",
    "classical_diagram",
]

OUTGOING = "outgoing"
INGOING = "ingoing"


class DiagramError(ValueError):
    """Malformed diagram data."""


@dataclass(frozen=True)
class Wall:
    direction: Tuple[int, int]
    f: QTorusElement
    orientation: str = OUTGOING
    chart: Optional[int] = None
    ray: Optional[int] = None
    added: bool = False

    def __post_init__(self):
        if self.orientation not in (OUTGOING, INGOING):
            raise DiagramError(f"unknown orientation {self.orientation!r}")
        d, g = primitive(tuple(self.direction))
        if g != 1:
            raise DiagramError(f"wall direction {self.direction} is not primitive")
        object.__setattr__(self, "direction", d)
        m = self.hamiltonian_direction
        one_key = (0, 0, (0,) * self.f.rank)
        if self.f.constant_term() != ONE:
            raise DiagramError("wall function must have constant term 1")
        for (a, b, beta) in self.f.terms:
            if (a, b, beta) == one_key:
                continue
            if det((a, b), m) != 0:
                raise DiagramError(f"term tangent {(a, b)} is not along the wall {self.direction}")
            dot = a * m[0] + b * m[1]
            if dot >= 0:
                raise DiagramError(f"term tangent {(a, b)} is not a negative multiple of m(H) = {m}")
            if sum(beta) <= 0:
                raise DiagramError("nonconstant wall terms need positive class degree")

    @property
    def hamiltonian_direction(self) -> Tuple[int, int]:
        d = self.direction
        return d if self.orientation == OUTGOING else (-d[0], -d[1])

    def with_f(self, f: QTorusElement) -> "Wall":
        return replace(self, f=f)


@dataclass(frozen=True)
class ScatteringDiagram:
    walls: Tuple[Wall, ...]
    order: int
    labels: Tuple[str, ...]
    surface: Optional[TropicalSurface] = None

    @property
    def rank(self) -> int:
        return len(self.labels)

    @property
    def is_plane(self) -> bool:
        return self.surface is None

    def ray_walls(self, j: int) -> List[Wall]:
        return [w for w in self.walls if w.ray == j]

    def interior_walls(self, chart: int) -> List[Wall]:
        return [w for w in self.walls if w.ray is None and w.chart == chart]

    def truncate(self, order: int) -> "ScatteringDiagram":
        walls = []
        for w in self.walls:
            f = w.f.truncate(order)
            if not f.is_one():
                walls.append(w.with_f(f))
        return replace(self, walls=tuple(walls), order=order)


# ---------------------------------------------------------------------------
# angles


def pseudo_angle(v: Sequence[int]) -> Fraction:
    """A monotone stand-in for the angle of v, valued in [0, 4)."""
    x, y = v
    n = abs(x) + abs(y)
    if n == 0:
        raise DiagramError("zero vector has no angle")
    if y >= 0:
        return 1 - Fraction(x, n)
    return 3 + Fraction(x, n)


def _loop_key(v) -> Fraction:
    """Position along the loop starting just counterclockwise of +x."""
    a = pseudo_angle(v)
    return a if a > 0 else Fraction(4)


def _wall_sort_key(w: Wall):
    return (
        w.chart if w.chart is not None else -1,
        _loop_key(w.direction),
        w.orientation,
        w.added,
        sorted(w.f.terms.items(), key=lambda kv: kv[0]).__repr__(),
    )


def _crossing_sign(w: Wall, ccw: bool) -> int:
    """epsilon = sign(-<m(H), gamma'>) for a path crossing w."""
    d = w.direction
    gamma = (-d[1], d[0]) if ccw else (d[1], -d[0])
    v = -det(w.hamiltonian_direction, gamma)
    return 1 if v > 0 else -1


def _apply_wall(w: Wall, elem: QTorusElement, ccw: bool) -> QTorusElement:
    return wallcross_apply(w.f, w.hamiltonian_direction, elem, _crossing_sign(w, ccw))


# ---------------------------------------------------------------------------
# path-ordered products


def path_ordered_product(
    diagram: ScatteringDiagram,
    start: Tuple[int, int],
    end: Tuple[int, int],
    elem: QTorusElement,
    *,
    turns: int = 0,
    clockwise: bool = False,
    chart: Optional[int] = None,
) -> QTorusElement:
    """Transport ``elem`` along an angular arc from ``start`` to ``end``.

    On the plane the arc runs counterclockwise (or clockwise) through
    ``turns`` extra full turns.  On B, the arc must stay inside one cone
    ``chart`` and only that cone's interior walls are crossed.
    """
    if diagram.is_plane:
        walls = list(diagram.walls)
    else:
        if chart is None:
            raise DiagramError("paths on B need a chart")
        walls = diagram.interior_walls(chart)
        if turns:
            raise DiagramError("paths on B cannot wind inside a cone")
    for w in walls:
        if det(w.direction, start) == 0 and _dot(w.direction, start) > 0:
            raise NonGenericPath("path starts on a wall")
        if det(w.direction, end) == 0 and _dot(w.direction, end) > 0:
            raise NonGenericPath("path ends on a wall")
    a0, a1 = pseudo_angle(start), pseudo_angle(end)
    seq = []
    for w in walls:
        t = pseudo_angle(w.direction)
        if not clockwise:
            span = (a1 - a0) % 4
            pos = (t - a0) % 4
            if 0 < pos < span:
                seq.append((pos, w))
        else:
            span = (a0 - a1) % 4
            pos = (a0 - t) % 4
            if 0 < pos < span:
                seq.append((pos, w))
    seq.sort(key=lambda x: x[0])
    order = [w for _, w in seq]
    full = sorted(walls, key=lambda w: (pseudo_angle(w.direction) - a0) % 4 if not clockwise else (a0 - pseudo_angle(w.direction)) % 4)
    for _ in range(turns):
        for w in full:
            elem = _apply_wall(w, elem, not clockwise)
    for w in order:
        elem = _apply_wall(w, elem, not clockwise)
    return elem


def _dot(u, v):
    return u[0] * v[0] + u[1] * v[1]


def loop_product(diagram: ScatteringDiagram, elem: QTorusElement) -> QTorusElement:
    """Counterclockwise loop based just above the positive x-axis."""
    walls = sorted(diagram.walls, key=lambda w: _loop_key(w.direction))
    for w in walls:
        elem = _apply_wall(w, elem, True)
    return elem


def _generators(order: int, rank: int, classical: bool = False):
    zero = (0,) * rank
    return [
        QTorusElement.monomial((1, 0), zero, order, None, ONE, classical),
        QTorusElement.monomial((0, 1), zero, order, None, ONE, classical),
    ]


def check_loop_identity(diagram: ScatteringDiagram, order: Optional[int] = None) -> dict:
    """Apply the full loop to both generators and report the first defect."""
    if not diagram.is_plane:
        raise DiagramError("loop identity is checked on plane diagrams")
    N = diagram.order if order is None else order
    classical = any(w.f.classical for w in diagram.walls)
    worst = None
    for g in _generators(N, diagram.rank, classical):
        defect = loop_product(diagram.truncate(N), g) - g
        d = defect.min_degree()
        if d is not None and (worst is None or d < worst[0]):
            worst = (d, defect.degree_part(d))
    if worst is None:
        return {"pass": True, "order": N}
    d, part = worst
    return {
        "pass": False,
        "order": N,
        "degree": d,
        "terms": part.to_json(diagram.labels),
    }


# ---------------------------------------------------------------------------
# completion


def _g(ell: int, n: int, classical: bool) -> QScalar:
    """First-order coefficient of F_n for a term with tangent l*m(H)."""
    if classical:
        return QScalar(n)
    return (s_power(2 * ell * n) - ONE) / (s_power(2 * ell) - ONE)


def _defects(diagram: ScatteringDiagram, order: int, classical: bool):
    out = []
    for g in _generators(order, diagram.rank, classical):
        img = loop_product(diagram, g)
        out.append((g, img - g))
    return out


def complete(diagram: ScatteringDiagram, order: Optional[int] = None) -> ScatteringDiagram:
    """Add outgoing walls until the loop is trivial below degree ``order``."""
    if not diagram.is_plane:
        raise DiagramError("completion runs on the plane model")
    N = diagram.order if order is None else order
    classical = any(w.f.classical for w in diagram.walls)
    for w in diagram.walls:
        for (a, b, beta) in w.f.terms:
            if (a, b) != (0, 0) and sum(beta) <= 0:
                raise DiagramError("ungraded input: degree-0 nonconstant term")
    rank = diagram.rank
    base = [w.with_f(w.f.truncate(N)) for w in diagram.walls]
    added: Dict[Tuple[int, int], QTorusElement] = {}
    for w in base:
        if w.added and w.orientation == OUTGOING:
            added[w.direction] = added.get(w.direction, QTorusElement.one(N, None, rank, classical)) * w.f
    base = [w for w in base if not (w.added and w.orientation == OUTGOING)]

    def current(k_order):
        walls = [w.with_f(w.f.truncate(k_order)) for w in base]
        for d, f in added.items():
            ft = f.truncate(k_order)
            if not ft.is_one():
                walls.append(Wall(d, ft, OUTGOING, added=True))
        return ScatteringDiagram(tuple(walls), k_order, diagram.labels, None)

    for k in range(1, N):
        cur = current(k + 1)
        increments: Dict[Tuple[Tuple[int, int], Tuple[int, int], Tuple[int, ...]], QScalar] = {}
        checks = []
        for g, defect in _defects(cur, k + 1, classical):
            low = defect.min_degree()
            if low is None:
                checks.append((g, {}))
                continue
            if low < k:
                raise DiagramError(f"loop defect in degree {low} below the current order {k}")
            (ma, mb, _), = g.terms
            coeffs = {}
            for (a, b, beta), c in defect.degree_part(k).terms.items():
                n = (a - ma, b - mb)
                # coefficient of z^m * z^n
                coeffs[(n, beta)] = c if classical else c.shift(-det((ma, mb), n))
            checks.append((g, coeffs))
        keys = set()
        for _, coeffs in checks:
            keys.update(coeffs)
        for n, beta in sorted(keys):
            if n == (0, 0):
                raise DiagramError("loop defect has a term without tangent")
            n0, mult = primitive(n)
            m_h = (-n0[0], -n0[1])
            ell = -mult
            value = None
            for g, coeffs in checks:
                (ma, mb, _), = g.terms
                N_m = det(m_h, (ma, mb))
                d = coeffs.get((n, beta))
                if N_m == 0:
                    if d:
                        raise DiagramError("loop defect is not of wall type")
                    continue
                c = (d or QScalar(0)) / _g(ell, N_m, classical)
                if value is None:
                    value = c
                elif value != c:
                    raise DiagramError("loop defect is not of wall type")
            if value:
                increments[(m_h, n, beta)] = value
        for (m_h, n, beta), c in increments.items():
            f = added.get(m_h, QTorusElement.one(N, None, rank, classical))
            added[m_h] = f + QTorusElement.monomial(n, beta, N, None, c, classical)
    result = current(N)
    return replace(result, walls=tuple(sorted(result.walls, key=_wall_sort_key)))


def classical_diagram(diagram: ScatteringDiagram) -> ScatteringDiagram:
    """Every wall function evaluated at q = 1."""
    walls = tuple(w.with_f(w.f.classical_limit()) for w in diagram.walls)
    return replace(diagram, walls=walls)


# ---------------------------------------------------------------------------
# consistency on B


def _ray_element_to_chart(surface: TropicalSurface, f: QTorusElement, ray: int, chart: int) -> QTorusElement:
    """Re-express an element supported along v_ray in an adjacent chart."""
    r = surface.r
    if chart == ray % r:
        return f.with_chart(chart)
    if (chart + 1) % r == ray % r:
        terms = {(b, a, beta): c for (a, b, beta), c in f.terms.items()}
        return QTorusElement._raw(terms, f.order, chart, f.rank, f.classical)
    raise DiagramError(f"chart {chart} is not adjacent to ray {ray}")


_SAMPLE_WEIGHTS = [(1, 1), (7, 5), (5, 7), (13, 11), (11, 13), (29, 31)]


def consistency_check_on_B(
    diagram: ScatteringDiagram,
    charges: Optional[Sequence] = None,
    order: Optional[int] = None,
    *,
    far: int = 97,
) -> dict:
    """Numerical consistency of a diagram on B at a finite order.

    Inside each cone, lifts at sample points of neighbouring chambers must be
    related by the path-ordered product across the interior walls between
    them.  Across each ray rho, the lifts just before and just after rho must
    be the two images of a single element of the ray algebra: the parts of
    both lifts that are monomial under their respective maps determine that
    element, and its images must reproduce the remaining parts.
    """
    from .affine_base import ChartVector, DevelopedPoint, canonical_point
    from .brokenlines import lift
    from .canonical import ray_images

    surface = diagram.surface
    if surface is None:
        raise DiagramError("consistency on B needs a surface")
    N = diagram.order if order is None else order
    if N > 1 and not any(sum(k) > 0 for k in surface.kinks):
        raise DiagramError("termination needs a kink of positive degree")
    diagram = diagram.truncate(N)
    r = surface.r
    if charges is None:
        charges = [ChartVector(j, 1, 0) for j in range(r)]
    charges = [canonical_point(surface, p) for p in charges]

    def fail(kind, where, p, detail):
        return {"pass": False, "kind": kind, "where": where, "charge": [p.chart, p.a, p.b], "detail": detail}

    for c in range(r):
        dirs = sorted({w.direction for w in diagram.interior_walls(c)}, key=pseudo_angle)
        bounds = [(1, 0)] + dirs + [(0, 1)]
        for p in charges:
            for wa, wb in _SAMPLE_WEIGHTS:
                samples = [(wa * u[0] + wb * v[0], wa * u[1] + wb * v[1]) for u, v in zip(bounds, bounds[1:])]
                try:
                    lifts = [lift(diagram, p, DevelopedPoint(c, Fraction(x), Fraction(y)), N) for x, y in samples]
                except NonGenericPath:
                    continue
                break
            else:
                raise NonGenericPath(f"no generic sample points in chart {c}")
            for i in range(len(samples) - 1):
                moved = normalize_classes(surface, path_ordered_product(diagram, samples[i], samples[i + 1], lifts[i], chart=c))
                if moved != lifts[i + 1]:
                    return fail("chamber", {"chart": c, "from": list(samples[i]), "to": list(samples[i + 1])}, p, (moved - lifts[i + 1]).format(surface.labels))
    for j in range(r):
        minus_chart = (j - 1) % r
        plus_chart = j
        q_minus = DevelopedPoint(minus_chart, Fraction(1), Fraction(far))
        q_plus = DevelopedPoint(plus_chart, Fraction(far), Fraction(1))
        for p in charges:
            lm = lift(diagram, p, q_minus, N)
            lp = lift(diagram, p, q_plus, N)
            ok, detail = _ray_gluing_consistent(diagram, j, lm, lp, N)
            if not ok:
                return fail("ray", {"ray": j}, p, detail)
    return {"pass": True, "order": N}


def normalize_classes(surface: TropicalSurface, elem: QTorusElement) -> QTorusElement:
    """Reduce every class of elem modulo the surface's class relations."""
    if not surface.relations:
        return elem
    out = {}
    for (a, b, beta), c in elem.terms.items():
        k = (a, b, surface.normalize_class(beta))
        v = out.get(k)
        v = c if v is None else v + c
        if v:
            out[k] = v
        else:
            out.pop(k, None)
    return elem._like(out)


def _ray_gluing_consistent(diagram: ScatteringDiagram, j: int, lm: QTorusElement, lp: QTorusElement, N: int):
    """Check that two lifts come from one element of the ray algebra at rho_j.

    Elements of the ray algebra are sums X_-^b X^k, X^k and X_+^a X^k.  Under
    the map to the chart before rho_j the first two kinds are monomials, and
    under the map to the chart after rho_j the last two are.
    """
    from .canonical import ray_images

    surface = diagram.surface
    imgs = ray_images(diagram, j, N)
    rank = diagram.rank
    zero = (0,) * rank
    # chart before rho_j has coordinates (alpha, k) = alpha*v_{j-1} + k*v_j
    # chart after rho_j has coordinates (k, beta) = k*v_j + beta*v_{j+1}
    plus_part: Dict[Tuple[int, int, Tuple[int, ...]], QScalar] = {}
    minus_part: Dict[Tuple[int, int, Tuple[int, ...]], QScalar] = {}
    zero_minus: Dict = {}
    zero_plus: Dict = {}
    for (alpha, k, beta), c in lm.terms.items():
        if alpha > 0:
            # psi_-(X_-^alpha X^k) = z^(alpha v_{j-1}) z^(k v_j) = s^(alpha k) z^(alpha, k)
            minus_part[(alpha, k, beta)] = c.shift(-alpha * k) if not lm.classical else c
        elif alpha == 0:
            zero_minus[(k, beta)] = c
    for (k, b, beta), c in lp.terms.items():
        if b > 0:
            # psi_+(X_+^b X^k) = z^(b v_{j+1}) z^(k v_j) = s^(-b k) z^(k, b)
            plus_part[(b, k, beta)] = c.shift(b * k) if not lp.classical else c
        elif b == 0:
            zero_plus[(k, beta)] = c
    if zero_minus != zero_plus:
        return False, "the parts along the ray disagree"
    # images of the X_+ part under psi_- must match the alpha < 0 part of lm
    expect_minus = QTorusElement.zero(N, lm.chart, rank, lm.classical)
    for (b, k, beta), c in plus_part.items():
        term = (imgs["minus"]["X_plus"] ** b) * QTorusElement.monomial((0, k), beta, N, lm.chart, c, lm.classical)
        expect_minus = expect_minus + term
    actual_minus = QTorusElement._raw({key: c for key, c in lm.terms.items() if key[0] < 0}, N, lm.chart, rank, lm.classical)
    expect_minus = normalize_classes(surface, expect_minus)
    actual_minus = normalize_classes(surface, actual_minus)
    if expect_minus != actual_minus:
        return False, "chart before the ray: " + (expect_minus - actual_minus).format(diagram.labels)
    expect_plus = QTorusElement.zero(N, lp.chart, rank, lp.classical)
    for (alpha, k, beta), c in minus_part.items():
        term = (imgs["plus"]["X_minus"] ** alpha) * QTorusElement.monomial((k, 0), beta, N, lp.chart, c, lp.classical)
        expect_plus = expect_plus + term
    actual_plus = QTorusElement._raw({key: c for key, c in lp.terms.items() if key[1] < 0}, N, lp.chart, rank, lp.classical)
    expect_plus = normalize_classes(surface, expect_plus)
    actual_plus = normalize_classes(surface, actual_plus)
    if expect_plus != actual_plus:
        return False, "chart after the ray: " + (expect_plus - actual_plus).format(diagram.labels)
    return True, ""


# ---------------------------------------------------------------------------
# JSON


def diagram_to_json(diagram: ScatteringDiagram) -> dict:
    walls = []
    for w in diagram.walls:
        item = {
            "direction": list(w.direction),
            "orientation": w.orientation,
            "f": w.f.to_json(diagram.labels),
        }
        if w.chart is not None:
            item["chart"] = w.chart
        if w.ray is not None:
            item["ray"] = w.ray
        if w.added:
            item["added"] = True
        walls.append(item)
    return {
        "surface": surface_to_json(diagram.surface) if diagram.surface is not None else None,
        "classes": list(diagram.labels),
        "order": diagram.order,
        "walls": walls,
    }


def diagram_from_json(obj: Mapping) -> ScatteringDiagram:
    try:
        order = int(obj["order"])
    except (KeyError, TypeError, ValueError):
        raise DiagramError("diagram JSON needs an integer 'order'") from None
    surface = surface_from_json(obj["surface"]) if obj.get("surface") else None
    labels = tuple(surface.labels) if surface is not None else tuple(obj.get("classes", []))
    walls = []
    for item in obj.get("walls", []):
        d = tuple(int(x) for x in item["direction"])
        chart = item.get("chart")
        ray = item.get("ray")
        if surface is not None:
            if chart is None:
                raise DiagramError("walls on B need a chart")
            chart = int(chart) % surface.r
            if ray is None:
                if d == (1, 0):
                    ray = chart
                elif d == (0, 1):
                    ray = (chart + 1) % surface.r
            if ray is not None:
                ray = int(ray) % surface.r
        f = QTorusElement.from_json(item["f"], labels, order, None)
        if surface is not None:
            if ray is not None and chart != ray:
                # normalize to the chart where the ray is the a-axis
                f = QTorusElement._raw({(b, a, beta): c for (a, b, beta), c in f.terms.items()}, order, None, len(labels))
                d = (d[1], d[0])
                chart = ray
            f = f.with_chart(chart)
        walls.append(Wall(d, f, item.get("orientation", OUTGOING), chart, ray, bool(item.get("added", False))))
    return ScatteringDiagram(tuple(walls), order, labels, surface)
