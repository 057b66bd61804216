"""Quantum broken lines, lifts and theta-function structure constants.

Broken lines are found backward from their endpoint.  The state is a point of
B in some chart together with the monomial carried by the segment that ends
there.  Following the segment backward (along +tangent) leads to the next
event: an interior wall, a boundary ray, or nothing at all.  At a wall the
line may bend, picking up a term of the wall-crossing factor; at a boundary
ray the monomial is also transported to the neighbouring chart.  Classes only
grow forward along a line, so backward they shrink and the search is bounded
by the truncation order.

The constant term of a line's coefficient starts at 1 on the unbounded
segment, so the final coefficient is the product of the bend coefficients
times the q-twists s^det(t, tau) of each bend.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .affine_base import (
    ChartVector,
    DevelopedPoint,
    NonGenericPath,
    TropicalSurface,
    canonical_point,
    det,
    exit_edge,
    format_point,
    parse_point,
    point_representations,
    point_sort_key,
    step_ccw,
    step_cw,
    weight,
)
from .qcoeff import ONE, ZERO, NotLaurent, QScalar, as_laurent, classical_limit, poisson_extract
from .qtorus import QTorusElement, bend_factor
from .scattering import ScatteringDiagram, Wall, classical_diagram

__all__ = [
    "BrokenLine",
    "StructureConstantTable",
    "DegreeCapExceeded",
    "InconsistentPoisson",
    "SearchExhausted",
    "enumerate_broken_lines",
    "lift",
    "structure_constants",
    "build_table",
    "table_from_json",
    "poisson_table",
    "weight_check",
    "q_integrality",
    "max_degree",
]

CurveClass = Tuple[int, ...]
Coeff = Dict[CurveClass, QScalar]

DEFAULT_MAX_DEGREE = 12


# guards against backward paths that wrap forever on surfaces without
# positive kinks; no fixture comes near it
_STEP_CAP = 500_000


class SearchExhausted(RuntimeError):
    """The backward search did not terminate within the step cap."""


class DegreeCapExceeded(ValueError):
    """The requested order exceeds the safety cap."""


class InconsistentPoisson(ArithmeticError):
    """The two Poisson computations disagree."""


def max_degree() -> int:
    """Safety cap on the truncation order, overridable by QSCATTER_MAX_DEGREE."""
    raw = os.environ.get("QSCATTER_MAX_DEGREE")
    if raw is None:
        return DEFAULT_MAX_DEGREE
    try:
        return int(raw)
    except ValueError:
        raise DegreeCapExceeded(f"QSCATTER_MAX_DEGREE={raw!r} is not an integer") from None


def _check_order(N: int) -> None:
    if N < 1:
        raise ValueError("order must be at least 1")
    cap = max_degree()
    if N > cap:
        raise DegreeCapExceeded(f"order {N} exceeds the cap {cap} (set QSCATTER_MAX_DEGREE to raise it)")


@dataclass(frozen=True)
class Segment:
    chart: int
    start: Optional[Tuple[Fraction, Fraction]]  # None for the unbounded end
    end: Tuple[Fraction, Fraction]
    tangent: Tuple[int, int]
    cls: CurveClass
    coeff: QScalar


@dataclass(frozen=True)
class BrokenLine:
    charge: ChartVector
    endpoint: DevelopedPoint
    segments: Tuple[Segment, ...]

    @property
    def tangent(self) -> Tuple[int, int]:
        return self.segments[-1].tangent

    @property
    def cls(self) -> CurveClass:
        return self.segments[-1].cls

    @property
    def coeff(self) -> QScalar:
        return self.segments[-1].coeff

    def monomial(self, order: int, rank: int) -> QTorusElement:
        t = self.tangent
        return QTorusElement({(t[0], t[1], self.cls): self.coeff}, order, self.endpoint.chart, rank)


# ---------------------------------------------------------------------------
# wall data per chart, prepared once per diagram


class _Prepared:
    """Wall lookups for the enumerator, in chart coordinates."""

    def __init__(self, diagram: ScatteringDiagram, order: int, classical: bool):
        if diagram.surface is None:
            raise ValueError("broken lines live on a surface diagram")
        if classical:
            diagram = classical_diagram(diagram)
        self.diagram = diagram.truncate(order)
        self.surface = diagram.surface
        self.order = order
        self.classical = classical
        self.rank = diagram.rank
        r = self.surface.r
        self.interior: Dict[int, Dict[Tuple[int, int], List[Wall]]] = {c: {} for c in range(r)}
        self.rays: Dict[int, List[Wall]] = {j: [] for j in range(r)}
        for w in self.diagram.walls:
            if w.ray is not None:
                self.rays[w.ray % r].append(w)
            else:
                self.interior[w.chart % r].setdefault(w.direction, []).append(w)
        self._factor_cache: Dict = {}

    def factor(self, group, walls: Sequence[Wall], t: Tuple[int, int], swap: bool) -> List[Tuple[Tuple[int, int], CurveClass, QScalar]]:
        """Expanded bend factor for a monomial of tangent t meeting a group of walls.

        Returns (tau, gamma, c) terms.  ``swap`` means the walls are ray walls
        stored in the chart of their ray while t lives in the previous chart,
        where the ray is the second axis.
        """
        ms = []
        for w in walls:
            m = w.hamiltonian_direction
            ms.append((m[1], m[0]) if swap else m)
        ns = tuple(det(m, t) for m in ms)
        key = (group, swap, ns)
        cached = self._factor_cache.get(key)
        if cached is not None:
            return cached
        total = QTorusElement.one(self.order, None, self.rank, self.classical)
        for w, n in zip(walls, ns):
            if n == 0:
                continue
            f = QTorusElement._raw(w.f.terms, self.order, None, self.rank, self.classical)
            total = total * bend_factor(f, w.hamiltonian_direction, n)
        terms = []
        for (a, b, g), c in total.terms.items():
            tau = (b, a) if swap else (a, b)
            terms.append((tau, g, c))
        terms.sort(key=lambda x: (sum(x[1]), x[1], x[0]))
        self._factor_cache[key] = terms
        return terms


def _sub_class(surface, x: CurveClass, y: CurveClass) -> Optional[CurveClass]:
    out = tuple(a - b for a, b in zip(x, y))
    return out if surface.effective(out) else None


def _search(prep: _Prepared, p: ChartVector, Q: DevelopedPoint, record: bool):
    """All broken lines of charge p ending at Q, as (tangent, class, coeff, segments)."""
    surface = prep.surface
    r = surface.r
    targets = {}
    for rep in point_representations(surface, p):
        targets.setdefault(rep.chart, set()).add((rep.a, rep.b))
    if Q.a <= 0 or Q.b <= 0:
        raise NonGenericPath("endpoint must lie in the interior of a cone")
    for d in prep.interior[Q.chart % r]:
        if det((Q.a, Q.b), d) == 0:
            raise NonGenericPath("endpoint lies on a wall")
    zero = (0,) * prep.rank
    results = []
    twist = 0 if prep.classical else 1

    # stack items: chart, point, tangent, class, coeff, segment list (reversed)
    stack = []
    for (a, b, beta) in _final_candidates(prep, p, Q):
        stack.append((Q.chart % r, (Fraction(Q.a), Fraction(Q.b)), (a, b), beta, ONE, (), (a, b), beta))
    # each item remembers the final monomial (last two fields)
    steps = 0
    while stack:
        steps += 1
        if steps > _STEP_CAP:
            raise SearchExhausted(f"broken line search for {p} exceeded {_STEP_CAP} steps")
        chart, (pa, pb), t, beta, coeff, segs, t_final, b_final = stack.pop()
        ta, tb = t
        # next event backward along +t
        hit = exit_edge(pa, pb, ta, tb)
        best_lam = hit[0] if hit else None
        wall_hit = None
        for d in prep.interior[chart]:
            den = det(t, d)
            if den == 0:
                continue
            lam = Fraction(-det((pa, pb), d)) / den
            if lam <= 0:
                continue
            if best_lam is not None and lam >= best_lam:
                if lam == best_lam:
                    raise NonGenericPath("path meets a wall at a cone boundary")
                continue
            hx, hy = pa + lam * ta, pb + lam * tb
            if hx * d[0] + hy * d[1] <= 0:
                continue
            best_lam = lam
            wall_hit = d
        seg_end = (pa, pb)
        if best_lam is None:
            # unbounded segment
            if any(beta):
                continue
            if (ta, tb) in targets.get(chart, ()):
                seg = Segment(chart, None, seg_end, t, beta, coeff) if record else None
                results.append((t_final, b_final, coeff, (seg,) + segs if record else ()))
            continue
        nx, ny = pa + best_lam * ta, pb + best_lam * tb
        if nx == 0 and ny == 0:
            raise NonGenericPath("path passes through the origin")
        seg = Segment(chart, (nx, ny), seg_end, t, beta, coeff) if record else None
        new_segs = (seg,) + segs if record else ()
        if wall_hit is not None:
            d = wall_hit
            walls = prep.interior[chart][d]
            terms = prep.factor(("i", chart, d), walls, t, False)
            for tau, g, c in terms:
                prev_beta = _sub_class(surface, beta, g)
                if prev_beta is None:
                    continue
                prev_t = (ta - tau[0], tb - tau[1])
                if prev_t == (0, 0):
                    continue
                cc = coeff * c.shift(twist * det(prev_t, tau)) if (tau != (0, 0)) else coeff
                stack.append((chart, (nx, ny), prev_t, prev_beta, cc, new_segs, t_final, b_final))
            continue
        # boundary ray
        lam, edge = hit
        if edge == "a":
            ray = (chart + 1) % r
            swap = True  # ray is the b-axis of this chart
        else:
            ray = chart
            swap = False
        walls = prep.rays[ray]
        if walls:
            terms = prep.factor(("r", ray), walls, t, swap)
        else:
            terms = [((0, 0), zero, ONE)]
        for tau, g, c in terms:
            prev_beta = _sub_class(surface, beta, g)
            if prev_beta is None:
                continue
            prev_t = (ta - tau[0], tb - tau[1])
            if prev_t == (0, 0):
                continue
            cc = coeff * c.shift(twist * det(prev_t, tau)) if tau != (0, 0) else coeff
            if edge == "a":
                nchart, nt, nbeta = step_ccw(surface, chart, prev_t, prev_beta)
                npt = (ny, Fraction(0))
            else:
                nchart, nt, nbeta = step_cw(surface, chart, prev_t, prev_beta)
                npt = (Fraction(0), nx)
            if not surface.effective(nbeta):
                continue
            stack.append((nchart, npt, nt, nbeta, cc, new_segs, t_final, b_final))
    return results


def _final_candidates(prep: _Prepared, p: ChartVector, Q: DevelopedPoint):
    """Possible final monomials (tangent, class) at Q's chart, from the closure."""
    chart = Q.chart % prep.surface.r
    return sorted(_closure(prep, p).get(chart, ()))


def _closure(prep: _Prepared, p: ChartVector) -> Dict[int, set]:
    """Monomials (per chart) reachable by some broken line of charge p.

    Positions are ignored: from a monomial in chart c a line may cross either
    boundary ray its velocity points at, or bend at any wall of the closed
    cone.  The result over-approximates the true set.
    """
    key = ("closure", p)
    cached = prep._factor_cache.get(key)
    if cached is not None:
        return cached
    surface = prep.surface
    r = surface.r
    N = prep.order
    zero = (0,) * prep.rank
    seen = set()
    todo = []
    for rep in point_representations(surface, p):
        if rep.a == 0 and rep.b == 0:
            continue
        todo.append((rep.chart, (rep.a, rep.b), zero))
    while todo:
        state = todo.pop()
        if state in seen:
            continue
        seen.add(state)
        c, t, beta = state
        nxt = []
        if t[0] > 0:
            nxt.append(step_ccw(surface, c, t, beta))
        if t[1] > 0:
            nxt.append(step_cw(surface, c, t, beta))
        groups = [(("i", c, d), ws, False) for d, ws in prep.interior[c].items()]
        if prep.rays[c]:
            groups.append((("r", c), prep.rays[c], False))
        if prep.rays[(c + 1) % r]:
            groups.append((("r", (c + 1) % r), prep.rays[(c + 1) % r], True))
        for gkey, ws, swap in groups:
            terms = prep.factor(gkey, ws, t, swap)
            for tau, g, _ in terms:
                if tau == (0, 0):
                    continue
                nbeta = tuple(x + y for x, y in zip(beta, g))
                nxt.append((c, (t[0] + tau[0], t[1] + tau[1]), nbeta))
        for nc, nt, nb in nxt:
            if sum(nb) < N and nt != (0, 0) and (nc, nt, nb) not in seen:
                todo.append((nc, nt, nb))
    out: Dict[int, set] = {}
    for c, t, beta in seen:
        out.setdefault(c, set()).add((t[0], t[1], beta))
    prep._factor_cache[key] = out
    return out


# ---------------------------------------------------------------------------
# public API


def _prepare(diagram: ScatteringDiagram, order: Optional[int], classical: bool) -> _Prepared:
    N = diagram.order if order is None else order
    _check_order(N)
    return _Prepared(diagram, N, classical)


def enumerate_broken_lines(
    diagram: ScatteringDiagram,
    p: ChartVector,
    Q: DevelopedPoint,
    order: Optional[int] = None,
    *,
    classical: bool = False,
) -> List[BrokenLine]:
    """All broken lines of charge p ending at Q with final class degree < order."""
    prep = _prepare(diagram, order, classical)
    p = canonical_point(prep.surface, p)
    Q = DevelopedPoint(Q.chart % prep.surface.r, Fraction(Q.a), Fraction(Q.b), Q.winding)
    if p.a == 0 and p.b == 0:
        seg = Segment(Q.chart, None, (Q.a, Q.b), (0, 0), (0,) * prep.rank, ONE)
        return [BrokenLine(p, Q, (seg,))]
    found = _search(prep, p, Q, record=True)
    lines = [BrokenLine(p, Q, segs) for _, _, _, segs in found]
    lines.sort(key=lambda L: (sum(L.cls), L.cls, L.tangent, len(L.segments)))
    return lines


def lift(
    diagram: ScatteringDiagram,
    p: ChartVector,
    Q: DevelopedPoint,
    order: Optional[int] = None,
    *,
    classical: bool = False,
    _prep: Optional[_Prepared] = None,
) -> QTorusElement:
    """Sum of final monomials of all broken lines of charge p ending at Q."""
    prep = _prep or _prepare(diagram, order, classical)
    surface = prep.surface
    p = canonical_point(surface, p)
    chart = Q.chart % surface.r
    out: Dict = {}
    if p.a == 0 and p.b == 0:
        out[(0, 0, (0,) * prep.rank)] = ONE
    else:
        for t, beta, c, _ in _search(prep, p, DevelopedPoint(chart, Fraction(Q.a), Fraction(Q.b)), record=False):
            k = (t[0], t[1], surface.normalize_class(beta))
            out[k] = out.get(k, ZERO) + c
    return QTorusElement(out, prep.order, chart, prep.rank, prep.classical)


def _lines_at(prep: _Prepared, p: ChartVector, z: DevelopedPoint):
    if p.a == 0 and p.b == 0:
        return [((0, 0), (0,) * prep.rank, ONE)]
    key = ("lines", p, z)
    cached = prep._factor_cache.get(key)
    if cached is None:
        cached = [(t, beta, c) for t, beta, c, _ in _search(prep, p, z, record=False)]
        prep._factor_cache[key] = cached
    return cached


_OFFSETS = [(3, 7), (7, 3), (5, 11), (11, 5), (2, 9), (9, 2)]


def _endpoint_near(prep: _Prepared, p: ChartVector, attempt: int, scale: int) -> DevelopedPoint:
    u = _OFFSETS[attempt % len(_OFFSETS)]
    K = scale * (attempt // len(_OFFSETS) + 1)
    if p.a == 0 and p.b == 0:
        return DevelopedPoint(0, Fraction(u[0]), Fraction(u[1]))
    return DevelopedPoint(p.chart, Fraction(K * p.a + u[0]), Fraction(K * p.b + u[1]))


def _add_coeff(acc: Dict[CurveClass, QScalar], beta: CurveClass, c: QScalar) -> None:
    v = acc.get(beta)
    v = c if v is None else v + c
    if v:
        acc[beta] = v
    else:
        acc.pop(beta, None)


def _candidates(prep: _Prepared, p1: ChartVector, p2: ChartVector) -> List[ChartVector]:
    surface = prep.surface
    c1 = _closure(prep, p1) if (p1.a or p1.b) else {c: {(0, 0, (0,) * prep.rank)} for c in range(surface.r)}
    c2 = _closure(prep, p2) if (p2.a or p2.b) else {c: {(0, 0, (0,) * prep.rank)} for c in range(surface.r)}
    out = set()
    for c in range(surface.r):
        for a1, b1, g1 in c1.get(c, ()):
            for a2, b2, g2 in c2.get(c, ()):
                if sum(g1) + sum(g2) >= prep.order:
                    continue
                a, b = a1 + a2, b1 + b2
                if a >= 0 and b >= 0:
                    out.add(canonical_point(surface, ChartVector(c, a, b)))
    return sorted(out, key=point_sort_key)


def _structure_constant(prep: _Prepared, p1, p2, p, retry_seed: int = 0, scale: int = 997) -> Coeff:
    twist = 0 if prep.classical else 1
    last_exc = None
    for attempt in range(retry_seed, retry_seed + 24):
        z = _endpoint_near(prep, p, attempt, scale)
        try:
            lines1 = _lines_at(prep, p1, z)
            lines2 = _lines_at(prep, p2, z)
        except NonGenericPath as exc:
            last_exc = exc
            continue
        target = (p.a, p.b) if (p.a or p.b) else (0, 0)
        acc: Coeff = {}
        by_t2: Dict[Tuple[int, int], list] = {}
        for t2, g2, c2 in lines2:
            by_t2.setdefault(t2, []).append((g2, c2))
        for t1, g1, c1 in lines1:
            t2 = (target[0] - t1[0], target[1] - t1[1])
            for g2, c2 in by_t2.get(t2, ()):
                g = tuple(x + y for x, y in zip(g1, g2))
                if sum(g) >= prep.order:
                    continue
                _add_coeff(acc, prep.surface.normalize_class(g), (c1 * c2).shift(twist * det(t1, t2)))
        return acc
    raise NonGenericPath(f"no generic endpoint found near {p}: {last_exc}")


def structure_constants(
    diagram: ScatteringDiagram,
    p1: ChartVector,
    p2: ChartVector,
    order: Optional[int] = None,
    *,
    classical: bool = False,
    retry_seed: int = 0,
    _prep: Optional[_Prepared] = None,
) -> Dict[ChartVector, Coeff]:
    """Nonzero C^p_{p1,p2}, each a map class -> QScalar."""
    prep = _prep or _prepare(diagram, order, classical)
    surface = prep.surface
    p1 = canonical_point(surface, p1)
    p2 = canonical_point(surface, p2)
    out: Dict[ChartVector, Coeff] = {}
    for p in _candidates(prep, p1, p2):
        # the endpoint chart for a ray point is the chart where it is (x, 0)
        c = _structure_constant(prep, p1, p2, p, retry_seed)
        if c:
            out[p] = c
    return out


# ---------------------------------------------------------------------------
# tables


@dataclass
class StructureConstantTable:
    """Products theta_{p1} theta_{p2} = sum_p C^p theta_p for a set of pairs."""

    surface: TropicalSurface
    order: int
    entries: Dict[Tuple[ChartVector, ChartVector], Dict[ChartVector, Coeff]] = field(default_factory=dict)
    classical: bool = False

    @property
    def rank(self) -> int:
        return self.surface.class_rank

    def product(self, p1: ChartVector, p2: ChartVector) -> Dict[ChartVector, Coeff]:
        return self.entries[(canonical_point(self.surface, p1), canonical_point(self.surface, p2))]

    def charges(self) -> List[ChartVector]:
        seen = set()
        for a, b in self.entries:
            seen.add(a)
            seen.add(b)
        return sorted(seen, key=point_sort_key)

    def to_json(self) -> list:
        s = self.surface
        out = []
        for (p1, p2), row in sorted(self.entries.items(), key=lambda kv: (point_sort_key(kv[0][0]), point_sort_key(kv[0][1]))):
            terms = []
            for p in sorted(row, key=point_sort_key):
                for beta in sorted(row[p]):
                    c = row[p][beta]
                    try:
                        qj = as_laurent(c).to_json()
                    except NotLaurent:
                        qj = c.to_json()
                    terms.append({"p": format_point(s, p), "class": s.class_to_dict(beta), "q": qj})
            out.append({"p1": format_point(s, p1), "p2": format_point(s, p2), "terms": terms})
        return out


def table_from_json(rows: Sequence[Mapping], surface: TropicalSurface, order: int) -> StructureConstantTable:
    """Inverse of :meth:`StructureConstantTable.to_json`."""
    table = StructureConstantTable(surface, order)
    for row in rows:
        p1 = canonical_point(surface, parse_point(surface, str(row["p1"])))
        p2 = canonical_point(surface, parse_point(surface, str(row["p2"])))
        out = table.entries.setdefault((p1, p2), {})
        for term in row.get("terms", []):
            p = canonical_point(surface, parse_point(surface, str(term["p"])))
            beta = surface.class_from_dict(term.get("class", {}))
            c = QScalar.from_json(term["q"])
            cell = out.setdefault(p, {})
            cell[beta] = cell.get(beta, ZERO) + c
    return table


def build_table(
    diagram: ScatteringDiagram,
    charges: Sequence[ChartVector],
    order: Optional[int] = None,
    *,
    classical: bool = False,
    pairs: Optional[Iterable[Tuple[ChartVector, ChartVector]]] = None,
    retry_seed: int = 0,
) -> StructureConstantTable:
    """Structure constants for all ordered pairs of ``charges``."""
    prep = _prepare(diagram, order, classical)
    surface = prep.surface
    charges = [canonical_point(surface, p) for p in charges]
    table = StructureConstantTable(surface, prep.order, classical=classical)
    if pairs is None:
        pairs = [(a, b) for a in charges for b in charges]
    for a, b in pairs:
        a = canonical_point(surface, a)
        b = canonical_point(surface, b)
        if (a, b) not in table.entries:
            table.entries[(a, b)] = structure_constants(diagram, a, b, classical=classical, retry_seed=retry_seed, _prep=prep)
    return table


def q_integrality(table: StructureConstantTable) -> dict:
    """Every structure constant must be a Laurent polynomial in q^(1/2)."""
    failures = []
    count = 0
    for (p1, p2), row in table.entries.items():
        for p, coeffs in row.items():
            for beta, c in coeffs.items():
                count += 1
                try:
                    as_laurent(c)
                except NotLaurent:
                    failures.append({"p1": list(p1), "p2": list(p2), "p": list(p), "class": list(beta), "value": str(c)})
    return {"pass": not failures, "checked": count, "failures": failures}


def weight_check(table: StructureConstantTable, surface: Optional[TropicalSurface] = None) -> dict:
    """Torus-weight grading: w(p1) + w(p2) = w(p) + sum_j (beta.D_j) e_j."""
    surface = surface or table.surface
    checked = 0
    for (p1, p2), row in table.entries.items():
        lhs = tuple(x + y for x, y in zip(weight(surface, p1), weight(surface, p2)))
        for p, coeffs in row.items():
            wp = weight(surface, p)
            for beta in coeffs:
                checked += 1
                rhs = tuple(x + y for x, y in zip(wp, surface.ray_dot(beta)))
                if lhs != rhs:
                    return {
                        "pass": False,
                        "checked": checked,
                        "p1": format_point(surface, p1),
                        "p2": format_point(surface, p2),
                        "p": format_point(surface, p),
                        "class": surface.class_to_dict(beta),
                        "lhs": list(lhs),
                        "rhs": list(rhs),
                    }
    return {"pass": True, "checked": checked}


def poisson_table(
    diagram: ScatteringDiagram,
    charges: Sequence[ChartVector],
    order: Optional[int] = None,
    *,
    table: Optional[StructureConstantTable] = None,
) -> Dict[Tuple[ChartVector, ChartVector], Dict[ChartVector, Dict[CurveClass, Fraction]]]:
    """Classical brackets {theta_p1, theta_p2} computed two ways.

    (a) poisson_extract on the quantum structure constants C^p_{p1,p2} and
    C^p_{p2,p1}; (b) the classical sum of <s1, s2> c1 c2 over pairs of
    classical broken lines.  Raises InconsistentPoisson if they differ.
    """
    qprep = _prepare(diagram, order, False)
    cprep = _prepare(diagram, order, True)
    surface = qprep.surface
    charges = [canonical_point(surface, p) for p in charges]
    out = {}
    for p1 in charges:
        for p2 in charges:
            if table is not None and (p1, p2) in table.entries and (p2, p1) in table.entries:
                c12, c21 = table.entries[(p1, p2)], table.entries[(p2, p1)]
            else:
                c12 = structure_constants(diagram, p1, p2, _prep=qprep)
                c21 = structure_constants(diagram, p2, p1, _prep=qprep)
            route_a: Dict[ChartVector, Dict[CurveClass, Fraction]] = {}
            for p in set(c12) | set(c21):
                row12, row21 = c12.get(p, {}), c21.get(p, {})
                for beta in set(row12) | set(row21):
                    v = poisson_extract(row12.get(beta, ZERO), row21.get(beta, ZERO))
                    if v:
                        route_a.setdefault(p, {})[beta] = v
            route_b = _classical_bracket(cprep, p1, p2)
            if route_a != route_b:
                raise InconsistentPoisson(f"Poisson bracket of {p1} and {p2}: {route_a} != {route_b}")
            out[(p1, p2)] = route_a
    return out


def _classical_bracket(prep: _Prepared, p1: ChartVector, p2: ChartVector):
    out: Dict[ChartVector, Dict[CurveClass, Fraction]] = {}
    for p in _candidates(prep, p1, p2):
        for attempt in range(24):
            z = _endpoint_near(prep, p, attempt, 997)
            try:
                lines1 = _lines_at(prep, p1, z)
                lines2 = _lines_at(prep, p2, z)
            except NonGenericPath:
                continue
            break
        else:
            raise NonGenericPath(f"no generic endpoint near {p}")
        acc: Dict[CurveClass, Fraction] = {}
        for t1, g1, c1 in lines1:
            for t2, g2, c2 in lines2:
                if (t1[0] + t2[0], t1[1] + t2[1]) != (p.a, p.b):
                    continue
                g = tuple(x + y for x, y in zip(g1, g2))
                if sum(g) >= prep.order:
                    continue
                v = det(t1, t2) * classical_limit(c1) * classical_limit(c2)
                g = prep.surface.normalize_class(g)
                acc[g] = acc.get(g, Fraction(0)) + v
        acc = {g: v for g, v in acc.items() if v}
        if acc:
            out[p] = acc
    return out
