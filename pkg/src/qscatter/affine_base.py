"""The integral affine surface B with one singular point at the origin.

B is glued from cones sigma_0, ..., sigma_{r-1}.  Rays are numbered
rho_0, ..., rho_{r-1} with primitive generators v_0, ..., v_{r-1}, and the
chart ``c`` is the cone spanned by v_c and v_{c+1} (indices mod r), with
coordinates (a, b) meaning a*v_c + b*v_{c+1}.  Going counterclockwise from
chart c to chart c+1 crosses rho_{c+1}.

In chart c, the next generator is expressed through the previous two by
v_{c+2} = -v_c - d_{c+1} v_{c+1}, where d_j is the self-intersection of the
boundary divisor D_j.  Hence a tangent vector (a, b) in chart c has
coordinates (b - a*d_{c+1}, -a) in chart c+1.

The piecewise linear function phi is never stored.  Monomials are pairs
(tangent, class) expressed in some chart; changing chart across rho_j adds
a*kappa_j to the class, where a is the coefficient of the generator that lies
on the far side of rho_j (v_{j-1} when coming from chart j-1).  With this
sign, a monomial moving counterclockwise (a > 0 in the source chart) gains
classes, matching the convexity of phi.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

__all__ = [
    "ChartVector",
    "DevelopedPoint",
    "TropicalSurface",
    "SurfaceError",
    "NonGenericPath",
    "build_surface",
    "transport_tangent",
    "transport_monomial",
    "weight",
    "develop_ray_crossings",
    "nu_pushforward",
    "surface_from_json",
    "surface_to_json",
    "parse_point",
    "format_point",
    "canonical_point",
    "point_representations",
    "integral_points",
    "det",
]

CurveClass = Tuple[int, ...]


class SurfaceError(ValueError):
    """Malformed surface data or an invalid chart request."""


class NonGenericPath(ArithmeticError):
    """A traced path hits the origin; the caller should perturb and retry."""


class ChartVector(NamedTuple):
    """A tangent vector or point a*v_c + b*v_{c+1} in chart c."""

    chart: int
    a: int
    b: int

    @property
    def coords(self) -> Tuple[int, int]:
        return (self.a, self.b)


class DevelopedPoint(NamedTuple):
    """A point of B with rational chart coordinates and a sheet counter."""

    chart: int
    a: Fraction
    b: Fraction
    winding: int = 0


def det(u: Sequence, v: Sequence):
    return u[0] * v[1] - u[1] * v[0]


def _class_add(x: CurveClass, y: CurveClass, k: int = 1) -> CurveClass:
    if not k:
        return x
    return tuple(a + k * b for a, b in zip(x, y))


@dataclass(frozen=True)
class TropicalSurface:
    """Rays with self-intersections and kinks valued in curve classes.

    ``intersections[i][j]`` is the intersection number of class generator i
    with the boundary divisor D_j; it feeds the torus weight check.
    ``fan`` optionally records a toric model: one primitive vector in Z^2
    per ray.
    """

    selfint: Tuple[int, ...]
    kinks: Tuple[CurveClass, ...]
    labels: Tuple[str, ...]
    exceptionals: Tuple[Tuple[int, ...], ...] = ()
    intersections: Tuple[Tuple[int, ...], ...] = ()
    fan: Optional[Tuple[Tuple[int, int], ...]] = None
    name: str = ""
    relations: Tuple[CurveClass, ...] = ()
    curves: Tuple[CurveClass, ...] = ()
    _cache: dict = field(default_factory=dict, compare=False, hash=False, repr=False)

    @property
    def r(self) -> int:
        return len(self.selfint)

    @property
    def class_rank(self) -> int:
        return len(self.labels)

    def zero_class(self) -> CurveClass:
        return (0,) * len(self.labels)

    def effective(self, c: CurveClass) -> bool:
        """Membership in the monoid spanned by the labels and the extra curves."""
        if all(v >= 0 for v in c):
            return True
        if not self.curves or sum(c) <= 0:
            return False
        memo = self._cache.setdefault("effective", {})
        c = tuple(c)
        if c not in memo:
            memo[c] = any(self.effective(tuple(a - b for a, b in zip(c, g))) for g in self.curves)
        return memo[c]

    def label_index(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise SurfaceError(f"unknown class label {label!r}") from None

    def class_from_dict(self, d: Mapping[str, int]) -> CurveClass:
        out = [0] * len(self.labels)
        for k, v in d.items():
            out[self.label_index(k)] += int(v)
        return tuple(out)

    def class_to_dict(self, c: CurveClass) -> Dict[str, int]:
        return {self.labels[i]: v for i, v in enumerate(c) if v}

    def format_class(self, c: CurveClass) -> str:
        parts = []
        for i, v in enumerate(c):
            if v == 1:
                parts.append(self.labels[i])
            elif v:
                parts.append(f"{v}{self.labels[i]}")
        return "+".join(parts) if parts else "0"

    def class_residue(self, c: CurveClass) -> Tuple[Fraction, ...]:
        """Image of c in the quotient by the class relations."""
        if not self.relations:
            return tuple(Fraction(x) for x in c)
        rows = self._cache.get("echelon")
        if rows is None:
            rows = _echelon(self.relations)
            self._cache["echelon"] = rows
        v = [Fraction(x) for x in c]
        for piv, row in rows:
            if v[piv]:
                f = v[piv]
                v = [x - f * y for x, y in zip(v, row)]
        return tuple(v)

    def normalize_class(self, c: CurveClass) -> CurveClass:
        """Canonical representative of c modulo the class relations.

        Among the effective label combinations of the same degree and
        residue, the one balancing boundary and exceptional labels best is
        chosen, then the lexicographically largest.  Without relations this
        is the identity.
        """
        if not self.relations:
            return tuple(c)
        c = tuple(c)
        memo = self._cache.setdefault("normal", {})
        out = memo.get(c)
        if out is not None:
            return out
        d = sum(c)
        table = self._cache.setdefault("normal_by_degree", {})
        if d not in table and d >= 0 and all(x >= 0 for x in c):
            table[d] = self._representatives(d)
        best = table.get(d, {}).get(self.class_residue(c)) if all(x >= 0 for x in c) else None
        out = best if best is not None else c
        memo[c] = out
        return out

    def _representatives(self, d: int) -> Dict[Tuple[Fraction, ...], CurveClass]:
        n = len(self.labels)
        exc = {i for group in self.exceptionals for i in group}
        bnd = {i for k in self.kinks for i, v in enumerate(k) if v}

        def key(v):
            nb = sum(v[i] for i in bnd)
            ne = sum(v[i] for i in exc)
            return (abs(nb - ne), tuple(-x for x in v))

        best: Dict[Tuple[Fraction, ...], CurveClass] = {}
        for v in _compositions(d, n):
            res = self.class_residue(v)
            cur = best.get(res)
            if cur is None or key(v) < key(cur):
                best[res] = v
        return best

    def transition(self, chart: int) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Matrix taking chart ``chart`` coordinates to chart ``chart+1``."""
        d = self.selfint[(chart + 1) % self.r]
        return ((-d, 1), (-1, 0))

    def monodromy(self) -> Tuple[Tuple[int, int], Tuple[int, int]]:
        """Composite of all r transitions, starting from chart 0."""
        m = ((1, 0), (0, 1))
        for c in range(self.r):
            t = self.transition(c)
            m = _matmul(t, m)
        return m

    def ray_dot(self, beta: CurveClass) -> Tuple[int, ...]:
        """(beta . D_0, ..., beta . D_{r-1})."""
        out = [0] * self.r
        for i, coeff in enumerate(beta):
            if coeff:
                row = self.intersections[i]
                for j in range(self.r):
                    out[j] += coeff * row[j]
        return tuple(out)


def _echelon(vectors) -> List[Tuple[int, List[Fraction]]]:
    """Reduced row echelon form, as (pivot, row) pairs."""
    rows: List[Tuple[int, List[Fraction]]] = []
    for vec in vectors:
        v = [Fraction(x) for x in vec]
        for piv, row in rows:
            if v[piv]:
                f = v[piv]
                v = [x - f * y for x, y in zip(v, row)]
        nz = [i for i, x in enumerate(v) if x]
        if not nz:
            continue
        piv = nz[0]
        v = [x / v[piv] for x in v]
        rows = [(p, [x - r[piv] * y for x, y in zip(r, v)]) for p, r in rows]
        rows.append((piv, v))
    return rows


def _compositions(d: int, n: int):
    """All nonnegative integer vectors of length n summing to d."""
    if n == 0:
        if d == 0:
            yield ()
        return
    if n == 1:
        yield (d,)
        return
    for k in range(d, -1, -1):
        for rest in _compositions(d - k, n - 1):
            yield (k,) + rest


def _matmul(x, y):
    return (
        (x[0][0] * y[0][0] + x[0][1] * y[1][0], x[0][0] * y[0][1] + x[0][1] * y[1][1]),
        (x[1][0] * y[0][0] + x[1][1] * y[1][0], x[1][0] * y[0][1] + x[1][1] * y[1][1]),
    )


def _as_class(k, labels: Sequence[str]) -> CurveClass:
    if isinstance(k, Mapping):
        out = [0] * len(labels)
        for lab, v in k.items():
            if lab not in labels:
                raise SurfaceError(f"unknown class label {lab!r}")
            out[list(labels).index(lab)] += int(v)
        return tuple(out)
    k = tuple(int(x) for x in k)
    if len(k) != len(labels):
        raise SurfaceError("kink vector length does not match the class rank")
    return k


def _default_intersections(selfint, kinks, labels, exceptionals) -> Tuple[Tuple[int, ...], ...]:
    """Intersection numbers of class generators with the D_j.

    A kink consisting of a single generator with coefficient 1 is taken to be
    the class of D_j itself; exceptional curves meet their own ray once.
    """
    r = len(selfint)
    rows = [[0] * r for _ in labels]
    boundary = {}
    for j, k in enumerate(kinks):
        nz = [i for i, v in enumerate(k) if v]
        if len(nz) == 1 and k[nz[0]] == 1:
            boundary[nz[0]] = j
    for i, j in boundary.items():
        rows[i][j] += selfint[j]
        if r == 2:
            rows[i][(j + 1) % r] += 2
        elif r >= 3:
            rows[i][(j + 1) % r] += 1
            rows[i][(j - 1) % r] += 1
    for j, exc in enumerate(exceptionals):
        for i in exc:
            rows[i][j] += 1
    return tuple(tuple(row) for row in rows)


def build_surface(
    selfint: Sequence[int],
    kinks: Sequence,
    class_rank: Optional[int] = None,
    labels: Optional[Sequence[str]] = None,
    *,
    exceptionals: Optional[Sequence[Sequence]] = None,
    intersections: Optional[Mapping[str, Sequence[int]]] = None,
    fan: Optional[Sequence[Sequence[int]]] = None,
    name: str = "",
    relations: Optional[Sequence] = None,
    curves: Optional[Sequence] = None,
) -> TropicalSurface:
    """Assemble a :class:`TropicalSurface`.

    ``kinks`` entries are class vectors or ``{label: coefficient}`` dicts.
    ``exceptionals[j]`` lists the labels (or indices) of exceptional curves
    meeting D_j.  ``relations`` are degree-zero class vectors (or dicts) that
    vanish in H_2; output classes are reduced modulo them.  ``curves`` are
    extra effective classes of positive degree, allowed negative entries,
    for surfaces whose effective cone is not spanned by the labels.
    """
    selfint = tuple(int(d) for d in selfint)
    r = len(selfint)
    if r < 1:
        raise SurfaceError("a surface needs at least one ray")
    if labels is None:
        labels = tuple(f"C{i + 1}" for i in range(class_rank or 0))
    labels = tuple(labels)
    if class_rank is not None and class_rank != len(labels):
        raise SurfaceError("class_rank does not match the number of labels")
    if len(set(labels)) != len(labels):
        raise SurfaceError("duplicate class labels")
    if len(kinks) != r:
        raise SurfaceError(f"expected {r} kinks, got {len(kinks)}")
    kinks = tuple(_as_class(k, labels) for k in kinks)
    for k in kinks:
        if any(v < 0 for v in k):
            raise SurfaceError("kinks must be effective classes")
    exc: List[Tuple[int, ...]] = []
    for j in range(r):
        items = exceptionals[j] if exceptionals and j < len(exceptionals) else ()
        idx = []
        for e in items:
            if isinstance(e, str):
                if e not in labels:
                    raise SurfaceError(f"unknown exceptional label {e!r}")
                idx.append(labels.index(e))
            else:
                idx.append(int(e))
        exc.append(tuple(idx))
    if exceptionals is not None and len(exceptionals) not in (0, r):
        raise SurfaceError("exceptionals must be given per ray")
    rows = [list(row) for row in _default_intersections(selfint, kinks, labels, exc)]
    if intersections:
        for lab, vals in intersections.items():
            if lab not in labels:
                raise SurfaceError(f"unknown class label {lab!r} in intersections")
            vals = [int(v) for v in vals]
            if len(vals) != r:
                raise SurfaceError("intersection rows need one entry per ray")
            rows[labels.index(lab)] = vals
    fan_t = None
    if fan is not None:
        fan_t = tuple((int(u[0]), int(u[1])) for u in fan)
        if len(fan_t) != r:
            raise SurfaceError("fan needs one vector per ray")
    rel = tuple(_as_class(x, labels) for x in (relations or ()))
    for x in rel:
        if sum(x) != 0:
            raise SurfaceError("class relations must have degree zero")
    for x in rel:
        if any(sum(x[i] * row[j] for i, row in enumerate(rows)) for j in range(r)):
            raise SurfaceError("class relations must respect the intersection numbers")
    extra = tuple(_as_class(x, labels) for x in (curves or ()))
    for x in extra:
        if sum(x) <= 0:
            raise SurfaceError("extra curves need positive degree")
    return TropicalSurface(
        relations=rel,
        curves=extra,
        selfint=selfint,
        kinks=kinks,
        labels=labels,
        exceptionals=tuple(exc),
        intersections=tuple(tuple(row) for row in rows),
        fan=fan_t,
        name=name,
    )


# ---------------------------------------------------------------------------
# transport


def _check_adjacent(surface: TropicalSurface, chart: int, crossing: int, direction: int) -> None:
    r = surface.r
    if direction not in (1, -1):
        raise SurfaceError("direction must be +1 or -1")
    src = (crossing - 1) % r if direction == 1 else crossing % r
    if chart % r != src:
        raise SurfaceError(f"chart {chart} is not adjacent to ray {crossing} on the required side")


def _forward(surface: TropicalSurface, chart: int, a: int, b: int):
    d = surface.selfint[(chart + 1) % surface.r]
    return (b - a * d, -a)


def _backward(surface: TropicalSurface, chart: int, a: int, b: int):
    """Inverse of _forward: coordinates in chart ``chart`` to chart-1."""
    d = surface.selfint[chart % surface.r]
    return (-b, a - b * d)


def transport_tangent(surface: TropicalSurface, v: ChartVector, crossing: int, direction: int) -> ChartVector:
    """Express ``v`` in the chart on the other side of ray ``crossing``.

    ``direction`` +1 goes counterclockwise (chart crossing-1 -> chart
    crossing), -1 goes back.
    """
    _check_adjacent(surface, v.chart, crossing, direction)
    r = surface.r
    if direction == 1:
        a, b = _forward(surface, v.chart, v.a, v.b)
        return ChartVector((v.chart + 1) % r, a, b)
    a, b = _backward(surface, v.chart, v.a, v.b)
    return ChartVector((v.chart - 1) % r, a, b)


def transport_monomial(
    surface: TropicalSurface, m: ChartVector, beta: CurveClass, crossing: int, direction: int
) -> Tuple[ChartVector, CurveClass]:
    """Transport (m, beta) across a ray, applying the kink."""
    out = transport_tangent(surface, m, crossing, direction)
    kappa = surface.kinks[crossing % surface.r]
    if direction == 1:
        shift = m.a
    else:
        # the coefficient of v_{crossing-1} in the destination chart
        shift = -out.a
    return out, _class_add(beta, kappa, shift)


# fast tuple versions used by the enumerators


def step_ccw(surface: TropicalSurface, chart: int, t: Tuple[int, int], beta: CurveClass):
    a, b = t
    d = surface.selfint[(chart + 1) % surface.r]
    return (chart + 1) % surface.r, (b - a * d, -a), _class_add(beta, surface.kinks[(chart + 1) % surface.r], a)


def step_cw(surface: TropicalSurface, chart: int, t: Tuple[int, int], beta: CurveClass):
    a, b = t
    d = surface.selfint[chart % surface.r]
    na, nb = -b, a - b * d
    return (chart - 1) % surface.r, (na, nb), _class_add(beta, surface.kinks[chart % surface.r], -na)


# ---------------------------------------------------------------------------
# points


def canonical_point(surface: TropicalSurface, p: ChartVector) -> ChartVector:
    """Normal form of an integral point: rays are written as (x, 0)."""
    if p.a < 0 or p.b < 0:
        raise SurfaceError(f"{p} is not a point of B")
    if p.a == 0 and p.b == 0:
        return ChartVector(0, 0, 0)
    if p.a == 0:
        return ChartVector((p.chart + 1) % surface.r, p.b, 0)
    return ChartVector(p.chart % surface.r, p.a, p.b)


def point_representations(surface: TropicalSurface, p: ChartVector) -> List[ChartVector]:
    """All (chart, coords) descriptions of a point of B."""
    p = canonical_point(surface, p)
    if p.a == 0 and p.b == 0:
        return [ChartVector(c, 0, 0) for c in range(surface.r)]
    if p.b:
        return [p]
    j = p.chart
    reps = {ChartVector(j, p.a, 0), ChartVector((j - 1) % surface.r, 0, p.a)}
    return sorted(reps)


def integral_points(surface: TropicalSurface, bound: int) -> List[ChartVector]:
    """Canonical integral points with both chart coordinates at most ``bound``."""
    pts = {ChartVector(0, 0, 0)}
    for c in range(surface.r):
        for a in range(bound + 1):
            for b in range(bound + 1):
                if a or b:
                    pts.add(canonical_point(surface, ChartVector(c, a, b)))
    return sorted(pts, key=point_sort_key)


def point_sort_key(p: ChartVector):
    return (p.a + p.b, p.chart, p.a, p.b)


def weight(surface: TropicalSurface, p: ChartVector) -> Tuple[int, ...]:
    """Torus weight: a*v_c + b*v_{c+1} -> a*e_c + b*e_{c+1}."""
    out = [0] * surface.r
    out[p.chart % surface.r] += p.a
    out[(p.chart + 1) % surface.r] += p.b
    return tuple(out)


def parse_point(surface: TropicalSurface, text: str) -> ChartVector:
    """Parse ``0``, ``v2``, ``3v1``, ``2v1+v2`` or ``(a,b)@c``.

    In ``a vI + b vJ`` the rays must be consecutive, J = I+1, which fixes the
    chart.  The ``@`` form is needed when r <= 2.
    """
    t = text.replace(" ", "").replace("*", "")
    if not t:
        raise SurfaceError("empty point")
    if t == "0":
        return ChartVector(0, 0, 0)
    if "@" in t:
        coords, chart = t.split("@", 1)
        coords = coords.strip("()")
        try:
            a, b = (int(x) for x in coords.split(","))
            c = int(chart)
        except ValueError:
            raise SurfaceError(f"cannot parse point {text!r}") from None
        if not 0 <= c < surface.r:
            raise SurfaceError(f"chart {c} out of range")
        return canonical_point(surface, ChartVector(c, a, b))
    terms = t.split("+")
    parsed = []
    for term in terms:
        if "v" not in term:
            raise SurfaceError(f"cannot parse point {text!r}")
        coeff, idx = term.split("v", 1)
        try:
            k = int(coeff) if coeff else 1
            j = int(idx) - 1
        except ValueError:
            raise SurfaceError(f"cannot parse point {text!r}") from None
        if not 0 <= j < surface.r:
            raise SurfaceError(f"ray index {j + 1} out of range")
        parsed.append((k, j))
    if len(parsed) == 1:
        k, j = parsed[0]
        return canonical_point(surface, ChartVector(j, k, 0))
    if len(parsed) != 2:
        raise SurfaceError(f"cannot parse point {text!r}")
    (k1, j1), (k2, j2) = parsed
    if (j1 + 1) % surface.r != j2:
        raise SurfaceError(f"rays in {text!r} are not consecutive")
    return canonical_point(surface, ChartVector(j1, k1, k2))


def format_point(surface: TropicalSurface, p: ChartVector) -> str:
    p = canonical_point(surface, p)
    if p.a == 0 and p.b == 0:
        return "0"

    def term(k, j):
        return f"v{j + 1}" if k == 1 else f"{k}v{j + 1}"

    if p.b == 0:
        return term(p.a, p.chart)
    if surface.r <= 2:
        return f"({p.a},{p.b})@{p.chart}"
    return term(p.a, p.chart) + "+" + term(p.b, (p.chart + 1) % surface.r)


# ---------------------------------------------------------------------------
# straight paths


def exit_edge(a: Fraction, b: Fraction, ta, tb):
    """First time a point (a, b) moving with velocity (ta, tb) leaves the cone.

    Returns (lam, edge) where edge is "a" (hits a = 0, the ray v_{c+1}) or
    "b" (hits b = 0, the ray v_c), or None if it never leaves.
    """
    best = None
    if ta < 0:
        best = (Fraction(a) / -ta, "a")
    if tb < 0:
        lam = Fraction(b) / -tb
        if best is None or lam < best[0]:
            best = (lam, "b")
        elif lam == best[0]:
            raise NonGenericPath("path passes through the origin")
    return best


def develop_ray_crossings(
    surface: TropicalSurface,
    Q: DevelopedPoint,
    direction: Tuple[int, int],
    orientation: str = "forward",
    *,
    degree_bound: Optional[int] = None,
    max_crossings: int = 1000,
) -> List[Tuple[int, DevelopedPoint]]:
    """Σ-ray crossings of the straight path from Q.

    ``direction`` is a tangent vector in Q's chart; ``orientation`` "backward"
    follows its negative.  Tracing stops when the path escapes to infinity,
    when the class carried by the transported monomial ``z^direction``
    reaches ``degree_bound``, or after ``max_crossings`` crossings.
    """
    if orientation not in ("forward", "backward"):
        raise SurfaceError("orientation must be 'forward' or 'backward'")
    if direction == (0, 0):
        raise SurfaceError("direction must be nonzero")
    if Q.a == 0 and Q.b == 0:
        raise NonGenericPath("path starts at the origin")
    sign = 1 if orientation == "forward" else -1
    chart = Q.chart % surface.r
    a, b = Fraction(Q.a), Fraction(Q.b)
    t = (direction[0], direction[1])
    beta = surface.zero_class()
    winding = Q.winding
    out: List[Tuple[int, DevelopedPoint]] = []
    while len(out) < max_crossings:
        ta, tb = sign * t[0], sign * t[1]
        hit = exit_edge(a, b, ta, tb)
        if hit is None:
            break
        lam, edge = hit
        na, nb = a + lam * ta, b + lam * tb
        if na == 0 and nb == 0:
            raise NonGenericPath("path passes through the origin")
        if edge == "a":
            ray = (chart + 1) % surface.r
            chart, t, beta = step_ccw(surface, chart, t, beta)
            if chart == 0:
                winding += 1
            a, b = nb, Fraction(0)
        else:
            ray = chart
            if chart == 0:
                winding -= 1
            chart, t, beta = step_cw(surface, chart, t, beta)
            a, b = Fraction(0), na
        out.append((ray, DevelopedPoint(chart, a, b, winding)))
        if degree_bound is not None and sum(abs(x) for x in beta) >= degree_bound:
            break
    return out


def nu_pushforward(surface: TropicalSurface, v: ChartVector) -> Tuple[int, int]:
    """Image of a chart vector in the fan of the toric model."""
    if surface.fan is None:
        raise SurfaceError("surface has no toric model")
    u0 = surface.fan[v.chart % surface.r]
    u1 = surface.fan[(v.chart + 1) % surface.r]
    return (v.a * u0[0] + v.b * u1[0], v.a * u0[1] + v.b * u1[1])


# ---------------------------------------------------------------------------
# JSON


def surface_from_json(obj: Mapping) -> TropicalSurface:
    if not isinstance(obj, Mapping) or "rays" not in obj:
        raise SurfaceError("surface JSON needs a 'rays' list")
    rays = obj["rays"]
    if not isinstance(rays, list) or not rays:
        raise SurfaceError("'rays' must be a nonempty list")
    labels = list(obj.get("classes", []))
    try:
        selfint = [int(r["selfint"]) for r in rays]
    except (KeyError, TypeError, ValueError):
        raise SurfaceError("every ray needs an integer 'selfint'") from None
    kinks = [r.get("kink", {}) for r in rays]
    exceptionals = [r.get("exceptionals", []) for r in rays]
    fan = None
    if all("fan" in r for r in rays):
        fan = [r["fan"] for r in rays]
    return build_surface(
        selfint,
        kinks,
        labels=labels,
        exceptionals=exceptionals,
        intersections=obj.get("intersections"),
        fan=fan,
        name=str(obj.get("name", "")),
        relations=obj.get("relations"),
        curves=obj.get("curves"),
    )


def surface_to_json(surface: TropicalSurface) -> dict:
    rays = []
    for j in range(surface.r):
        ray = {
            "selfint": surface.selfint[j],
            "kink": surface.class_to_dict(surface.kinks[j]),
            "exceptionals": [surface.labels[i] for i in surface.exceptionals[j]] if surface.exceptionals else [],
        }
        if surface.fan is not None:
            ray["fan"] = list(surface.fan[j])
        rays.append(ray)
    out = {"rays": rays, "classes": list(surface.labels)}
    if surface.labels:
        out["intersections"] = {lab: list(surface.intersections[i]) for i, lab in enumerate(surface.labels)}
    if surface.relations:
        out["relations"] = [surface.class_to_dict(x) for x in surface.relations]
    if surface.curves:
        out["curves"] = [surface.class_to_dict(x) for x in surface.curves]
    if surface.name:
        out["name"] = surface.name
    return out
