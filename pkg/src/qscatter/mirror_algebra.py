"""The quantum mirror algebra in the theta basis, and its presentations.

Elements are finite sums c * z^beta * theta_p, stored as {(p, beta): c}.
Curve classes are central, so products only need the structure constants of
pairs of theta functions, which are computed on demand from broken lines and
cached.  Relations among chosen generators are found by exact linear algebra
over the field of rational functions in q^(1/2).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations_with_replacement
from typing import Callable, Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .affine_base import (
    ChartVector,
    TropicalSurface,
    canonical_point,
    format_point,
    integral_points,
    parse_point,
    point_sort_key,
)
from .brokenlines import (
    StructureConstantTable,
    _prepare,
    poisson_table,
    structure_constants,
)
from .qcoeff import ONE, ZERO, NotLaurent, QScalar, as_laurent, classical_limit, format_q
from .scattering import ScatteringDiagram

__all__ = [
    "ThetaAlgebra",
    "Relation",
    "NonGenerating",
    "build_algebra",
    "derive_relations",
    "specialize_classes",
    "poisson_relations",
    "check_relation",
    "associativity_check",
    "unit_check",
    "format_coeff",
]

CurveClass = Tuple[int, ...]
Key = Tuple[ChartVector, CurveClass]
Element = Dict[Key, QScalar]
Word = Tuple[int, ...]

ORIGIN = ChartVector(0, 0, 0)


class NonGenerating(ValueError):
    """The generators do not reach every basis element up to the bound."""


def _add(acc: Element, key: Key, c: QScalar) -> None:
    v = acc.get(key)
    v = c if v is None else v + c
    if v:
        acc[key] = v
    else:
        acc.pop(key, None)


class ThetaAlgebra:
    """Theta functions on B with lazily computed structure constants.

    A specialized algebra shares its parent's products and evaluates the
    curve classes at the end: specialization is a ring map on coefficients,
    so words are multiplied in the parent and specialized afterwards.
    """

    def __init__(
        self,
        diagram: ScatteringDiagram,
        charges: Sequence[ChartVector],
        order: int,
        *,
        classical: bool = False,
        retry_seed: int = 0,
    ):
        self.diagram = diagram
        self.surface: TropicalSurface = diagram.surface
        self.order = order
        self.classical = classical
        self.retry_seed = retry_seed
        self.charges = sorted({canonical_point(self.surface, p) for p in charges}, key=point_sort_key)
        self._prep = _prepare(diagram, order, classical)
        self._products: Dict[Tuple[ChartVector, ChartVector], Dict[ChartVector, Dict[CurveClass, QScalar]]] = {}
        self.parent: Optional[ThetaAlgebra] = None
        self.assignment: Dict[int, QScalar] = {}
        self.labels: Tuple[str, ...] = tuple(diagram.labels)

    # -- structure constants -------------------------------------------------

    def product(self, p1: ChartVector, p2: ChartVector) -> Dict[ChartVector, Dict[CurveClass, QScalar]]:
        """theta_p1 * theta_p2 as {p: {beta: c}} in the unspecialized ring."""
        if self.parent is not None:
            return self.parent.product(p1, p2)
        key = (p1, p2)
        row = self._products.get(key)
        if row is None:
            if p1 == ORIGIN:
                row = {p2: {self.surface.zero_class(): ONE}}
            elif p2 == ORIGIN:
                row = {p1: {self.surface.zero_class(): ONE}}
            else:
                row = structure_constants(self.diagram, p1, p2, _prep=self._prep, retry_seed=self.retry_seed)
            self._products[key] = row
        return row

    def table(self, charges: Optional[Sequence[ChartVector]] = None) -> StructureConstantTable:
        """The full table over ``charges`` (default: the algebra's basis)."""
        root = self.parent or self
        charges = self.charges if charges is None else [canonical_point(self.surface, p) for p in charges]
        t = StructureConstantTable(self.surface, self.order, classical=self.classical)
        for a in charges:
            for b in charges:
                t.entries[(a, b)] = root.product(a, b)
        return t

    # -- elements ------------------------------------------------------------

    def theta(self, p: ChartVector) -> Element:
        p = canonical_point(self.surface, p)
        return {(p, self.surface.zero_class()): ONE}

    def one(self) -> Element:
        return self.theta(ORIGIN)

    def mul(self, x: Element, y: Element) -> Element:
        """Product in the unspecialized ring, truncated below the order."""
        out: Element = {}
        N = self.order
        norm = self.surface.normalize_class
        for (p1, b1), c1 in x.items():
            for (p2, b2), c2 in y.items():
                base = tuple(u + v for u, v in zip(b1, b2))
                if sum(base) >= N:
                    continue
                c12 = c1 * c2
                for p, row in self.product(p1, p2).items():
                    for g, c in row.items():
                        beta = tuple(u + v for u, v in zip(base, g))
                        if sum(beta) >= N:
                            continue
                        _add(out, (p, norm(beta)), c12 * c)
        return out

    def word_value(self, gens: Sequence[ChartVector], word: Word) -> Element:
        """Unspecialized value of the word g_{i1} g_{i2} ... ."""
        cache = self.__dict__.setdefault("_words", {})
        key = (tuple(gens), tuple(word))
        if key in cache:
            return cache[key]
        if not word:
            val = self.one()
        else:
            val = self.mul(self.word_value(gens, word[:-1]), self.theta(gens[word[-1]]))
        cache[key] = val
        return val

    def specialize(self, x: Element) -> Element:
        """Apply the class assignment of this algebra (identity if none)."""
        if not self.assignment:
            return x
        out: Element = {}
        for (p, beta), c in x.items():
            scal = ONE
            rest = list(beta)
            for i, val in self.assignment.items():
                if beta[i]:
                    scal = scal * (val ** beta[i]) if beta[i] > 0 else scal / (val ** -beta[i])
                rest[i] = 0
            if scal:
                _add(out, (p, tuple(rest)), c * scal)
        return out

    def class_label_string(self, beta: CurveClass) -> str:
        return self.surface.format_class(beta)


def build_algebra(
    diagram: ScatteringDiagram,
    charge_bound: int = 4,
    N: Optional[int] = None,
    *,
    classical: bool = False,
    retry_seed: int = 0,
    full_table: bool = False,
) -> ThetaAlgebra:
    """Theta algebra on all integral points with chart coordinates <= charge_bound.

    Products are computed lazily; ``full_table`` forces the whole table.
    """
    N = diagram.order if N is None else N
    charges = integral_points(diagram.surface, charge_bound)
    alg = ThetaAlgebra(diagram, charges, N, classical=classical, retry_seed=retry_seed)
    if full_table:
        alg.table()
    return alg


def specialize_classes(algebra: ThetaAlgebra, assignment: Mapping[str, object]) -> ThetaAlgebra:
    """Evaluate z^[C] at the given scalars for the listed class labels."""
    root = algebra.parent or algebra
    spec = ThetaAlgebra.__new__(ThetaAlgebra)
    spec.__dict__.update({k: v for k, v in root.__dict__.items() if k != "_words"})
    spec.parent = root
    merged = dict(algebra.assignment)
    for lab, val in assignment.items():
        merged[algebra.surface.label_index(lab)] = QScalar.coerce(val)
    spec.assignment = merged
    return spec


# ---------------------------------------------------------------------------
# linear algebra over QScalar


def _solve(columns: Sequence[Element], target: Element) -> Optional[List[QScalar]]:
    """A solution of sum x_i columns[i] = target, free variables set to zero."""
    rows_keys = sorted({k for col in columns for k in col} | set(target), key=lambda k: (point_sort_key(k[0]), k[1]))
    index = {k: i for i, k in enumerate(rows_keys)}
    # each row: dict col -> coeff, plus rhs
    rows = [dict() for _ in rows_keys]
    rhs = [ZERO for _ in rows_keys]
    for j, col in enumerate(columns):
        for k, c in col.items():
            rows[index[k]][j] = c
    for k, c in target.items():
        rhs[index[k]] = c
    pivots: List[Tuple[int, int]] = []
    used = set()
    for j in range(len(columns)):
        piv = next((i for i in range(len(rows)) if i not in used and rows[i].get(j)), None)
        if piv is None:
            continue
        used.add(piv)
        pr = rows[piv]
        inv = ONE / pr[j]
        pr = {col: v * inv for col, v in pr.items()}
        rows[piv] = pr
        rhs[piv] = rhs[piv] * inv
        for i in range(len(rows)):
            if i == piv:
                continue
            f = rows[i].get(j)
            if not f:
                continue
            row = rows[i]
            for col, v in pr.items():
                nv = row.get(col, ZERO) - f * v
                if nv:
                    row[col] = nv
                else:
                    row.pop(col, None)
            rhs[i] = rhs[i] - f * rhs[piv]
        pivots.append((piv, j))
    for i in range(len(rows)):
        if i not in used and rhs[i]:
            return None
    x = [ZERO] * len(columns)
    for piv, j in pivots:
        # free variables are zero, so only the pivot survives
        x[j] = rhs[piv]
    return x


# ---------------------------------------------------------------------------
# relations


@dataclass
class Relation:
    """sum lhs = sum rhs with words in named generators.

    ``lhs`` holds (coeff, word) pairs, ``rhs`` holds (coeff, class, word).
    ``commutative`` relations (Poisson brackets) read words as monomials.
    """

    names: Tuple[str, ...]
    lhs: List[Tuple[QScalar, Word]]
    rhs: List[Tuple[QScalar, CurveClass, Word]]
    kind: str
    labels: Tuple[str, ...] = ()
    bracket: Optional[Tuple[int, int]] = None

    def _word(self, w: Word) -> str:
        # runs of one generator print as powers
        parts: List[str] = []
        i = 0
        while i < len(w):
            j = i
            while j < len(w) and w[j] == w[i]:
                j += 1
            k = j - i
            parts.append(self.names[w[i]] if k == 1 else f"{self.names[w[i]]}^{k}")
            i = j
        return "*".join(parts)

    def text(self) -> str:
        if self.bracket is not None:
            a, b = self.bracket
            left = "{" + f"{self.names[a]},{self.names[b]}" + "}"
        else:
            left = _join([(c, self._word(w)) for c, w in self.lhs])
        right = _join([(c, _mono(self.labels, g, self._word(w))) for c, g, w in self.rhs])
        return f"{left} = {right}"

    def to_json(self) -> dict:
        out = {
            "kind": self.kind,
            "lhs": [{"coeff": _coeff_json(c), "word": [self.names[i] for i in w]} for c, w in self.lhs],
            "rhs": [
                {"coeff": _coeff_json(c), "class": {self.labels[i]: v for i, v in enumerate(g) if v}, "word": [self.names[i] for i in w]}
                for c, g, w in self.rhs
            ],
            "text": self.text(),
        }
        if self.bracket is not None:
            out["bracket"] = [self.names[i] for i in self.bracket]
        return out

    def rhs_map(self) -> Dict[Tuple[Tuple[str, ...], Tuple[Tuple[str, int], ...]], QScalar]:
        """{(word names, class items): coeff}, handy for comparisons."""
        out = {}
        for c, g, w in self.rhs:
            cls = tuple((self.labels[i], v) for i, v in enumerate(g) if v)
            out[(tuple(self.names[i] for i in w), cls)] = c
        return out


def _coeff_json(c: QScalar):
    try:
        return as_laurent(c).to_json()
    except NotLaurent:
        return c.to_json()


def format_coeff(c: QScalar) -> str:
    """q-notation for a scalar: q^{1/2}, (q - q^{-1}), ..."""
    try:
        return format_q(as_laurent(c).coeffs)
    except NotLaurent:
        return f"({c})"


def _mono(labels: Sequence[str], g: CurveClass, word: str) -> str:
    parts = []
    if any(g):
        cls = "+".join((lab if v == 1 else f"{v}{lab}") for lab, v in zip(labels, g) if v)
        parts.append("z^{" + cls + "}")
    if word:
        parts.append(word)
    return "*".join(parts)


def _join(terms: Sequence[Tuple[QScalar, str]]) -> str:
    """Render c1*m1 + c2*m2 ... with signs pulled out of single-term coefficients."""
    out = ""
    for c, m in terms:
        text = format_coeff(c)
        neg = False
        try:
            lc = as_laurent(c).coeffs
            if len(lc) == 1 and next(iter(lc.values())) < 0:
                neg = True
                text = format_coeff(-c)
        except NotLaurent:
            pass
        multi = " + " in text or " - " in text[1:]
        if m:
            if text == "1":
                body = m
            else:
                body = f"({text})*{m}" if multi else f"{text}*{m}"
        else:
            body = f"({text})" if multi and out else text
        if not out:
            out = ("-" + body) if neg else body
        else:
            out += (" - " if neg else " + ") + body
    return out or "0"


def _normal_words(n: int, max_len: int) -> List[Word]:
    words: List[Word] = []
    for length in range(max_len + 1):
        words.extend(combinations_with_replacement(range(n), length))
    return words


def _class_shifts(algebra: ThetaAlgebra, target: Element, values: Sequence[Element]) -> List[CurveClass]:
    shifts = set()
    for (p, beta) in target:
        for val in values:
            for (p2, b2) in val:
                if p2 != p:
                    continue
                g = tuple(u - v for u, v in zip(beta, b2))
                if all(x >= 0 for x in g):
                    shifts.add(g)
    if not shifts:
        for val in values:
            for (_, b2) in val:
                shifts.add(tuple(0 for _ in b2))
                break
            if shifts:
                break
    norm = algebra.surface.normalize_class if not algebra.assignment else (lambda b: b)
    return sorted({norm(g) for g in shifts}, key=lambda g: (sum(g), tuple(-x for x in g)))


def _shift(x: Element, g: CurveClass, algebra: ThetaAlgebra) -> Element:
    out: Element = {}
    norm = algebra.surface.normalize_class if not algebra.assignment else (lambda b: b)
    N = algebra.order
    for (p, beta), c in x.items():
        b = tuple(u + v for u, v in zip(beta, g))
        if not algebra.assignment and sum(b) >= N:
            continue
        _add(out, (p, norm(b)), c)
    return out


def _express(algebra: ThetaAlgebra, gens, target: Element, words: Sequence[Word], value: Callable[[Word], Element]):
    """Write target as a combination of z^gamma * word; None if impossible."""
    vals = [value(w) for w in words]
    shifts = _class_shifts(algebra, target, vals) if target else [None]
    cols, meta = [], []
    for w, v in zip(words, vals):
        for g in shifts:
            if g is None:
                g = tuple(0 for _ in (next(iter(v))[1] if v else ()))
            col = _shift(v, g, algebra)
            if col:
                cols.append(col)
                meta.append((g, w))
    if not target:
        return []
    sol = _solve(cols, target)
    if sol is None:
        return None
    out = [(c, g, w) for c, (g, w) in zip(sol, meta) if c]
    out.sort(key=lambda t: (len(t[2]), t[2], sum(t[1]), tuple(-x for x in t[1])))
    return out


def _lin(algebra: ThetaAlgebra, terms: Sequence[Tuple[QScalar, Element]]) -> Element:
    out: Element = {}
    for c, x in terms:
        for k, v in x.items():
            _add(out, k, c * v)
    return out


def _gen_list(algebra: ThetaAlgebra, generators) -> Tuple[Tuple[str, ...], List[ChartVector]]:
    if isinstance(generators, Mapping):
        items = list(generators.items())
    else:
        items = list(generators)
    names, pts = [], []
    for name, p in items:
        if isinstance(p, str):
            p = parse_point(algebra.surface, p)
        names.append(str(name))
        pts.append(canonical_point(algebra.surface, p))
    return tuple(names), pts


def check_generating(algebra: ThetaAlgebra, points: Sequence[ChartVector], bound: int) -> None:
    """Every basis point up to ``bound`` is a sum of generator points in one cone."""
    surface = algebra.surface
    reps_by_chart: Dict[int, List[Tuple[int, int]]] = {}
    from .affine_base import point_representations

    for p in points:
        for rep in point_representations(surface, p):
            reps_by_chart.setdefault(rep.chart, []).append((rep.a, rep.b))
    for p in integral_points(surface, bound):
        if p == ORIGIN:
            continue
        ok = False
        for rep in point_representations(surface, p):
            gens = reps_by_chart.get(rep.chart, [])
            reach = {(0, 0)}
            frontier = [(0, 0)]
            while frontier and not ok:
                a, b = frontier.pop()
                for ga, gb in gens:
                    n = (a + ga, b + gb)
                    if n[0] <= rep.a and n[1] <= rep.b and n not in reach:
                        reach.add(n)
                        frontier.append(n)
                ok = (rep.a, rep.b) in reach
            if ok:
                break
        if not ok:
            raise NonGenerating(f"{format_point(surface, p)} is not reached by the generators")


def derive_relations(
    algebra: ThetaAlgebra,
    generators,
    *,
    bound: int = 1,
    check: bool = True,
) -> List[Relation]:
    """Relations among the generators, in deterministic order.

    Emitted: q-commutators q^(1/2) g_a g_b - q^(-1/2) g_b g_a of cyclically
    consecutive generators; products g_a g_b of the other pairs, when they
    are combinations of shorter words; and, for three generators, the
    product of all three in input order.  Right-hand sides use normally
    ordered words (input order, left to right) no longer than the left-hand
    side, never the normally ordered left-hand word itself.
    """
    names, gens = _gen_list(algebra, generators)
    n = len(gens)
    if check:
        check_generating(algebra, gens, bound)

    def value(w: Word) -> Element:
        root = algebra.parent or algebra
        return algebra.specialize(root.word_value(gens, w))

    labels = tuple(lab for i, lab in enumerate(algebra.labels) if i not in algebra.assignment)

    def strip(rows):
        # drop specialized class slots from the class tuples
        keep = [i for i in range(len(algebra.labels)) if i not in algebra.assignment]
        return [(c, tuple(g[i] for i in keep), w) for c, g, w in rows]

    rels: List[Relation] = []
    s, si = QScalar({1: 1}), QScalar({-1: 1})
    pairs = [(a, (a + 1) % n) for a in range(n)] if n > 2 else ([(0, 1)] if n == 2 else [])
    consecutive = {frozenset(p) for p in pairs}
    for a, b in pairs:
        target = _lin(algebra, [(s, value((a, b))), (-si, value((b, a)))])
        words = [w for w in _normal_words(n, 2) if w != tuple(sorted((a, b)))]
        rhs = _express(algebra, gens, target, words, value)
        if rhs is not None:
            rels.append(Relation(names, [(s, (a, b)), (-si, (b, a))], strip(rhs), "commutator", labels))
    for a in range(n):
        for b in range(n):
            if a == b or frozenset((a, b)) in consecutive:
                continue
            target = value((a, b))
            words = [w for w in _normal_words(n, 2) if w != tuple(sorted((a, b)))]
            rhs = _express(algebra, gens, target, words, value)
            if rhs is not None:
                rels.append(Relation(names, [(ONE, (a, b))], strip(rhs), "product", labels))
    if n == 3:
        w = (0, 1, 2)
        target = value(w)
        words = [x for x in _normal_words(n, 3) if x != w]
        rhs = _express(algebra, gens, target, words, value)
        if rhs is not None:
            rels.append(Relation(names, [(ONE, w)], strip(rhs), "product", labels))
    return rels


def check_relation(algebra: ThetaAlgebra, generators, rel: Relation) -> bool:
    """Substitute the generators and test lhs - rhs == 0 in the algebra."""
    names, gens = _gen_list(algebra, generators)
    root = algebra.parent or algebra

    def value(w):
        return algebra.specialize(root.word_value(gens, w))

    keep = [i for i in range(len(algebra.labels)) if i not in algebra.assignment]
    total: Element = {}
    for c, w in rel.lhs:
        for k, v in value(w).items():
            _add(total, k, c * v)
    for c, g, w in rel.rhs:
        full = [0] * len(algebra.labels)
        for i, v in zip(keep, g):
            full[i] = v
        for k, v in _shift(value(w), tuple(full), algebra).items():
            _add(total, k, -c * v)
    return not total


def poisson_relations(diagram: ScatteringDiagram, generators, N: Optional[int] = None) -> List[Relation]:
    """Classical brackets of cyclically consecutive generators, in commutative words.

    The bracket in the theta basis comes from poisson_table (both routes must
    agree); it is then written in monomials of the generators using the
    classical algebra.
    """
    N = diagram.order if N is None else N
    calg = ThetaAlgebra(diagram, [], N, classical=True)
    names, gens = _gen_list(calg, generators)
    n = len(gens)
    pairs = [(a, (a + 1) % n) for a in range(n)] if n > 2 else ([(0, 1)] if n == 2 else [])
    brackets = poisson_table(diagram, gens, N)
    rels = []

    def value(w):
        return calg.word_value(gens, w)

    for a, b in pairs:
        row = brackets[(gens[a], gens[b])]
        target: Element = {}
        for p, coeffs in row.items():
            for beta, v in coeffs.items():
                _add(target, (p, beta), QScalar.coerce(v))
        rhs = _express(calg, gens, target, _normal_words(n, 2), value)
        if rhs is None:
            continue
        rels.append(Relation(names, [], rhs, "poisson", tuple(diagram.labels), bracket=(a, b)))
    return rels


def associativity_check(algebra: ThetaAlgebra, charges: Sequence[ChartVector]) -> dict:
    """(theta_a theta_b) theta_c == theta_a (theta_b theta_c) for all triples."""
    pts = [canonical_point(algebra.surface, p) for p in charges]
    root = algebra.parent or algebra
    count = 0
    for a in pts:
        for b in pts:
            ab = root.mul(root.theta(a), root.theta(b))
            for c in pts:
                bc = root.mul(root.theta(b), root.theta(c))
                left = root.mul(ab, root.theta(c))
                right = root.mul(root.theta(a), bc)
                count += 1
                if left != right:
                    return {"pass": False, "checked": count, "triple": [format_point(algebra.surface, x) for x in (a, b, c)]}
    return {"pass": True, "checked": count}


def unit_check(algebra: ThetaAlgebra, charges: Optional[Sequence[ChartVector]] = None) -> bool:
    root = algebra.parent or algebra
    for p in charges or root.charges:
        t = root.theta(p)
        if root.mul(root.one(), t) != t or root.mul(t, root.one()) != t:
            return False
    return True
