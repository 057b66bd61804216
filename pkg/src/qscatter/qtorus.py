"""Truncated quantum torus algebras.

Elements are finite sums of monomials z^(m, beta) where m is a tangent vector
in Z^2 (in a fixed chart, or in the plane) and beta is a curve class vector.
The product is twisted by the determinant pairing:

    z^(m, beta) * z^(m', beta') = s^det(m, m') z^(m + m', beta + beta')

with s = q^(1/2).  Terms whose class degree (sum of coordinates) reaches the
order N are dropped.

A wall function f is an element supported on multiples of one primitive
direction.  Wall-crossing maps z^p to z^p * F_n with n = <m, p> and

    F_n = prod_{j=0}^{n-1} f(q^j z)              (n >= 0)
    F_n = prod_{j=0}^{|n|-1} f(q^(-j-1) z)^(-1)  (n < 0)

where m is the wall's Hamiltonian direction and f(q^j z) rescales the term of
tangent l*m by q^(l*j).
"""

from __future__ import annotations

import random
from fractions import Fraction
from typing import Dict, Iterable, List, Mapping, Optional, Sequence, Tuple

from .qcoeff import ONE, ZERO, QLaurent, QScalar, as_laurent, NotLaurent, s_power

__all__ = [
    "QTorusElement",
    "QTorusError",
    "NonIntegralExponent",
    "mono_mul",
    "elem_arith",
    "wallcross_apply",
    "wall_factor",
    "bend_factor",
    "rescale",
    "hamiltonian_to_f",
    "f_to_hamiltonian",
    "bps_factorize",
    "bps_reconstruct",
    "primitive",
    "random_element",
]

Key = Tuple[int, int, Tuple[int, ...]]


class QTorusError(ValueError):
    """Mismatched charts or orders, or a malformed wall function."""


class NonIntegralExponent(ArithmeticError):
    """A BPS factorization would need a non-integer exponent."""


def _gcd(a: int, b: int) -> int:
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def primitive(v: Tuple[int, int]) -> Tuple[Tuple[int, int], int]:
    """(primitive vector, multiplicity) for a nonzero integral vector."""
    g = _gcd(v[0], v[1])
    if g == 0:
        raise QTorusError("zero vector has no primitive direction")
    return (v[0] // g, v[1] // g), g


class QTorusElement:
    """A truncated element of the quantum torus in one chart.

    ``terms`` maps (a, b, class_tuple) to a nonzero QScalar.  ``chart`` is an
    integer chart index on B, or None for the plane.
    """

    __slots__ = ("terms", "order", "chart", "rank", "classical")

    def __init__(
        self,
        terms: Optional[Mapping[Key, QScalar]] = None,
        order: int = 1,
        chart: Optional[int] = None,
        rank: Optional[int] = None,
        classical: bool = False,
    ):
        self.order = order
        self.chart = chart
        self.classical = classical
        out: Dict[Key, QScalar] = {}
        for k, c in (terms or {}).items():
            c = QScalar.coerce(c)
            if c and sum(k[2]) < order:
                k = (k[0], k[1], tuple(k[2]))
                if k in out:
                    c = out[k] + c
                    if not c:
                        del out[k]
                        continue
                out[k] = c
        self.terms = out
        if rank is None:
            rank = len(next(iter(out))[2]) if out else 0
        self.rank = rank

    @classmethod
    def _raw(cls, terms, order, chart, rank, classical=False):
        obj = cls.__new__(cls)
        obj.terms = terms
        obj.order = order
        obj.chart = chart
        obj.rank = rank
        obj.classical = classical
        return obj

    def _like(self, terms) -> "QTorusElement":
        return QTorusElement._raw(terms, self.order, self.chart, self.rank, self.classical)

    @classmethod
    def one(cls, order: int, chart: Optional[int] = None, rank: int = 0, classical: bool = False) -> "QTorusElement":
        return cls({(0, 0, (0,) * rank): ONE}, order, chart, rank, classical)

    @classmethod
    def monomial(cls, m: Tuple[int, int], beta: Sequence[int], order: int, chart=None, coeff=ONE, classical: bool = False) -> "QTorusElement":
        beta = tuple(beta)
        return cls({(m[0], m[1], beta): coeff}, order, chart, len(beta), classical)

    @classmethod
    def zero(cls, order: int, chart: Optional[int] = None, rank: int = 0, classical: bool = False) -> "QTorusElement":
        return cls({}, order, chart, rank, classical)

    def classical_limit(self) -> "QTorusElement":
        """Commutative element with every coefficient evaluated at q = 1."""
        from .qcoeff import classical_limit

        return QTorusElement({k: classical_limit(c) for k, c in self.terms.items()}, self.order, self.chart, self.rank, True)

    # ------------------------------------------------------------------

    def _check(self, other: "QTorusElement") -> None:
        if self.order != other.order:
            raise QTorusError(f"order mismatch: {self.order} vs {other.order}")
        if self.chart != other.chart:
            raise QTorusError(f"chart mismatch: {self.chart} vs {other.chart}")
        if self.classical != other.classical:
            raise QTorusError("cannot mix classical and quantum elements")

    def __add__(self, other):
        if not isinstance(other, QTorusElement):
            return NotImplemented
        self._check(other)
        out = dict(self.terms)
        for k, c in other.terms.items():
            v = out.get(k)
            if v is None:
                out[k] = c
            else:
                v = v + c
                if v:
                    out[k] = v
                else:
                    del out[k]
        return QTorusElement._raw(out, self.order, self.chart, self.rank or other.rank, self.classical)

    def __neg__(self):
        return self._like({k: -c for k, c in self.terms.items()})

    def __sub__(self, other):
        if not isinstance(other, QTorusElement):
            return NotImplemented
        return self + (-other)

    def scale(self, c) -> "QTorusElement":
        c = QScalar.coerce(c)
        if not c:
            return self._like({})
        return self._like({k: v * c for k, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, QScalar)):
            return self.scale(other)
        if not isinstance(other, QTorusElement):
            return NotImplemented
        self._check(other)
        N = self.order
        twist = 0 if self.classical else 1
        out: Dict[Key, QScalar] = {}
        for (a1, b1, c1), x in self.terms.items():
            d1 = sum(c1)
            for (a2, b2, c2), y in other.terms.items():
                if d1 + sum(c2) >= N:
                    continue
                k = (a1 + a2, b1 + b2, tuple(u + v for u, v in zip(c1, c2)))
                v = (x * y).shift(twist * (a1 * b2 - b1 * a2))
                w = out.get(k)
                if w is not None:
                    v = w + v
                    if not v:
                        del out[k]
                        continue
                out[k] = v
        return QTorusElement._raw(out, N, self.chart, self.rank or other.rank, self.classical)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, QScalar)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self._one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def _one(self) -> "QTorusElement":
        return QTorusElement.one(self.order, self.chart, self.rank, self.classical)

    def __eq__(self, other):
        if not isinstance(other, QTorusElement):
            return NotImplemented
        return self.classical == other.classical and self.order == other.order and self.chart == other.chart and self.terms == other.terms

    def __hash__(self):
        return hash((self.order, self.chart, frozenset(self.terms.items())))

    def __bool__(self):
        return bool(self.terms)

    def __len__(self):
        return len(self.terms)

    def __iter__(self):
        return iter(self.sorted_terms())

    def sorted_terms(self) -> List[Tuple[Key, QScalar]]:
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0][2]), kv[0][2], kv[0][0], kv[0][1]))

    def constant_term(self) -> QScalar:
        return self.terms.get((0, 0, (0,) * self.rank), ZERO)

    def is_one(self) -> bool:
        return len(self.terms) == 1 and self.constant_term() == ONE

    def truncate(self, order: int) -> "QTorusElement":
        return QTorusElement({k: c for k, c in self.terms.items()}, order, self.chart, self.rank, self.classical)

    def with_chart(self, chart) -> "QTorusElement":
        return QTorusElement._raw(dict(self.terms), self.order, chart, self.rank, self.classical)

    def min_degree(self) -> Optional[int]:
        return min((sum(k[2]) for k in self.terms), default=None)

    def degree_part(self, d: int) -> "QTorusElement":
        return self._like({k: c for k, c in self.terms.items() if sum(k[2]) == d})

    def inverse(self) -> "QTorusElement":
        """Inverse of an element 1 + x with every term of x of positive degree."""
        c0 = self.constant_term()
        if c0 != ONE:
            raise QTorusError("only elements with constant term 1 are inverted")
        x = self - self._one()
        if any(sum(k[2]) == 0 for k in x.terms):
            raise QTorusError("cannot invert: degree-0 nonconstant term")
        out = self._one()
        power = out
        neg = -x
        while True:
            power = power * neg
            if not power:
                break
            out = out + power
        return out

    def map_coeffs(self, fn) -> "QTorusElement":
        return QTorusElement({k: fn(c) for k, c in self.terms.items()}, self.order, self.chart, self.rank, self.classical)

    # ------------------------------------------------------------------

    def to_json(self, labels: Optional[Sequence[str]] = None) -> list:
        out = []
        for (a, b, beta), c in self.sorted_terms():
            if labels is None:
                cls = {str(i): v for i, v in enumerate(beta) if v}
            else:
                cls = {labels[i]: v for i, v in enumerate(beta) if v}
            item = {"tangent": [a, b], "class": cls, "coeff": c.to_json()}
            if self.chart is not None:
                item["chart"] = self.chart
            out.append(item)
        return out

    @classmethod
    def from_json(cls, data: Sequence[Mapping], labels: Sequence[str], order: int, chart=None) -> "QTorusElement":
        terms: Dict[Key, QScalar] = {}
        for item in data:
            a, b = (int(x) for x in item["tangent"])
            beta = [0] * len(labels)
            for lab, v in item.get("class", {}).items():
                if lab not in labels:
                    raise QTorusError(f"unknown class label {lab!r}")
                beta[list(labels).index(lab)] += int(v)
            k = (a, b, tuple(beta))
            c = QScalar.from_json(item["coeff"])
            terms[k] = terms.get(k, ZERO) + c
        return cls(terms, order, chart, len(labels))

    def __repr__(self):
        return f"QTorusElement({self.format()}, order={self.order}, chart={self.chart})"

    def format(self, labels: Optional[Sequence[str]] = None) -> str:
        if not self.terms:
            return "0"
        parts = []
        for (a, b, beta), c in self.sorted_terms():
            mono = []
            if (a, b) != (0, 0):
                mono.append(f"z^({a},{b})")
            if any(beta):
                if labels:
                    cl = "+".join(f"{v}{labels[i]}" if v != 1 else labels[i] for i, v in enumerate(beta) if v)
                else:
                    cl = ",".join(str(v) for v in beta)
                mono.append(f"z^[{cl}]")
            parts.append(f"({c})" + ("*" + "*".join(mono) if mono else ""))
        return " + ".join(parts)


# ---------------------------------------------------------------------------


def mono_mul(a: QTorusElement, b: QTorusElement) -> QTorusElement:
    """Product of two single-term elements."""
    if len(a) != 1 or len(b) != 1:
        raise QTorusError("mono_mul expects monomials")
    return a * b


def elem_arith(a: QTorusElement, b: QTorusElement, op: str) -> QTorusElement:
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    raise ValueError(f"unknown operation {op!r}")


def _line_multiple(t: Tuple[int, int], m: Tuple[int, int]) -> int:
    """l with t = l*m for primitive m; raises if t is not parallel to m."""
    if t[0] * m[1] - t[1] * m[0] != 0:
        raise QTorusError(f"term tangent {t} is not parallel to the wall direction {m}")
    if m[0]:
        return t[0] // m[0]
    return t[1] // m[1]


def _check_wall_function(f: QTorusElement, m: Tuple[int, int]) -> None:
    if f.constant_term() != ONE:
        raise QTorusError("wall function must have constant term 1")
    for (a, b, beta) in f.terms:
        if (a, b, beta) == (0, 0, (0,) * f.rank):
            continue
        _line_multiple((a, b), m)
        if sum(beta) <= 0:
            raise QTorusError("nonconstant wall terms need positive class degree")


def rescale(f: QTorusElement, m: Tuple[int, int], j: int) -> QTorusElement:
    """f(q^j z): multiply the term of tangent l*m by q^(l*j)."""
    if not j or f.classical:
        return f
    out = {}
    for (a, b, beta), c in f.terms.items():
        ell = _line_multiple((a, b), m)
        out[(a, b, beta)] = c.shift(2 * ell * j)
    return f._like(out)


def bend_factor(f: QTorusElement, m: Tuple[int, int], n: int) -> QTorusElement:
    """The factor a broken line picks up crossing the wall with n = <m, p>.

    F_n for n > 0 and F_n^(-1) for n < 0; both are products of shifted copies
    of f, never of its inverse.
    """
    out = f._one()
    js = range(n) if n >= 0 else range(-1, n - 1, -1)
    for j in js:
        out = out * rescale(f, m, j)
    return out


def wall_factor(f: QTorusElement, m: Tuple[int, int], n: int) -> QTorusElement:
    """F_n for the wall function f with Hamiltonian direction m."""
    out = f._one()
    if n >= 0:
        for j in range(n):
            out = out * rescale(f, m, j)
        return out
    for j in range(-n):
        out = out * rescale(f, m, -j - 1).inverse()
    return out


def wallcross_apply(f: QTorusElement, m_d: Tuple[int, int], elem: QTorusElement, epsilon: int = 1) -> QTorusElement:
    """Apply the wall-crossing automorphism of f (epsilon=-1 for its inverse).

    The inverse sends z^p to z^p * F_n^(-1); it is the automorphism of the
    wall function 1/f.
    """
    if epsilon not in (1, -1):
        raise QTorusError("epsilon must be +1 or -1")
    m_d = tuple(m_d)
    _check_wall_function(f, m_d)
    if f.chart != elem.chart or f.order != elem.order or f.classical != elem.classical:
        f = QTorusElement(f.terms, elem.order, elem.chart, f.rank, elem.classical)
    if f.is_one():
        return elem
    cache: Dict[int, QTorusElement] = {}
    out = elem._like({})
    for (a, b, beta), c in elem.terms.items():
        n = m_d[0] * b - m_d[1] * a
        if n == 0:
            piece = elem._like({(a, b, beta): c})
        else:
            F = cache.get(n)
            if F is None:
                F = wall_factor(f, m_d, n)
                if epsilon == -1:
                    F = F.inverse()
                cache[n] = F
            piece = elem._like({(a, b, beta): c}) * F
        out = out + piece
    return out


# ---------------------------------------------------------------------------
# Hamiltonians


def _q_ell_minus_one(ell: int) -> QScalar:
    return s_power(2 * ell) - ONE


def hamiltonian_to_f(H: Iterable[Tuple[Tuple[int, int], Sequence[int], QScalar]], m: Tuple[int, int], order: int, chart=None) -> QTorusElement:
    """f = exp(sum (q^l - 1) H_p z^p) with r(p) = l*m, l < 0."""
    H = list(H)
    rank = len(H[0][1]) if H else 0
    x = QTorusElement.zero(order, chart, rank)
    for t, beta, h in H:
        ell = _line_multiple(tuple(t), tuple(m))
        if ell >= 0:
            raise QTorusError(f"Hamiltonian term {t} is not a negative multiple of {m}")
        x = x + QTorusElement.monomial(t, beta, order, chart, _q_ell_minus_one(ell) * QScalar.coerce(h))
    return _exp(x)


def _exp(x: QTorusElement) -> QTorusElement:
    if any(sum(k[2]) == 0 for k in x.terms):
        raise QTorusError("exponential needs terms of positive degree")
    out = x._one()
    power = out
    k = 1
    while True:
        power = (power * x).scale(QScalar(1, k))
        if not power:
            break
        out = out + power
        k += 1
    return out


def _log(f: QTorusElement) -> QTorusElement:
    x = f - f._one()
    out = f._like({})
    power = f._one()
    k = 1
    while True:
        power = power * x
        if not power:
            break
        out = out + power.scale(QScalar((-1) ** (k - 1), k))
        k += 1
    return out


def f_to_hamiltonian(f: QTorusElement, m: Tuple[int, int]) -> List[Tuple[Tuple[int, int], Tuple[int, ...], QScalar]]:
    """Inverse of hamiltonian_to_f: H_p = [z^p] log f / (q^l - 1)."""
    if f.constant_term() != ONE:
        raise QTorusError("wall function must have constant term 1")
    lg = _log(f)
    out = []
    for (a, b, beta), c in lg.sorted_terms():
        ell = _line_multiple((a, b), tuple(m))
        if ell >= 0:
            raise QTorusError(f"term {(a, b)} is not a negative multiple of {m}")
        out.append(((a, b), beta, c / _q_ell_minus_one(ell)))
    return out


# ---------------------------------------------------------------------------
# BPS factorization


def _bps_factor(t, beta, j: int, omega: int, order: int, chart, rank) -> QTorusElement:
    base = QTorusElement({(0, 0, (0,) * rank): ONE, (t[0], t[1], tuple(beta)): s_power(j - 1)}, order, chart, rank)
    return base ** omega


def bps_factorize(f: QTorusElement) -> List[Tuple[Tuple[int, int], Tuple[int, ...], int, int]]:
    """Write f = prod (1 + q^((j-1)/2) z^p)^Omega, lowest degree first.

    Returns a list of (tangent, class, j, Omega).
    """
    if f.constant_term() != ONE:
        raise QTorusError("wall function must have constant term 1")
    rest = f
    one = QTorusElement.one(f.order, f.chart, f.rank)
    out = []
    while True:
        x = rest - one
        d = x.min_degree()
        if d is None:
            break
        if d == 0:
            raise QTorusError("degree-0 nonconstant term")
        correction = one
        for (a, b, beta), c in x.degree_part(d).sorted_terms():
            try:
                lau = as_laurent(c)
            except NotLaurent:
                raise NonIntegralExponent(f"coefficient {c} is not a Laurent polynomial") from None
            for e, val in sorted(lau.coeffs.items()):
                if val.denominator != 1:
                    raise NonIntegralExponent(f"exponent {val} is not an integer")
                j = e + 1
                omega = int(val)
                out.append(((a, b), beta, j, omega))
                correction = correction * _bps_factor((a, b), beta, j, -omega, f.order, f.chart, f.rank)
        rest = rest * correction
    return out


def bps_reconstruct(factors, order: int, chart=None, rank: int = 0) -> QTorusElement:
    out = QTorusElement.one(order, chart, rank)
    for t, beta, j, omega in factors:
        out = out * _bps_factor(t, beta, j, omega, order, chart, rank)
    return out


# ---------------------------------------------------------------------------


def random_scalar(rng: random.Random, span: int = 2) -> QScalar:
    """Small random Laurent polynomial, used by property tests."""
    terms = {rng.randint(-span, span): rng.randint(-3, 3) for _ in range(rng.randint(1, 3))}
    return QScalar.from_laurent(terms)


def random_element(rng: random.Random, order: int, rank: int = 2, n_terms: int = 5, span: int = 3, chart=None) -> QTorusElement:
    terms = {}
    for _ in range(n_terms):
        beta = tuple(rng.randint(0, max(order - 1, 0)) for _ in range(rank))
        t = (rng.randint(-span, span), rng.randint(-span, span))
        terms[(t[0], t[1], beta)] = random_scalar(rng)
    return QTorusElement(terms, order, chart, rank)
