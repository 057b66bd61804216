"""Exact arithmetic in the quantum parameter.

Everything is written in the variable ``s`` with ``q = s**2``, so half-integer
powers of ``q`` become integer powers of ``s``.  A :class:`QScalar` is a reduced
fraction of two integer Laurent polynomials in ``s``; a :class:`QLaurent` is a
Laurent polynomial in ``s`` with rational coefficients.

Laurent polynomials are passed around internally as plain ``{exponent: int}``
dicts.  They are never mutated after construction.
"""

from __future__ import annotations

from fractions import Fraction
from functools import reduce
from math import gcd
from typing import Dict, Iterable, Mapping, Tuple, Union

__all__ = [
    "QScalar",
    "QLaurent",
    "QArithmeticError",
    "NotLaurent",
    "PoleAtOne",
    "NonVanishingDifference",
    "field_arith",
    "bar_involution",
    "as_laurent",
    "classical_limit",
    "poisson_extract",
    "s_power",
    "q_power",
    "ZERO",
    "ONE",
]

Poly = Dict[int, int]


class QArithmeticError(ArithmeticError):
    """Base class for errors raised by this module."""


class NotLaurent(QArithmeticError):
    """The denominator does not divide the numerator."""


class PoleAtOne(QArithmeticError):
    """The function has a pole at s = 1."""


class NonVanishingDifference(QArithmeticError):
    """c12 - c21 does not vanish at s = 1."""


# ---------------------------------------------------------------------------
# dense helpers on integer polynomials (lists, lowest degree first)


def _to_dense(p: Mapping[int, int]) -> Tuple[int, list]:
    lo = min(p)
    hi = max(p)
    out = [0] * (hi - lo + 1)
    for e, c in p.items():
        out[e - lo] = c
    return lo, out


def _from_dense(lo: int, coeffs) -> Poly:
    return {lo + i: c for i, c in enumerate(coeffs) if c}


def _strip(a: list) -> list:
    while a and a[-1] == 0:
        a.pop()
    return a


def _content(a: Iterable[int]) -> int:
    return reduce(gcd, a, 0)


def _primitive(a: list) -> list:
    c = _content(a)
    if c > 1:
        a = [x // c for x in a]
    return a


def _pseudo_rem(a: list, b: list) -> list:
    """Remainder of a pseudo-division of a by b (dense, ascending)."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    while len(a) - 1 >= db and a:
        da = len(a) - 1
        la = a[-1]
        shift = da - db
        # a <- lb*a - la*x^shift*b
        a = [lb * x for x in a]
        for i, c in enumerate(b):
            a[i + shift] -= la * c
        _strip(a)
        if a:
            a = _primitive(a)
    return a


def _poly_gcd(a: list, b: list) -> list:
    """Primitive gcd of two nonzero dense integer polynomials."""
    a = _primitive(_strip(list(a)))
    b = _primitive(_strip(list(b)))
    if len(a) < len(b):
        a, b = b, a
    while b:
        a, b = b, _pseudo_rem(a, b)
    if a[-1] < 0:
        a = [-x for x in a]
    return a


def _exact_div(a: list, b: list) -> list:
    """Divide dense integer polynomial a by b when the quotient is integral."""
    a = list(a)
    db = len(b) - 1
    lb = b[-1]
    q = [0] * max(len(a) - db, 1)
    while a and len(a) - 1 >= db:
        shift = len(a) - 1 - db
        c, r = divmod(a[-1], lb)
        if r:
            raise ArithmeticError("inexact polynomial division")
        q[shift] = c
        for i, bc in enumerate(b):
            a[i + shift] -= c * bc
        _strip(a)
    if a:
        raise ArithmeticError("inexact polynomial division")
    return q


def _pmul(a: Mapping[int, int], b: Mapping[int, int]) -> Poly:
    out: Poly = {}
    for ea, ca in a.items():
        for eb, cb in b.items():
            e = ea + eb
            v = out.get(e, 0) + ca * cb
            if v:
                out[e] = v
            else:
                out.pop(e, None)
    return out


def _padd(a: Mapping[int, int], b: Mapping[int, int], sign: int = 1) -> Poly:
    out = dict(a)
    for e, c in b.items():
        v = out.get(e, 0) + sign * c
        if v:
            out[e] = v
        else:
            out.pop(e, None)
    return out


def _eval_at_one(p: Mapping[int, int]) -> int:
    return sum(p.values())


# ---------------------------------------------------------------------------


class QScalar:
    """A rational function in s with integer coefficients, kept reduced.

    Normal form: gcd(num, den) = 1, the denominator has lowest exponent 0
    and a positive leading coefficient.  Because the form is canonical,
    ``==`` and ``hash`` are structural.
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num: Mapping[int, int] | int = 0, den: Mapping[int, int] | int = 1, _normalize: bool = True):
        if isinstance(num, int):
            num = {0: num} if num else {}
        if isinstance(den, int):
            den = {0: den} if den else {}
        num = {e: c for e, c in num.items() if c}
        den = {e: c for e, c in den.items() if c}
        if not den:
            raise ZeroDivisionError("QScalar with zero denominator")
        if _normalize:
            num, den = self._normal_form(num, den)
        self.num: Poly = num
        self.den: Poly = den
        self._hash = None

    @staticmethod
    def _normal_form(num: Poly, den: Poly) -> Tuple[Poly, Poly]:
        if not num:
            return {}, {0: 1}
        lo_d = min(den)
        if lo_d:
            den = {e - lo_d: c for e, c in den.items()}
            num = {e - lo_d: c for e, c in num.items()}
        if len(den) == 1:
            d = den[0]
            g = gcd(_content(num.values()), d)
            if d < 0:
                g = -g
            if g != 1:
                num = {e: c // g for e, c in num.items()}
            return num, {0: d // g}
        lo_n, dn = _to_dense(num)
        _, dd = _to_dense(den)
        g = _poly_gcd(dn, dd)
        if len(g) > 1:
            dn = _exact_div(dn, g)
            dd = _exact_div(dd, g)
        c = gcd(_content(dn), _content(dd))
        if dd[-1] < 0:
            c = -c
        if c != 1:
            dn = [x // c for x in dn]
            dd = [x // c for x in dd]
        num = _from_dense(lo_n, dn)
        den = _from_dense(0, dd)
        lo_d = min(den)
        if lo_d:
            den = {e - lo_d: c for e, c in den.items()}
            num = {e - lo_d: c for e, c in num.items()}
        return num, den

    # construction helpers -------------------------------------------------

    @classmethod
    def from_laurent(cls, coeffs: Mapping[int, Union[int, Fraction]]) -> "QScalar":
        """Embed a Laurent polynomial with rational coefficients."""
        coeffs = {e: Fraction(c) for e, c in coeffs.items() if c}
        if not coeffs:
            return ZERO
        lcm = 1
        for c in coeffs.values():
            lcm = lcm * c.denominator // gcd(lcm, c.denominator)
        return cls({e: int(c * lcm) for e, c in coeffs.items()}, {0: lcm})

    @classmethod
    def coerce(cls, x) -> "QScalar":
        if isinstance(x, QScalar):
            return x
        if isinstance(x, int):
            return cls(x)
        if isinstance(x, Fraction):
            return cls(x.numerator, x.denominator)
        if isinstance(x, QLaurent):
            return x.to_scalar()
        raise TypeError(f"cannot coerce {type(x).__name__} to QScalar")

    # predicates -----------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.num

    def __bool__(self) -> bool:
        return bool(self.num)

    def is_laurent(self) -> bool:
        return len(self.den) == 1

    def is_constant(self) -> bool:
        return self.is_laurent() and set(self.num) <= {0}

    # arithmetic -----------------------------------------------------------

    def __add__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        if not other.num:
            return self
        if not self.num:
            return other
        if self.den == other.den:
            return QScalar(_padd(self.num, other.num), self.den)
        return QScalar(
            _padd(_pmul(self.num, other.den), _pmul(other.num, self.den)),
            _pmul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        return QScalar({e: -c for e, c in self.num.items()}, self.den, _normalize=False)

    def __sub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other + (-self)

    def __mul__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        if not self.num or not other.num:
            return ZERO
        if self.den == _UNIT_DEN and other.den == _UNIT_DEN:
            return QScalar(_pmul(self.num, other.num), _UNIT_DEN, _normalize=False)
        return QScalar(_pmul(self.num, other.num), _pmul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        if not other.num:
            raise ZeroDivisionError("division by the zero QScalar")
        return QScalar(_pmul(self.num, other.den), _pmul(self.den, other.num))

    def __rtruediv__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return other / self

    def __pow__(self, n: int):
        if n < 0:
            return ONE / (self ** (-n))
        out = ONE
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def shift(self, k: int) -> "QScalar":
        """Multiply by s**k."""
        if not k or not self.num:
            return self
        return QScalar({e + k: c for e, c in self.num.items()}, self.den, _normalize=False)

    # comparison -----------------------------------------------------------

    def __eq__(self, other):
        other = _coerce_or_none(other)
        if other is None:
            return NotImplemented
        return self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((frozenset(self.num.items()), frozenset(self.den.items())))
        return self._hash

    # evaluation -----------------------------------------------------------

    def evaluate(self, s: Union[int, Fraction]) -> Fraction:
        """Exact value at a rational point s (s must be nonzero)."""
        s = Fraction(s)
        n = sum(c * s**e for e, c in self.num.items())
        d = sum(c * s**e for e, c in self.den.items())
        if d == 0:
            raise ZeroDivisionError(f"pole at s = {s}")
        return Fraction(n) / d

    def to_float(self, q: float) -> float:
        """Display helper only: numerical value at a positive real q."""
        s = q**0.5
        n = sum(c * s**e for e, c in self.num.items())
        d = sum(c * s**e for e, c in self.den.items())
        return n / d

    # conversions ----------------------------------------------------------

    def to_json(self) -> dict:
        return {"num": _laurent_json(self.num), "den": _laurent_json(self.den)}

    @classmethod
    def from_json(cls, obj) -> "QScalar":
        if isinstance(obj, dict) and "num" in obj:
            num = QLaurent.from_json(obj["num"]).to_scalar()
            den = QLaurent.from_json(obj.get("den", {"0": "1"})).to_scalar()
            return num / den
        return QLaurent.from_json(obj).to_scalar()

    def __repr__(self):
        return f"QScalar({self})"

    def __str__(self):
        n = _fmt_poly(self.num)
        if self.den == _UNIT_DEN:
            return n
        return f"({n})/({_fmt_poly(self.den)})"


_UNIT_DEN: Poly = {0: 1}
ZERO = QScalar()
ONE = QScalar(1)


def _coerce_or_none(x):
    if isinstance(x, QScalar):
        return x
    if isinstance(x, (int, Fraction, QLaurent)):
        return QScalar.coerce(x)
    return None


def s_power(k: int) -> QScalar:
    """The monomial s**k = q**(k/2)."""
    return QScalar({k: 1}, _UNIT_DEN, _normalize=False)


def q_power(k: Union[int, Fraction]) -> QScalar:
    """q**k for k a half-integer."""
    twice = Fraction(k) * 2
    if twice.denominator != 1:
        raise ValueError(f"exponent {k} is not a half-integer")
    return s_power(int(twice))


def _fmt_poly(p: Mapping[int, int]) -> str:
    if not p:
        return "0"
    parts = []
    for e in sorted(p, reverse=True):
        c = p[e]
        if e == 0:
            body = str(abs(c))
        else:
            mono = "s" if e == 1 else f"s^{e}"
            body = mono if abs(c) == 1 else f"{abs(c)}*{mono}"
        sign = "-" if c < 0 else "+"
        parts.append((sign, body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


def _exp_key(e: int) -> str:
    """s-exponent -> stringified q-exponent ("-1/2", "1", ...)."""
    return str(Fraction(e, 2))


def _laurent_json(p: Mapping[int, Union[int, Fraction]]) -> dict:
    return {_exp_key(e): _frac_str(Fraction(p[e])) for e in sorted(p)}


def _frac_str(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


# ---------------------------------------------------------------------------


class QLaurent:
    """A Laurent polynomial in s with rational coefficients.

    ``coeffs`` maps s-exponents (integers) to nonzero Fractions.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Mapping[int, Union[int, Fraction]] | None = None):
        items = sorted((int(e), Fraction(c)) for e, c in (coeffs or {}).items() if c)
        self.coeffs: Dict[int, Fraction] = dict(items)

    def to_scalar(self) -> QScalar:
        return QScalar.from_laurent(self.coeffs)

    def to_json(self) -> dict:
        return _laurent_json(self.coeffs)

    @classmethod
    def from_json(cls, obj: Mapping[str, str]) -> "QLaurent":
        out = {}
        for k, v in obj.items():
            e = Fraction(k) * 2
            if e.denominator != 1:
                raise ValueError(f"exponent {k!r} is not a half-integer")
            out[int(e)] = Fraction(v)
        return cls(out)

    def __eq__(self, other):
        if isinstance(other, QLaurent):
            return self.coeffs == other.coeffs
        if isinstance(other, (QScalar, int, Fraction)):
            return self.to_scalar() == QScalar.coerce(other)
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coeffs.items()))

    def __repr__(self):
        return f"QLaurent({self.coeffs!r})"

    def __str__(self):
        return format_q(self.coeffs)


def format_q(coeffs: Mapping[int, Union[int, Fraction]]) -> str:
    """Render a Laurent polynomial in s using half-integer powers of q."""
    if not coeffs:
        return "0"
    parts = []
    for e in sorted(coeffs, reverse=True):
        c = Fraction(coeffs[e])
        ex = Fraction(e, 2)
        if e == 0:
            mono = ""
        elif ex == 1:
            mono = "q"
        else:
            mono = f"q^{{{ex}}}"
        a = abs(c)
        if not mono:
            body = str(a)
        elif a == 1:
            body = mono
        else:
            body = f"{a}*{mono}"
        parts.append(("-" if c < 0 else "+", body))
    out = ("-" if parts[0][0] == "-" else "") + parts[0][1]
    for sign, body in parts[1:]:
        out += f" {sign} {body}"
    return out


# ---------------------------------------------------------------------------
# operations


def field_arith(a: QScalar, b: QScalar, op: str) -> QScalar:
    """Apply ``op`` in {"add", "sub", "mul", "div"} to two scalars."""
    if op == "add":
        return a + b
    if op == "sub":
        return a - b
    if op == "mul":
        return a * b
    if op == "div":
        return a / b
    raise ValueError(f"unknown operation {op!r}")


def bar_involution(a: QScalar) -> QScalar:
    """Substitute s -> 1/s."""
    return QScalar({-e: c for e, c in a.num.items()}, {-e: c for e, c in a.den.items()})


def as_laurent(a: QScalar) -> QLaurent:
    """Return ``a`` as a Laurent polynomial, or raise NotLaurent."""
    if not a.is_laurent():
        # reduced fraction with a non-monomial denominator
        raise NotLaurent(f"{a} is not a Laurent polynomial in q^(1/2)")
    d = a.den[0]
    return QLaurent({e: Fraction(c, d) for e, c in a.num.items()})


def classical_limit(a: QScalar) -> Fraction:
    """Value at s = 1 (so q = 1)."""
    d = _eval_at_one(a.den)
    if d == 0:
        raise PoleAtOne(f"{a} has a pole at q = 1")
    return Fraction(_eval_at_one(a.num), d)


_Q_MINUS_ONE = QScalar({2: 1, 0: -1})


def poisson_extract(c12: QScalar, c21: QScalar) -> Fraction:
    """lim_{q -> 1} (c12 - c21)/(q - 1)."""
    diff = QScalar.coerce(c12) - QScalar.coerce(c21)
    try:
        at_one = classical_limit(diff)
    except PoleAtOne as exc:
        raise NonVanishingDifference(str(exc)) from exc
    if at_one != 0:
        raise NonVanishingDifference(f"c12 - c21 = {at_one} at q = 1")
    return classical_limit(diff / _Q_MINUS_ONE)
