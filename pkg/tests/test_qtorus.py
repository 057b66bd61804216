import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qscatter.qcoeff import ONE, QScalar, s_power
from qscatter.qtorus import (
    QTorusElement,
    QTorusError,
    bend_factor,
    bps_factorize,
    bps_reconstruct,
    f_to_hamiltonian,
    hamiltonian_to_f,
    random_element,
    wallcross_apply,
)

N = 6


def mono(a, b, beta=(0, 0), c=ONE, order=N):
    return QTorusElement.monomial((a, b), beta, order, None, c)


def one(order=N, rank=2):
    return QTorusElement.one(order, None, rank)


def wall(t, beta, coeff=s_power(-1), order=N, rank=2):
    return QTorusElement({(0, 0, (0,) * rank): ONE, (t[0], t[1], tuple(beta)): coeff}, order, None, rank)


def test_basic_products():
    x, y = mono(1, 0), mono(0, 1)
    assert x * y == mono(1, 1, c=s_power(1))
    assert y * x == mono(1, 1, c=s_power(-1))
    p = mono(2, -1, (1, 0))
    assert p * p == mono(4, -2, (2, 0))


def test_expand_two_binomials():
    x, y = mono(1, 0), mono(0, 1)
    got = (one() + x) * (one() + y)
    assert got == one() + x + y + mono(1, 1, c=s_power(1))
    a = mono(3, 4, c=QScalar(7))
    assert one() * a == a


def test_truncation_drops_high_degree():
    a = mono(1, 0, (1, 1), order=3)
    assert not (a * a)


# oracle: z^(a,b) acts on u^k as s^(-ab - 2bk) u^(k+a), a q-difference operator
def _act(elem, k):
    out = {}
    for (a, b, beta), c in elem.terms.items():
        key = (k + a, beta)
        out[key] = out.get(key, QScalar(0)) + c.shift(-a * b - 2 * b * k)
    return {kk: v for kk, v in out.items() if v != QScalar(0)}


def _compose(x, y, k):
    # (x*y) acting on u^k is x acting on y(u^k)
    out = {}
    for (kk, beta), c in _act(y, k).items():
        for (a, b, gamma), d in x.terms.items():
            tot = tuple(p + q for p, q in zip(beta, gamma))
            if sum(tot) >= x.order:
                continue
            key = (kk + a, tot)
            out[key] = out.get(key, QScalar(0)) + d * c.shift(-a * b - 2 * b * kk)
    return {kk: v for kk, v in out.items() if v != QScalar(0)}


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_product_matches_operator_oracle(seed):
    rng = random.Random(seed)
    x = random_element(rng, N, rank=2, n_terms=4)
    y = random_element(rng, N, rank=2, n_terms=4)
    for k in (-2, 0, 3):
        assert _act(x * y, k) == _compose(x, y, k)


def test_associativity_random_triples():
    rng = random.Random(11)
    for _ in range(200):
        a, b, c = (random_element(rng, N, rank=2, n_terms=5) for _ in range(3))
        assert (a * b) * c == a * (b * c)


def test_wallcross_parallel_is_identity():
    f = wall((-1, 0), (1, 0))
    p = mono(3, 0)
    assert wallcross_apply(f, (1, 0), p) == p


def test_wallcross_single_factor():
    # <m, p> = 1: z^p -> z^p (1 + q^(-1/2) z^(-m) [E])
    f = wall((-1, 0), (1, 0))
    p = mono(0, 1)
    assert wallcross_apply(f, (1, 0), p) == p * f


def test_bend_factor_products():
    f = wall((-1, 0), (1, 0))
    assert bend_factor(f, (1, 0), 0) == one()
    assert bend_factor(f, (1, 0), 1) == f
    f2 = bend_factor(f, (1, 0), 2)
    shifted = wall((-1, 0), (1, 0), coeff=s_power(-3))
    assert f2 == f * shifted


def _random_wall(rng, order):
    t = rng.choice([(-1, 0), (0, -1), (-1, -1), (-2, -1)])
    terms = {(0, 0, (0, 0)): ONE}
    for ell in (1, 2):
        beta = (rng.randint(0, 1), rng.randint(1, 2)) if ell == 1 else (rng.randint(1, 2), rng.randint(1, 2))
        terms[(ell * t[0], ell * t[1], beta)] = QScalar.from_laurent({rng.randint(-2, 2): rng.randint(1, 3)})
    return QTorusElement(terms, order, None, 2), (-t[0], -t[1])


def test_wallcross_multiplicative_and_invertible_order_8():
    rng = random.Random(5)
    order = 8
    for _ in range(200):
        f, m = _random_wall(rng, order)
        a = random_element(rng, order, rank=2, n_terms=3, span=2)
        b = random_element(rng, order, rank=2, n_terms=3, span=2)
        assert wallcross_apply(f, m, a * b) == wallcross_apply(f, m, a) * wallcross_apply(f, m, b)
        assert wallcross_apply(f, m, wallcross_apply(f, m, a), -1) == a
        assert wallcross_apply(f, m, wallcross_apply(f, m, a, -1)) == a


def test_hamiltonian_of_binomial():
    order = 6
    f = wall((-1, 0), (1, 0), order=order)
    H = dict(((t, beta), c) for t, beta, c in f_to_hamiltonian(f, (1, 0)))
    for ell in range(1, order):
        want = QScalar(-((-1) ** (ell - 1))) / (QScalar(ell) * (s_power(ell) - s_power(-ell)))
        assert H[((-ell, 0), (ell, 0))] == want
    assert f_to_hamiltonian(one(order), (1, 0)) == []


def test_hamiltonian_round_trips():
    order = 6
    rng = random.Random(3)
    for _ in range(10):
        f, m = _random_wall(rng, order)
        assert hamiltonian_to_f(f_to_hamiltonian(f, m), m, order) == f
    H = [((-1, -1), (1, 1), QScalar(2)), ((-2, -2), (1, 2), s_power(3))]
    g = hamiltonian_to_f(H, (1, 1), order)
    back = f_to_hamiltonian(g, (1, 1))
    assert [(t, b, c) for t, b, c in back] == [(t, tuple(b), c) for t, b, c in H]
    assert hamiltonian_to_f([], (1, 0), order, None) == QTorusElement.one(order, None, 0)


def test_bps_factorize():
    f = wall((-1, 0), (1, 0))
    assert bps_factorize(f) == [((-1, 0), (1, 0), 0, 1)]
    assert bps_factorize(f * f) == [((-1, 0), (1, 0), 0, 2)]
    rng = random.Random(8)
    for _ in range(10):
        g, _m = _random_wall(rng, N)
        assert bps_reconstruct(bps_factorize(g), N, None, 2) == g


def test_wall_function_validation():
    with pytest.raises(QTorusError):
        wallcross_apply(wall((0, -1), (1, 0)), (1, 0), mono(0, 1))


def test_inverse_and_json():
    f = wall((-1, 1), (1, 1))
    assert f * f.inverse() == one()
    labels = ["A", "B"]
    assert QTorusElement.from_json(f.to_json(labels), labels, N) == f
