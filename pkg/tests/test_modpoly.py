"""The packed multiplier and the cached divider against exact arithmetic."""

from fractions import Fraction

from hypothesis import given, settings, strategies as st

from coleman.modpoly import (
    PolyReducer, padd, pderiv, peval, pinv_series, pmod, pmul, psub, ptrim)
from coleman.rationals import gp_divmod, gp_mul, gp_trim


def _exact_mod(f, m):
    return ptrim([int(c) % m for c in f])


moduli = st.sampled_from([3 ** 9, 5 ** 12, 7 ** 10, 3 ** 40, 7 ** 33, 2 ** 5])
polys = st.lists(st.integers(-10 ** 12, 10 ** 12), max_size=40)


@given(moduli, polys, polys)
@settings(max_examples=150, deadline=None)
def test_pmul_matches_exact_product(m, f, g):
    exact = gp_mul(tuple(Fraction(c) for c in f), tuple(Fraction(c) for c in g))
    assert ptrim(pmul(pmod(f, m), pmod(g, m), m)) == _exact_mod(exact, m)


def test_pmul_crosses_the_packing_cutoff():
    m = 3 ** 21
    f = [(i * i + 1) % m for i in range(90)]
    g = [(7 * i + 3) % m for i in range(90)]
    exact = gp_mul(tuple(map(Fraction, f)), tuple(map(Fraction, g)))
    assert ptrim(pmul(f, g, m)) == _exact_mod(exact, m)


@given(moduli, polys, st.lists(st.integers(-50, 50), min_size=1, max_size=12))
@settings(max_examples=150, deadline=None)
def test_reducer_agrees_with_exact_division(m, f, g):
    g = g + [1]  # monic, so the exact route stays denominator-free
    red = PolyReducer(g, m)
    q, rem = red.divmod(pmod(f, m))
    qe, re_ = gp_divmod(
        tuple(Fraction(c) for c in f), tuple(Fraction(c) for c in g))
    assert ptrim(q) == _exact_mod(qe, m)
    assert ptrim(rem) == _exact_mod(re_, m)


def test_reducer_accepts_unit_leading_coefficient():
    m = 7 ** 8
    g = [1, 4, 5]  # lead 5 is a unit mod 7
    f = [3, 1, 4, 1, 5, 9, 2, 6]
    red = PolyReducer(g, m)
    q, rem = red.divmod(f)
    back = padd(pmul(q, g, m), rem, m)
    assert ptrim(back) == ptrim(pmod(f, m))
    assert len(rem) < len(g) - 0  # deg rem < deg g
    qe, re_ = gp_divmod(
        tuple(Fraction(c) for c in f), tuple(Fraction(c) for c in g))
    for got, want in zip(rem + [0] * 5, list(re_) + [Fraction(0)] * 5):
        w = Fraction(want)
        assert w.denominator % 7 != 0
        assert (got - w.numerator * pow(w.denominator, -1, m)) % m == 0


def test_inverse_series_round_trips():
    m = 5 ** 15
    f = [2, 9, 1, 0, 4, 4, 7]
    inv = pinv_series(f, 25, m)
    one = ptrim(pmul(f, inv, m)[:25])
    assert one == [1]


def test_derivative_and_eval():
    m = 11 ** 6
    f = [5, 0, 3, 2]  # 5 + 3x^2 + 2x^3
    assert pderiv(f, m) == [0, 6, 6]
    assert peval(f, 4, m) == (5 + 3 * 16 + 2 * 64) % m
    assert ptrim(psub(f, f, m)) == []
