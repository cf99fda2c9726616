"""Scalar/series/matrix precision rules, plus the render <-> parse round trip."""

import math
import random
from fractions import Fraction

import pytest

from coleman.padics import (
    PadicScalar,
    PadicSeries,
    padic_linear_solve,
    parse_padic,
    render_padic,
)


def S(q, p, prec, e=1):
    return PadicScalar.from_rational(Fraction(q), p, prec, e)


def test_add_takes_min_precision():
    a = S(1, 3, 5)
    b = S(2, 3, 7)
    c = a + b
    assert c.precision == 5
    assert c.valuation == 1  # 1 + 2 = 3
    assert c.render() == "3 + O(3^5)"


def test_inverse_precision_drop():
    # invert a valuation-1 element known to O(3^5): result known to O(3^3)
    x = S(3, 3, 5)
    inv = x.inverse()
    assert inv.valuation == -1
    assert inv.precision == 3
    assert (x * inv - 1).is_zero()


def test_ramified_square():
    pi = PadicScalar.pi_power(7, 2, 1, 4)  # 7^(1/2) + O(7^4)
    sq = pi * pi
    assert sq.valuation == 1
    assert sq.precision == Fraction(9, 2)  # 4 + 1/2


def test_multiplication_precision_rule():
    a = S(9, 5, 6)   # val 0... 9 is a unit mod 5
    b = S(25, 5, 7)  # val 2
    c = a * b
    assert c.precision == min(6 + 2, 7 + 0)
    assert c.valuation == 2


def test_noise_floor_three_valued():
    a = S(1, 3, 4)
    b = a + S(3 ** 5, 3, 4)  # perturbation below the floor
    assert a.compare(b) == "eq"
    c = a + S(3, 3, 4)
    assert a.compare(c) == "ne"
    z = a - a
    assert z.is_zero() and z.precision == 4


def test_embed_and_back():
    a = S(10, 3, 6)
    b = a.embed(4)
    assert b.valuation == a.valuation and b.precision == 6
    assert b.to_unramified().compare(a) == "eq"
    pi = PadicScalar.pi_power(3, 4, 1, 5)
    with pytest.raises(ArithmeticError):
        (pi + S(1, 3, 5).embed(4)).to_unramified()


def test_mixed_ramification_arithmetic():
    pi2 = PadicScalar.pi_power(5, 2, 1, 6)   # 5^(1/2)
    pi3 = PadicScalar.pi_power(5, 3, 1, 6)   # 5^(1/3)
    prod = pi2 * pi3
    assert prod.e == 6
    assert prod.valuation == Fraction(1, 2) + Fraction(1, 3)


def test_pi_arithmetic_consistency():
    # (pi^2)^3 = p^2 for e = 3
    pi = PadicScalar.pi_power(7, 3, 2, 9)
    v = pi ** 3
    assert v.to_unramified().compare(S(49, 7, 6)) == "eq"


def test_linear_solve_unit_det():
    # [[1,1],[1,2]] has det 1: no loss at N = 10
    p = 7
    a = [[S(1, p, 10), S(1, p, 10)], [S(1, p, 10), S(2, p, 10)]]
    rhs = [S(3, p, 10), S(5, p, 10)]
    x, vdet = padic_linear_solve(a, rhs)
    assert vdet == 0
    assert x[0].precision == 10 and x[1].precision == 10
    assert x[0].compare(S(1, p, 10)) == "eq"
    assert x[1].compare(S(2, p, 10)) == "eq"


def test_linear_solve_det_p_loses_one():
    # [[p,0],[0,1]] has det p: solutions to O(p^7) from O(p^8) inputs
    p = 5
    a = [[S(p, p, 8), S(0, p, 8)], [S(0, p, 8), S(1, p, 8)]]
    rhs = [S(p * 2, p, 8), S(3, p, 8)]
    x, vdet = padic_linear_solve(a, rhs)
    assert vdet == 1
    assert x[0].precision == 7 and x[1].precision == 7
    assert x[0].compare(S(2, p, 7)) == "eq"


def test_series_antiderivative_losses():
    # 3 t^2 + t^5 over Q_3: both coefficients lose exactly ord_3(k+1) = 1
    p = 3
    g = PadicSeries(2, [S(3, p, 9), S(0, p, 9), S(0, p, 9), S(1, p, 9)], l=6)
    G = g.antiderivative()
    c3 = G.coeff(3)
    c6 = G.coeff(6)
    assert c3.compare(S(1, p, 8)) == "eq" and c3.precision == 8
    assert c6.precision == 9 - 1
    assert G.l == 7


def test_series_antiderivative_blocks_visible_residue():
    g = PadicSeries(-1, [S(1, 3, 5)], l=0)
    with pytest.raises(ArithmeticError):
        g.antiderivative()
    # a residue below the noise floor is dropped silently
    quiet = PadicSeries(-1, [S(0, 3, 5)], l=0)
    quiet.antiderivative()


def test_series_eval_ramified_endpoint():
    # integrate dt from 0: series 1; antiderivative t, evaluated at pi = p^(1/4)
    p = 3
    g = PadicSeries(0, [S(1, p, 8)], l=1)
    G = g.antiderivative()
    t = PadicScalar.pi_power(p, 4, 1, 8)
    val = G.eval(t)
    assert val.valuation == Fraction(1, 4)


def test_render_zero_and_parse():
    z = PadicScalar.zero(3, 9)
    assert render_padic(z) == "O(3^9)"
    back = parse_padic("O(3^9)")
    assert back.is_zero() and back.precision == 9


def test_render_digit_string():
    # 2*3^2 + 3^3 + O(3^5)
    x = S(2 * 9 + 27, 3, 5)
    assert x.render() == "2*3^2 + 3^3 + O(3^5)"


def test_parse_compact_product_form():
    v = parse_padic("12586493*7 + O(7^10)")
    assert v.valuation == 1
    assert v.precision == 10
    assert (v - S(12586493 * 7, 7, 10)).is_zero()


def test_parse_ramified():
    v = parse_padic("2*7^(1/3) + 7^(2/3) + O(7^2)")
    assert v.e == 3
    assert v.valuation == Fraction(1, 3)
    assert v.render() == "2*7^(1/3) + 7^(2/3) + O(7^2)"


def test_parse_render_roundtrip_random():
    rng = random.Random(20260819)
    primes = [3, 5, 7, 11]
    for _ in range(1000):
        p = rng.choice(primes)
        e = rng.choice([1, 1, 1, 2, 3, 4])
        nunits = rng.randrange(2 * e, 12 * e)
        v = rng.randrange(-3 * e, 3 * e)
        digits = [rng.randrange(p ** 6) for _ in range(e)]
        digits[0] = digits[0] * p + rng.randrange(1, p)
        x = PadicScalar._make(p, e, v, nunits, digits)
        y = parse_padic(render_padic(x), p=p, e=e)
        assert y.compare(x) == "eq", (render_padic(x), render_padic(y))
        assert y.precision == x.precision


def test_lift_int():
    x = S(86, 7, 5)
    assert x.lift_int() == 86
