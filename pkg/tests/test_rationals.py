"""Exact-arithmetic foundation: polynomials, Q(x), the function field, matrices.

Resultants and discriminants are cross-checked against sympy, which plays no
role in the package itself beyond validation oracles.
"""

from fractions import Fraction

import pytest
import sympy
from hypothesis import given, settings
from hypothesis import strategies as st

from coleman.rationals import (
    FunctionField,
    LSeries,
    QX,
    gp_add,
    gp_deriv,
    gp_div_exact,
    gp_divmod,
    gp_eval,
    gp_gcd,
    gp_mul,
    gp_resultant,
    gp_squarefree,
    gp_sub,
    gp_trim,
    mat_det,
    mat_identity,
    mat_inverse,
    mat_mul,
    mat_nullspace,
    mat_rref,
    p_clear_denominators,
    p_primitive,
    pfrac,
)

small_poly = st.lists(st.integers(-9, 9), min_size=0, max_size=6).map(pfrac)


@given(small_poly, small_poly)
def test_divmod_reconstructs(f, g):
    if not g:
        return
    q, r = gp_divmod(f, g)
    assert gp_add(gp_mul(q, g), r) == f
    assert len(r) < len(g)


@given(small_poly, small_poly)
def test_gcd_divides_both(f, g):
    h = gp_gcd(f, g)
    if h:
        gp_div_exact(f, h)
        gp_div_exact(g, h)
    else:
        assert not f and not g


def _sylvester_resultant(f, g):
    # determinant of the classical Sylvester matrix, the definition itself
    m, n = len(f) - 1, len(g) - 1
    cf = [sympy.Rational(c) for c in reversed(f)]
    cg = [sympy.Rational(c) for c in reversed(g)]
    rows = [[0] * i + cf + [0] * (n - 1 - i) for i in range(n)]
    rows += [[0] * i + cg + [0] * (m - 1 - i) for i in range(m)]
    return sympy.Matrix(rows).det()


@given(small_poly, small_poly)
@settings(max_examples=60)
def test_resultant_matches_sylvester_det(f, g):
    if len(f) < 2 or len(g) < 2:
        return
    got = gp_resultant(f, g)
    assert sympy.Rational(got.numerator, got.denominator) == _sylvester_resultant(f, g)


def test_squarefree_part():
    # (x-1)^2 (x+2) -> (x-1)(x+2)
    f = gp_mul(gp_mul(pfrac([-1, 1]), pfrac([-1, 1])), pfrac([2, 1]))
    assert gp_squarefree(f) == gp_mul(pfrac([-1, 1]), pfrac([2, 1]))


def test_primitive_normalization():
    f = pfrac([Fraction(-2, 3), Fraction(-4, 3)])
    assert p_primitive(f) == (-1, -2) or p_primitive(f) == (1, 2)
    # positive leading coefficient
    assert p_primitive(f)[-1] > 0


def test_clear_denominators():
    ints, den = p_clear_denominators(pfrac([Fraction(1, 2), Fraction(1, 3)]))
    assert ints == (3, 2) and den == 6


def test_qx_arithmetic():
    x = QX.x()
    f = (x ** 2 - 1) / (x - 1)
    assert f == x + 1
    assert (x / x) == QX(1)
    assert (1 / (x + 1) + 1 / (x - 1)) == 2 * x / (x ** 2 - 1)
    assert (x ** -2) * x ** 2 == QX(1)


def test_qx_orders():
    x = QX.x()
    f = (x ** 2 + x ** 3) / (x ** 5 - x ** 6)
    assert f.ord_at_zero() == -3
    assert f.ord_at_infinity() == 3
    assert QX(0).ord_at_zero() is None


def test_qx_deriv():
    x = QX.x()
    f = 1 / (x ** 2)
    assert f.deriv() == -2 / x ** 3


def test_function_field_inverse():
    # y^2 = x^3 + x + 1
    F = FunctionField([[ -1, -1, 0, -1], [0], [1]])
    y = F.y()
    assert (y * y).coords[0] == QX((1, 1, 0, 1))
    inv = y.inverse()
    assert y * inv == F.one()


def test_function_field_trace():
    F = FunctionField([[ -1, -1, 0, -1], [0], [1]])
    y = F.y()
    # trace of y is 0, trace of y^2 is tr of multiplication by x^3+x+1 = 2(x^3+x+1)
    assert F.trace(y) == QX(0)
    assert F.trace(y * y) == 2 * QX((1, 1, 0, 1))


def test_matrix_inverse_over_qx():
    x = QX.x()
    m = [[QX(1), QX(0)], [x, x ** 2]]
    inv = mat_inverse(m)
    assert mat_mul(m, inv) == mat_identity(2, QX(1))


def test_matrix_det_and_nullspace():
    m = [[Fraction(1), Fraction(2)], [Fraction(2), Fraction(4)]]
    assert mat_det(m) == 0
    ns = mat_nullspace(m)
    assert len(ns) == 1
    v = ns[0]
    assert v[0] * 1 + v[1] * 2 == 0


def test_rref_pivots():
    m = [[Fraction(0), Fraction(1), Fraction(2)], [Fraction(1), Fraction(0), Fraction(3)]]
    r, piv = mat_rref(m)
    assert piv == [0, 1]
    assert r[0][0] == 1 and r[1][1] == 1


def test_lseries_mul_and_inverse():
    t = LSeries(1, [Fraction(1)] + [Fraction(0)] * 8)  # t + O(t^10)
    s = LSeries(0, [Fraction(1), Fraction(1)] + [Fraction(0)] * 8)  # 1 + t
    q = s.inverse()
    prod = s * q
    assert prod.coeff(0) == 1
    assert all(prod.coeff(k) == 0 for k in range(1, prod.trunc))


def test_lseries_antideriv_blocks_residue():
    g = LSeries(-1, [Fraction(3)], Fraction(0))
    with pytest.raises(ArithmeticError):
        g.antideriv()
    h = LSeries(-2, [Fraction(2), Fraction(0), Fraction(4)])
    a = h.antideriv()
    assert a.coeff(-1) == -2
    assert a.coeff(1) == 4


def test_lseries_truncation_tracking():
    a = LSeries(0, [Fraction(1)] * 5)   # prec O(t^5)
    b = LSeries(2, [Fraction(1)] * 3)   # prec O(t^5)
    # error term O(t^5) * t^0 dominates: product known mod t^5 only
    assert (a * b).trunc == 5
    assert (a + b).trunc == 5
    assert (b * b).trunc == 7


def test_lseries_compose():
    f = LSeries(0, [Fraction(0), Fraction(1), Fraction(1)] + [Fraction(0)] * 5)  # t + t^2
    g = LSeries(1, [Fraction(2)] + [Fraction(0)] * 6)  # 2t
    c = f.compose_with(g)
    assert c.coeff(1) == 2 and c.coeff(2) == 4
