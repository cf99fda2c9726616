"""Fixed-modulus polynomial layer: Kronecker products, A_p inverses, r-adic
elements.  Reference results come from direct schoolbook computation."""

import random
from fractions import Fraction

import pytest

from coleman.zmodp import (
    ApRing,
    RContext,
    fp_gcd,
    fp_invmod,
    zp_add,
    zp_divmod,
    zp_eval,
    zp_from_fractions,
    zp_mul,
    zp_norm,
    zmod_solve,
)


def _school_mul(f, g, m):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        for j, b in enumerate(g):
            out[i + j] += a * b
    return zp_norm(out, m)


def test_kronecker_matches_schoolbook():
    rng = random.Random(7)
    m = 3 ** 20
    for _ in range(30):
        f = [rng.randrange(m) for _ in range(rng.randrange(1, 80))]
        g = [rng.randrange(m) for _ in range(rng.randrange(1, 80))]
        assert zp_mul(list(f), list(g), m) == _school_mul(f, g, m)


def test_divmod_by_non_monic_unit_lc():
    m = 7 ** 10
    g = [3, 0, 5]  # lc 5 is a unit mod 7
    f = [1, 2, 3, 4, 5]
    q, r = zp_divmod(list(f), g, m)
    recon = zp_add(zp_mul(q, g, m), r, m)
    assert recon == zp_norm(list(f), m)
    assert len(r) < len(g)


def test_fp_invmod():
    p = 7
    modpoly = [1, 0, 1, 1]  # 1 + x^2 + x^3
    f = [2, 3]
    inv = fp_invmod(f, modpoly, p)
    prod = zp_divmod(zp_mul(f, inv, p), modpoly, p)[1]
    assert prod == [1]


def test_ap_ring_inverse():
    r = [4, -23, -69, -51, 3, 31, 21, 7, 1]
    ring = ApRing(3, 12, r)
    a = [5, 1, 2, 0, 1]
    inv = ring.inverse(a)
    assert ring.mul(a, inv) == [1]


def test_ap_ring_rejects_non_unit_lc():
    with pytest.raises(ArithmeticError):
        ApRing(3, 5, [1, 1, 3])


def test_rseries_poly_roundtrip():
    ctx = RContext(5, 8, [2, 0, 1], k_cap=30)  # r = x^2 + 2
    f = [1, 2, 3, 4, 5, 6, 7]
    el = ctx.from_poly(f)
    poly, tail = el.to_poly_and_tail()
    assert not tail
    assert poly == zp_norm(list(f), 5 ** 8)


def test_rseries_mul_matches_rational_function_identity():
    # (a/r) * (b/r^2) = ab / r^3, checked at sample points via modular inverse
    p, M = 7, 9
    r = [1, 3, 0, 1]
    ctx = RContext(p, M, r, k_cap=30)
    m = p ** M
    a, b = [2, 5], [1, 0, 4]
    ea = ctx.from_r_power(1, a)
    eb = ctx.from_r_power(2, b)
    prod = ea.mul(eb)
    for x0 in [1, 2, 5, 11]:
        rv = zp_eval(r, x0, m)
        if rv % p == 0:
            continue
        lhs = 0
        for i, d in enumerate(prod.digits):
            k = prod.k_min + i
            lhs = (lhs + zp_eval(d, x0, m) * pow(zp_eval(r, x0, m), -k, m)) % m
        rhs = zp_eval(a, x0, m) * zp_eval(b, x0, m) % m
        rhs = rhs * pow(rv, -3, m) % m
        assert lhs == rhs


def test_rseries_mixed_mul_with_carries():
    # (x^5 + 1/r) squared: check against expansion at points
    p, M = 5, 10
    r = [3, 1, 2, 1]
    ctx = RContext(p, M, r, k_cap=20)
    m = p ** M
    el = ctx.from_poly([0, 0, 0, 0, 0, 1]).add(ctx.from_r_power(1))
    sq = el.mul(el)
    for x0 in [2, 3, 7]:
        rv = zp_eval(r, x0, m)
        if rv % p == 0:
            continue
        want = (pow(x0, 5, m) + pow(rv, -1, m)) ** 2 % m
        got = 0
        for i, d in enumerate(sq.digits):
            k = sq.k_min + i
            got = (got + zp_eval(d, x0, m) * pow(rv, -k, m)) % m
        assert got == want


def test_rseries_cap_drops_deep_levels():
    ctx = RContext(3, 6, [1, 1], k_cap=4)
    el = ctx.from_r_power(3)
    sq = el.mul(el)  # level 6 > cap
    assert sq.is_zero()


def test_zp_from_fractions_rejects_p_denominator():
    with pytest.raises(ArithmeticError):
        zp_from_fractions((Fraction(1, 3),), 3, 5)
    assert zp_from_fractions((Fraction(1, 2),), 3, 2) == [5]  # 1/2 = 5 mod 9


def test_zmod_solve_unit():
    p, M = 3, 8
    x, sigma = zmod_solve([[2, 1], [1, 1]], [5, 3], p, M)
    assert sigma == 0
    assert x[0] % 3 ** 8 == 2 and x[1] % 3 ** 8 == 1


def test_zmod_solve_p_divisible_pivot():
    p, M = 3, 6
    # matrix 3*I: rows have content 3: solution exact after scaling
    x, sigma = zmod_solve([[3, 0], [0, 3]], [6, 9], p, M)
    assert sigma == 2
    assert x[0] == 2 and x[1] == 3
