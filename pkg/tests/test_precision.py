"""Precision bookkeeping: truncation orders, convergence, digit loss."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from coleman.curve import (
    CurvePoint,
    expand_at_point,
    find_very_bad_point,
    point_at_infinity,
    point_from_xy,
    validate_point,
)
from coleman.io_formats import load_curve
from coleman.padics import PadicScalar
from coleman.precision import (
    PrecisionError,
    _tail_min,
    convergence_test,
    eval_precision,
    floor_log,
    padic_det,
    solve_precision,
    tiny_bounds,
)


@pytest.fixture(scope="module")
def bps():
    return load_curve("bps")


@pytest.fixture(scope="module")
def c35():
    return load_curve("c35")


def test_floor_log():
    assert floor_log(1, 3) == 0
    assert floor_log(2, 3) == 0
    assert floor_log(3, 3) == 1
    assert floor_log(80, 3) == 3
    assert floor_log(81, 3) == 4
    with pytest.raises(ValueError):
        floor_log(0, 3)


# -- tiny integral bounds ----------------------------------------------------

def test_tiny_unramified_power_series():
    rep = tiny_bounds(1, 10, 0, (Fraction(1), Fraction(1)), 7)
    assert rep.l == 10
    assert rep.nu1 == 10
    assert rep.nu3 is None
    assert rep.precision == 10


def test_tiny_ramified_quarter_steps():
    rep = tiny_bounds(4, 9, 1, (Fraction(1, 4), Fraction(1, 4)), 3)
    assert rep.nu2 == Fraction(17, 2)  # attained at i = 2
    assert rep.nu3 is None  # simple pole integrates away


def test_tiny_pole_term():
    rep = tiny_bounds(2, 8, 3, (Fraction(1, 2), Fraction(3, 2)), 5)
    assert rep.nu3 == 8 - 3 * Fraction(3, 2) - 0
    rep2 = tiny_bounds(2, 8, 7, (Fraction(1, 2), Fraction(1, 2)), 5)
    assert rep2.nu3 == 8 - Fraction(7, 2) - 1  # floor log5(6) = 1


def test_tiny_rejects_bad_arguments():
    with pytest.raises(ValueError):
        tiny_bounds(0, 5, 0, (Fraction(1),), 3)
    with pytest.raises(ValueError):
        tiny_bounds(1, 0, 0, (Fraction(1),), 3)


@settings(max_examples=150, deadline=None)
@given(e=st.integers(1, 12), n=st.integers(1, 24),
       p=st.sampled_from([3, 5, 7, 11]))
def test_tiny_l_is_minimal(e, n, p):
    rep = tiny_bounds(e, n, 0, (Fraction(1, e),), p)
    assert rep.nu1 >= n
    if rep.l >= 1:
        assert _tail_min(rep.l - 1, e, p) < n
    if rep.l >= 1:
        assert rep.nu2 <= n  # the i = 0 term caps nu2 at N


@settings(max_examples=120, deadline=None)
@given(e=st.integers(1, 8), n=st.integers(1, 16),
       p=st.sampled_from([3, 5, 7]), l=st.integers(0, 60))
def test_tail_min_matches_brute_force(e, n, p, l):
    span = p * e * (n + 12)
    brute = min(Fraction(i + 1, e) - floor_log(i + 1, p)
                for i in range(l, l + span))
    assert _tail_min(l, e, p) == brute


@settings(max_examples=100, deadline=None)
@given(e=st.integers(1, 8), n=st.integers(2, 20),
       p=st.sampled_from([3, 5, 7]), k=st.integers(0, 6))
def test_tiny_monotone_in_n(e, n, p, k):
    t_vals = (Fraction(1, e), Fraction(2, e))
    lo = tiny_bounds(e, n - 1, k, t_vals, p)
    hi = tiny_bounds(e, n, k, t_vals, p)
    assert hi.precision >= lo.precision
    assert hi.l >= lo.l


# -- convergence at evaluation points ----------------------------------------

def test_good_point_converges(c35):
    rep = convergence_test(c35, point_from_xy(c35, 1, -2))
    assert rep.converges and rep.kind == "good"
    assert rep.epsilon == 0


def test_bad_disk_point_must_move(bps):
    # r(-3) = -600 has ord_3 = 1 >= 1/3; the disk center (0,1) has e_P = 1
    rep = convergence_test(bps, point_from_xy(bps, -3, 4))
    assert not rep.converges
    assert rep.required_e == 4


def test_centers_must_move(bps):
    rep = convergence_test(bps, point_from_xy(bps, 0, 1))
    assert not rep.converges and rep.required_e == 4
    rep = convergence_test(bps, point_from_xy(bps, 0, 0))
    assert not rep.converges and rep.required_e == 7  # e_P = 2
    rep = convergence_test(bps, point_at_infinity(bps, [1, 0, 1]))
    assert not rep.converges and rep.required_e == 4


def _horner_at(ints, t):
    acc = PadicScalar.zero(t.p)
    for c in reversed(ints):
        acc = acc * t + c
    return acc


def test_moved_point_converges(bps):
    # replace (-3,4) by a point of its disk over Q_3(3^(1/4)): evaluate the
    # center's parametrization at t = 3^(1/4), where ord r(x) = 1/4 < 1/3
    # the series is cut at t^48, so at ord t = 1/4 the truncation error
    # sits below the working precision and the relations stay checkable
    center = find_very_bad_point(bps, point_from_xy(bps, -3, 4))
    exp = expand_at_point(bps, center, 48)
    t = PadicScalar.pi_power(3, 4, 1, exp.M)
    x = _horner_at(exp.x_ints, t)
    b = [_horner_at(row, t) for row in exp.b_ints]
    moved = CurvePoint(x, b)
    validate_point(bps, moved)
    rep = convergence_test(bps, moved)
    assert rep.converges
    assert rep.epsilon == Fraction(1, 4)


def test_infinite_noncenter_converges(bps):
    center = point_at_infinity(bps, [1, 0, 1])
    exp = expand_at_point(bps, center, 12)
    t = PadicScalar.from_int(3, 3, 12)
    s = _horner_at(exp.x_ints, t)
    b = [_horner_at(row, t) for row in exp.b_ints]
    moved = CurvePoint(s, b, is_infinite=True)
    validate_point(bps, moved)
    rep = convergence_test(bps, moved)
    assert rep.converges and rep.kind == "infinite"
    assert rep.epsilon == 1


# -- evaluation precision ------------------------------------------------------

def test_eval_good_keeps_n():
    rep = eval_precision("good", 0, 9, 1, (0, 0), 3)
    assert rep.precision == 9


def test_eval_infinite_packaged_example(bps):
    # ord_0(W) = -3 and ord_inf(W^-1) = -4 give loss 6 per unit of epsilon
    assert (bps.ord0_V, bps.ordinf_Vinv) == (-3, -4)
    rep = eval_precision("infinite", 1, 9, bps.e0_bound,
                         (bps.ord0_V, bps.ordinf_Vinv), 3)
    assert rep.precision == 3
    rep = eval_precision("infinite", Fraction(1, 2), 9, bps.e0_bound,
                         (bps.ord0_V, bps.ordinf_Vinv), 3)
    assert rep.precision == 6


def test_eval_finite_bad_scan():
    rep = eval_precision("finite-bad", Fraction(1, 4), 9, 1, (0, 0), 3)
    brute = min(max(9, k // 3 + 1 - floor_log(k, 3)) - k * Fraction(1, 4)
                for k in range(1, 20000))
    assert rep.precision == brute == Fraction(1, 4)
    assert rep.k_argmin == 35


def test_eval_finite_bad_requires_convergence():
    with pytest.raises(PrecisionError):
        eval_precision("finite-bad", Fraction(1, 3), 9, 1, (0, 0), 3)


@settings(max_examples=100, deadline=None)
@given(n=st.integers(2, 14), p=st.sampled_from([3, 5, 7]),
       e0=st.integers(1, 5), num=st.integers(0, 30))
def test_eval_finite_bad_matches_brute_force(n, p, e0, num):
    eps = Fraction(num, 31 * p)  # anything below 1/p
    rep = eval_precision("finite-bad", eps, n, e0, (0, 0), p)
    span = 31 * p * (n + 10)
    brute = min(max(n, k // p + 1 - floor_log(k * e0, p)) - k * eps
                for k in range(1, span))
    assert rep.precision == brute
    hi = eval_precision("finite-bad", eps, n + 1, e0, (0, 0), p)
    assert hi.precision >= rep.precision


# -- linear solve loss ---------------------------------------------------------

def _scalars(rows, p=3, prec=9):
    return [[PadicScalar.from_rational(a, p, prec) for a in row]
            for row in rows]


def test_solve_det_valuations():
    for phi, ord_det in [([[2, 0], [0, 2]], 0),
                         ([[4, 0], [0, 2]], 1),
                         ([[10, 0], [0, 2]], 2)]:
        rep = solve_precision(_scalars(phi), 9)
        assert rep.ord_det == ord_det
        assert rep.precision == 9 - ord_det
        assert rep.delta == 0


def test_solve_rejects_singular():
    with pytest.raises(PrecisionError):
        solve_precision(_scalars([[4, 3], [9, 10]]), 8)


def test_solve_nonintegral_needs_override():
    phi = _scalars([[Fraction(1, 3), 3], [9, 2]])
    with pytest.raises(PrecisionError):
        solve_precision(phi, 8)
    rep = solve_precision(phi, 8, delta=1)
    assert rep.ord_det == -1
    assert rep.precision == 8  # 8 - (-1) - 1


def _exact_det(rows):
    n = len(rows)
    if n == 1:
        return Fraction(rows[0][0])
    total = Fraction(0)
    for j in range(n):
        minor = [row[:j] + row[j + 1:] for row in rows[1:]]
        total += (-1) ** j * rows[0][j] * _exact_det(minor)
    return total


@settings(max_examples=120, deadline=None)
@given(st.lists(st.lists(st.integers(-20, 20), min_size=3, max_size=3),
                min_size=3, max_size=3))
def test_padic_det_matches_exact(rows):
    det = _exact_det(rows)
    computed = padic_det(_scalars(rows, p=5, prec=12))
    expected = PadicScalar.from_rational(det, 5, 12)
    assert computed.compare(expected) == "eq"
