"""Curve construction, disk classification, and local expansions on the
shipped example curves plus a small elliptic model."""

from fractions import Fraction

import pytest

from coleman.curve import (
    CurveError,
    build_curve,
    choose_local_coordinate,
    classify_point,
    discriminant_y,
    evaluate_function,
    expand_at_point,
    find_very_bad_point,
    matrix_valuations,
    point_at_infinity,
    point_from_xy,
    squarefree_radical,
    validate_good_reduction,
    validate_point,
)
from coleman.io_formats import load_curve
from coleman.rationals import QX, gp_mul


def elliptic(p=7, N=6):
    # y^2 = x^3 + x + 1, disc -31, so good reduction away from 2 and 31
    return build_curve(
        [(-1, -1, 0, -1), (), (1,)],
        [[QX(1), QX(0)], [QX(0), QX(1)]],
        [[QX(1), QX(0)], [QX(0), QX(1, (0, 0, 1))]],
        p, N, genus=1, name=f"e-{p}-{N}")


@pytest.fixture(scope="module")
def bps():
    return load_curve("bps")


@pytest.fixture(scope="module")
def c35():
    return load_curve("c35")


@pytest.fixture(scope="module")
def x044():
    return load_curve("x044")


# -- radical and genus -------------------------------------------------------


def test_bps_radical_pins_branch_locus(bps):
    octic = (4, -23, -69, -51, 3, 31, 21, 7, 1)
    expected = gp_mul(gp_mul((0, 1), (1, 1)), octic)  # x (x+1) octic
    assert tuple(bps.r_ints) == tuple(int(c) for c in expected)
    assert len(discriminant_y(bps.q_rows)) - 1 == 10  # disc already squarefree
    assert bps.genus == 3


def test_c35_radical_is_primitive_positive(c35):
    # disc = -27 f^2 for y^3 - f; the radical is normalized to f itself
    assert tuple(c35.r_ints) == (0, -3, -2, -2, -2, 1)
    assert c35.genus == 4


def test_x044_radical_matches_published_factorization(x044):
    tail = (3125, 0, 69756, 0, 1340814, 0, 8440476, 0, 45753125)
    expected = gp_mul(gp_mul((0, 1), (1, 0, 6, 0, 1)), tail)
    assert tuple(x044.r_ints) == tuple(int(c) for c in expected)
    assert x044.genus == 4


def test_radical_sign_normalization():
    # -(x^2)' trap: radical of -x^2 - x^3 is primitive with positive lead
    assert squarefree_radical((0, 0, -1, -1)) == (0, 1, 1)


def test_declared_genus_mismatch_rejected():
    with pytest.raises(CurveError):
        load_curve({"schema": "curve/1", "name": "", "p": 3, "prec": 5,
                    "genus": 2,
                    "q": [[0, 1, 2, 1], [0, 0, 0, -1], [-1, 0, -1], [1]],
                    "w0": [[[1], [], []], [[], [1], []], [[], [], [1]]],
                    "winf": [[[1], [], []],
                             [[], {"num": [1], "den": [0, 0, 1]}, []],
                             [[], {"num": [-1], "den": [0, 1]},
                              {"num": [1], "den": [0, 0, 0, 1]}]]})


# -- construction guards -----------------------------------------------------


def test_rejects_even_prime():
    with pytest.raises(CurveError):
        elliptic(p=2)


def test_rejects_nonmonic_model():
    with pytest.raises(CurveError):
        build_curve([(1, 1), (2,)], [[QX(1)]], [[QX(1)]], 5, 4)


def test_rejects_reducible_model():
    # (y - x)(y + x) = y^2 - x^2
    with pytest.raises(CurveError):
        build_curve([(0, 0, -1), (), (1,)],
                    [[QX(1), QX(0)], [QX(0), QX(1)]],
                    [[QX(1), QX(0)], [QX(0), QX(1)]], 5, 4)


def test_rejects_non_laurent_basis_transition(x044):
    # flipping one sign in W0 row 5 moves the lattice off the整 closure;
    # V = Winf W0^(-1) then picks up a q-denominator and must be refused
    q = (1, 0, 6, 0, 1)
    w0 = [list(row) for row in x044.W0]
    w0[4] = list(w0[4])
    w0[4][1] = QX((0, 13, 0, -6), q)
    with pytest.raises(CurveError):
        build_curve(x044.q_rows, w0, x044.Winf, 7, 9, name="x044-flip")


def test_validation_report_all_pass(bps, c35, x044):
    for curve in (bps, c35, x044):
        assert all(ok for _, ok, _ in validate_good_reduction(curve))


def test_validation_catches_branch_collision():
    # disc(x^3+x+1) = -31: at p=31 the reduced radical acquires a double root
    curve = elliptic(p=31, N=4)
    report = {cond: ok for cond, ok, _ in validate_good_reduction(curve)}
    assert not report["r mod p is squarefree of full degree"]


# -- derived matrices --------------------------------------------------------


def test_matrix_valuations_identity(bps):
    assert matrix_valuations(bps.W0) == (0, 0)


def test_bps_matrix_valuations(bps):
    assert matrix_valuations(bps.Winf) == (-3, 0)
    assert matrix_valuations(bps.Winfinv) == (0, -4)
    assert bps.ord0_V == -3 and bps.ordinf_Vinv == -4


def test_x044_matrix_valuations(x044):
    assert matrix_valuations(x044.Winf) == (-4, 0)
    assert x044.ord0_V == -3 and x044.ordinf_Vinv == -3


def test_finite_derivation_matrix_is_polynomial(bps):
    # d(b0)/dx = (M0/r) b0 with M0 over Q[x]: spot-check row shapes
    assert len(bps.M0) == bps.d
    for row in bps.M0:
        for entry in row:
            assert isinstance(entry, tuple)


def test_infinite_top_coefficient_square(c35):
    assert len(c35.A_top) == c35.d
    assert all(len(row) == c35.d for row in c35.A_top)


# -- places over the branch locus -------------------------------------------


def test_bps_infinite_places(bps):
    places = bps.rational_infinite_places()
    betas = sorted(tuple(b.beta) for b in places)
    assert [p.e_P for p in places] == [1, 1, 1]
    assert betas == [(1, 0, 0), (1, 0, 1), (1, 1, 1)]


def test_c35_single_infinite_place(c35):
    (place,) = c35.infinite_places
    assert (place.e_P, place.f_P) == (3, 1)
    assert tuple(place.beta) == (1, 0, 0)


def test_x044_single_infinite_place(x044):
    (place,) = x044.infinite_places
    assert (place.e_P, place.f_P) == (5, 1)
    assert tuple(place.beta) == (1, 0, 0, 0, 0)


def test_bps_fiber_over_zero(bps):
    fiber = bps.fiber_at_rational(0)
    shape = sorted((pl.e_P, pl.f_P) for pl in fiber.decompose())
    assert shape == [(1, 1), (2, 1)]  # (0,1) unramified, (0,0) doubled


# -- points and classification ----------------------------------------------


BPS_TABLE = [
    ((0, 0), "finite-bad", True, 2),
    ((0, 1), "finite-bad", True, 1),
    ((-3, 4), "finite-bad", False, 1),
    ((-1, 0), "finite-bad", True, 1),
    ((-1, 1), "finite-bad", True, 2),
]


def test_bps_point_table(bps):
    for (x, y), kind, very, e_P in BPS_TABLE:
        pt = point_from_xy(bps, x, y)
        validate_point(bps, pt)
        cls = classify_point(bps, pt)
        assert (cls.kind, cls.very_bad, cls.e_P) == (kind, very, e_P), (x, y)


def test_bps_infinite_points(bps):
    for beta in ((1, 0, 1), (1, 1, 1), (1, 0, 0)):
        pt = point_at_infinity(bps, beta)
        validate_point(bps, pt)
        cls = classify_point(bps, pt)
        assert (cls.kind, cls.very_bad, cls.e_P) == ("infinite", True, 1)


def test_c35_point_table(c35):
    good = point_from_xy(c35, 1, -2)
    assert classify_point(c35, good).kind == "good"
    for x0 in (0, -1, 3):
        pt = point_from_xy(c35, x0, 0)
        cls = classify_point(c35, pt)
        assert (cls.kind, cls.very_bad, cls.e_P) == ("finite-bad", True, 3)
    inf = point_at_infinity(c35, (1, 0, 0))
    cls = classify_point(c35, inf)
    assert (cls.kind, cls.very_bad, cls.e_P) == ("infinite", True, 3)


def test_x044_good_and_singular_points(x044):
    p1 = point_from_xy(x044, 1, 1)
    validate_point(x044, p1)
    assert classify_point(x044, p1).kind == "good"
    # b0_4(1,1) = (-10 - 19 + 13 - 1 + 1)/8 = -2
    assert p1.b_values[4].lift_int() % 7 ** 9 == 7 ** 9 - 2

    p2 = point_from_xy(x044, 0, 0)
    validate_point(x044, p2)
    cls = classify_point(x044, p2)
    assert (cls.kind, cls.very_bad, cls.e_P) == ("finite-bad", True, 5)
    assert [b.lift_int() for b in p2.b_values] == [1, 0, 0, 0, 0]


def test_nonintegral_x_needs_infinite_chart(bps):
    with pytest.raises(CurveError):
        point_from_xy(bps, Fraction(1, 3), 0)


def test_infinite_chart_needs_infinite_disk(bps):
    with pytest.raises(CurveError):
        pt = point_at_infinity(bps, (1, 0, 1), s_value=1)
        classify_point(bps, pt)


def test_very_bad_center_of_shared_disk(bps):
    # (-3, 4) reduces like (0, 1); its disk center is that very bad point
    pt = point_from_xy(bps, -3, 4)
    center = find_very_bad_point(bps, pt)
    assert center.x_value.is_zero()
    assert [b.lift_int() % 3 for b in center.b_values] == [1, 1, 1]


def test_very_bad_center_rejects_good_disk(c35):
    with pytest.raises(CurveError):
        find_very_bad_point(c35, point_from_xy(c35, 1, -2))


# -- local coordinates and expansions ----------------------------------------


def test_coordinate_choices(bps, x044):
    # (-3,4) is bad but not very bad: its disk's coordinate lives at the center
    with pytest.raises(CurveError):
        choose_local_coordinate(bps, point_from_xy(bps, -3, 4))
    center = find_very_bad_point(bps, point_from_xy(bps, -3, 4))
    assert choose_local_coordinate(bps, center).kind == "x"
    ram = choose_local_coordinate(bps, point_from_xy(bps, 0, 0))
    assert (ram.kind, ram.index) == ("b", 1)
    sing = choose_local_coordinate(x044, point_from_xy(x044, 0, 0))
    assert (sing.kind, sing.index) == ("b", 3)  # y^3/x uniformizes


def test_good_point_coordinate_is_x(x044):
    choice = choose_local_coordinate(x044, point_from_xy(x044, 1, 1))
    assert choice.kind == "x"


def test_bps_ramified_expansion(bps):
    # at (0,0), t = y: x = t^2 - t^3 + O(t^4), checked by hand from Q
    exp = expand_at_point(bps, point_from_xy(bps, 0, 0), 4)
    assert exp.e_P == 2
    m = 3 ** exp.M
    assert exp.x_ints[:4] == [0, 0, 1, m - 1]


def test_c35_singular_expansion(c35):
    # t = y at (0,0): x = -t^3/3 + O(t^6), only powers of t^3 appear
    exp = expand_at_point(c35, point_from_xy(c35, 0, 0), 6)
    assert exp.e_P == 3
    m = 7 ** exp.M
    assert exp.x_ints[3] == (m - 1) // 3  # -1/3 mod 7^M
    assert exp.x_ints[:3] == [0, 0, 0] and exp.x_ints[4:6] == [0, 0]


def test_c35_infinite_expansion(c35):
    # t = y/x^2: 1/x = t^3 + 2 t^6 + O(t^7)
    exp = expand_at_point(c35, point_at_infinity(c35, (1, 0, 0)), 7)
    assert exp.e_P == 3
    assert exp.x_ints[:7] == [0, 0, 0, 1, 0, 0, 2]


def test_x044_singular_expansion_valuation(x044):
    exp = expand_at_point(x044, point_from_xy(x044, 0, 0), 7)
    assert exp.e_P == 5
    assert exp.x_ints[:6] == [0, 0, 0, 0, 0, 1]


def test_elliptic_taylor_coefficients():
    # y = sqrt(1 + t + t^3) at (0,1): 1 + t/2 - t^2/8 + 9t^3/16 - 37t^4/128
    curve = elliptic()
    exp = expand_at_point(curve, point_from_xy(curve, 0, 1), 5)
    m = 7 ** exp.M
    want = [Fraction(1), Fraction(1, 2), Fraction(-1, 8),
            Fraction(9, 16), Fraction(-37, 128)]
    got = exp.b_ints[1][:5]
    for g, w in zip(got, want):
        assert (g - w.numerator * pow(w.denominator, -1, m)) % m == 0


def test_expansion_parametrizes_the_disk(bps):
    # plugging small t back in lands on points of the same disk
    for xy in ((0, 0), (-3, 4)):
        base = point_from_xy(bps, *xy)
        exp = expand_at_point(bps, base, 6)
        pts = _points_on(bps, exp, ts=(3, 6, 12))
        for pt in pts:
            validate_point(bps, pt)
            assert pt.reduction_key() == find_very_bad_point(bps, base).reduction_key()


def test_infinite_expansion_parametrizes_the_disk(c35):
    base = point_at_infinity(c35, (1, 0, 0))
    exp = expand_at_point(c35, base, 6)
    for pt in _points_on(c35, exp, ts=(7, 14)):
        validate_point(c35, pt)
        assert pt.is_infinite


def _points_on(curve, exp, ts):
    from coleman.curve import CurvePoint
    from coleman.padics import PadicScalar

    p = curve.p
    prec = min(exp.M, exp.l)
    out = []
    for t0 in ts:
        def ev(ints):
            acc = 0
            for c in reversed(ints):
                acc = acc * t0 + c
            return PadicScalar.from_int(acc, p, prec)
        out.append(CurvePoint(ev(exp.x_ints), [ev(b) for b in exp.b_ints],
                              is_infinite=exp.center.is_infinite))
    return out


def test_expansion_needs_room_past_ramification(x044):
    with pytest.raises(CurveError):
        expand_at_point(x044, point_from_xy(x044, 0, 0), 5)


# -- function evaluation -----------------------------------------------------


def test_evaluate_y_squared_at_good_point(x044):
    pt = point_from_xy(x044, 1, 1)
    val = evaluate_function(x044, [QX(0), QX(0), QX(1), QX(0), QX(0)], pt)
    assert val.lift_int() == 1


def test_evaluate_reports_poles(bps):
    pt = point_from_xy(bps, 0, 0)
    with pytest.raises(CurveError):
        evaluate_function(bps, [QX(1, (0, 1)), QX(0), QX(0)], pt)  # 1/x at x=0
