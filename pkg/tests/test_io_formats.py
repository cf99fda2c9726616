"""Curve/point file parsing, rendering, and round trips."""

import json

import pytest

from coleman.curve import CurveError
from coleman.io_formats import (
    curve_to_json,
    load_curve,
    load_curve_file,
    load_points,
    packaged_curves,
    point_to_json,
    result_record,
)
from coleman.padics import PadicScalar


def test_packaged_names():
    assert packaged_curves() == ["bps", "c35", "x044"]


def test_packaged_curves_build():
    for name in packaged_curves():
        cf = load_curve_file(name)
        assert cf.curve.name == name
        if cf.basis_forms is not None:
            assert len(cf.basis_forms) == cf.curve.genus


def test_curve_round_trip():
    cf = load_curve_file("bps")
    again = load_curve_file(curve_to_json(cf.curve, cf.basis_forms))
    assert again.curve is cf.curve  # same build-cache entry
    assert again.basis_forms == cf.basis_forms


def test_string_encoded_integers_accepted():
    cf = load_curve_file("c35")
    raw = json.loads(json.dumps(curve_to_json(cf.curve)))
    raw["q"] = [[str(c) for c in row] for row in raw["q"]]
    raw["p"] = "7"
    assert load_curve(raw) is cf.curve


def test_prec_override():
    curve = load_curve("bps", prec=5)
    assert curve.N == 5 and curve.p == 3


def test_unknown_schema_rejected():
    with pytest.raises(CurveError):
        load_curve({"schema": "curve/0", "p": 3, "prec": 5,
                    "q": [], "w0": [], "winf": []})


def test_missing_curve_name():
    with pytest.raises(CurveError):
        load_curve("no-such-curve")


def test_point_records_round_trip():
    curve = load_curve("bps")
    pts = load_points([
        {"x": "-3", "y": "4"},
        {"x": 0, "y": 0},
        {"b": ["1", "1", "1"], "inf": True},
    ], curve)
    encoded = [point_to_json(pt) for pt in pts]
    again = load_points(encoded, curve)
    for a, b in zip(pts, again):
        assert a.is_infinite == b.is_infinite
        assert a.x_value.compare(b.x_value) == "eq"
        for u, v in zip(a.b_values, b.b_values):
            assert u.compare(v) == "eq"


def test_digit_string_points():
    curve = load_curve("bps")
    digits = lambda q: PadicScalar.from_rational(q, 3, 9).render()
    (pt,) = load_points([{
        "x": digits(-3),
        "b": [digits(1), digits(4), digits(16)],
    }], curve)
    assert pt.x_value.lift_int() == 3 ** 9 - 3


def test_bad_point_rejected():
    curve = load_curve("bps")
    with pytest.raises(CurveError):
        load_points([{"x": "0", "y": "2"}], curve)  # (0,2) not on the curve
    with pytest.raises(CurveError):
        load_points([{"x": "0"}], curve)
    with pytest.raises(CurveError):
        load_points([], curve)


def test_result_record_shape():
    v = PadicScalar.from_rational(12, 5, 4)
    rec = result_record(v, loss_breakdown={"solve": 1}, inputs={"a": 1})
    assert rec["value"] == "2 + 2*5 + O(5^4)"
    assert rec["precision"] == "4"
    assert rec["loss_breakdown"] == {"solve": "1"}
    assert len(rec["inputs_hash"]) == 16
