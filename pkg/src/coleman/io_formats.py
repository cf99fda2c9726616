"""Curve files, point files, and result records.

Curve files are JSON with schema tag "curve/1": the plane model as integer
coefficient rows, the two basis matrices as {num, den} coefficient lists, and
optionally the basis 1-forms.  Integers may be JSON numbers or decimal
strings; everything emitted that can exceed 2^53 goes out as a string so the
files survive readers with fixed-width numbers.
"""

import hashlib
import json
from fractions import Fraction
from importlib import resources

from .curve import (
    CurveData, CurveError, CurvePoint, build_curve, point_at_infinity,
    point_from_xy, validate_point,
)
from .padics import PadicScalar, parse_padic, render_padic

SCHEMA = "curve/1"

_BIG = 1 << 53


def _read_int(v, what="integer"):
    if isinstance(v, bool):
        raise CurveError(f"{what} may not be a boolean")
    if isinstance(v, int):
        return v
    if isinstance(v, str):
        try:
            return int(v, 10)
        except ValueError:
            raise CurveError(f"cannot read {what} from {v!r}") from None
    raise CurveError(f"cannot read {what} from {v!r}")


def _enc_int(n):
    n = int(n)
    return n if -_BIG < n < _BIG else str(n)


def _read_poly(v, what="polynomial"):
    if v is None:
        return ()
    if not isinstance(v, (list, tuple)):
        raise CurveError(f"{what} must be a coefficient list")
    return tuple(_read_int(c, what) for c in v)


def _read_entry(v):
    """Matrix entry: coefficient list, or {num, den} coefficient lists."""
    if isinstance(v, dict):
        extra = set(v) - {"num", "den"}
        if extra:
            raise CurveError(f"unknown matrix entry fields {sorted(extra)}")
        return {"num": _read_poly(v.get("num", [1])),
                "den": _read_poly(v.get("den", [1]))}
    return _read_poly(v, "matrix entry")


def _read_matrix(rows, what):
    if not isinstance(rows, list) or not rows:
        raise CurveError(f"{what} must be a non-empty matrix")
    return [[_read_entry(e) for e in row] for row in rows]


class CurveFile:
    """Parsed curve file: the built curve plus the optional frozen forms."""

    __slots__ = ("curve", "basis_forms", "raw")

    def __init__(self, curve, basis_forms, raw):
        self.curve = curve
        self.basis_forms = basis_forms
        self.raw = raw


def packaged_curves():
    """Names of the curve files shipped inside the package."""
    root = resources.files(__package__) / "curves"
    return sorted(t.name[:-5] for t in root.iterdir() if t.name.endswith(".json"))


def _resolve_source(source):
    if isinstance(source, dict):
        return source
    text = None
    name = str(source)
    try:
        with open(name, "r", encoding="utf-8") as fh:
            text = fh.read()
    except OSError:
        stem = name[:-5] if name.endswith(".json") else name
        candidate = resources.files(__package__) / "curves" / (stem + ".json")
        if candidate.is_file():
            text = candidate.read_text(encoding="utf-8")
    if text is None:
        raise CurveError(f"no curve file or packaged curve named {name!r}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise CurveError(f"curve file is not valid JSON: {exc}") from None


def load_curve_file(source, prec=None):
    """Read a curve file (path, packaged name, or parsed dict)."""
    raw = _resolve_source(source)
    if raw.get("schema") != SCHEMA:
        raise CurveError(f"unsupported curve schema {raw.get('schema')!r}")
    required = {"p", "prec", "q", "w0", "winf"}
    missing = required - set(raw)
    if missing:
        raise CurveError(f"curve file is missing fields {sorted(missing)}")
    p = _read_int(raw["p"], "p")
    n_val = _read_int(prec if prec is not None else raw["prec"], "precision")
    q_rows = [_read_poly(row, "Q row") for row in raw["q"]]
    w0 = _read_matrix(raw["w0"], "w0")
    winf = _read_matrix(raw["winf"], "winf")
    genus = raw.get("genus")
    if genus is not None:
        genus = _read_int(genus, "genus")
    curve = build_curve(q_rows, w0, winf, p, n_val,
                        genus=genus, name=raw.get("name", ""))
    forms = raw.get("basis_forms")
    if forms is not None:
        forms = [[_read_poly(c, "form coefficient") for c in form]
                 for form in forms]
        for form in forms:
            if len(form) != curve.d:
                raise CurveError(
                    "each basis form needs one coefficient list per basis function")
    return CurveFile(curve, forms, raw)


def load_curve(source, prec=None):
    return load_curve_file(source, prec).curve


def curve_to_json(curve, basis_forms=None):
    def entry(e):
        num, den = e.num, e.den
        if len(den) == 1 and den[0] == 1:
            return [_enc_int(c) for c in num]
        return {"num": [_enc_int(c) for c in num],
                "den": [_enc_int(c) for c in den]}

    out = {
        "schema": SCHEMA,
        "name": curve.name,
        "p": curve.p,
        "prec": curve.N,
        "genus": curve.genus,
        "q": [[_enc_int(c) for c in row] for row in curve.q_rows],
        "w0": [[entry(e) for e in row] for row in curve.W0],
        "winf": [[entry(e) for e in row] for row in curve.Winf],
    }
    if basis_forms is not None:
        out["basis_forms"] = [[[_enc_int(c) for c in poly] for poly in form]
                              for form in basis_forms]
    return out


# ---------------------------------------------------------------------------
# points


def _parse_value(v, p, prec):
    """Rational or digit-string entry of a point file."""
    if isinstance(v, bool):
        raise CurveError("point coordinates may not be booleans")
    if isinstance(v, int):
        return v
    if isinstance(v, (PadicScalar, Fraction)):
        return v
    if isinstance(v, str):
        s = v.strip()
        if "O(" in s or "*" in s or "^" in s:
            return parse_padic(s, p)
        try:
            return Fraction(s)
        except ValueError:
            raise CurveError(f"cannot read coordinate {v!r}") from None
    raise CurveError(f"cannot read coordinate {v!r}")


def point_from_record(curve, rec, prec=None):
    """Build and check a point from one {x, b|y, inf} record."""
    if not isinstance(rec, dict):
        raise CurveError("each point must be an object")
    extra = set(rec) - {"x", "b", "y", "inf"}
    if extra:
        raise CurveError(f"unknown point fields {sorted(extra)}")
    p = curve.p
    n_val = curve.N if prec is None else prec

    def scal(v):
        if isinstance(v, PadicScalar):
            return v
        return PadicScalar.from_rational(Fraction(v), p, n_val)

    inf = bool(rec.get("inf", False))
    if inf:
        if "b" not in rec:
            raise CurveError("an infinite point needs its b-values")
        b = [_parse_value(v, p, prec) for v in rec["b"]]
        s_value = _parse_value(rec.get("x", 0), p, prec)
        point = point_at_infinity(curve, b, prec=n_val, s_value=scal(s_value))
    elif "b" in rec:
        x = scal(_parse_value(rec.get("x", 0), p, prec))
        b = [scal(_parse_value(v, p, prec)) for v in rec["b"]]
        point = CurvePoint(x, b)
    elif "y" in rec:
        x = _parse_value(rec.get("x", 0), p, prec)
        y = _parse_value(rec["y"], p, prec)
        if isinstance(x, PadicScalar) or isinstance(y, PadicScalar):
            raise CurveError("plane coordinates must be exact rationals; "
                             "give b-values for p-adic points")
        point = point_from_xy(curve, x, y, prec=n_val)
    else:
        raise CurveError("a finite point needs either b-values or a y-value")
    validate_point(curve, point)
    return point


def load_points(source, curve, prec=None):
    """Point file: {"points": [...]} or a bare list of records."""
    if isinstance(source, (list, dict)):
        raw = source
    else:
        try:
            with open(str(source), "r", encoding="utf-8") as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise CurveError(f"cannot open point file: {exc}") from None
        except json.JSONDecodeError as exc:
            raise CurveError(f"point file is not valid JSON: {exc}") from None
    records = raw.get("points") if isinstance(raw, dict) else raw
    if not isinstance(records, list) or not records:
        raise CurveError("point file holds no points")
    return [point_from_record(curve, rec, prec=prec) for rec in records]


def point_to_json(point):
    return {
        "x": render_padic(point.x_value),
        "b": [render_padic(b) for b in point.b_values],
        "inf": point.is_infinite,
    }


# ---------------------------------------------------------------------------
# results


def inputs_hash(*parts):
    blob = json.dumps(parts, sort_keys=True, separators=(",", ":"),
                      default=str).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def _enc_frac(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def result_record(value, loss_breakdown=None, inputs=None):
    """One computed p-adic value with its provenance."""
    rec = {
        "value": render_padic(value),
        "precision": _enc_frac(value.precision) if value.precision != float("inf")
        else "exact",
    }
    if loss_breakdown:
        rec["loss_breakdown"] = {k: _enc_frac(v) for k, v in loss_breakdown.items()}
    if inputs is not None:
        rec["inputs_hash"] = inputs_hash(inputs)
    return rec
