"""p-adic scalars, series and matrices with explicit precision contracts.

A scalar lives in Q_p(pi) with pi^e = p (so e = 1 is plain Q_p) and is stored
as pi^v * (a_0 + a_1 pi + ... + a_{e-1} pi^{e-1}) with integer digits and a_0
a p-unit.  Valuations and absolute precisions are kept internally as integers
in units of 1/e; the public API exposes them as Fractions.

Precision rules (each operation reports the tightest bound that is provable
from the inputs alone):
  add/sub:   N = min(N_a, N_b)
  mul:       N = min(N_a + v_b, N_b + v_a)
  inverse:   N = N_a - 2 v_a
  division:  via b^{-1}
A value whose valuation reaches its precision is indistinguishable from zero
("noise"); comparisons are three-valued around that floor.
"""

from __future__ import annotations

import math
import re
from fractions import Fraction

_INF = math.inf


def _ord_int(n, p):
    if n == 0:
        return _INF
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def ord_p_rational(q, p):
    """p-adic valuation of a rational number (inf for 0)."""
    q = Fraction(q)
    if q == 0:
        return _INF
    return _ord_int(q.numerator, p) - _ord_int(q.denominator, p)


class PadicScalar:
    """Immutable element of Q_p(p^(1/e)) known to finite absolute precision."""

    __slots__ = ("p", "e", "v", "n", "digits")

    def __init__(self, p, e, v, n, digits):
        # internal constructor; v, n in 1/e units, digits canonical
        self.p = p
        self.e = e
        self.v = v
        self.n = n
        self.digits = digits

    # -- constructors -------------------------------------------------------

    @classmethod
    def _make(cls, p, e, v, n, digits):
        """Canonicalize raw integer digits at valuation v, precision n (1/e units)."""
        if n is not _INF and not isinstance(n, int):
            raise TypeError("precision must be an integer in 1/e units or inf")
        digits = list(digits)
        while True:
            if v is None or (n is not _INF and v >= n):
                return cls(p, e, None, n, ())
            changed = False
            # reduce each digit to its visible p-range
            vis = []
            for s in range(e):
                if n is _INF:
                    m = None
                else:
                    m = -((-(n - v - s)) // e)  # ceil((n-v-s)/e)
                a = digits[s] if s < len(digits) else 0
                if m is not None:
                    if m <= 0:
                        a = 0
                    else:
                        a %= p ** m
                vis.append(a)
            if not any(vis):
                return cls(p, e, None, n, ())
            if vis[0] % p == 0:
                # unit part divisible by pi: shift one pi out
                digits = vis[1:] + [vis[0] // p]
                v += 1
                continue
            return cls(p, e, v, n, tuple(vis))

    @classmethod
    def zero(cls, p, prec=_INF, e=1):
        return cls(p, e, None, _to_units(prec, e), ())

    @classmethod
    def from_rational(cls, q, p, prec, e=1):
        q = Fraction(q)
        nu = _to_units(prec, e)
        if q == 0:
            return cls.zero(p, prec, e)
        vp = ord_p_rational(q, p)
        unit = q / Fraction(p) ** vp
        v = vp * e
        if nu is _INF:
            raise ValueError("nonzero scalars need a finite precision")
        m = max(1, -((-(nu - v)) // e))
        num = unit.numerator % p ** m
        den = unit.denominator % p ** m
        a0 = num * pow(den, -1, p ** m) % p ** m
        return cls._make(p, e, v, nu, [a0] + [0] * (e - 1))

    @classmethod
    def from_int(cls, a, p, prec, e=1):
        return cls.from_rational(Fraction(a), p, prec, e)

    @classmethod
    def pi_power(cls, p, e, k, prec):
        """pi^k with pi = p^(1/e), to absolute precision prec (p-adic units)."""
        return cls._make(p, e, k, _to_units(prec, e), [1] + [0] * (e - 1))

    # -- inspection ----------------------------------------------------------

    @property
    def valuation(self):
        """Valuation as a Fraction (None when indistinguishable from zero)."""
        if self.v is None:
            return None
        return Fraction(self.v, self.e)

    @property
    def precision(self):
        """Absolute precision as a Fraction (inf for the exact zero)."""
        if self.n is _INF:
            return _INF
        return Fraction(self.n, self.e)

    def is_zero(self):
        """True when the value is indistinguishable from 0 at its precision."""
        return self.v is None

    def is_integral(self):
        return self.v is None or self.v >= 0

    # -- precision management -----------------------------------------------

    def with_precision(self, prec):
        """Truncate (never extend) to absolute precision prec."""
        nu = _to_units(prec, self.e)
        if nu is not _INF and (self.n is _INF or nu < self.n):
            return PadicScalar._make(self.p, self.e, self.v, nu,
                                     self.digits if self.v is not None else ())
        return self

    def embed(self, e_new):
        """Reinterpret in the field with pi_new = p^(1/e_new); e | e_new."""
        if e_new == self.e:
            return self
        if e_new % self.e:
            raise ValueError("target ramification must be a multiple")
        m = e_new // self.e
        n = self.n if self.n is _INF else self.n * m
        if self.v is None:
            return PadicScalar(self.p, e_new, None, n, ())
        digits = [0] * e_new
        for s, a in enumerate(self.digits):
            digits[s * m] = a
        return PadicScalar._make(self.p, e_new, self.v * m, n, digits)

    def to_unramified(self):
        """Drop to e = 1; every fractional-exponent digit must be noise."""
        if self.e == 1:
            return self
        n1 = self.n if self.n is _INF else self.n // self.e
        if self.v is None:
            return PadicScalar(self.p, 1, None, n1, ())
        if self.v % self.e:
            raise ArithmeticError("value has genuinely ramified leading digit")
        acc = 0
        for s, a in enumerate(self.digits):
            if (self.v + s) % self.e == 0:
                acc += a * self.p ** ((self.v + s) // self.e - self.v // self.e)
            elif a:
                raise ArithmeticError("value has a visible ramified digit")
        return PadicScalar._make(self.p, 1, self.v // self.e, n1, [acc])

    # -- arithmetic -----------------------------------------------------------

    def _coerce(self, other):
        if isinstance(other, PadicScalar):
            if other.p != self.p:
                raise ValueError("mixed primes")
            if other.e != self.e:
                lcm = math.lcm(self.e, other.e)
                return self.embed(lcm), other.embed(lcm)
            return self, other
        if isinstance(other, (int, Fraction)):
            ref = self.n if self.n is not _INF else 64 * self.e
            prec = Fraction(ref + 2 * abs(self.v or 0) + 4 * self.e, self.e)
            return self, PadicScalar.from_rational(other, self.p, prec, self.e)
        return self, None

    def __add__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        n = _minprec(a.n, b.n)
        if a.v is None:
            n2 = _minprec(a.n, b.n)
            return PadicScalar._make(b.p, b.e, b.v, n2, b.digits)
        if b.v is None:
            return PadicScalar._make(a.p, a.e, a.v, _minprec(a.n, b.n), a.digits)
        v = min(a.v, b.v)
        da = _pi_shift(a.digits, a.v - v, a.p, a.e)
        db = _pi_shift(b.digits, b.v - v, b.p, b.e)
        return PadicScalar._make(a.p, a.e, v, n, [x + y for x, y in zip(da, db)])

    __radd__ = __add__

    def __neg__(self):
        if self.v is None:
            return self
        return PadicScalar._make(self.p, self.e, self.v, self.n,
                                 [-a for a in self.digits])

    def __sub__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        return a + (-b)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        if a.v is None or b.v is None:
            # noise times anything: valuation floor v_zero >= n_zero
            terms = []
            if a.v is None and b.v is not None:
                terms.append(_addprec(a.n, b.v))
                if b.n is not _INF:
                    terms.append(_addprec(b.n, a.n if a.n is not _INF else None))
            elif b.v is None and a.v is not None:
                terms.append(_addprec(b.n, a.v))
                if a.n is not _INF:
                    terms.append(_addprec(a.n, b.n if b.n is not _INF else None))
            else:
                terms.append(_addprec(a.n, b.n if b.n is not _INF else None))
            n = min((t for t in terms if t is not None), default=_INF)
            return PadicScalar(a.p, a.e, None, n, ())
        n = _minprec(_addprec(a.n, b.v), _addprec(b.n, a.v))
        digits = _pi_mul(a.digits, b.digits, a.p, a.e)
        return PadicScalar._make(a.p, a.e, a.v + b.v, n, digits)

    __rmul__ = __mul__

    def inverse(self):
        if self.v is None:
            raise ZeroDivisionError("inverting a value indistinguishable from 0")
        rel = self.n - self.v if self.n is not _INF else 64 * self.e
        m = max(1, -((-rel) // self.e) + 1)
        inv = _pi_inverse_unit(self.digits, self.p, self.e, m)
        n = self.n - 2 * self.v if self.n is not _INF else _INF
        return PadicScalar._make(self.p, self.e, -self.v, n, inv)

    def __truediv__(self, other):
        a, b = self._coerce(other)
        if b is None:
            return NotImplemented
        return a * b.inverse()

    def __rtruediv__(self, other):
        _, o = self._coerce(other)
        return o * self.inverse()

    def __pow__(self, k):
        if k < 0:
            return self.inverse() ** (-k)
        out = PadicScalar.from_int(1, self.p, self.precision if self.n is not _INF else 64,
                                   self.e)
        base = self
        first = True
        while k:
            if k & 1:
                out = base if first else out * base
                first = False
            base = base * base
            k >>= 1
        if first:
            return PadicScalar.from_int(1, self.p,
                                        Fraction(self.n, self.e) if self.n is not _INF else 64,
                                        self.e)
        return out

    # -- comparison -----------------------------------------------------------

    def compare(self, other):
        """Three-valued: 'eq' if the difference is below the joint noise floor,
        'ne' if it is definitely nonzero."""
        a, b = self._coerce(other)
        d = a - b
        return "eq" if d.is_zero() else "ne"

    def __eq__(self, other):
        if isinstance(other, (PadicScalar, int, Fraction)):
            return self.compare(other) == "eq"
        return NotImplemented

    def __hash__(self):
        raise TypeError("p-adic scalars compare up to precision; not hashable")

    # -- rendering ------------------------------------------------------------

    def render(self):
        return render_padic(self)

    def __repr__(self):
        return self.render()

    def lift_rational(self):
        """The canonical representative sum(a_s pi^(v+s)) as (coeff dict k -> digit).

        Exponents k are in 1/e units; digits are expanded base p."""
        out = {}
        if self.v is None:
            return out
        for s, a in enumerate(self.digits):
            t = 0
            while a:
                d = a % self.p
                if d:
                    out[self.v + s + t * self.e] = d
                a //= self.p
                t += 1
        return out

    def lift_int(self):
        """Integer representative for an unramified integral value."""
        u = self.to_unramified()
        if u.v is None:
            return 0
        if u.v < 0:
            raise ArithmeticError("value is not integral")
        return u.digits[0] * u.p ** u.v


def _to_units(prec, e):
    if prec is _INF or prec is None:
        return _INF
    fr = Fraction(prec) * e
    if fr.denominator != 1:
        raise ValueError("precision is not a multiple of 1/e")
    return int(fr)


def _minprec(a, b):
    if a is _INF:
        return b
    if b is _INF:
        return a
    return min(a, b)


def _addprec(n, v):
    if n is _INF or v is None:
        return _INF if n is _INF else None
    return n + v


def _pi_shift(digits, k, p, e):
    """Digits of pi^k * u from digits of u (k >= 0)."""
    out = list(digits)
    kq, kr = divmod(k, e)
    if kq:
        out = [a * p ** kq for a in out]
    for _ in range(kr):
        out = [out[-1] * p] + out[:-1]
    return out


def _pi_mul(da, db, p, e):
    if e == 1:
        return [da[0] * db[0]]
    out = [0] * e
    for i, a in enumerate(da):
        if not a:
            continue
        for j, b in enumerate(db):
            if not b:
                continue
            s = i + j
            if s < e:
                out[s] += a * b
            else:
                out[s - e] += a * b * p
    return out


def _pi_inverse_unit(digits, p, e, m):
    """Inverse of a unit in Z_p[pi]/(pi^e - p) modulo p^m, by Newton."""
    mod = p ** m
    z = [pow(digits[0] % p, -1, p)] + [0] * (e - 1)
    # each step doubles pi-adic accuracy; e*m pi-digits needed
    steps = max(1, math.ceil(math.log2(e * m))) + 1
    for _ in range(steps):
        uz = _pi_mul(digits, z, p, e)
        two_minus = [(-c) % mod for c in uz]
        two_minus[0] = (two_minus[0] + 2) % mod
        z = [c % mod for c in _pi_mul(z, two_minus, p, e)]
    return z


# ---------------------------------------------------------------------------
# rendering and parsing


def render_padic(x):
    """Ascending-power digit string, e.g. '2*3^2 + 3^3 + O(3^9)'."""
    parts = []
    digits = x.lift_rational()
    for k in sorted(digits):
        d = digits[k]
        expo = Fraction(k, x.e)
        parts.append(_render_term(d, x.p, expo))
    if x.n is _INF:
        if not parts:
            return "0"
        return " + ".join(parts)
    tail = f"O({x.p}^{_render_exp(Fraction(x.n, x.e))})"
    if not parts:
        return tail
    return " + ".join(parts) + " + " + tail


def _render_term(d, p, expo):
    if expo == 0:
        return str(d)
    base = f"{p}^{_render_exp(expo)}" if expo != 1 else f"{p}"
    if d == 1:
        return base
    return f"{d}*{base}"


def _render_exp(expo):
    if expo.denominator == 1:
        return str(expo.numerator)
    return f"({expo.numerator}/{expo.denominator})"


_TERM_RE = re.compile(
    r"^\s*(?:(?P<coef>-?\d+)\s*\*\s*)?(?P<base>\d+)\s*(?:\^\s*(?P<exp>-?\d+|\(\s*-?\d+\s*/\s*\d+\s*\)|-?\d+\s*/\s*\d+))?\s*$"
)
_O_RE = re.compile(
    r"^\s*O\(\s*(?P<base>\d+)\s*(?:\^\s*(?P<exp>-?\d+|\(\s*-?\d+\s*/\s*\d+\s*\)|-?\d+\s*/\s*\d+))?\s*\)\s*$"
)


def parse_padic(text, p=None, e=None):
    """Parse the render_padic format (liberally: coefficients need not be
    reduced digits, exponents may be fractional)."""
    text = text.strip()
    if text == "0":
        if p is None:
            raise ValueError("cannot infer the prime from '0'")
        return PadicScalar.zero(p, _INF, e or 1)
    terms = [t for t in text.split("+")]
    prec = None
    base_seen = p
    parsed = []
    # first pass: fix the prime from the O-term and any starred/exponented term
    for t in terms:
        mo = _O_RE.match(t)
        if mo:
            base_seen = _check_base(base_seen, int(mo.group("base")))
            prec = _parse_exp(mo.group("exp"), default=Fraction(1))
            parsed.append(None)
            continue
        mt = _TERM_RE.match(t)
        if not mt:
            raise ValueError(f"unparseable p-adic term: {t!r}")
        if mt.group("exp") is not None or mt.group("coef") is not None:
            base_seen = _check_base(base_seen, int(mt.group("base")))
        parsed.append(mt)
    if base_seen is None:
        raise ValueError("prime not determined by input; pass p explicitly")
    p = base_seen
    found = []  # (coef, Fraction exponent)
    for mt in parsed:
        if mt is None:
            continue
        if mt.group("exp") is None and mt.group("coef") is None:
            # bare integer: the prime itself means p^1, anything else a digit
            b = int(mt.group("base"))
            found.append((1, Fraction(1)) if b == p else (b, Fraction(0)))
            continue
        coef = int(mt.group("coef")) if mt.group("coef") else 1
        expo = _parse_exp(mt.group("exp"), default=Fraction(1))
        found.append((coef, expo))
    dens = [f.denominator for _, f in found]
    if prec is not None:
        dens.append(prec.denominator)
    e_inferred = math.lcm(*dens) if dens else 1
    e = e or e_inferred
    if e % e_inferred:
        raise ValueError("exponents need finer ramification than requested")
    if prec is None:
        # exact input: carry enough precision to hold every stated digit
        top = max((f for _, f in found), default=Fraction(0))
        maxc = max((abs(c) for c, _ in found), default=1)
        prec = top + Fraction(math.ceil(math.log(max(maxc, 1) + 1, p)) + 3)
    acc = PadicScalar.zero(p, prec, e)
    for coef, expo in found:
        k = int(expo * e)
        term = PadicScalar.pi_power(p, e, k, prec + max(Fraction(0), expo)) \
            * PadicScalar.from_rational(coef, p, prec + abs(expo) + 8, e)
        acc = acc + term.with_precision(prec)
    return acc


def _check_base(seen, b):
    if seen is None:
        return b
    if seen != b:
        raise ValueError(f"inconsistent primes {seen} and {b}")
    return seen


def _parse_exp(s, default):
    if s is None:
        return default
    s = s.strip().strip("()")
    if "/" in s:
        a, b = s.split("/")
        return Fraction(int(a), int(b))
    return Fraction(int(s))


# ---------------------------------------------------------------------------
# polynomials and series with p-adic coefficients


class PadicPoly:
    """Dense polynomial with PadicScalar coefficients (ascending)."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs):
        self.coeffs = list(coeffs)

    def degree(self):
        return len(self.coeffs) - 1

    def eval(self, x):
        if not self.coeffs:
            raise ValueError("empty polynomial")
        acc = self.coeffs[-1]
        for c in reversed(self.coeffs[:-1]):
            acc = acc * x + c
        return acc

    def __repr__(self):
        return f"PadicPoly({self.coeffs})"


class PadicSeries:
    """Laurent series sum c_k t^k for k_min <= k < l with p-adic coefficients.

    l is the truncation order: nothing is claimed about t^l and beyond; the
    precision of an evaluation therefore combines per-coefficient precision
    with the truncation bound supplied by the caller's ledger."""

    __slots__ = ("k_min", "coeffs", "l")

    def __init__(self, k_min, coeffs, l=None):
        self.k_min = k_min
        self.coeffs = list(coeffs)
        self.l = l if l is not None else k_min + len(self.coeffs)

    def coeff(self, k):
        if k < self.k_min or k >= self.k_min + len(self.coeffs):
            raise IndexError("coefficient outside stored range")
        return self.coeffs[k - self.k_min]

    def antiderivative(self):
        """Termwise antiderivative.  The t^{-1} coefficient must be noise at
        its precision (it is dropped); coefficient k loses ord_p(k+1)."""
        out = []
        k_min_out = None
        for i, c in enumerate(self.coeffs):
            k = self.k_min + i
            if k == -1:
                if not c.is_zero():
                    raise ArithmeticError(
                        "t^-1 coefficient is visibly nonzero; not integrable")
                continue
            if k_min_out is None:
                k_min_out = k + 1
            out.append(c / (k + 1))
        if k_min_out is None:
            k_min_out = self.k_min + 1 if self.k_min != -1 else self.k_min + 2
        return PadicSeries(k_min_out, out, self.l + 1)

    def eval(self, t):
        """Horner evaluation at a scalar with positive valuation.  The result
        precision is as propagated by scalar arithmetic; the caller caps it
        with the ledger's truncation bound."""
        if not self.coeffs:
            return PadicScalar.zero(t.p, _INF, t.e)
        acc = None
        for c in reversed(self.coeffs):
            ce = c.embed(math.lcm(c.e, t.e)) if c.e != t.e else c
            acc = ce if acc is None else acc * t + ce
        pos = acc
        if self.k_min >= 0:
            return pos * t ** self.k_min if self.k_min else pos
        return pos * t ** self.k_min

    def __repr__(self):
        return f"PadicSeries(k_min={self.k_min}, l={self.l}, {len(self.coeffs)} coeffs)"


# ---------------------------------------------------------------------------
# matrices


def padic_linear_solve(a, rhs):
    """Solve A x = rhs where A is square over Q_p (unramified entries) and the
    right-hand side holds PadicScalar values (possibly ramified).

    A's entries are lifted canonically to Q and inverted exactly, so the only
    p-adic error is the inputs': each solution entry is reported to precision
    min(input precisions) - ord_p(det A), the bound provable from Cramer's
    rule.  Raises if the determinant is indistinguishable from zero."""
    from .rationals import mat_inverse as _qinv

    n = len(a)
    for row in a:
        for x in row:
            if x.e != 1:
                raise ValueError("matrix entries must be unramified")
    p = a[0][0].p
    lifts = [[_entry_lift(x) for x in row] for row in a]
    det = _rational_det([row[:] for row in lifts])
    vdet = ord_p_rational(det, p) if det else _INF
    n_in = min(_scalar_prec_units(x) for row in a for x in row)
    n_rhs = min((_scalar_prec_units(x) for x in rhs), default=_INF) if rhs else _INF
    if vdet is _INF or (n_in is not _INF and vdet >= n_in):
        raise ArithmeticError("matrix determinant indistinguishable from zero")
    inv = _qinv([[Fraction(c) for c in row] for row in lifts])
    out = []
    n_report = _minprec(n_in, n_rhs)
    for i in range(n):
        acc = None
        for j in range(n):
            term = rhs[j] * inv[i][j] if inv[i][j] else None
            if term is not None:
                acc = term if acc is None else acc + term
        if acc is None:
            acc = PadicScalar.zero(p, _INF, 1)
        if n_report is not _INF:
            acc = acc.with_precision(Fraction(n_report) - vdet)
        out.append(acc)
    return out, vdet


def _entry_lift(x):
    if x.v is None:
        return Fraction(0)
    return Fraction(x.digits[0] * x.p ** x.v) if x.v >= 0 else \
        Fraction(x.digits[0], x.p ** (-x.v))


def _scalar_prec_units(x):
    if x.n is _INF:
        return _INF
    return Fraction(x.n, x.e)


def _rational_det(m):
    n = len(m)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if m[r][col]), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            m[col], m[piv] = m[piv], m[col]
            det = -det
        det *= m[col][col]
        inv = 1 / m[col][col]
        for r in range(col + 1, n):
            if m[r][col]:
                f = m[r][col] * inv
                m[r] = [c - f * pc for c, pc in zip(m[r], m[col])]
    return det
