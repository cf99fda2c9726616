"""Exact arithmetic over Q: dense polynomials, rational functions, elements of
Q(x)[y]/(Q), matrices, and Laurent series.

Nothing in this module ever rounds.  All curve-level precomputations (derivation
matrices, trace forms, echelon bases) are done here over Fraction and only then
reduced modulo a prime power, so p-adic precision claims downstream never depend
on rational round-off.

Polynomials are tuples of coefficients in ascending order with no trailing
zeros; the zero polynomial is ().  The gp_* helpers are generic over any field
whose elements support +, -, *, /, ** with int exponents, and bool() testing
for zero (Fraction and QX both qualify), so the same code serves polynomials
over Q and polynomials in y over Q(x).
"""

from __future__ import annotations

import math
from fractions import Fraction


# ---------------------------------------------------------------------------
# generic dense polynomials over a field


def gp_trim(f):
    f = list(f)
    while f and not f[-1]:
        f.pop()
    return tuple(f)


def gp_deg(f):
    return len(f) - 1  # -1 for the zero polynomial


def gp_add(f, g):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = out[i] + c
    return gp_trim(out)


def gp_neg(f):
    return tuple(-c for c in f)


def gp_sub(f, g):
    return gp_add(f, gp_neg(g))


def gp_scale(f, c):
    if not c:
        return ()
    return gp_trim(x * c for x in f)


def gp_mul(f, g):
    if not f or not g:
        return ()
    out = [f[0] * g[0] * 0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not a:
            continue
        for j, b in enumerate(g):
            out[i + j] = out[i + j] + a * b
    return gp_trim(out)


def gp_divmod(f, g):
    """Quotient and remainder; g's leading coefficient must be invertible."""
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    df, dg = len(f) - 1, len(g) - 1
    if df < dg:
        return (), tuple(f)
    lcinv = g[-1] ** 0 / g[-1]
    rem = list(f)
    quo = [f[0] * 0] * (df - dg + 1)
    for k in range(df - dg, -1, -1):
        c = rem[k + dg] * lcinv
        quo[k] = c
        if c:
            for j, b in enumerate(g):
                rem[k + j] = rem[k + j] - c * b
    return gp_trim(quo), gp_trim(rem[:dg])


def gp_div_exact(f, g):
    q, r = gp_divmod(f, g)
    if r:
        raise ArithmeticError("inexact polynomial division")
    return q


def gp_monic(f):
    if not f:
        return f
    return gp_scale(f, f[-1] ** 0 / f[-1])


def gp_gcd(f, g):
    while g:
        f, g = g, gp_divmod(f, g)[1]
    return gp_monic(f)


def gp_deriv(f):
    return gp_trim(c * i for i, c in enumerate(f) if i)


def gp_eval(f, a):
    acc = a * 0
    for c in reversed(f):
        acc = acc * a + c
    return acc


def gp_compose(f, g):
    """f(g(t)) by Horner over polynomial coefficients."""
    acc = ()
    for c in reversed(f):
        acc = gp_add(gp_mul(acc, g), (c,) if c else ())
    return acc


def gp_pow_mod(f, n, m):
    out = (f[0] ** 0,) if f else (Fraction(1),)
    base = gp_divmod(f, m)[1]
    while n:
        if n & 1:
            out = gp_divmod(gp_mul(out, base), m)[1]
        base = gp_divmod(gp_mul(base, base), m)[1]
        n >>= 1
    return out


def gp_resultant(f, g):
    """Resultant of f and g via the Euclidean recursion."""
    if not f or not g:
        return f[0] * 0 if f else (g[0] * 0 if g else Fraction(0))
    one = f[-1] ** 0
    sign = one
    acc = one
    while True:
        m, n = len(f) - 1, len(g) - 1
        if n == 0:
            return acc * sign * g[0] ** m
        r = gp_divmod(f, g)[1]
        if not r:
            return acc * 0
        if (m * n) & 1:
            sign = -sign
        acc = acc * g[-1] ** (m - (len(r) - 1))
        f, g = g, r


def gp_squarefree(f):
    """The monic squarefree part f / gcd(f, f')."""
    if not f:
        return f
    return gp_monic(gp_div_exact(f, gp_gcd(f, gp_deriv(f))))


# ---------------------------------------------------------------------------
# polynomials over Q specifically


def pfrac(ints):
    return gp_trim(Fraction(c) for c in ints)


def p_x(shift=1):
    return (Fraction(0),) * shift + (Fraction(1),)


def p_clear_denominators(f):
    """(integer coefficient tuple, denominator) with f = ints / den."""
    if not f:
        return (), 1
    den = math.lcm(*(c.denominator for c in f))
    return tuple(int(c * den) for c in f), den


def p_content(ints):
    g = 0
    for c in ints:
        g = math.gcd(g, abs(c))
    return g


def p_primitive(f):
    """Primitive integer polynomial with positive leading coefficient
    equal to f up to a positive rational factor."""
    ints, _ = p_clear_denominators(f)
    if not ints:
        return ()
    g = p_content(ints)
    if ints[-1] < 0:
        g = -g
    return tuple(c // g for c in ints)


def p_from_ints(ints):
    return gp_trim(Fraction(c) for c in ints)


def p_to_ints(f):
    out = []
    for c in f:
        if c.denominator != 1:
            raise ArithmeticError("polynomial is not integral")
        out.append(c.numerator)
    return tuple(out)


# ---------------------------------------------------------------------------
# rational functions over Q


class QX:
    """Element of Q(x), stored as num/den with den monic and gcd(num,den)=1."""

    __slots__ = ("num", "den")

    def __init__(self, num, den=None):
        if isinstance(num, (int, Fraction)):
            num = (Fraction(num),) if num else ()
        num = gp_trim(Fraction(c) for c in num)
        if den is None:
            den = (Fraction(1),)
        elif isinstance(den, (int, Fraction)):
            den = (Fraction(den),) if den else ()
        else:
            den = gp_trim(Fraction(c) for c in den)
        if not den:
            raise ZeroDivisionError("zero denominator in Q(x)")
        if not num:
            self.num, self.den = (), (Fraction(1),)
            return
        g = gp_gcd(num, den)
        if gp_deg(g) > 0:
            num, den = gp_div_exact(num, g), gp_div_exact(den, g)
        lc = den[-1]
        if lc != 1:
            num, den = gp_scale(num, 1 / lc), gp_scale(den, 1 / lc)
        self.num, self.den = num, den

    @classmethod
    def x(cls):
        return cls((0, 1))

    def __bool__(self):
        return bool(self.num)

    def __eq__(self, other):
        other = _coerce_qx(other)
        return other is not None and self.num == other.num and self.den == other.den

    def __hash__(self):
        return hash((self.num, self.den))

    def __add__(self, other):
        other = _coerce_qx(other)
        if other is None:
            return NotImplemented
        return QX(
            gp_add(gp_mul(self.num, other.den), gp_mul(other.num, self.den)),
            gp_mul(self.den, other.den),
        )

    __radd__ = __add__

    def __neg__(self):
        r = QX.__new__(QX)
        r.num, r.den = gp_neg(self.num), self.den
        return r

    def __sub__(self, other):
        other = _coerce_qx(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = _coerce_qx(other)
        if other is None:
            return NotImplemented
        return QX(gp_mul(self.num, other.num), gp_mul(self.den, other.den))

    __rmul__ = __mul__

    def __truediv__(self, other):
        other = _coerce_qx(other)
        if other is None:
            return NotImplemented
        if not other:
            raise ZeroDivisionError("division by zero in Q(x)")
        return QX(gp_mul(self.num, other.den), gp_mul(self.den, other.num))

    def __rtruediv__(self, other):
        other = _coerce_qx(other)
        return other / self

    def __pow__(self, n):
        if n < 0:
            return (self ** 0) / self ** (-n)
        out = QX(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def is_polynomial(self):
        return gp_deg(self.den) == 0

    def as_polynomial(self):
        if not self.is_polynomial():
            raise ArithmeticError("rational function has a nontrivial denominator")
        return self.num

    def eval(self, a):
        d = gp_eval(self.den, Fraction(a))
        if not d:
            raise ZeroDivisionError("pole at evaluation point")
        return gp_eval(self.num, Fraction(a)) / d

    def ord_at_zero(self):
        """Order of vanishing at x = 0 (negative for a pole); None for 0."""
        if not self.num:
            return None
        return _low_ord(self.num) - _low_ord(self.den)

    def ord_at_infinity(self):
        """Order of vanishing at x = infinity, i.e. deg(den) - deg(num)."""
        if not self.num:
            return None
        return gp_deg(self.den) - gp_deg(self.num)

    def deriv(self):
        return QX(
            gp_sub(gp_mul(gp_deriv(self.num), self.den),
                   gp_mul(self.num, gp_deriv(self.den))),
            gp_mul(self.den, self.den),
        )

    def __repr__(self):
        return f"QX({list(self.num)}, {list(self.den)})"


def _coerce_qx(v):
    if isinstance(v, QX):
        return v
    if isinstance(v, (int, Fraction)):
        return QX(v)
    return None


def _low_ord(f):
    for i, c in enumerate(f):
        if c:
            return i
    return None


# ---------------------------------------------------------------------------
# the function field Q(x)[y] / (Q)


class FunctionField:
    """Q(x)[y]/(Q) for Q monic in y; elements are FFElem coordinate vectors."""

    def __init__(self, q_rows):
        # q_rows[i] = coefficient of y^i, a Q-polynomial tuple
        rows = [gp_trim(Fraction(c) for c in row) for row in q_rows]
        if rows[-1] != (Fraction(1),):
            raise ValueError("defining polynomial must be monic in y")
        self.q_rows = rows
        self.d = len(rows) - 1
        # y^d = -sum_{i<d} q_i y^i
        self._top = [QX(gp_neg(rows[i])) for i in range(self.d)]

    def elem(self, coords):
        coords = list(coords) + [QX(0)] * (self.d - len(coords))
        return FFElem(self, [c if isinstance(c, QX) else QX(c) for c in coords])

    def y(self):
        return self.elem([QX(0), QX(1)] if self.d > 1 else [self._top[0]])

    def one(self):
        return self.elem([QX(1)])

    def from_y_poly(self, coeffs):
        """Element from a list of QX coefficients in powers of y (any length)."""
        acc = [QX(0)] * self.d
        ypow = [QX(0)] * self.d
        ypow[0] = QX(1)
        for k, c in enumerate(coeffs):
            if k:
                ypow = self._shift(ypow)
            for i in range(self.d):
                acc[i] = acc[i] + c * ypow[i]
        return FFElem(self, acc)

    def _shift(self, coords):
        # multiply by y and reduce
        top = coords[-1]
        out = [QX(0)] + coords[:-1]
        if top:
            for i in range(self.d):
                out[i] = out[i] + top * self._top[i]
        return out

    def mul_coords(self, a, b):
        prod = [QX(0)] * self.d
        bshift = list(b)
        for i in range(self.d):
            if a[i]:
                for j in range(self.d):
                    prod[j] = prod[j] + a[i] * bshift[j]
            if i < self.d - 1:
                bshift = self._shift(bshift)
        return prod

    def multiplication_matrix(self, elem):
        """Matrix of multiplication by elem on the y-power basis (rows = images)."""
        rows = []
        cur = elem.coords
        basis = self.one().coords
        for i in range(self.d):
            img = self.mul_coords(elem.coords, self._ypow(i))
            rows.append(img)
        return rows

    def _ypow(self, i):
        coords = [QX(0)] * self.d
        coords[0] = QX(1)
        for _ in range(i):
            coords = self._shift(coords)
        return coords

    def trace(self, elem):
        """Trace of multiplication by elem down to Q(x)."""
        m = self.multiplication_matrix(elem)
        t = QX(0)
        for i in range(self.d):
            t = t + m[i][i]
        return t


class FFElem:
    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = list(coords)

    def __bool__(self):
        return any(self.coords)

    def __eq__(self, other):
        return isinstance(other, FFElem) and self.coords == other.coords

    def __add__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return FFElem(self.field, [a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __neg__(self):
        return FFElem(self.field, [-a for a in self.coords])

    def __sub__(self, other):
        other = self._coerce(other)
        if other is None:
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, FFElem):
            return FFElem(self.field, self.field.mul_coords(self.coords, other.coords))
        other = _coerce_qx(other)
        if other is None:
            return NotImplemented
        return FFElem(self.field, [a * other for a in self.coords])

    __rmul__ = __mul__

    def __pow__(self, n):
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __truediv__(self, other):
        if isinstance(other, FFElem):
            return self * other.inverse()
        other = _coerce_qx(other)
        if other is None:
            return NotImplemented
        return FFElem(self.field, [a / other for a in self.coords])

    def inverse(self):
        """Inverse via extended Euclid in Q(x)[y] against the defining poly."""
        d = self.field.d
        q_poly = tuple(QX(row) for row in self.field.q_rows)
        a = gp_trim(self.coords)
        if not a:
            raise ZeroDivisionError("inverting zero in the function field")
        # extended gcd of a and q_poly over Q(x)
        r0, r1 = q_poly, a
        s0, s1 = (), (QX(1),)
        while gp_deg(r1) > 0:
            q, r = gp_divmod(r0, r1)
            r0, r1 = r1, r
            s0, s1 = s1, gp_sub(s0, gp_mul(q, s1))
            if not r1:
                raise ArithmeticError("element is a zero divisor; curve is reducible")
        inv = gp_scale(s1, r1[0] ** 0 / r1[0])
        return self.field.from_y_poly(inv)

    def trace(self):
        return self.field.trace(self)

    def _coerce(self, other):
        if isinstance(other, FFElem):
            return other
        q = _coerce_qx(other)
        if q is None:
            return None
        coords = [QX(0)] * self.field.d
        coords[0] = q
        return FFElem(self.field, coords)

    def __repr__(self):
        return f"FFElem({self.coords})"


# ---------------------------------------------------------------------------
# matrices over any field (Fraction, QX, ...)


def mat_identity(n, one):
    return [[one if i == j else one * 0 for j in range(n)] for i in range(n)]


def mat_mul(a, b):
    n, k, m = len(a), len(b), len(b[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = a[0][0] * 0
            for t in range(k):
                if a[i][t]:
                    acc = acc + a[i][t] * b[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(a, v):
    return [sum_products(row, v) for row in a]


def sum_products(row, v):
    acc = row[0] * 0
    for a, b in zip(row, v):
        if a and b:
            acc = acc + a * b
    return acc


def mat_transpose(a):
    return [list(col) for col in zip(*a)]


def mat_sub(a, b):
    return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]


def mat_inverse(a):
    n = len(a)
    one = a[0][0] ** 0 if a[0][0] else _find_one(a)
    work = [list(row) + list(ident_row) for row, ident_row in zip(a, mat_identity(n, one))]
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            raise ArithmeticError("singular matrix")
        work[col], work[piv] = work[piv], work[col]
        pinv = one / work[col][col]
        work[col] = [c * pinv for c in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [c - f * pc for c, pc in zip(work[r], work[col])]
    return [row[n:] for row in work]


def _find_one(a):
    for row in a:
        for c in row:
            if c:
                return c ** 0
    raise ArithmeticError("singular matrix")


def mat_det(a):
    n = len(a)
    work = [list(row) for row in a]
    one = _find_one_or_none(a)
    if one is None:
        return a[0][0] * 0
    det = one
    for col in range(n):
        piv = next((r for r in range(col, n) if work[r][col]), None)
        if piv is None:
            return a[0][0] * 0
        if piv != col:
            work[col], work[piv] = work[piv], work[col]
            det = -det
        det = det * work[col][col]
        pinv = one / work[col][col]
        for r in range(col + 1, n):
            if work[r][col]:
                f = work[r][col] * pinv
                work[r] = [c - f * pc for c, pc in zip(work[r], work[col])]
    return det


def _find_one_or_none(a):
    for row in a:
        for c in row:
            if c:
                return c ** 0
    return None


def mat_rref(a):
    """Reduced row echelon form; returns (rref, pivot_columns)."""
    if not a:
        return [], []
    work = [list(row) for row in a]
    n, m = len(work), len(work[0])
    one = _find_one_or_none(work)
    if one is None:
        return work, []
    pivots = []
    row = 0
    for col in range(m):
        piv = next((r for r in range(row, n) if work[r][col]), None)
        if piv is None:
            continue
        work[row], work[piv] = work[piv], work[row]
        pinv = one / work[row][col]
        work[row] = [c * pinv for c in work[row]]
        for r in range(n):
            if r != row and work[r][col]:
                f = work[r][col]
                work[r] = [c - f * pc for c, pc in zip(work[r], work[row])]
        pivots.append(col)
        row += 1
        if row == n:
            break
    return work, pivots


def mat_nullspace(a):
    """Basis of the right kernel, one vector per free column."""
    rref, pivots = mat_rref(a)
    if not a:
        return []
    m = len(a[0])
    one = _find_one_or_none(a)
    if one is None:
        one = Fraction(1)
    zero = one * 0
    free = [c for c in range(m) if c not in pivots]
    basis = []
    for fc in free:
        v = [zero] * m
        v[fc] = one
        for r, pc in enumerate(pivots):
            v[pc] = -rref[r][fc]
        basis.append(v)
    return basis


def mat_solve(a, rhs):
    """Solve a x = rhs exactly (square, nonsingular)."""
    inv = mat_inverse(a)
    return mat_vec(inv, rhs)


# ---------------------------------------------------------------------------
# exact Laurent series (coefficients in any field)


class LSeries:
    """Sum of c_i t^(lead+i) for i < len(coeffs), plus O(t^trunc).

    trunc = lead + len(coeffs).  Used for exact expansions over Q at points
    of the curve; arithmetic keeps the tightest valid truncation.
    """

    __slots__ = ("lead", "coeffs", "zero")

    def __init__(self, lead, coeffs, zero=Fraction(0)):
        coeffs = list(coeffs)
        # strip leading zeros, moving lead up
        while coeffs and not coeffs[0]:
            coeffs.pop(0)
            lead += 1
        self.lead = lead
        self.coeffs = coeffs
        self.zero = zero

    @property
    def trunc(self):
        return self.lead + len(self.coeffs)

    @classmethod
    def from_poly(cls, f, trunc, zero=Fraction(0)):
        coeffs = list(f) + [zero] * (trunc - len(f))
        return cls(0, coeffs[:trunc], zero)

    def ord(self):
        """t-adic valuation; None if indistinguishable from 0 at this truncation."""
        return self.lead if self.coeffs else None

    def coeff(self, k):
        if k >= self.trunc:
            raise ArithmeticError(f"coefficient t^{k} beyond truncation {self.trunc}")
        if k < self.lead:
            return self.zero
        return self.coeffs[k - self.lead]

    def __add__(self, other):
        if not isinstance(other, LSeries):
            return NotImplemented
        lead = min(self.lead, other.lead)
        trunc = min(self.trunc, other.trunc)
        out = []
        for k in range(lead, trunc):
            a = self.coeffs[k - self.lead] if self.lead <= k < self.trunc else self.zero
            b = other.coeffs[k - other.lead] if other.lead <= k < other.trunc else self.zero
            out.append(a + b)
        return LSeries(lead, out, self.zero)

    def __neg__(self):
        return LSeries(self.lead, [-c for c in self.coeffs], self.zero)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if isinstance(other, LSeries):
            if not self.coeffs or not other.coeffs:
                # zero to available precision; truncation from the sharper bound
                lead = min(self.trunc + (other.lead if other.coeffs else other.trunc),
                           other.trunc + (self.lead if self.coeffs else self.trunc))
                return LSeries(lead, [], self.zero)
            lead = self.lead + other.lead
            n = min(self.trunc + other.lead, other.trunc + self.lead) - lead
            out = [self.zero] * n
            for i, a in enumerate(self.coeffs):
                if not a:
                    continue
                for j, b in enumerate(other.coeffs):
                    if i + j >= n:
                        break
                    if b:
                        out[i + j] = out[i + j] + a * b
            return LSeries(lead, out, self.zero)
        # scalar
        return LSeries(self.lead, [c * other for c in self.coeffs], self.zero)

    __rmul__ = __mul__

    def shift(self, k):
        return LSeries(self.lead + k, list(self.coeffs), self.zero)

    def inverse(self):
        if not self.coeffs or not self.coeffs[0]:
            raise ZeroDivisionError("series inverse needs an exact-unit leading term")
        n = len(self.coeffs)
        a = self.coeffs
        inv0 = a[0] ** 0 / a[0]
        out = [inv0]
        for k in range(1, n):
            acc = self.zero
            for j in range(1, k + 1):
                if j < len(a) and a[j]:
                    acc = acc + a[j] * out[k - j]
            out.append(-inv0 * acc)
        return LSeries(-self.lead, out, self.zero)

    def __truediv__(self, other):
        return self * other.inverse()

    def deriv(self):
        out = [(self.lead + i) * c for i, c in enumerate(self.coeffs)]
        return LSeries(self.lead - 1, out, self.zero)

    def antideriv(self):
        """Termwise t-antiderivative; the t^-1 coefficient must be exactly 0."""
        if not self.coeffs:
            return LSeries(self.trunc + 1, [], self.zero)
        lead_out = self.lead + 1
        trunc_out = self.trunc + 1
        out = [self.zero] * (trunc_out - lead_out)
        for i, c in enumerate(self.coeffs):
            k = self.lead + i
            if k == -1:
                if c:
                    raise ArithmeticError("series has a nonzero residue")
                continue
            out[k + 1 - lead_out] = c / (k + 1)
        return LSeries(lead_out, out, self.zero)

    def compose_with(self, g):
        """Substitute t -> g (a series with positive valuation) via Horner.

        Only valid when self has lead >= 0 (a power series)."""
        if self.lead < 0:
            raise ArithmeticError("composition needs a power series")
        if g.coeffs and g.lead < 1:
            raise ArithmeticError("substituted series must vanish at 0")
        trunc = min(g.trunc, self.trunc * max(g.lead, 1))
        acc = LSeries(trunc, [], self.zero)
        for i in range(len(self.coeffs) - 1, -1, -1):
            c = self.coeffs[i]
            # exact constants carry the full working truncation
            cs = LSeries(0, [c] + [self.zero] * (trunc - 1), self.zero)
            acc = acc * g + cs
        for _ in range(self.lead):
            acc = acc * g
        return acc

    def __repr__(self):
        terms = [f"{c}*t^{self.lead + i}" for i, c in enumerate(self.coeffs) if c]
        body = " + ".join(terms) if terms else "0"
        return f"<{body} + O(t^{self.trunc})>"
