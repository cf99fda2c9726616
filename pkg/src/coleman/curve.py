"""Exact curve model: integral bases, derivation matrices, fibers, points.

A curve is presented by a plane model Q(x, y), monic in y with integer
coefficients and irreducible, together with two basis matrices over Q(x).
Row i of W0 expresses the finite integral basis function b0_i in the powers
of y; row i of Winf does the same for the basis binf_i adapted to
x = infinity.  Everything derived here (discriminant, squarefree radical r,
derivation matrices, structure constants, trace pairings, places over the
branch points) is computed once, exactly over Q, and cached; the p-adic
pipeline only ever reduces these exact objects mod p^M.

Conventions: basis functions stack into column vectors, so b0 = W0 * yvec
and binf = V * b0 with V = Winf * W0^(-1).  A differential of interest is
v(x)^T * b0 * dx/r with polynomial v-entries.
"""

from __future__ import annotations

import math
import threading
from fractions import Fraction

from . import expansions as xp
from . import places as pl
from .padics import PadicScalar, PadicSeries
from .rationals import (
    QX,
    FunctionField,
    gp_add,
    gp_deg,
    gp_deriv,
    gp_div_exact,
    gp_divmod,
    gp_eval,
    gp_gcd,
    gp_mul,
    gp_resultant,
    gp_trim,
    mat_inverse,
    mat_mul,
    mat_transpose,
    mat_vec,
    p_primitive,
    p_to_ints,
    pfrac,
)
from .zmodp import fp_gcd, fp_norm, zp_eval, zp_from_fractions

# Gram ranks for the genus cross-check are taken modulo one fixed large
# prime.  A rank drop there can only raise a false alarm, never smuggle in a
# wrong genus silently: the exact recheck is the cohomology dimension.
_CHECK_PRIME = 2 ** 61 - 1


class CurveError(ValueError):
    """Invalid or unsupported curve/point input."""


class ValidationFailure(CurveError):
    """A necessary good-reduction condition failed at p."""


# ---------------------------------------------------------------------------
# discriminant and its radical


def discriminant_y(q_rows):
    """Discriminant of Q with respect to y, as an integer polynomial in x."""
    f = tuple(QX(pfrac(row)) for row in q_rows)
    d = len(f) - 1
    fy = tuple((i + 1) * f[i + 1] for i in range(d))
    res = gp_resultant(f, fy)
    if not res.is_polynomial():
        raise ArithmeticError("resultant of integer polynomials grew a denominator")
    sign = -1 if (d * (d - 1) // 2) % 2 else 1
    return p_to_ints(tuple(sign * c for c in res.as_polynomial()))


def squarefree_radical(delta_ints):
    """Squarefree radical of the discriminant: delta / gcd(delta, delta'),
    normalized to the primitive integer polynomial with positive leading
    coefficient.

    The normalization matters: differentials are presented against dx/r, so
    a constant factor in r would rescale every integral."""
    f = pfrac(delta_ints)
    g = gp_gcd(f, gp_deriv(f))
    return p_primitive(p_to_ints(gp_div_exact(f, g)))


# ---------------------------------------------------------------------------
# rational-function plumbing


def _is_laurent(entry):
    if not entry:
        return True
    den = entry.den
    return sum(1 for c in den if c) == 1 and den[-1] == 1


def _laurent_parts(entry):
    """(numerator tuple, k) with entry = num / x^k; entry must be Laurent."""
    if not _is_laurent(entry):
        raise CurveError("matrix entry is not a Laurent polynomial in x")
    return entry.num, len(entry.den) - 1


def _qx_to_s_poly(entry):
    """Coefficients of entry as a polynomial in s = 1/x, ascending in s.

    Only Laurent entries without a pole at infinity qualify."""
    if not entry:
        return ()
    num, k = _laurent_parts(entry)
    if gp_deg(num) > k:
        raise CurveError("entry has a pole at x = infinity")
    out = [Fraction(0)] * (k + 1)
    for j, c in enumerate(num):
        out[k - j] = c
    return gp_trim(out)


def over_r_power(entry, r_fracs):
    """Rewrite a Q(x) element as (num, k) with entry = num / r^k exactly."""
    if not entry:
        return (), 0
    num, den = entry.num, entry.den
    if gp_deg(den) == 0:
        return num, 0
    power = (Fraction(1),)
    for k in range(1, 65):
        power = gp_mul(power, r_fracs)
        quo, rem = gp_divmod(power, den)
        if not rem:
            return gp_trim(gp_mul(num, quo)), k
    raise CurveError("denominator is not a power of r")


def matrix_valuations(mat):
    """(ord at x = 0, ord at x = infinity), minimum over nonzero entries."""
    ord0 = None
    ordinf = None
    for row in mat:
        for entry in row:
            if not entry:
                continue
            z = entry.ord_at_zero()
            i = entry.ord_at_infinity()
            ord0 = z if ord0 is None else min(ord0, z)
            ordinf = i if ordinf is None else min(ordinf, i)
    if ord0 is None:
        raise ValueError("zero matrix has no valuation")
    return ord0, ordinf


def _as_qx(c):
    if isinstance(c, QX):
        return c
    if isinstance(c, (int, Fraction)):
        return QX(c)
    if isinstance(c, (tuple, list)):
        return QX(c)
    if isinstance(c, dict):
        return QX(c.get("num", 0), c.get("den", 1))
    raise CurveError(f"cannot read matrix entry {c!r}")


def _assert_poly(entry, what):
    if not entry.is_polynomial():
        raise ArithmeticError(f"{what} should be polynomial but has a denominator")
    return entry.as_polynomial()


def _trim_ints(row):
    out = [int(c) for c in row]
    while out and out[-1] == 0:
        out.pop()
    return tuple(out)


# ---------------------------------------------------------------------------
# the curve


class CurveData:
    """All exact precomputed data of one curve at one prime.

    Build through build_curve, which memoizes per process: construction
    factors the discriminant and measures every fiber over the branch locus,
    so it is far from free."""

    def __init__(self, q_rows, W0, Winf, p, N, genus=None, name=""):
        self.name = name or "curve"
        self.p = int(p)
        self.N = int(N)
        if self.p < 3 or not _is_prime(self.p):
            raise CurveError("p must be an odd prime")
        if self.N < 1:
            raise CurveError("precision N must be at least 1")
        self.q_rows = tuple(_trim_ints(row) for row in q_rows)
        if self.q_rows[-1] != (1,):
            raise CurveError("Q must be monic in y")
        self.d = len(self.q_rows) - 1
        if self.d < 2:
            raise CurveError("degree in y must be at least 2")
        self.dy_degree = max(len(row) - 1 for row in self.q_rows if row)
        _check_irreducible(self.q_rows)

        self.delta = discriminant_y(self.q_rows)
        self.r_ints = squarefree_radical(self.delta)
        self.r_fracs = pfrac(self.r_ints)
        self.rho = len(self.r_ints) - 1
        self.rprime_ints = _trim_ints(
            [i * c for i, c in enumerate(self.r_ints)][1:])
        self.r_qx = QX(self.r_ints)

        self.W0 = [[_as_qx(c) for c in row] for row in W0]
        self.Winf = [[_as_qx(c) for c in row] for row in Winf]
        if len(self.W0) != self.d or len(self.Winf) != self.d or \
                any(len(row) != self.d for row in self.W0 + self.Winf):
            raise CurveError("basis matrices must be square of size deg_y Q")
        unit_row = [QX(1)] + [QX(0)] * (self.d - 1)
        if self.W0[0] != unit_row or self.Winf[0] != unit_row:
            raise CurveError("first basis function must be the constant 1")
        try:
            self.W0inv = mat_inverse(self.W0)
            self.Winfinv = mat_inverse(self.Winf)
        except ArithmeticError as exc:
            raise CurveError("basis matrix is singular") from exc
        self.V = mat_mul(self.Winf, self.W0inv)
        self.Vinv = mat_mul(self.W0, self.Winfinv)
        for row in self.V + self.Vinv:
            for entry in row:
                if not _is_laurent(entry):
                    raise CurveError(
                        "transition between the two bases must be Laurent in x")

        self.field = FunctionField(self.q_rows)
        self.b0 = [self.field.from_y_poly(row) for row in self.W0]
        self.binf = [self.field.from_y_poly(row) for row in self.Winf]

        # row k of P0 holds the b0-coordinates of y^k; polynomial entries
        # because every power of y is integral over Q[x]
        self.P0 = [[_assert_poly(c, "y-power coordinates") for c in row]
                   for row in self.W0inv]
        self._P0T = mat_transpose(self.W0inv)

        self._derivation_matrices()
        self._structure_constants()
        self._trace_data()

        self.ord0_V, self.ordinf_V = matrix_valuations(self.V)
        self.ord0_Vinv, self.ordinf_Vinv = matrix_valuations(self.Vinv)

        self._infinite_fiber = pl.QFiber(self._fiber_table_inf())
        self.infinite_places = sorted(
            self._infinite_fiber.decompose(), key=_place_sort_key)
        self.e0_bound = self.d
        self.e0_infinite = max(plc.e_P for plc in self.infinite_places)

        self._rational_fibers = {}
        self.genus = self._settle_genus(genus)

        self._lock = threading.Lock()
        self._exp_cache = {}
        self._disk_cache = {}
        self._inf_exp_cache = {}
        self._problem_cache = {}

    # -- exact derived matrices -------------------------------------------

    def _derivation_matrices(self):
        d = self.d
        q_y = self.field.from_y_poly(
            [(i + 1) * QX(pfrac(self.q_rows[i + 1])) for i in range(d)])
        q_x = self.field.from_y_poly(
            [QX(gp_deriv(pfrac(row))) for row in self.q_rows])
        self._yprime = -(q_x * q_y.inverse())

        self.D0 = [mat_vec(self._P0T, self._ddx(b).coords) for b in self.b0]
        self.M0 = [[_assert_poly(self.r_qx * c, "r * D0") for c in row]
                   for row in self.D0]
        self.M0T = [list(col) for col in zip(*self.M0)]

        vprime = [[c.deriv() for c in row] for row in self.V]
        vd = mat_mul(self.V, self.D0)
        self.Cinf = mat_mul(
            [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(vprime, vd)],
            self.Vinv)
        # r * Cinf is Laurent in x (V and Vinv contribute 1/x powers that r
        # need not clear), but its top degree is capped at deg(r) - 1: the
        # derivative of an integral element at infinity gains a zero of order
        # e_P, which is exactly one x-degree.  The x^(rho-1) coefficient
        # drives the pole-order reduction at infinity.
        self.Minf = [[self.r_qx * c for c in row] for row in self.Cinf]
        self.A_top = []
        for row in self.Minf:
            arow = []
            for entry in row:
                num, k = _laurent_parts(entry)
                if gp_deg(num) - k > self.rho - 1:
                    raise ArithmeticError(
                        "infinite derivation matrix exceeds its degree bound")
                top = k + self.rho - 1
                arow.append(Fraction(num[top]) if 0 <= top <= gp_deg(num)
                            else Fraction(0))
            self.A_top.append(arow)

    def _ddx(self, elem):
        """d/dx of a function written in powers of y."""
        d = self.d
        part1 = self.field.elem([c.deriv() for c in elem.coords])
        shifted = [(k + 1) * elem.coords[k + 1] for k in range(d - 1)] + [QX(0)]
        return part1 + self.field.elem(shifted) * self._yprime

    def _structure_constants(self):
        d = self.d
        self.nconst = {}
        self.ninf = {}
        winf_t = mat_transpose(self.Winfinv)
        for i in range(d):
            for j in range(i, d):
                prod = self.b0[i] * self.b0[j]
                self.nconst[(i, j)] = [
                    _assert_poly(c, "finite structure constants")
                    for c in mat_vec(self._P0T, prod.coords)]
                prod_inf = self.binf[i] * self.binf[j]
                self.ninf[(i, j)] = [
                    _qx_to_s_poly(c)
                    for c in mat_vec(winf_t, prod_inf.coords)]

    def _trace_data(self):
        d = self.d
        self.trace_vec = [
            _assert_poly(b.trace(), "trace of a basis function")
            for b in self.b0]
        self.trace_gram = []
        for i in range(d):
            row = []
            for j in range(d):
                key = (i, j) if i <= j else (j, i)
                acc = ()
                for m, poly in enumerate(self.nconst[key]):
                    acc = gp_add(acc, gp_mul(poly, self.trace_vec[m]))
                row.append(gp_trim(acc))
            self.trace_gram.append(row)

    # -- fibers over the branch locus ---------------------------------------

    def _fiber_table_inf(self):
        d = self.d
        return [[[poly[0] if poly else Fraction(0)
                  for poly in self.ninf[(i, j) if i <= j else (j, i)]]
                 for j in range(d)] for i in range(d)]

    def fiber_at_rational(self, x0):
        """Exact fiber algebra at a rational x-value (cached on the curve)."""
        x0 = Fraction(x0)
        fiber = self._rational_fibers.get(x0)
        if fiber is None:
            d = self.d
            table = [[[gp_eval(poly, x0)
                       for poly in self.nconst[(i, j) if i <= j else (j, i)]]
                      for j in range(d)] for i in range(d)]
            fiber = pl.QFiber(table)
            self._rational_fibers[x0] = fiber
        return fiber

    def _settle_genus(self, declared):
        """Genus from the ramification count over the branch locus.

        The rank of each trace form is measured mod _CHECK_PRIME; a mismatch
        with the declared genus is a hard error.  When no genus is declared
        the count itself is adopted (and the cohomology rank later confirms
        it exactly)."""
        import sympy

        x = sympy.Symbol("x")
        total = 0
        for f, mult in sympy.Poly(list(reversed(self.r_ints)), x).factor_list()[1]:
            if mult != 1:
                raise ArithmeticError("radical r was not squarefree")
            f_ints = _trim_ints(list(reversed(f.all_coeffs())))
            total += self.d * (len(f_ints) - 1) - self._branch_ss_dim(f_ints)
        total += self.d - self._infinite_fiber.semisimple_dim()
        two_g = 2 - 2 * self.d + total
        if two_g % 2 or two_g < 0:
            raise ArithmeticError("ramification count is inconsistent")
        g = two_g // 2
        if declared is not None and int(declared) != g:
            raise CurveError(
                f"declared genus {declared} contradicts the ramification count {g}")
        return g

    def _branch_ss_dim(self, f_ints):
        """Rank (mod _CHECK_PRIME) of the trace form on the fiber algebra
        over one irreducible factor f of r."""
        ell = _CHECK_PRIME
        nf = len(f_ints) - 1
        lc_inv = pow(f_ints[-1] % ell, -1, ell)
        fm = [c % ell * lc_inv % ell for c in f_ints]

        # power sums of the roots of f via Newton's identities
        s = [nf % ell]
        for k in range(1, 2 * nf):
            acc = 0
            for i in range(1, min(k, nf + 1)):
                acc -= fm[nf - i] * s[k - i]
            if k <= nf:
                acc -= k * fm[nf - k]
            s.append(acc % ell)

        def reduce_mod_f(coeffs):
            out = [c % ell for c in coeffs]
            while len(out) > nf:
                top = out.pop()
                if top:
                    for i in range(nf):
                        out[-nf + i] = (out[-nf + i] - top * fm[i]) % ell
            return out + [0] * (nf - len(out))

        def trace_kf(poly_mod):
            return sum(c * s[i] for i, c in enumerate(poly_mod)) % ell

        d = self.d
        taus = [reduce_mod_f(_fracs_mod(self.trace_vec[m], ell))
                for m in range(d)]
        npoly = {key: [reduce_mod_f(_fracs_mod(poly, ell)) for poly in polys]
                 for key, polys in self.nconst.items()}
        xpow = [reduce_mod_f([0] * a + [1]) for a in range(2 * nf - 1)]

        D = d * nf
        gram = [[0] * D for _ in range(D)]
        for i in range(d):
            for j in range(i, d):
                for a in range(nf):
                    for c in range(nf):
                        val = 0
                        for m in range(d):
                            prod = _mulmod_f(npoly[(i, j)][m], xpow[a + c], fm, ell)
                            val += trace_kf(_mulmod_f(prod, taus[m], fm, ell))
                        val %= ell
                        gram[i * nf + a][j * nf + c] = val
                        gram[j * nf + c][i * nf + a] = val
        return xp._rank_modp(gram, ell)

    # -- infinite places ----------------------------------------------------

    def rational_infinite_places(self):
        return [plc for plc in self.infinite_places if plc.rational]

    def infinite_expansion(self, place_index, L):
        """Exact series in t of (s, binf_0..binf_{d-1}) at a rational
        infinite place, with s = 1/x; cached per (place, L)."""
        key = (place_index, L)
        with self._lock:
            hit = self._inf_exp_cache.get(key)
        if hit is not None:
            return hit
        place = self.infinite_places[place_index]
        if not place.rational:
            raise CurveError("infinite place is not rational over Q")
        problem = self.expansion_problem(True, xp.QOps())
        center = [Fraction(0)] + [Fraction(b) for b in place.beta]
        coord, _, series = xp.expand_at_point(problem, center, L)
        out = (coord, series)
        with self._lock:
            self._inf_exp_cache[key] = out
        return out

    def expansion_problem(self, infinite, ops):
        """Structure constants converted to ops scalars, memoized."""
        key = (bool(infinite), ops.name)
        with self._lock:
            hit = self._problem_cache.get(key)
        if hit is not None:
            return hit
        source = self.ninf if infinite else self.nconst
        nconst = {k: [[_ops_scalar(ops, c) for c in poly] for poly in polys]
                  for k, polys in source.items()}
        problem = xp.ExpansionProblem(self.d, nconst, ops)
        with self._lock:
            return self._problem_cache.setdefault(key, problem)


def _place_sort_key(place):
    beta = place.beta if place.beta is not None else []
    return (0 if place.rational else 1, place.e_P, [str(b) for b in beta])


def _fracs_mod(fracs, m):
    return [c.numerator % m * pow(c.denominator % m, -1, m) % m for c in fracs]


def _mulmod_f(f, g, fm, m):
    nf = len(fm) - 1
    if not f or not g:
        return [0] * nf
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if not a:
            continue
        for j, b in enumerate(g):
            if b:
                out[i + j] = (out[i + j] + a * b) % m
    while len(out) > nf:
        top = out.pop()
        if top:
            for i in range(nf):
                out[-nf + i] = (out[-nf + i] - top * fm[i]) % m
    return out + [0] * (nf - len(out))


def _ops_scalar(ops, c):
    c = Fraction(c)
    if isinstance(ops, xp.QOps):
        return c
    if c.denominator % ops.p == 0:
        raise ArithmeticError("coefficient has p in its denominator")
    return c.numerator * pow(c.denominator, -1, ops.m) % ops.m


def _is_prime(n):
    import sympy

    return bool(sympy.isprime(n))


def _check_irreducible(q_rows):
    import sympy

    x, y = sympy.symbols("x y")
    expr = 0
    for i, row in enumerate(q_rows):
        for j, c in enumerate(row):
            if c:
                expr += c * x ** j * y ** i
    factors = [(f, m) for f, m in sympy.Poly(expr, x, y).factor_list()[1]
               if f.total_degree() > 0]
    if len(factors) != 1 or factors[0][1] != 1:
        raise CurveError("Q is reducible over Q")


_BUILD_CACHE = {}
_BUILD_LOCK = threading.Lock()


def build_curve(q_rows, W0, Winf, p, N, genus=None, name=""):
    """Construct (or fetch from the process cache) the exact curve data."""
    key = (tuple(_trim_ints(row) for row in q_rows),
           _matrix_key(W0), _matrix_key(Winf), int(p), int(N), genus)
    with _BUILD_LOCK:
        hit = _BUILD_CACHE.get(key)
    if hit is not None:
        return hit
    built = CurveData(q_rows, W0, Winf, p, N, genus=genus, name=name)
    with _BUILD_LOCK:
        return _BUILD_CACHE.setdefault(key, built)


def _matrix_key(mat):
    rows = []
    for row in mat:
        entries = []
        for c in row:
            q = _as_qx(c)
            entries.append((q.num, q.den))
        rows.append(tuple(entries))
    return tuple(rows)


# ---------------------------------------------------------------------------
# good-reduction validation


def validate_good_reduction(curve):
    """Necessary conditions for good reduction at p, as a report.

    Each item is (condition, passed, detail).  These conditions do not prove
    good reduction; the pipeline refuses to run when any of them fails."""
    p = curve.p
    report = [("p is an odd prime", p % 2 == 1 and _is_prime(p), f"p = {p}")]

    rbar = [c % p for c in curve.r_ints]
    deg_ok = rbar[-1] != 0
    sqfree = False
    if deg_ok:
        der = [i * c % p for i, c in enumerate(rbar)][1:]
        sqfree = len(fp_gcd(fp_norm(rbar, p), fp_norm(der, p), p)) == 1
    report.append((
        "r mod p is squarefree of full degree",
        deg_ok and sqfree,
        f"deg r = {curve.rho}, leading coefficient {curve.r_ints[-1] % p} mod p",
    ))

    integral = True
    culprit = None
    for nm, mat in (("W0", curve.W0), ("Winf", curve.Winf),
                    ("W0^-1", curve.W0inv), ("Winf^-1", curve.Winfinv)):
        for row in mat:
            for entry in row:
                for c in list(entry.num) + list(entry.den):
                    if c.denominator % p == 0:
                        integral = False
                        culprit = culprit or nm
    report.append((
        "basis matrices and inverses are p-integral",
        integral,
        "all coefficient denominators prime to p" if integral
        else f"{culprit} has a denominator divisible by {p}",
    ))

    report.append((
        "leading coefficient of Q in y is a p-adic unit", True,
        "Q is monic in y",
    ))
    return report


def require_good_reduction(curve):
    report = validate_good_reduction(curve)
    failures = [item for item in report if not item[1]]
    if failures:
        lines = "; ".join(f"{name} ({detail})" for name, _, detail in failures)
        raise ValidationFailure(f"good-reduction conditions failed: {lines}")
    return report


# ---------------------------------------------------------------------------
# points


class CurvePoint:
    """A point carried as its x-value plus the values of the basis functions.

    Finite presentation: x_value = x(P) and b_values = b0(P).  Infinite
    presentation: x_value = 1/x(P) and b_values = binf(P).  All values are
    integral scalars; ramified values are allowed (e > 1)."""

    __slots__ = ("x_value", "b_values", "is_infinite", "e", "e_P_hint")

    def __init__(self, x_value, b_values, is_infinite=False):
        self.x_value = x_value
        self.b_values = list(b_values)
        self.is_infinite = bool(is_infinite)
        self.e = max(v.e for v in [x_value] + self.b_values)
        self.e_P_hint = None
        for v in [x_value] + self.b_values:
            if not v.is_zero() and v.valuation < 0:
                raise CurveError("point values must be p-adically integral")

    @property
    def precision(self):
        return min(v.precision for v in [self.x_value] + self.b_values)

    def reduction_key(self):
        vals = [_residue(self.x_value)] + [_residue(b) for b in self.b_values]
        return (self.is_infinite,) + tuple(vals)

    def __repr__(self):
        kind = "inf" if self.is_infinite else "fin"
        vals = ", ".join(b.render() for b in self.b_values)
        return f"CurvePoint({kind}, x={self.x_value.render()}, b=[{vals}])"


def _residue(scalar):
    """Image in F_p of an integral scalar."""
    if scalar.is_zero():
        return 0
    if scalar.v < 0:
        raise CurveError("cannot reduce a non-integral value")
    if scalar.v > 0:
        return 0
    return scalar.digits[0] % scalar.p


def _finite_prec(prec, fallback):
    return fallback if prec == math.inf else prec


def point_from_xy(curve, x, y, prec=None):
    """Finite point from exact rational plane coordinates.

    Over a branch x-value the basis matrix cannot be evaluated directly; the
    exact fiber decomposition supplies the b-values there instead."""
    prec = curve.N if prec is None else prec
    x, y = Fraction(x), Fraction(y)
    p = curve.p
    if x.denominator % p == 0:
        raise CurveError("x-coordinate is not integral; present the point "
                         "on the infinite chart")
    value = Fraction(0)
    ypow = Fraction(1)
    for row in curve.q_rows:
        value += gp_eval(pfrac(row), x) * ypow
        ypow *= y
    if value != 0:
        raise CurveError("the coordinates do not satisfy the plane model")
    if gp_eval(curve.r_fracs, x) != 0:
        bvals = []
        for row in curve.W0:
            acc = Fraction(0)
            ypow = Fraction(1)
            for entry in row:
                if entry:
                    acc += entry.eval(x) * ypow
                ypow *= y
            bvals.append(acc)
    else:
        matches = []
        for place in curve.fiber_at_rational(x).decompose():
            if not place.rational:
                continue
            yval = sum(gp_eval(curve.P0[1][i], x) * place.beta[i]
                       for i in range(curve.d))
            if yval == y:
                matches.append(place)
        if len(matches) != 1:
            raise CurveError(
                "could not identify the point among the places over its x-value")
        bvals = matches[0].beta
    xs = PadicScalar.from_rational(x, p, prec)
    bs = [PadicScalar.from_rational(b, p, prec) for b in bvals]
    return CurvePoint(xs, bs, is_infinite=False)


def point_at_infinity(curve, binf_values, prec=None, s_value=0):
    """Point on the infinite chart; the chart coordinate s = 1/x defaults
    to 0 (a point lying over x = infinity itself)."""
    prec = curve.N if prec is None else prec
    p = curve.p
    s = (s_value if isinstance(s_value, PadicScalar)
         else PadicScalar.from_rational(Fraction(s_value), p, prec))
    bs = [b if isinstance(b, PadicScalar)
          else PadicScalar.from_rational(Fraction(b), p, prec)
          for b in binf_values]
    return CurvePoint(s, bs, is_infinite=True)


def validate_point(curve, point):
    """Check the algebraic relations among the stored values.

    Comparison is up to the joint precision: a visible mismatch raises, an
    indistinguishable pair passes."""
    p = curve.p
    prec = _finite_prec(point.precision, curve.N)
    one = PadicScalar.from_int(1, p, prec)
    if point.b_values[0].compare(one) == "ne":
        raise CurveError("b_values[0] must be 1")
    table = curve.ninf if point.is_infinite else curve.nconst
    var = point.x_value
    for i in range(curve.d):
        for j in range(i, curve.d):
            lhs = point.b_values[i] * point.b_values[j]
            rhs = PadicScalar.zero(p)
            for m, poly in enumerate(table[(i, j)]):
                if not poly:
                    continue
                coeff = _poly_at_scalar(poly, var, p, prec)
                rhs = rhs + coeff * point.b_values[m]
            if lhs.compare(rhs) == "ne":
                raise CurveError(f"point violates the relation for b_{i} * b_{j}")
    return True


def _poly_at_scalar(fracs, scalar, p, prec):
    acc = PadicScalar.zero(p)
    for c in reversed(fracs):
        acc = acc * scalar + PadicScalar.from_rational(c, p, prec)
    return acc


def evaluate_function(curve, coeffs, point):
    """Value at the point of sum_i g_i(x) b_i, read in the point's frame.

    coeffs are rational functions against b0 for a finite point; for an
    infinite point they are read against binf with x = 1/s, so they must be
    Laurent without a pole at infinity."""
    p = curve.p
    prec = _finite_prec(point.precision, curve.N)
    total = PadicScalar.zero(p)
    for g, b in zip(coeffs, point.b_values):
        g = _as_qx(g)
        if not g:
            continue
        if point.is_infinite:
            val = _poly_at_scalar(_qx_to_s_poly(g), point.x_value, p, prec)
        else:
            num = _poly_at_scalar(g.num, point.x_value, p, prec)
            den = _poly_at_scalar(g.den, point.x_value, p, prec)
            if den.is_zero():
                raise CurveError("function has a pole at the point")
            val = num / den
        total = total + val * b
    return total


# ---------------------------------------------------------------------------
# disks, classification, very bad points


class DiskClassification:
    __slots__ = ("kind", "very_bad", "e_P")

    def __init__(self, kind, very_bad, e_P):
        self.kind = kind
        self.very_bad = very_bad
        self.e_P = e_P

    def __repr__(self):
        flag = ", very bad" if self.very_bad else ""
        return f"DiskClassification({self.kind}{flag}, e_P={self.e_P})"


def classify_point(curve, point):
    """Good / finite-bad / infinite, with the ramification index of the
    disk's very bad point (1 for a good disk)."""
    p = curve.p
    if point.is_infinite:
        if _residue(point.x_value) != 0:
            raise CurveError("infinite presentation with 1/x a p-adic unit; "
                             "present the point on the finite chart")
        center = find_very_bad_point(curve, point)
        return DiskClassification(
            "infinite", _same_point(point, center), center.e_P_hint)
    if zp_eval([c % p for c in curve.r_ints], _residue(point.x_value), p) != 0:
        return DiskClassification("good", False, 1)
    center = find_very_bad_point(curve, point)
    return DiskClassification(
        "finite-bad", _same_point(point, center), center.e_P_hint)


def _same_point(a, b):
    if a.is_infinite != b.is_infinite:
        return False
    if a.x_value.compare(b.x_value) == "ne":
        return False
    return all(u.compare(v) != "ne" for u, v in zip(a.b_values, b.b_values))


def _disk_record(curve, point, prec=None):
    """(x0, beta, e_P, prec_units) for the very bad point of a bad disk,
    cached per residue disk and working precision."""
    p = curve.p
    M = prec if prec is not None else curve.N + 5
    xbar = _residue(point.x_value)
    bbar = tuple(_residue(b) for b in point.b_values)
    key = (point.is_infinite, xbar, bbar, M)
    with curve._lock:
        hit = curve._disk_cache.get(key)
    if hit is not None:
        return hit
    if point.is_infinite:
        x0 = 0
        fiber = pl.ZpFiber.at_center(curve.ninf, curve.d, 0, p, M)
    else:
        x0 = _hensel_root(curve.r_ints, xbar, p, M)
        fiber = pl.ZpFiber.at_center(curve.nconst, curve.d, x0, p, M)
    beta, e_P, loss = fiber.locate(list(bbar))
    record = (x0, beta, e_P, M - loss)
    with curve._lock:
        return curve._disk_cache.setdefault(key, record)


def _hensel_root(r_ints, xbar, p, M):
    """The root of r in Z/p^M reducing to a simple root xbar mod p."""
    der = [i * c for i, c in enumerate(r_ints)][1:]
    if zp_eval([c % p for c in r_ints], xbar, p) != 0:
        raise ArithmeticError("no root of r in this disk")
    if zp_eval([c % p for c in der], xbar, p) == 0:
        raise ArithmeticError("r mod p is not squarefree at this root")
    x = xbar
    prec = 1
    while prec < M:
        prec = min(2 * prec, M)
        m = p ** prec
        fx = zp_eval([c % m for c in r_ints], x, m)
        dfx = zp_eval([c % m for c in der], x, m)
        x = (x - fx * pow(dfx, -1, m)) % m
    return x


def find_very_bad_point(curve, point, prec=None):
    """The unique very bad point of the point's bad residue disk."""
    p = curve.p
    if not point.is_infinite:
        rbar = zp_eval([c % p for c in curve.r_ints],
                       _residue(point.x_value), p)
        if rbar != 0:
            raise CurveError("point lies in a good disk; it has no very bad point")
    x0, beta, e_P, prec_units = _disk_record(curve, point, prec)
    xs = PadicScalar.from_int(x0, p, prec_units)
    bs = [PadicScalar.from_int(b, p, prec_units) for b in beta]
    out = CurvePoint(xs, bs, is_infinite=point.is_infinite)
    out.e_P_hint = e_P
    return out


# ---------------------------------------------------------------------------
# local coordinates and expansions


class CoordinateChoice:
    """Which coordinate difference serves as the local parameter t."""

    __slots__ = ("kind", "index")

    def __init__(self, kind, index=None):
        self.kind = kind  # "x", "s", or "b"
        self.index = index

    def describe(self):
        if self.kind == "x":
            return "x - x(P)"
        if self.kind == "s":
            return "1/x"
        return f"b[{self.index}] - b[{self.index}](P)"

    def __eq__(self, other):
        return (isinstance(other, CoordinateChoice)
                and (self.kind, self.index) == (other.kind, other.index))

    def __repr__(self):
        return f"CoordinateChoice({self.describe()})"


class LocalExpansion:
    """Series in the local parameter t at the canonical center of a disk.

    xt expands x (or 1/x at an infinite center) and bt the basis functions,
    all certified mod (p^M, t^l).  x_ints and b_ints carry the same data as
    plain integer coefficient lists for fast downstream arithmetic."""

    __slots__ = ("center", "coordinate_choice", "e_P", "xt", "bt", "l",
                 "x_ints", "b_ints", "M", "p")

    def __init__(self, center, choice, e_P, xt, bt, l, x_ints, b_ints, M, p):
        self.center = center
        self.coordinate_choice = choice
        self.e_P = e_P
        self.xt = xt
        self.bt = bt
        self.l = l
        self.x_ints = x_ints
        self.b_ints = b_ints
        self.M = M
        self.p = p


def choose_local_coordinate(curve, point):
    """Deterministic uniformizer at a good or very bad point: the chart
    coordinate when it works, else the first basis function that does."""
    cls = classify_point(curve, point)
    if cls.kind == "good":
        return CoordinateChoice("x")
    if not cls.very_bad:
        raise CurveError("local coordinates are chosen at good or very bad points")
    ops = xp.POps(curve.p, 1)
    problem = curve.expansion_problem(point.is_infinite, ops)
    center = [_residue(point.x_value)] + [_residue(b) for b in point.b_values]
    coord, _ = xp.choose_uniformizer(problem, center)
    if coord == 0:
        return CoordinateChoice("s" if point.is_infinite else "x")
    return CoordinateChoice("b", coord - 1)


def expand_at_point(curve, point, l, M=None):
    """LocalExpansion at the canonical center of the point's disk.

    The center is the point itself when its values are unramified; a
    ramified point in a good disk is replaced by the disk's plain center,
    and any non-central point of a bad disk by the very bad point, so that
    all series coefficients live in Z_p."""
    p = curve.p
    M = M if M is not None else curve.N + 2
    cls = classify_point(curve, point)
    if l <= max(cls.e_P, 1):
        raise CurveError("series order l must exceed the ramification index")
    if cls.kind == "good":
        center = point if point.e == 1 else _good_disk_center(curve, point, M)
    else:
        center = find_very_bad_point(curve, point, prec=M)
    M_eff = min(M, int(_finite_prec(center.precision, M)))
    lift = tuple(v.lift_int() % p ** M_eff
                 for v in [center.x_value] + center.b_values)
    cache_key = (center.is_infinite, lift, l, M_eff)
    with curve._lock:
        hit = curve._exp_cache.get(cache_key)
    if hit is not None:
        return hit
    expansion = _expand_at_center(curve, center, cls.e_P, l, M_eff)
    with curve._lock:
        return curve._exp_cache.setdefault(cache_key, expansion)


def _good_disk_center(curve, point, M):
    """Unramified representative of a good disk: the small integer lift of
    the x-residue and the matching Hensel lift of the fiber values."""
    p = curve.p
    m = p ** M
    xbar = _residue(point.x_value)
    ybar = sum(zp_eval(zp_from_fractions(curve.P0[1][i], p, 1), xbar, p)
               * _residue(point.b_values[i]) for i in range(curve.d)) % p
    qco = [zp_eval(zp_from_fractions(pfrac(row), p, M), xbar, m)
           for row in curve.q_rows]
    y0 = _newton_root(qco, ybar, p, M)
    bvals = []
    for row in curve.W0:
        acc = 0
        ypow = 1
        for entry in row:
            if entry:
                num = zp_eval(zp_from_fractions(entry.num, p, M), xbar, m)
                den = zp_eval(zp_from_fractions(entry.den, p, M), xbar, m)
                if den % p == 0:
                    raise ArithmeticError(
                        "basis denominator vanished in a good disk")
                acc = (acc + num * pow(den, -1, m) * ypow) % m
            ypow = ypow * y0 % m
        bvals.append(acc)
    xs = PadicScalar.from_int(xbar, p, M)
    bs = [PadicScalar.from_int(b, p, M) for b in bvals]
    return CurvePoint(xs, bs, is_infinite=False)


def _newton_root(coeffs, xbar, p, M):
    """Root of an integer polynomial mod p^M above a simple root mod p."""
    der = [i * c for i, c in enumerate(coeffs)][1:]
    if zp_eval([c % p for c in coeffs], xbar, p) != 0:
        raise ArithmeticError("reduction is not a root")
    if zp_eval([c % p for c in der], xbar, p) == 0:
        raise ArithmeticError("root is not simple; the disk is not good")
    x = xbar
    prec = 1
    while prec < M:
        prec = min(2 * prec, M)
        m = p ** prec
        fx = zp_eval([c % m for c in coeffs], x, m)
        dfx = zp_eval([c % m for c in der], x, m)
        x = (x - fx * pow(dfx, -1, m)) % m
    return x


def _expand_at_center(curve, center, e_P, l, M):
    p = curve.p
    m = p ** M
    ops = xp.POps(p, M)
    problem = curve.expansion_problem(center.is_infinite, ops)
    cvals = [v.lift_int() % m for v in [center.x_value] + center.b_values]
    coord, _, series = xp.expand_at_point(problem, cvals, l)
    x_ints, b_ints = series[0], series[1:]

    # the x-expansion must vanish to order exactly e_P past its center
    # value, with a unit leading coefficient (the reduced curve ramifies the
    # same way because r stays squarefree mod p)
    lead = next((i for i in range(1, l) if x_ints[i] % p != 0), None)
    if lead != e_P or any(x_ints[i] % m for i in range(1, e_P)):
        raise ArithmeticError(
            "x-expansion valuation disagrees with the ramification index")

    choice = (CoordinateChoice("s") if center.is_infinite and coord == 0
              else CoordinateChoice("x") if coord == 0
              else CoordinateChoice("b", coord - 1))
    xt = _ints_to_series(x_ints, p, M)
    bt = [_ints_to_series(bi, p, M) for bi in b_ints]
    return LocalExpansion(center, choice, e_P, xt, bt, l, x_ints, b_ints, M, p)


def _ints_to_series(ints, p, M):
    return PadicSeries(0, [PadicScalar.from_int(c, p, M) for c in ints],
                       len(ints))
