"""Frobenius structure on the first cohomology of the curve.

The pipeline: lift the p-power map to the weak completion of the coordinate
ring of the curve away from its branch locus, pull every basis differential
back through the lift, and reduce the pole orders of the result, first at the
branch locus, then at infinity, until only a combination of the basis forms
plus an exact differential remains.  The combination coefficients assemble
the matrix of Frobenius; the exact pieces are the primitives that evaluation
of integrals consumes.

Heavy arithmetic runs on fixed-modulus integers (zmodp).  Every inverse a
reduction step needs is prepared once per curve over exact rationals, so the
mod p^M work is all multiplication.  Divisions by p that the method cannot
avoid are pulled out into a running scale: the integers in play always
represent p^sigma times the true values, and sigma only grows, so precision
erodes visibly instead of corrupting digits in place.  Each algebraic
identity the reduction relies on (killed pole digits, Laurent tails that
must vanish, the final linear solve) is re-checked numerically; the worst
observed defect is tallied and anything beyond the guard budget raises."""

from __future__ import annotations

import json
from fractions import Fraction

from .curve import CurveError, over_r_power
from .expansions import QOps, ts_inv_unit, ts_mul
from .precision import PrecisionError, floor_log
from .rationals import (QX, gp_add, gp_deg, gp_deriv, gp_divmod, gp_mul,
                        gp_scale, gp_sub, gp_trim, mat_inverse, mat_nullspace,
                        mat_rref, mat_transpose, p_clear_denominators, pfrac)
from .zmodp import (ApRing, RContext, _int_val, zmod_solve, zp_add, zp_deriv,
                    zp_from_fractions, zp_mul, zp_norm, zp_scale, zp_sub,
                    zp_subst_xp, zp_trim)


class InvariantViolation(ArithmeticError):
    """An algebraic identity the pipeline relies on failed numerically."""


_QOPS = QOps()


# ---------------------------------------------------------------------------
# integer Laurent vectors: (offset, coefficient list), zero is (0, [])


def _lau(off, coeffs):
    coeffs = list(coeffs)
    while coeffs and coeffs[-1] == 0:
        coeffs.pop()
    while coeffs and coeffs[0] == 0:
        coeffs.pop(0)
        off += 1
    if not coeffs:
        return (0, [])
    return (off, coeffs)


def _lau_coeff(a, n):
    off, c = a
    if off <= n < off + len(c):
        return c[n - off]
    return 0


def _lau_deg(a):
    off, c = a
    if not c:
        return None
    return off + len(c) - 1


def _lau_add(a, b, m):
    if not a[1]:
        return b
    if not b[1]:
        return a
    off = min(a[0], b[0])
    hi = max(a[0] + len(a[1]), b[0] + len(b[1]))
    out = [0] * (hi - off)
    for src_off, src in (a, b):
        for i, c in enumerate(src):
            out[src_off - off + i] = (out[src_off - off + i] + c) % m
    return _lau(off, out)


def _lau_scale(a, c, m):
    c %= m
    if c == 0 or not a[1]:
        return (0, [])
    return _lau(a[0], [x * c % m for x in a[1]])


def _lau_shift(a, k):
    if not a[1]:
        return a
    return (a[0] + k, a[1])


def _lau_mul(a, b, m):
    if not a[1] or not b[1]:
        return (0, [])
    return _lau(a[0] + b[0], zp_mul(list(a[1]), list(b[1]), m))


def _lau_below(a, floor_exp):
    """Split off the part of a supported on exponents < floor_exp."""
    off, c = a
    cut = floor_exp - off
    if cut <= 0:
        return (0, []), a
    low = _lau(off, c[:cut])
    high = _lau(floor_exp, c[cut:])
    return low, high


# ---------------------------------------------------------------------------
# exact rational helpers


def _gp_shift(f, s):
    if not f:
        return ()
    return (Fraction(0),) * s + tuple(f)


def _gp_invmod(f, g):
    """Inverse of f modulo g over exact rationals, by extended Euclid."""
    r0 = gp_trim(tuple(g))
    r1 = gp_divmod(tuple(f), r0)[1]
    if not r1:
        raise ArithmeticError("element is not invertible modulo g")
    s0, s1 = (), (Fraction(1),)
    while gp_deg(r1) > 0:
        q, rr = gp_divmod(r0, r1)
        r0, r1 = r1, rr
        s0, s1 = s1, gp_sub(s0, gp_mul(q, s1))
        if not r1:
            raise ArithmeticError("element is not invertible modulo g")
    return gp_divmod(gp_scale(s1, 1 / r1[0]), g)[1]


def _qx_laurent(entry):
    """(offset, numerator Fractions) with entry = x^offset * num, for a
    Laurent entry whose denominator is a constant times a power of x."""
    num, den = entry.num, entry.den
    if not num:
        return (0, ())
    k = 0
    while k < len(den) and den[k] == 0:
        k += 1
    rest = den[k:]
    if len(rest) != 1:
        raise CurveError("matrix entry is not Laurent in x")
    return (-k, gp_scale(num, 1 / rest[0]))


def _frac_mod(c, p, mod):
    c = Fraction(c)
    if c.denominator % p == 0:
        raise InvariantViolation("exact datum has p in its denominator")
    return c.numerator * pow(c.denominator, -1, mod) % mod


def _lau_from_qx(entry, p, mod):
    off, fracs = _qx_laurent(entry)
    return _lau(off, [_frac_mod(c, p, mod) for c in fracs])


def _denominator_pval(fracs, p):
    s = 0
    for c in fracs:
        den = Fraction(c).denominator
        v = 0
        while den % p == 0:
            den //= p
            v += 1
        s = max(s, v)
    return s


# ---------------------------------------------------------------------------
# truncation and working-precision planning


def dagger_cap(p, m_prec, e0):
    """Deepest pole order of r kept in the weak completion.

    Digits at level k carry at least floor(k/p) + 1 - floor_log(k*e0, p)
    digits of p; the cap is the last level where that bound still falls
    short of the working precision, so everything dropped is invisible
    mod p^m_prec."""
    last_short = 1
    k = 1
    horizon = p * (m_prec + 3)
    while k <= horizon:
        bound = k // p + 1 - floor_log(k * e0, p)
        if bound < m_prec:
            last_short = k
            horizon = max(horizon, p * (m_prec + floor_log(k * e0, p) + 2))
        k += 1
    return last_short


def window_degree(curve):
    """Largest numerator degree the reduced representatives may carry."""
    return curve.rho - 2 - curve.ord0_V


def working_plan(curve, n_target):
    """(working precision, pole cap) with enough guard digits to absorb the
    denominators the reduction steps are allowed to produce."""
    p, e0 = curve.p, curve.e0_bound
    m_prec = n_target + 4
    for _ in range(4):
        cap = dagger_cap(p, m_prec, e0)
        guard = 2 * floor_log(max(cap, 1) * e0, p) + 6
        if n_target + guard == m_prec:
            break
        m_prec = n_target + guard
    return m_prec, dagger_cap(p, m_prec, e0)


# ---------------------------------------------------------------------------
# exact per-curve reduction data (independent of p-power and modulus)


class _SolveTables:
    """Adjugate data for the pole-killing solves at the branch locus.

    With B = (r')^-1 M0^T over Q[x]/(r), holds the characteristic
    coefficients chi and matrices adj_mats with
    adj(T*I - B) = sum_t T^t adj_mats[t], so each level k is solved by
    v = -adj(k*I - B) (r')^-1 c / chi(k)."""

    def __init__(self, curve):
        r = curve.r_fracs
        d = curve.d

        def amul(a, b):
            return gp_divmod(gp_mul(a, b), r)[1]

        rp = gp_deriv(r)
        self.rpinv = _gp_invmod(rp, r)
        b_mat = [[amul(self.rpinv, e) for e in row] for row in curve.M0T]

        ident = [[(Fraction(1),) if i == j else () for j in range(d)]
                 for i in range(d)]
        mk = [row[:] for row in ident]
        chi = [None] * (d + 1)
        chi[d] = (Fraction(1),)
        mats = [mk]
        for j in range(1, d + 1):
            t_mat = [[() for _ in range(d)] for _ in range(d)]
            for i in range(d):
                for l in range(d):
                    acc = ()
                    for s in range(d):
                        if b_mat[i][s] and mk[s][l]:
                            acc = gp_add(acc, gp_mul(b_mat[i][s], mk[s][l]))
                    t_mat[i][l] = gp_divmod(acc, r)[1]
            tr = ()
            for i in range(d):
                tr = gp_add(tr, t_mat[i][i])
            c = gp_scale(tr, Fraction(-1, j))
            chi[d - j] = gp_divmod(c, r)[1]
            mk = [[gp_trim(gp_add(t_mat[i][l], c if i == l else ()))
                   for l in range(d)] for i in range(d)]
            mk = [[gp_divmod(e, r)[1] for e in row] for row in mk]
            if j < d:
                mats.append(mk)
        if any(e for row in mk for e in row):
            raise InvariantViolation(
                "adjugate recurrence did not terminate at zero")
        # adj(T I - B) = sum_t T^t mats[d-1-t]
        self.chi = chi
        self.adj_mats = [mats[d - 1 - t] for t in range(d)]


def _solve_tables(curve):
    cached = getattr(curve, "_coh_solve_tables", None)
    if cached is None:
        cached = _SolveTables(curve)
        curve._coh_solve_tables = cached
    return cached


def _window_tables(curve):
    """Exact basis of the polynomial functions whose infinite-frame image
    stays inside the final degree window, with the differentials they
    contribute.  Cached on the curve."""
    cached = getattr(curve, "_coh_window_tables", None)
    if cached is not None:
        return cached
    d = curve.d
    lam3 = -curve.ord0_V - 1
    deg_cap = lam3 - curve.ordinf_V
    m_allowed = window_degree(curve)
    funcs = []
    if deg_cap >= 0:
        ncols = d * (deg_cap + 1)
        vinv_lau = [[_qx_laurent(curve.Vinv[j][i]) for j in range(d)]
                    for i in range(d)]
        hi = deg_cap - curve.ordinf_Vinv
        rows = []
        for i in range(d):
            for deg in range(lam3 + 1, hi + 1):
                row = []
                for j in range(d):
                    off, fr = vinv_lau[i][j]
                    for s in range(deg_cap + 1):
                        n = deg - s - off
                        row.append(fr[n] if 0 <= n < len(fr) else Fraction(0))
                rows.append(row)
        if rows:
            kernel = mat_nullspace(rows)
        else:
            kernel = [[Fraction(i == t) for i in range(ncols)]
                      for t in range(ncols)]
        for vec in kernel:
            u = []
            for j in range(d):
                u.append(gp_trim(vec[j * (deg_cap + 1):(j + 1) * (deg_cap + 1)]))
            ints, _ = p_clear_denominators(
                tuple(c for poly in u for c in
                      tuple(poly) + (Fraction(0),) * (deg_cap + 1 - len(poly))))
            w = deg_cap + 1
            funcs.append(tuple(gp_trim(Fraction(c) for c in ints[j * w:(j + 1) * w])
                               for j in range(d)))
    diffs = []
    keep = []
    for u in funcs:
        img = []
        for t in range(d):
            acc = gp_mul(curve.r_fracs, gp_deriv(u[t]))
            for s in range(d):
                if curve.M0T[t][s] and u[s]:
                    acc = gp_add(acc, gp_mul(curve.M0T[t][s], u[s]))
            img.append(gp_trim(acc))
        if not any(img):
            continue
        if any(gp_deg(e) > m_allowed for e in img if e):
            raise InvariantViolation(
                "window function has a differential outside the degree window")
        diffs.append(tuple(img))
        keep.append(u)
    cached = (funcs, keep, diffs, lam3)
    curve._coh_window_tables = cached
    return cached


# ---------------------------------------------------------------------------
# the Frobenius lift


class FrobeniusLift:
    """Images under the lifted p-power map of everything a pullback needs.

    Construction runs the two Newton iterations (the inverse of r at x^p,
    then the root of the defining polynomial at x^p together with the
    inverse of its derivative) and assembles the images of the finite basis
    functions, all as pole-capped digit series mod p^M."""

    def __init__(self, curve, m_prec, k_cap, guard):
        self.curve = curve
        self.p = curve.p
        self.m_prec = m_prec
        self.k_cap = k_cap
        self.guard = guard
        self.mod = curve.p ** m_prec
        self.d = curve.d
        self.tally = {}

        self.ctx = RContext(self.p, m_prec, curve.r_ints, k_cap)
        self.ap = ApRing(self.p, m_prec, curve.r_ints)
        mod, p = self.mod, self.p

        self.r_int = zp_norm(list(curve.r_ints), mod)
        self.rp_int = zp_norm(list(curve.rprime_ints), mod)
        self.q_int = [zp_norm(list(row), mod) for row in curve.q_rows]
        self.q_xp = [zp_subst_xp(list(row), p, mod) for row in self.q_int]
        self.m0t_int = [[zp_from_fractions(e, p, m_prec) for e in row]
                        for row in curve.M0T]
        self.p0_int = [[zp_from_fractions(e, p, m_prec) for e in row]
                       for row in curve.P0]

        tables = _solve_tables(curve)
        try:
            self.rpinv_int = zp_from_fractions(tables.rpinv, p, m_prec)
            self.chi_int = [zp_from_fractions(c, p, m_prec) for c in tables.chi]
            self.adj_int = [[[zp_from_fractions(e, p, m_prec) for e in row]
                             for row in mat] for mat in tables.adj_mats]
        except ArithmeticError as exc:
            raise InvariantViolation(
                "reduction tables are not p-integral; the model does not "
                "have good reduction at p") from exc
        self.chi_q = tables.chi

        self._one = self.ctx.from_poly([1])
        self._lift_r_inverse()
        self._lift_y()
        self._frob_basis()

    # -- bookkeeping --------------------------------------------------------

    def note(self, key, defect):
        if defect <= 0:
            return
        if defect > self.tally.get(key, 0):
            self.tally[key] = defect
        if defect > self.guard:
            raise InvariantViolation(
                f"{key}: defect {defect} exceeds the guard budget {self.guard}")

    def series_defect(self, ser):
        worst = 0
        for digit in ser.digits:
            for c in digit:
                if c:
                    worst = max(worst, self.m_prec - _int_val(c, self.p))
        return worst

    def infinite_tables(self):
        """Integer Laurent data of the infinite frame, built on first use."""
        cached = getattr(self, "_inf_tables", None)
        if cached is None:
            curve, p, mod = self.curve, self.p, self.mod
            d = self.d
            vinv = [[_lau_from_qx(curve.Vinv[j][i], p, mod) for j in range(d)]
                    for i in range(d)]
            v_lau = [[_lau_from_qx(curve.V[i][j], p, mod) for i in range(d)]
                     for j in range(d)]
            minf_t = [[_lau_from_qx(curve.Minf[j][i], p, mod)
                       for j in range(d)] for i in range(d)]
            atop_t = [[_frac_mod(curve.A_top[j][i], p, mod) for j in range(d)]
                      for i in range(d)]
            cached = (vinv, v_lau, minf_t, atop_t, curve.r_ints[-1] % mod)
            self._inf_tables = cached
        return cached

    # -- Newton lifts -------------------------------------------------------

    def _lift_r_inverse(self):
        ctx = self.ctx
        rxp = ctx.from_poly(zp_subst_xp(self.r_int, self.p, self.mod))
        two = ctx.from_poly([2])
        z = ctx.from_r_power(self.p)
        for _ in range(self.m_prec.bit_length() + 2):
            z = z.mul(two.sub(rxp.mul(z)))
        self.note("frob_r_inverse", self.series_defect(rxp.mul(z).sub(self._one)))
        self.z = z
        self._zpow = {0: self._one, 1: z}

    def zpow(self, k):
        while k not in self._zpow:
            top = max(self._zpow)
            self._zpow[top + 1] = self._zpow[top].mul(self.z)
        return self._zpow[k]

    # y-frame helpers: an element is a list of d digit series, coordinates
    # against powers of y

    def yf_zero(self):
        return [self.ctx.zero() for _ in range(self.d)]

    def yf_add(self, a, b):
        return [x.add(y) for x, y in zip(a, b)]

    def yf_sub(self, a, b):
        return [x.sub(y) for x, y in zip(a, b)]

    def yf_scale(self, a, ser):
        return [x.mul(ser) for x in a]

    def yf_mul(self, a, b):
        d, ctx = self.d, self.ctx
        prod = [ctx.zero() for _ in range(2 * d - 1)]
        for i, ai in enumerate(a):
            if ai.is_zero():
                continue
            for j, bj in enumerate(b):
                if bj.is_zero():
                    continue
                prod[i + j] = prod[i + j].add(ai.mul(bj))
        for t in range(2 * d - 2, d - 1, -1):
            top = prod[t]
            if top.is_zero():
                continue
            prod[t] = ctx.zero()
            for s in range(d):
                if self.q_int[s]:
                    prod[t - d + s] = prod[t - d + s].sub(
                        top.mul_poly(self.q_int[s]))
        return prod[:d]

    def yf_defect(self, vec):
        return max(self.series_defect(c) for c in vec)

    def _f_of(self, yvec):
        """Q(x^p, .) evaluated at a y-frame element, by Horner."""
        acc = [self._one] + [self.ctx.zero()] * (self.d - 1)
        for s in range(self.d - 1, -1, -1):
            acc = self.yf_mul(acc, yvec)
            if self.q_xp[s]:
                acc[0] = acc[0].add(self.ctx.from_poly(self.q_xp[s]))
        return acc

    def _fprime_of(self, yvec):
        acc = [self.ctx.from_poly([self.d % self.mod])] + \
            [self.ctx.zero()] * (self.d - 1)
        for s in range(self.d - 1, 0, -1):
            acc = self.yf_mul(acc, yvec)
            if self.q_xp[s]:
                acc[0] = acc[0].add(
                    self.ctx.from_poly(zp_scale(self.q_xp[s], s, self.mod)))
        return acc

    def _lift_y(self):
        curve, ctx, p = self.curve, self.ctx, self.p
        field = curve.field
        ypow = field.y() ** p
        yvec = []
        for coord in ypow.coords:
            if not coord.is_polynomial():
                raise InvariantViolation("power of y is not polynomial")
            yvec.append(ctx.from_poly(
                zp_from_fractions(coord.as_polynomial(), p, self.m_prec)))

        q_y = field.from_y_poly(
            [(i + 1) * QX(pfrac(curve.q_rows[i + 1])) for i in range(curve.d)])
        tp = q_y.inverse() ** p
        zvec = []
        for coord in tp.coords:
            num, k = over_r_power(coord, curve.r_fracs)
            ser = ctx.from_poly(zp_from_fractions(num, p, self.m_prec))
            if k:
                ser = ser.mul(ctx.from_r_power(k))
            zvec.append(ser)

        two = [ctx.from_poly([2])] + [ctx.zero()] * (self.d - 1)
        for _ in range(self.m_prec.bit_length() + 2):
            fy = self._f_of(yvec)
            if all(c.is_zero() for c in fy):
                break
            yvec = self.yf_sub(yvec, self.yf_mul(fy, zvec))
            fpy = self._fprime_of(yvec)
            zvec = self.yf_mul(zvec, self.yf_sub(two, self.yf_mul(fpy, zvec)))
        self.note("frob_y", self.yf_defect(self._f_of(yvec)))
        self.frob_y = yvec

    def _frob_basis(self):
        curve, ctx, p = self.curve, self.ctx, self.p
        d = self.d
        ypow = [[self._one] + [ctx.zero()] * (d - 1)]
        for _ in range(d - 1):
            ypow.append(self.yf_mul(ypow[-1], self.frob_y))

        frob_b0 = []
        for j in range(d):
            acc = self.yf_zero()
            for s in range(d):
                entry = curve.W0[j][s]
                if not entry.num:
                    continue
                num, k = over_r_power(entry, curve.r_fracs)
                scal = ctx.from_poly(zp_subst_xp(
                    zp_from_fractions(num, p, self.m_prec), p, self.mod))
                if k:
                    scal = scal.mul(self.zpow(k))
                acc = self.yf_add(acc, self.yf_scale(ypow[s], scal))
            # back to the finite basis frame through the y-power coordinates
            out = []
            for t in range(d):
                tot = ctx.zero()
                for s in range(d):
                    if self.p0_int[s][t] and not acc[s].is_zero():
                        tot = tot.add(acc[s].mul_poly(self.p0_int[s][t]))
                out.append(tot)
            frob_b0.append(out)
        self.frob_b0 = frob_b0

    # -- pullback -----------------------------------------------------------

    def pullback(self, row):
        """Pullback through the lift of sum_j row[j](x) b0_j dx / r, as digit
        series against b0_t dx (plain dx)."""
        ctx, p, mod = self.ctx, self.p, self.mod
        pref = [0] * (p - 1) + [p]
        out = [ctx.zero() for _ in range(self.d)]
        for j, poly in enumerate(row):
            if not poly:
                continue
            fj = zp_mul(zp_subst_xp(
                zp_from_fractions(tuple(Fraction(c) for c in poly), p,
                                  self.m_prec), p, mod), pref, mod)
            scal = ctx.from_poly(fj).mul(self.z)
            for t in range(self.d):
                if not self.frob_b0[j][t].is_zero():
                    out[t] = out[t].add(self.frob_b0[j][t].mul(scal))
        return out


# ---------------------------------------------------------------------------
# the three reduction stages for one pulled-back form


class _Reducer:
    """Carries one form through both pole reductions, together with the
    primitive accumulated so far and the running scale sigma."""

    def __init__(self, lift):
        self.lift = lift
        self.sigma = 0
        self.f0 = [lift.ctx.zero() for _ in range(lift.d)]
        self.finf = []
        self.g_vec = None
        self.w_vec = None
        self.h_vec = None

    def rescale(self, s):
        if s <= 0:
            return
        self.sigma += s
        q = pow(self.lift.p, s)
        self.f0 = [ser.scale_int(q) for ser in self.f0]
        self.finf = [(mp, [c * q % self.lift.mod for c in v])
                     for mp, v in self.finf]
        if self.g_vec is not None:
            self.g_vec = [ser.scale_int(q) for ser in self.g_vec]
        if self.w_vec is not None:
            self.w_vec = [_lau_scale(w, q, self.lift.mod) for w in self.w_vec]
        if self.h_vec is not None:
            self.h_vec = [zp_scale(h, q, self.lift.mod) for h in self.h_vec]

    # -- pole reduction at the branch locus ---------------------------------

    def _kill_level(self, k_top):
        lift = self.lift
        ap, mod, p = lift.ap, lift.mod, lift.p
        d = lift.d
        c_vec = [list(g.digit(k_top)) for g in self.g_vec]
        if not any(any(c) for c in c_vec):
            return
        k = k_top - 1
        kpow = [1]
        for _ in range(d - 1):
            kpow.append(kpow[-1] * k % mod)
        chi_k = []
        for i in range(d, -1, -1):
            chi_k = zp_add(zp_mul(chi_k, [k], mod), lift.chi_int[i], mod)
        w = 0
        try:
            chi_inv = ap.inverse(chi_k)
        except ArithmeticError:
            # chi(k) = p^w * unit most of the time; divide the digit by p^w
            # instead of eroding the global scale
            if not chi_k:
                raise InvariantViolation(
                    f"chi({k}) vanished to working precision")
            w = min(_int_val(c, p) for c in chi_k if c)
            try:
                chi_inv = ap.inverse([c // p ** w for c in chi_k])
            except ArithmeticError:
                chi_inv = self._exact_chi_inverse(k)
                w = 0
                c_vec = [list(g.digit(k_top)) for g in self.g_vec]
        t1 = [ap.mul(lift.rpinv_int, c) for c in c_vec]
        adj_k = [[[] for _ in range(d)] for _ in range(d)]
        for t, mat in enumerate(lift.adj_int):
            kw = kpow[t]
            if kw == 0:
                continue
            for i in range(d):
                for j in range(d):
                    if mat[i][j]:
                        adj_k[i][j] = zp_add(
                            adj_k[i][j], zp_scale(mat[i][j], kw, mod), mod)
        t2 = ap.matvec(adj_k, t1)
        v = [zp_scale(ap.mul(chi_inv, e), -1, mod) for e in t2]
        if w:
            # v still carries the p^w stripped from chi(k).  Divide it out
            # of the digit directly; only a genuinely fractional remainder
            # costs scale.
            val = min((_int_val(c, p) for e in v for c in e if c), default=w)
            if val < w:
                self.rescale(w - val)
                q = pow(p, w - val)
                v = [[c * q % mod for c in e] for e in v]
                c_vec = [[c * q % mod for c in e] for e in c_vec]
            pw = p ** w
            v = [zp_trim([c // pw for c in e]) for e in v]
            # even an exact division forgets the top w digits
            lift.note("finite_divide", w)

        # the defining property of v: applying the derivation data at level
        # k must reproduce the digit being killed
        worst = 0
        for t in range(d):
            acc = zp_scale(v[t], (-k) % mod, mod)
            acc = ap.mul(lift.rp_int, acc)
            for s in range(d):
                if lift.m0t_int[t][s] and v[s]:
                    acc = zp_add(acc, ap.mul(lift.m0t_int[t][s], v[s]), mod)
            diff = zp_sub(acc, c_vec[t], mod)
            for c in diff:
                if c:
                    worst = max(worst, lift.m_prec - _int_val(c, p))
        lift.note("finite_solve", worst)

        ctx = lift.ctx
        shift = ctx.from_r_power(k_top)
        for t in range(d):
            rvp = zp_mul(lift.r_int, zp_deriv(v[t], mod), mod)
            num = zp_sub(
                rvp, zp_mul(lift.rp_int, zp_scale(v[t], k, mod), mod), mod)
            for s in range(d):
                if lift.m0t_int[t][s] and v[s]:
                    num = zp_add(num, zp_mul(lift.m0t_int[t][s], v[s], mod), mod)
            if num:
                self.g_vec[t] = self.g_vec[t].sub(
                    ctx.from_poly(num).mul(shift))
            left = self.g_vec[t].digit(k_top)
            if any(left):
                worst = max(lift.m_prec - _int_val(c, p)
                            for c in left if c)
                lift.note("finite_cancel", worst)
                self.g_vec[t] = self.g_vec[t].sub(
                    _one_level(ctx, k_top, left))
            if v[t]:
                piece = ctx.from_poly(v[t])
                if k:
                    piece = piece.mul(ctx.from_r_power(k))
                self.f0[t] = self.f0[t].add(piece)

    def _exact_chi_inverse(self, k):
        lift = self.lift
        chi_k = ()
        for i in range(lift.d, -1, -1):
            chi_k = gp_add(gp_scale(chi_k, Fraction(k)), lift.chi_q[i])
        chi_k = gp_divmod(chi_k, lift.curve.r_fracs)[1]
        inv = _gp_invmod(chi_k, lift.curve.r_fracs)
        s = _denominator_pval(inv, lift.p)
        self.rescale(s)
        return zp_from_fractions(
            gp_scale(inv, Fraction(lift.p ** s)), lift.p, lift.m_prec)

    def finite(self, g_vec):
        """Strip the pole levels at the branch locus down to a single power
        of r; returns the numerators against b0_t dx / r.

        Level 1 is never solved: the digit there is the honest simple-pole
        part of the class (the solve at k = 0 is structurally singular since
        b0 contains the constant 1)."""
        self.g_vec = g_vec
        k_hi = max((g.k_max for g in g_vec if not g.is_zero()), default=0)
        for k_top in range(k_hi, 1, -1):
            self._kill_level(k_top)
        lift = self.lift
        out = []
        for g in self.g_vec:
            poly, tail = g.to_poly_and_tail()
            if any(any(dig) for k, dig in tail if k > 1):
                raise InvariantViolation("pole levels survived the reduction")
            u = zp_mul(poly, lift.r_int, lift.mod)
            for k, dig in tail:
                if k == 1:
                    u = zp_add(u, dig, lift.mod)
            out.append(u)
        self.g_vec = None
        return out

    # -- pole reduction at infinity -----------------------------------------

    def infinite(self, u_vec):
        """Reduce the numerator degree in the infinite frame down to the
        final window; returns polynomial numerators against b0_t dx / r."""
        lift = self.lift
        curve, mod, p = lift.curve, lift.mod, lift.p
        d, rho = lift.d, curve.rho
        m_allowed = window_degree(curve)
        vinv_lau, v_lau, minf_t, atop_t, lc_r = lift.infinite_tables()

        self.w_vec = []
        for i in range(d):
            acc = (0, [])
            for j in range(d):
                if u_vec[j]:
                    acc = _lau_add(
                        acc, _lau_mul(vinv_lau[i][j], (0, list(u_vec[j])),
                                      mod), mod)
            self.w_vec.append(acc)

        guard_iters = sum(len(w[1]) for w in self.w_vec) + rho + 16
        while True:
            deg = max((x for x in map(_lau_deg, self.w_vec) if x is not None),
                      default=None)
            if deg is None or deg <= m_allowed:
                break
            guard_iters -= 1
            if guard_iters < 0:
                raise InvariantViolation("degree reduction failed to advance")
            m_prime = deg - rho + 1
            w_top = [_lau_coeff(w, deg) for w in self.w_vec]
            l_mat = [[(m_prime * lc_r % mod if i == j else 0) + atop_t[i][j]
                      for j in range(d)] for i in range(d)]
            try:
                v, s = zmod_solve(l_mat, w_top, p, lift.m_prec)
            except ArithmeticError as exc:
                raise InvariantViolation(
                    "degree-lowering system is singular") from exc
            if s:
                self.rescale(s)
                q = pow(p, s)
                v = [c * q % mod for c in v]
            for i in range(d):
                term = _lau_shift(
                    (0, zp_scale(lift.r_int, m_prime * v[i], mod)),
                    m_prime - 1)
                for j in range(d):
                    if v[j]:
                        term = _lau_add(term, _lau_shift(
                            _lau_scale(minf_t[i][j], v[j], mod), m_prime), mod)
                self.w_vec[i] = _lau_add(
                    self.w_vec[i], _lau_scale(term, -1, mod), mod)
                top_left = _lau_coeff(self.w_vec[i], deg)
                if top_left:
                    lift.note("infinite_cancel",
                              lift.m_prec - _int_val(top_left, p))
                    self.w_vec[i] = _lau_add(
                        self.w_vec[i],
                        (deg, [(-top_left) % mod]), mod)
            self.finf.append((m_prime, v))

        h_vec = []
        for j in range(d):
            acc = (0, [])
            for i in range(d):
                if self.w_vec[i][1]:
                    acc = _lau_add(acc, _lau_mul(v_lau[j][i], self.w_vec[i],
                                                 mod), mod)
            low, high = _lau_below(acc, 0)
            if low[1]:
                worst = max(lift.m_prec - _int_val(c, p)
                            for c in low[1] if c)
                lift.note("laurent_drop", worst)
            hdeg = _lau_deg(high)
            if hdeg is not None and hdeg > m_allowed:
                off, cs = high
                cut = m_allowed + 1 - off
                worst = max(lift.m_prec - _int_val(c, p)
                            for c in cs[cut:] if c)
                lift.note("final_window", worst)
                high = _lau(off, cs[:cut])
            off, cs = high
            h_vec.append([0] * off + list(cs))
        self.w_vec = None
        self.h_vec = h_vec
        return h_vec


def _one_level(ctx, k, digit):
    ser = ctx.from_r_power(k, list(digit))
    return ser


# ---------------------------------------------------------------------------
# the final solve: basis combination plus an exact window differential


class _FinalSolver:
    """Writes a fully reduced form as a combination of the chosen basis and
    the differentials of window functions.  The square subsystem is inverted
    once over exact rationals; every solve then re-checks the full
    overdetermined system mod p^M."""

    def __init__(self, curve, basis_rows, lift):
        self.curve = curve
        self.lift = lift
        d = curve.d
        m_allowed = window_degree(curve)
        self.m_allowed = m_allowed
        funcs, keep, diffs, _ = _window_tables(curve)
        self.window_funcs = keep
        self.nbasis = len(basis_rows)

        cols = []
        for row in basis_rows:
            cols.append(tuple(tuple(Fraction(c) for c in poly)
                              for poly in row))
        cols.extend(diffs)
        self.ncols = len(cols)

        nrows = d * (m_allowed + 1)
        big = [[Fraction(0)] * self.ncols for _ in range(nrows)]
        for cidx, col in enumerate(cols):
            for j in range(d):
                for n, c in enumerate(col[j] if j < len(col) else ()):
                    if c:
                        big[j * (m_allowed + 1) + n][cidx] = Fraction(c)
        _, pivots = mat_rref(mat_transpose(big))
        if len(pivots) != self.ncols:
            raise InvariantViolation(
                "basis forms and window differentials are dependent")
        self.pivot_rows = list(pivots[:self.ncols])
        sub = [big[r] for r in self.pivot_rows]
        inv = mat_inverse(sub)
        s_fin = max(_denominator_pval(row, curve.p) for row in inv)
        self.s_fin = s_fin
        scale = Fraction(curve.p ** s_fin)
        self.inv_int = [[_frac_mod(e * scale, curve.p, lift.mod) for e in row]
                        for row in inv]
        self.big_int = [[_frac_mod(e, curve.p, lift.mod) for e in row]
                        for row in big]

    def solve(self, reducer):
        lift = self.lift
        mod, p = lift.mod, lift.p
        d = self.curve.d
        w = self.m_allowed + 1
        h_vec = reducer.h_vec
        h_flat = []
        for j in range(d):
            poly = h_vec[j] if j < len(h_vec) else []
            h_flat.extend((list(poly) + [0] * w)[:w])
        reducer.rescale(self.s_fin)
        scale = pow(p, self.s_fin, mod)
        y = []
        for row in self.inv_int:
            acc = 0
            for e, r_idx in zip(row, self.pivot_rows):
                acc += e * h_flat[r_idx]
            y.append(acc % mod)
        worst = 0
        for w_idx, row in enumerate(self.big_int):
            acc = -h_flat[w_idx] * scale
            for e, yc in zip(row, y):
                acc += e * yc
            acc %= mod
            if acc:
                worst = max(worst, lift.m_prec - _int_val(acc, p))
        lift.note("final_residual", worst)

        c_part = y[:self.nbasis]
        a_part = y[self.nbasis:]
        fend = []
        for t in range(d):
            acc = []
            for a, u in zip(a_part, self.window_funcs):
                if a and t < len(u) and u[t]:
                    acc = zp_add(acc, zp_scale(
                        [_frac_mod(c, p, mod) for c in u[t]], a, mod), mod)
            fend.append(acc)
        reducer.h_vec = None
        return c_part, fend


# ---------------------------------------------------------------------------
# exact expansions of differentials at the rational infinite places


def _ql_mul(a, b):
    offa, la = a
    offb, lb = b
    n = min(len(la), len(lb))
    if n == 0:
        raise ArithmeticError("series window is empty")
    return (offa + offb, ts_mul(la[:n], lb[:n], n, _QOPS))


def _ql_add(a, b):
    offa, la = a
    offb, lb = b
    off = min(offa, offb)
    end = min(offa + len(la), offb + len(lb))
    out = [Fraction(0)] * (end - off)
    for i, c in enumerate(la):
        if offa + i < end:
            out[offa + i - off] += c
    for i, c in enumerate(lb):
        if offb + i < end:
            out[offb + i - off] += c
    return (off, out)


def _ql_scale(a, c):
    return (a[0], [x * c for x in a[1]])


def _ql_inv(a):
    off, ls = a
    v = 0
    while v < len(ls) and ls[v] == 0:
        v += 1
    if v == len(ls):
        raise ArithmeticError("cannot invert a series that vanishes on its window")
    unit = ls[v:]
    return (-(off + v), ts_inv_unit(unit, len(unit), _QOPS))


def _ql_deriv(a):
    off, ls = a
    return (off - 1, [Fraction(off + i) * c for i, c in enumerate(ls)])


def _ql_poly_at(poly, x_lau, width):
    acc = (0, [Fraction(0)] * width)
    for c in reversed(tuple(poly)):
        acc = _ql_mul(acc, x_lau) if acc[1] and any(acc[1]) else \
            (acc[0] + x_lau[0], [Fraction(0)] * min(len(acc[1]), len(x_lau[1])))
        acc = _ql_add(acc, (0, [Fraction(c)] + [Fraction(0)] * (width - 1)))
    return acc


def _ql_conv_coeff(a, b, n):
    """Coefficient of t^n in a*b, certified by both validity windows."""
    offa, la = a
    offb, lb = b
    if n - offb >= offa + len(la) or n - offa >= offb + len(lb):
        raise ArithmeticError("series windows do not certify this coefficient")
    acc = Fraction(0)
    for i, c in enumerate(la):
        j = n - (offa + i) - offb
        if 0 <= j < len(lb) and c:
            acc += c * lb[j]
    return acc


class _PlaceBundle:
    """Exact local data of one rational infinite place: the chart series,
    values of the finite basis, x-powers, and per-pair differential kernels
    pair[m][j] = b0_m b0_j x'(t) / r(x(t))."""

    def __init__(self, curve, place_index, max_power):
        d = curve.d
        e = curve.infinite_places[place_index].e_P
        vinv_lau = [[_qx_laurent(curve.Vinv[j][i]) for i in range(d)]
                    for j in range(d)]
        vinv_span = max((len(fr) - off for row in vinv_lau
                         for off, fr in row if fr), default=0)
        width = (max_power + 2 * curve.rho + vinv_span + 6) * e + 16
        _, series = curve.infinite_expansion(place_index, width)
        s_lau = (0, list(series[0]))
        x_lau = _ql_inv(s_lau)
        self.s_lau = s_lau
        self.x_lau = x_lau
        self.e_P = e

        spow = [(0, [Fraction(1)] + [Fraction(0)] * (width - 1))]
        binf = [(0, list(series[1 + i])) for i in range(d)]
        b0 = []
        for j in range(d):
            acc = (0, [Fraction(0)] * width)
            for i in range(d):
                off, fr = vinv_lau[j][i]
                if not fr:
                    continue
                val = _ql_poly_at(fr, x_lau, width)
                while len(spow) <= -off:
                    spow.append(_ql_mul(spow[-1], s_lau))
                if off:
                    val = _ql_mul(val, spow[-off])
                acc = _ql_add(acc, _ql_mul(val, binf[i]))
            b0.append(acc)
        self.b0 = b0

        xprime = _ql_deriv(x_lau)
        r_at = _ql_poly_at(curve.r_fracs, x_lau, width)
        kernel = _ql_mul(xprime, _ql_inv(r_at))
        self.base = [_ql_mul(b, kernel) for b in b0]
        self.pair = [[_ql_mul(b0[m], self.base[j]) if m <= j else None
                      for j in range(d)] for m in range(d)]
        for m in range(d):
            for j in range(m):
                self.pair[m][j] = self.pair[j][m]

        self.xpow = [(0, [Fraction(1)] + [Fraction(0)] * (width - 1))]
        for _ in range(max_power):
            self.xpow.append(_ql_mul(self.xpow[-1], x_lau))

    def form_series(self, row):
        """Expansion of sum_j row[j](x) b0_j x'/r, one list per window."""
        acc = None
        for j, poly in enumerate(row):
            if not poly:
                continue
            for s, c in enumerate(poly):
                if not c:
                    continue
                term = _ql_scale(_ql_mul(self.xpow[s], self.base[j]),
                                 Fraction(c))
                acc = term if acc is None else _ql_add(acc, term)
        return acc


def _place_bundles(curve, max_power):
    cached = getattr(curve, "_coh_place_bundles", None)
    if cached is not None and cached[0] >= max_power:
        return cached[1]
    places = curve.infinite_places
    if any(not plc.rational for plc in places):
        raise CurveError(
            "an infinite place is not rational over Q; the basis machinery "
            "needs exact local expansions there")
    bundles = [_PlaceBundle(curve, i, max_power) for i in range(len(places))]
    curve._coh_place_bundles = (max_power, bundles)
    return bundles


# ---------------------------------------------------------------------------
# building and checking the basis of differentials


def _candidate_columns(curve):
    m_allowed = window_degree(curve)
    return [(j, s) for j in range(curve.d) for s in range(m_allowed + 1)]


def _second_kind_constraints(curve, bundles):
    """Rows of exact linear conditions on candidate numerators: bounded pole
    order at the infinite places, vanishing residue there, and vanishing
    residues over the branch locus (tested through the full function frame
    via the residue theorem)."""
    d, rho = curve.d, curve.rho
    m_allowed = window_degree(curve)
    cands = _candidate_columns(curve)
    rows = []
    for bundle in bundles:
        bound = -1 + (curve.ord0_V + 1) * bundle.e_P
        sers = {}
        for j, s in cands:
            sers[(j, s)] = (bundle.xpow[s], bundle.base[j])
        starts = [bundle.xpow[s][0] + bundle.base[j][0] for j, s in cands]
        lo = min(starts)
        for n in range(lo, bound):
            rows.append([_ql_conv_coeff(*sers[c], n) for c in cands])
        rows.append([_ql_conv_coeff(*sers[c], -1) for c in cands])
    # residues over the branch locus: for every frame function x^a b0_m the
    # total finite residue is minus the total infinite one
    for m in range(d):
        for a in range(rho):
            row = []
            for j, s in cands:
                tot = Fraction(0)
                for bundle in bundles:
                    tot += _ql_conv_coeff(bundle.xpow[a + s],
                                          bundle.pair[m][j], -1)
                row.append(tot)
            rows.append(row)
    return cands, rows


def _rows_from_vec(curve, cands, vec):
    m_allowed = window_degree(curve)
    polys = [[Fraction(0)] * (m_allowed + 1) for _ in range(curve.d)]
    for (j, s), c in zip(cands, vec):
        polys[j][s] = c
    flat = tuple(c for poly in polys for c in poly)
    ints, _ = p_clear_denominators(flat)
    w = m_allowed + 1
    return tuple(gp_trim(Fraction(c) for c in ints[j * w:(j + 1) * w])
                 for j in range(curve.d))


def holomorphic_basis(curve):
    """Construct the regular differentials as numerators against b0 dx / r.

    Finite regularity is the radical condition against the trace form, one
    congruence mod r per frame function; regularity at infinity is read off
    exact local expansions at the rational infinite places."""
    d, rho = curve.d, curve.rho
    m_allowed = window_degree(curve)
    cands = _candidate_columns(curve)
    bundles = _place_bundles(curve, m_allowed + rho)
    rems = [[gp_divmod(_gp_shift(curve.trace_gram[i][j], s),
                       curve.r_fracs)[1] for j, s in cands]
            for i in range(d)]
    rows = []
    for i in range(d):
        for n in range(rho):
            rows.append([rem[n] if n < len(rem) else Fraction(0)
                         for rem in rems[i]])
    for bundle in bundles:
        sers = {c: (bundle.xpow[c[1]], bundle.base[c[0]]) for c in cands}
        lo = min(ser[0][0] + ser[1][0] for ser in sers.values())
        for n in range(lo, 0):
            rows.append([_ql_conv_coeff(*sers[c], n) for c in cands])
    kernel = mat_nullspace(rows)
    if len(kernel) != curve.genus:
        raise InvariantViolation(
            f"regular differentials came out {len(kernel)}-dimensional; "
            f"genus says {curve.genus}")
    echelon, _ = mat_rref(kernel)
    return [_rows_from_vec(curve, cands, vec) for vec in echelon]


def _class_matrix(curve, rows_list, diffs):
    d = curve.d
    m_allowed = window_degree(curve)
    w = m_allowed + 1
    cols = []
    for row in list(rows_list) + list(diffs):
        col = []
        for j in range(d):
            poly = tuple(row[j]) if j < len(row) else ()
            col.extend((tuple(Fraction(c) for c in poly) +
                        (Fraction(0),) * w)[:w])
        cols.append(col)
    return mat_transpose(cols)


def extend_basis(curve, given_rows):
    """Complete g regular forms to a 2g basis of classes, greedily, from the
    second-kind candidates in the degree window."""
    _, _, diffs, _ = _window_tables(curve)
    two_g = 2 * curve.genus
    chosen = [tuple(tuple(Fraction(c) for c in poly) for poly in row)
              for row in given_rows]
    if len(chosen) >= two_g:
        return chosen[:two_g]
    m_allowed = window_degree(curve)
    bundles = _place_bundles(curve, m_allowed + curve.rho)
    cands, rows = _second_kind_constraints(curve, bundles)
    kernel = mat_nullspace(rows)
    base_rank = len(mat_rref(mat_transpose(
        _class_matrix(curve, chosen, diffs)))[1])
    for vec in kernel:
        cand_row = _rows_from_vec(curve, cands, vec)
        trial = chosen + [cand_row]
        rank = len(mat_rref(mat_transpose(
            _class_matrix(curve, trial, diffs)))[1])
        if rank == base_rank + 1:
            chosen.append(cand_row)
            base_rank = rank
            if len(chosen) == two_g:
                return chosen
    raise InvariantViolation(
        "could not complete the basis: the degree window does not contain "
        "2g independent second-kind classes")


def validate_basis(curve, rows):
    """Check that the given numerators are regular differentials: the trace
    radical congruence at the branch locus and nonnegative order at every
    infinite place."""
    d, rho = curve.d, curve.rho
    m_allowed = window_degree(curve)
    for row in rows:
        if len(row) != d:
            raise CurveError("a basis form needs one numerator per basis function")
        for poly in row:
            if poly and gp_deg(tuple(poly)) > m_allowed:
                raise CurveError(
                    f"basis numerator degree exceeds the window bound {m_allowed}")
        for i in range(d):
            acc = ()
            for j in range(d):
                poly = tuple(Fraction(c) for c in row[j])
                if poly:
                    acc = gp_add(acc, gp_mul(curve.trace_gram[i][j], poly))
            if gp_divmod(acc, curve.r_fracs)[1]:
                raise CurveError(
                    "form is not regular over the branch locus")
    bundles = _place_bundles(curve, m_allowed + rho)
    for row in rows:
        frows = [tuple(Fraction(c) for c in poly) for poly in row]
        for bundle in bundles:
            ser = bundle.form_series(frows)
            if ser is None:
                continue
            off, ls = ser
            for n in range(off, 0):
                if ls[n - off] != 0:
                    raise CurveError("form has a pole at an infinite place")


# ---------------------------------------------------------------------------
# orchestration


class FrobeniusData:
    """The output of one Frobenius run: the matrix, the primitives, and the
    bookkeeping needed to interpret both.

    Integer payloads represent p^sigma[i] times the true values mod p^M,
    per form i.  `achieved` is the absolute precision the run certifies."""

    def __init__(self, curve_name, p, n_target, m_prec, k_cap, basis, phi,
                 sigmas, f0, finf, fend, tallies, achieved, delta):
        self.curve_name = curve_name
        self.p = p
        self.n_target = n_target
        self.m_prec = m_prec
        self.k_cap = k_cap
        self.basis = basis
        self.phi = phi
        self.sigmas = sigmas
        self.f0 = f0
        self.finf = finf
        self.fend = fend
        self.tallies = tallies
        self.achieved = achieved
        self.delta = delta

    def to_json(self):
        payload = {
            "format": "frobenius/1",
            "curve": self.curve_name,
            "p": self.p,
            "n_target": self.n_target,
            "m_prec": self.m_prec,
            "k_cap": self.k_cap,
            "basis": [[list(map(str, poly)) for poly in row]
                      for row in self.basis],
            "phi": self.phi,
            "sigmas": self.sigmas,
            "f0": self.f0,
            "finf": self.finf,
            "fend": self.fend,
            "tallies": self.tallies,
            "achieved": self.achieved,
            "delta": self.delta,
        }
        return json.dumps(payload)

    @staticmethod
    def from_json(text):
        raw = json.loads(text)
        if raw.get("format") != "frobenius/1":
            raise CurveError("unknown frobenius payload format")
        basis = [[tuple(Fraction(c) for c in poly) for poly in row]
                 for row in raw["basis"]]
        return FrobeniusData(
            raw["curve"], raw["p"], raw["n_target"], raw["m_prec"],
            raw["k_cap"], basis, raw["phi"], raw["sigmas"],
            [[(k, list(dig)) for k, dig in f] for f in raw["f0"]],
            [[(mp, list(v)) for mp, v in f] for f in raw["finf"]],
            raw["fend"], raw["tallies"], raw["achieved"], raw["delta"])


def _pack_series(ser):
    return [(ser.k_min + i, list(d)) for i, d in enumerate(ser.digits) if d]


def frobenius_structure(curve, basis_rows=None, n_target=None, m_prec=None,
                        k_cap=None, allow_nonintegral=False, _retried=False):
    """Compute the matrix of Frobenius and the integration primitives.

    basis_rows gives the first g forms (holomorphic, validated); when None
    they are constructed.  The basis is then completed to 2g classes.  The
    working precision is planned from the target unless overridden, and the
    run is retried once with a bigger guard if certification falls short."""
    n_target = curve.N if n_target is None else int(n_target)
    if m_prec is None or k_cap is None:
        m_plan, k_plan = working_plan(curve, n_target)
        m_prec = m_plan if m_prec is None else m_prec
        k_cap = k_plan if k_cap is None else k_cap
    if basis_rows is None:
        basis_rows = holomorphic_basis(curve)
    else:
        validate_basis(curve, basis_rows)
    basis = extend_basis(curve, basis_rows)

    try:
        lift = FrobeniusLift(curve, m_prec, k_cap, guard=m_prec - n_target)
        solver = _FinalSolver(curve, basis, lift)
        phi = []
        sigmas = []
        f0_out, finf_out, fend_out = [], [], []
        for row in basis:
            reducer = _Reducer(lift)
            u_vec = reducer.finite(lift.pullback(row))
            reducer.infinite(u_vec)
            c_part, fend = solver.solve(reducer)
            phi.append(c_part)
            sigmas.append(reducer.sigma)
            f0_out.append([_pack_series(s) for s in reducer.f0])
            finf_out.append(reducer.finf)
            fend_out.append(fend)
        # exact divisions erode absolute knowledge independently of the
        # residual defects, so the two kinds of loss are charged separately
        divide = lift.tally.get("finite_divide", 0)
        worst = max((v for k, v in lift.tally.items() if k != "finite_divide"),
                    default=0)
        achieved = m_prec - max(sigmas, default=0) - worst - divide
        if achieved < n_target:
            raise PrecisionError(
                f"run certified only {achieved} digits of {n_target}")
    except (PrecisionError, InvariantViolation):
        if _retried:
            raise
        return frobenius_structure(
            curve, basis_rows, n_target, m_prec + n_target // 2 + 6,
            None, allow_nonintegral, _retried=True)

    delta = 0
    p = curve.p
    for i, row in enumerate(phi):
        s = sigmas[i]
        if s == 0:
            continue
        q = p ** s
        if any(c % q for c in row):
            vals = [_int_val(c, p) if c else s for c in row]
            delta = max(delta, s - min(vals))
    if delta and not allow_nonintegral:
        raise InvariantViolation(
            f"Frobenius matrix is not p-integral (needs p^-{delta}); "
            "pass allow_nonintegral to keep it")

    return FrobeniusData(
        curve.name, curve.p, n_target, m_prec, k_cap,
        [[tuple(Fraction(c) for c in poly) for poly in row] for row in basis],
        phi, sigmas, f0_out, finf_out, fend_out, dict(lift.tally),
        achieved, delta)
