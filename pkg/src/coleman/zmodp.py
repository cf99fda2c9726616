"""Fixed-modulus integer polynomial arithmetic: the fast layer.

Everything here works with dense lists of Python ints reduced mod m = p^M.
Degrees never round: divisions are either by unit leading coefficients or
asserted exact.  Large products go through Kronecker substitution (pack the
coefficients into one big integer, multiply once, unpack), which is where
essentially all of the pipeline's CPU time goes.

The RSeries type holds an element of the weak completion in its r-adic form
sum_k c_k(x) / r(x)^k with deg c_k < deg r, where k may be negative (those
levels are the polynomial part, digits of powers of r).  Multiplication packs
both the x- and the k-direction into a single integer multiply.
"""

from __future__ import annotations

import math


# ---------------------------------------------------------------------------
# dense integer polynomials mod m


def zp_trim(f):
    while f and f[-1] == 0:
        f.pop()
    return f


def zp_norm(f, m):
    return zp_trim([c % m for c in f])


def zp_add(f, g, m):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % m
    return zp_trim(out)


def zp_sub(f, g, m):
    out = list(f) + [0] * (len(g) - len(f))
    for i, c in enumerate(g):
        out[i] = (out[i] - c) % m
    return zp_trim(out)


def zp_scale(f, c, m):
    c %= m
    if c == 0:
        return []
    return zp_trim([a * c % m for a in f])


_KRON_CUTOFF = 24


def zp_mul(f, g, m):
    if not f or not g:
        return []
    if min(len(f), len(g)) < _KRON_CUTOFF:
        out = [0] * (len(f) + len(g) - 1)
        for i, a in enumerate(f):
            if a:
                for j, b in enumerate(g):
                    out[i + j] += a * b
        return zp_norm(out, m)
    B = 2 * (m - 1).bit_length() + min(len(f), len(g)).bit_length() + 1
    fi = _pack(f, B)
    gi = _pack(g, B)
    return zp_norm(_unpack(fi * gi, B, len(f) + len(g) - 1), m)


def _pack(f, B):
    acc = 0
    for c in reversed(f):
        acc = (acc << B) | c
    return acc


def _unpack(n, B, count):
    mask = (1 << B) - 1
    out = []
    for _ in range(count):
        out.append(n & mask)
        n >>= B
    return out


def zp_divmod(f, g, m, lcinv=None):
    """Division by g whose leading coefficient is a unit mod m."""
    if not g:
        raise ZeroDivisionError
    if lcinv is None:
        lcinv = pow(g[-1], -1, m)
    dg = len(g) - 1
    rem = list(f)
    if len(rem) <= dg:
        return [], zp_trim(rem)
    quo = [0] * (len(rem) - dg)
    for k in range(len(rem) - dg - 1, -1, -1):
        c = rem[k + dg] * lcinv % m
        quo[k] = c
        if c:
            for j, b in enumerate(g):
                rem[k + j] = (rem[k + j] - c * b) % m
    return zp_trim(quo), zp_trim(rem[:dg])


def zp_eval(f, a, m):
    acc = 0
    for c in reversed(f):
        acc = (acc * a + c) % m
    return acc


def zp_deriv(f, m):
    return zp_trim([c * i % m for i, c in enumerate(f) if i])


def zp_subst_xp(f, pexp, m):
    """f(x^pexp)."""
    out = [0] * ((len(f) - 1) * pexp + 1) if f else []
    for i, c in enumerate(f):
        out[i * pexp] = c % m
    return zp_trim(out)


def zp_from_fractions(poly, p, M):
    """Reduce a Fraction-coefficients tuple mod p^M; denominators must be p-units."""
    m = p ** M
    out = []
    for c in poly:
        den = c.denominator
        if den % p == 0:
            raise ArithmeticError("coefficient has p in its denominator")
        out.append(c.numerator * pow(den, -1, m) % m)
    return zp_trim(out)


def zp_exact_div_p(f, p, s):
    """Divide every coefficient by p^s; raises if any is not divisible.

    Only for values known to be exactly divisible (content checks); ordinary
    pipeline divisions by p are handled by the sigma shift instead."""
    q = p ** s
    out = []
    for c in f:
        if c % q:
            raise ArithmeticError("inexact division by p^s")
        out.append(c // q)
    return out


# ---------------------------------------------------------------------------
# F_p[x]


def fp_norm(f, p):
    return zp_norm(list(f), p)


def fp_divmod(f, g, p):
    return zp_divmod(list(f), list(g), p)


def fp_gcd(f, g, p):
    f, g = fp_norm(f, p), fp_norm(g, p)
    while g:
        f, g = g, fp_divmod(f, g, p)[1]
    if f:
        f = zp_scale(f, pow(f[-1], -1, p), p)
    return f


def fp_invmod(f, modpoly, p):
    """Inverse of f modulo modpoly over F_p (extended Euclid)."""
    r0, r1 = fp_norm(modpoly, p), fp_divmod(fp_norm(f, p), modpoly, p)[1]
    s0, s1 = [], [1]
    while len(r1) > 1:
        q, r = fp_divmod(r0, r1, p)
        r0, r1 = r1, r
        s0, s1 = s1, zp_sub(s0, zp_mul(q, s1, p), p)
        if not r1:
            raise ArithmeticError("element not invertible (gcd with modulus)")
    if not r1:
        raise ArithmeticError("element not invertible (zero)")
    return zp_scale(s1, pow(r1[0], -1, p), p)


# ---------------------------------------------------------------------------
# A_p = (Z/p^M)[x] / (r)


class ApRing:
    """The coefficient ring for reductions: (Z/p^M)[x]/(r), lc(r) a unit."""

    def __init__(self, p, M, r_ints):
        self.p = p
        self.M = M
        self.m = p ** M
        self.r = zp_norm(list(r_ints), self.m)
        self.rho = len(self.r) - 1
        if self.r[-1] % p == 0:
            raise ArithmeticError("leading coefficient of r is not a p-unit")
        self.lcinv = pow(self.r[-1], -1, self.m)
        self.rbar = fp_norm(self.r, p)
        self.rprime = zp_deriv(self.r, self.m)

    def reduce(self, f):
        return zp_divmod(f, self.r, self.m, self.lcinv)[1]

    def mul(self, a, b):
        return self.reduce(zp_mul(a, b, self.m))

    def inverse(self, a):
        """Newton inverse of a unit of A_p (unit mod (p, r))."""
        z = fp_invmod(a, self.rbar, self.p)
        prec = 1
        while prec < self.M:
            prec = min(2 * prec, self.M)
            az = self.mul(a, z)
            two_minus = zp_sub([2], az, self.m)
            z = self.mul(z, two_minus)
        return z

    def matvec(self, mat, vec):
        out = []
        for row in mat:
            acc = []
            for a, b in zip(row, vec):
                if a and b:
                    acc = zp_add(acc, zp_mul(a, b, self.m), self.m)
            out.append(self.reduce(acc))
        return out


# ---------------------------------------------------------------------------
# r-adic Laurent elements (the S-dagger pieces)


class RContext:
    """Shared data for RSeries arithmetic at a given modulus."""

    def __init__(self, p, M, r_ints, k_cap):
        self.p = p
        self.M = M
        self.m = p ** M
        self.r = zp_norm(list(r_ints), self.m)
        self.rho = len(self.r) - 1
        self.lcinv = pow(self.r[-1], -1, self.m)
        self.k_cap = k_cap

    def zero(self):
        return RSeries(self, 0, [])

    def from_poly(self, f):
        """Polynomial -> levels k <= 0 (digits of powers of r)."""
        f = zp_norm(list(f), self.m)
        digits = []
        while f:
            f, rem = zp_divmod(f, self.r, self.m, self.lcinv)
            digits.append(rem)
        if not digits:
            return self.zero()
        # digits[j] sits at level -j
        return RSeries(self, -(len(digits) - 1), list(reversed(digits)))

    def from_r_power(self, k, f=None):
        """(f or 1) / r^k as a one-level element (deg f < rho)."""
        return RSeries(self, k, [zp_norm(list(f or [1]), self.m)])


class RSeries:
    """sum of digit_i(x) / r^(k_min + i), deg digit < rho after normalization."""

    __slots__ = ("ctx", "k_min", "digits")

    def __init__(self, ctx, k_min, digits):
        self.ctx = ctx
        self.k_min = k_min
        self.digits = digits
        self._strip()

    def _strip(self):
        while self.digits and not self.digits[0]:
            self.digits.pop(0)
            self.k_min += 1
        while self.digits and not self.digits[-1]:
            self.digits.pop()

    @property
    def k_max(self):
        return self.k_min + len(self.digits) - 1

    def is_zero(self):
        return not self.digits

    def digit(self, k):
        if self.k_min <= k <= self.k_max:
            return self.digits[k - self.k_min]
        return []

    def copy(self):
        return RSeries(self.ctx, self.k_min, [list(d) for d in self.digits])

    def add(self, other):
        if other.is_zero():
            return self.copy()
        if self.is_zero():
            return other.copy()
        ctx = self.ctx
        k0 = min(self.k_min, other.k_min)
        k1 = max(self.k_max, other.k_max)
        digits = []
        for k in range(k0, k1 + 1):
            digits.append(zp_add(self.digit(k), other.digit(k), ctx.m))
        return RSeries(ctx, k0, digits)

    def neg(self):
        m = self.ctx.m
        return RSeries(self.ctx, self.k_min,
                       [[(-c) % m for c in d] for d in self.digits])

    def sub(self, other):
        return self.add(other.neg())

    def scale_int(self, c):
        m = self.ctx.m
        c %= m
        if c == 0:
            return self.ctx.zero()
        # c may be a zero divisor mod p^M, so re-trim each digit
        return RSeries(self.ctx, self.k_min,
                       [zp_trim([a * c % m for a in d]) for d in self.digits])

    def mul(self, other):
        """Two-level Kronecker product, then carry normalization and capping."""
        if self.is_zero() or other.is_zero():
            return self.ctx.zero()
        ctx = self.ctx
        rho = ctx.rho
        la, lb = len(self.digits), len(other.digits)
        stride = 2 * rho  # room for per-level products of degree < 2 rho - 1
        B = 2 * (ctx.m - 1).bit_length() + (min(la, lb) * rho).bit_length() + 1
        ia = _pack_levels(self.digits, rho, stride, B)
        ib = _pack_levels(other.digits, rho, stride, B)
        prod = ia * ib
        nlevels = la + lb - 1
        raw = _unpack_levels(prod, stride, B, nlevels, ctx.m)
        out = RSeries(ctx, self.k_min + other.k_min, raw)
        out.normalize()
        return out

    def mul_poly(self, f):
        """Multiply by a plain polynomial (arbitrary degree)."""
        rconv = self.ctx.from_poly(f)
        return self.mul(rconv)

    def normalize(self):
        """Push every digit below deg rho, carrying quotients to level k-1,
        then drop levels beyond the cap."""
        ctx = self.ctx
        digits = self.digits
        i = len(digits) - 1
        while i >= 0:
            d = digits[i]
            if len(d) > ctx.rho:
                q, rem = zp_divmod(d, ctx.r, ctx.m, ctx.lcinv)
                digits[i] = rem
                if i == 0:
                    digits.insert(0, q)
                    self.k_min -= 1
                    i += 1
                else:
                    digits[i - 1] = zp_add(digits[i - 1], q, ctx.m)
            i -= 1
        # cap deep pole levels; their p-adic size is below the working modulus
        if self.k_min + len(digits) - 1 > ctx.k_cap:
            del digits[ctx.k_cap - self.k_min + 1:]
        self._strip()

    def to_poly_and_tail(self):
        """(polynomial part, [(k, digit)] for k >= 1)."""
        poly = []
        tail = []
        for i, d in enumerate(self.digits):
            k = self.k_min + i
            if k <= 0:
                power = _poly_pow(self.ctx.r, -k, self.ctx.m)
                poly = zp_add(poly, zp_mul(d, power, self.ctx.m), self.ctx.m)
            elif d:
                tail.append((k, d))
        return poly, tail

    def __repr__(self):
        return f"RSeries(k {self.k_min}..{self.k_max}, {len(self.digits)} levels)"


def _poly_pow(f, n, m):
    out = [1]
    base = list(f)
    while n:
        if n & 1:
            out = zp_mul(out, base, m)
        base = zp_mul(base, base, m)
        n >>= 1
    return out


def _pack_levels(digits, rho, stride, B):
    acc = 0
    shift_per_level = B * stride
    for level in reversed(digits):
        acc <<= shift_per_level
        acc |= _pack(list(level) + [0] * (rho - len(level)), B) if level else 0
    return acc


def _unpack_levels(n, stride, B, nlevels, m):
    out = []
    mask_level = (1 << (B * stride)) - 1
    for _ in range(nlevels):
        chunk = n & mask_level
        n >>= B * stride
        out.append(zp_norm(_unpack(chunk, B, stride), m))
    return out


# ---------------------------------------------------------------------------
# small exact linear algebra mod p^M (pivoting on unit entries)


def zmod_solve(mat, rhs, p, M):
    """Solve mat x = rhs mod p^M.  Returns (x, sigma) where sigma is the total
    p-valuation divided out of pivots; entries of x are then exact mod
    p^(M - sigma) for the scaled system.  Requires det != 0 mod p^M."""
    m = p ** M
    n = len(mat)
    work = [[c % m for c in row] + [rhs[i] % m] for i, row in enumerate(mat)]
    sigma = 0
    for col in range(n):
        piv = None
        best = None
        for r in range(col, n):
            c = work[r][col]
            if c:
                v = _int_val(c, p)
                if best is None or v < best:
                    best, piv = v, r
        if piv is None:
            raise ArithmeticError("singular system mod p^M")
        work[col], work[piv] = work[piv], work[col]
        if best:
            # pivot divisible by p: divide the whole row exactly where possible
            q = p ** best
            row = work[col]
            if any(c % q for c in row):
                raise ArithmeticError("pivot valuation exceeds row content")
            work[col] = [c // q for c in row]
            sigma += best
        inv = pow(work[col][col], -1, m)
        work[col] = [c * inv % m for c in work[col]]
        for r in range(n):
            if r != col and work[r][col]:
                f = work[r][col]
                work[r] = [(c - f * pc) % m for c, pc in zip(work[r], work[col])]
    return [work[i][n] for i in range(n)], sigma


def _int_val(c, p):
    v = 0
    while c % p == 0:
        c //= p
        v += 1
    return v
