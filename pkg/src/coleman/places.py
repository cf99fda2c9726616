"""Fiber algebras of the coordinate ring over a point of the x-line.

The fiber at x = x0 is a d-dimensional algebra spanned by the images of the
basis functions b_0..b_{d-1}; its local factors are the points of the curve
lying over x0, with the local dimension equal to the ramification index times
the residue degree.  Idempotents of the fiber locate those factors, traces
against an idempotent read off the b-values of the corresponding point, and
the nilpotency index of the radical is the ramification index.

Two coefficient rings are supported: exact rationals (places over a rational
x0 or over x = infinity, where everything is provable once and for all) and
Z/p^M (Hensel-lifted centers of bad residue disks).
"""

from __future__ import annotations

from fractions import Fraction

from .rationals import mat_nullspace, mat_rref
from .zmodp import zp_eval, zp_from_fractions

_THETA_SEEDS = [
    (0, 1, 0, 0, 0, 0, 0, 0),
    (0, 0, 1, 0, 0, 0, 0, 0),
    (0, 1, 1, 0, 0, 0, 0, 0),
    (0, 1, 2, 3, 4, 5, 6, 7),
    (0, 1, -1, 2, -2, 3, -3, 4),
    (0, 2, 3, 5, 7, 11, 13, 17),
    (0, 1, 4, 9, 16, 25, 36, 49),
    (0, 3, 1, 4, 1, 5, 9, 2),
    (0, 1, 8, 27, 64, 125, 216, 343),
    (0, 5, 2, 9, 13, 3, 8, 21),
]


class FiberPlace:
    """One local factor of a fiber: a single point over the base value."""

    def __init__(self, dim, e_P, f_P, beta, idempotent):
        self.dim = dim
        self.e_P = e_P
        self.f_P = f_P
        self.beta = beta
        self.idempotent = idempotent

    @property
    def rational(self):
        return self.f_P == 1


class QFiber:
    """Fiber algebra over Q at a rational base point (or at x = infinity).

    table[i][j] is the coordinate vector of b_i * b_j, entries Fraction."""

    def __init__(self, table):
        self.d = len(table)
        self.table = table
        self._tau = [self._mult_trace_basis(m) for m in range(self.d)]

    def _mult_trace_basis(self, m):
        return sum(self.table[m][i][i] for i in range(self.d))

    def mul(self, u, v):
        d = self.d
        out = [Fraction(0)] * d
        for i in range(d):
            if not u[i]:
                continue
            for j in range(d):
                if not v[j]:
                    continue
                c = u[i] * v[j]
                row = self.table[i][j]
                for m in range(d):
                    if row[m]:
                        out[m] += c * row[m]
        return out

    def trace(self, v):
        return sum(v[m] * self._tau[m] for m in range(self.d))

    def gram(self):
        d = self.d
        return [[self.trace(self.table[i][j]) for j in range(d)] for i in range(d)]

    def radical(self):
        """Basis of the nilradical: the kernel of the trace form (char 0)."""
        return mat_nullspace(self.gram())

    def nilindex(self):
        """Smallest k with radical^k = 0 (k = 1 for an etale fiber)."""
        J = self.radical()
        if not J:
            return 1
        k = 1
        cur = J
        while cur:
            k += 1
            nxt = []
            for u in cur:
                for v in J:
                    nxt.append(self.mul(u, v))
            cur = _independent_rows(nxt)
        return k

    def semisimple_dim(self):
        _, pivots = mat_rref(self.gram())
        return len(pivots)

    def decompose(self):
        """Split into local factors, one FiberPlace per point over the base.

        Uses the minimal polynomial of a separating element; deterministic
        retry over a fixed seed list if a candidate fails to separate."""
        import sympy

        d = self.d
        one = [Fraction(1)] + [Fraction(0)] * (d - 1)
        for seed in _THETA_SEEDS:
            theta = [Fraction(seed[i % len(seed)]) for i in range(d)]
            theta[0] = Fraction(0)
            mu = self._minpoly(theta)
            T = sympy.Symbol("T")
            poly = sympy.Poly(list(reversed(mu)), T, domain="QQ")
            _, factors = poly.factor_list()
            parts = [(f, m) for f, m in factors]
            idems = self._crt_idempotents(theta, mu, parts, T)
            if idems is None:
                continue
            places = []
            ok = True
            for e_vec, res_deg in idems:
                dim = self._factor_dim(e_vec)
                ss = self._factor_ss_dim(e_vec)
                if ss != res_deg or dim % res_deg != 0:
                    ok = False
                    break
                e_P = dim // res_deg
                beta = None
                if res_deg == 1:
                    beta = [self.trace(self.mul(
                        _unit_vec(j, d, Fraction(1), Fraction(0)), e_vec)) / dim
                        for j in range(d)]
                places.append(FiberPlace(dim, e_P, res_deg, beta, e_vec))
            if not ok:
                continue
            if sum(pl.dim for pl in places) != d:
                continue
            return places
        raise ArithmeticError("no separating element found for the fiber algebra")

    def _minpoly(self, theta):
        d = self.d
        powers = [[Fraction(1)] + [Fraction(0)] * (d - 1)]
        for _ in range(d):
            powers.append(self.mul(powers[-1], theta))
        # first k with theta^k dependent on 1, theta, .., theta^(k-1)
        rows = [powers[0]]
        for k in range(1, d + 1):
            cand = rows + [powers[k]]
            if len(_independent_rows(cand)) < len(cand):
                sol = _solve_dependency(rows, powers[k])
                return [-c for c in sol] + [Fraction(1)]
            rows = cand
        raise ArithmeticError("minimal polynomial exceeds fiber dimension")

    def _crt_idempotents(self, theta, mu, parts, T):
        """Idempotents e_i(theta) from the coprime factorization of mu.

        Returns list of (idempotent vector, residue degree) or None when theta
        fails to separate (detected later by dimension checks)."""
        import sympy

        out = []
        mu_poly = sympy.Poly(list(reversed(mu)), T, domain="QQ")
        for f, mult in parts:
            g = f ** mult
            h = sympy.Poly(sympy.div(mu_poly.as_expr(), g.as_expr(), T)[0], T)
            ginv = sympy.invert(h.as_expr(), g.as_expr(), T)
            e_poly = sympy.Poly(sympy.rem((h * sympy.Poly(ginv, T)).as_expr(),
                                          mu_poly.as_expr(), T), T)
            coeffs = [Fraction(c.p, c.q) for c in reversed(e_poly.all_coeffs())]
            e_vec = self._eval_poly_at(coeffs, theta)
            if not self._is_idempotent(e_vec):
                return None
            out.append((e_vec, f.degree()))
        return out

    def _eval_poly_at(self, coeffs, theta):
        d = self.d
        acc = [Fraction(0)] * d
        for c in reversed(coeffs):
            acc = self.mul(acc, theta)
            acc[0] += c
        return acc

    def _is_idempotent(self, e):
        sq = self.mul(e, e)
        return all(a == b for a, b in zip(sq, e))

    def _factor_dim(self, e_vec):
        rows = [self.mul(e_vec, _unit_vec(j, self.d, Fraction(1), Fraction(0)))
                for j in range(self.d)]
        return len(_independent_rows(rows))

    def _factor_ss_dim(self, e_vec):
        """Dimension of the semisimple part of the factor e*B."""
        rows = _independent_rows(
            [self.mul(e_vec, _unit_vec(j, self.d, Fraction(1), Fraction(0)))
             for j in range(self.d)])
        n = len(rows)
        gram = [[self.trace(self.mul(rows[i], rows[j])) for j in range(n)]
                for i in range(n)]
        _, pivots = mat_rref(gram)
        return len(pivots)


def _unit_vec(j, d, one, zero):
    return [one if i == j else zero for i in range(d)]


def _independent_rows(rows):
    """Maximal independent sublist, kept in order (exact over Q)."""
    kept = []
    echelon = []
    for row in rows:
        work = list(row)
        for piv_col, piv_row in echelon:
            if work[piv_col]:
                f = work[piv_col] / piv_row[piv_col]
                work = [a - f * b for a, b in zip(work, piv_row)]
        nz = next((i for i, c in enumerate(work) if c), None)
        if nz is not None:
            echelon.append((nz, work))
            echelon.sort(key=lambda t: t[0])
            kept.append(list(row))
    return kept


def _solve_dependency(rows, target):
    """Coefficients expressing target as a combination of rows (exact)."""
    if not rows:
        return []
    n = len(rows)
    m = len(target)
    aug = [[rows[j][i] for j in range(n)] + [target[i]] for i in range(m)]
    rref, pivots = mat_rref(aug)
    if n in pivots:
        raise ArithmeticError("dependency solve failed")
    sol = [Fraction(0)] * n
    for k, col in enumerate(pivots):
        sol[col] = rref[k][n]
    return sol


# ---------------------------------------------------------------------------
# fibers over Z/p^M


class ZpFiber:
    """Fiber algebra with coefficients in Z/p^M at a lifted center x0.

    table entries are ints mod p^M."""

    def __init__(self, p, M, table):
        self.p = p
        self.M = M
        self.m = p ** M
        self.d = len(table)
        self.table = table

    @classmethod
    def at_center(cls, nconst, d, x0, p, M):
        """Evaluate polynomial structure constants at an integer center."""
        m = p ** M
        table = [[None] * d for _ in range(d)]
        for i in range(d):
            for j in range(d):
                key = (i, j) if i <= j else (j, i)
                row = []
                for poly in nconst[key]:
                    ints = zp_from_fractions(poly, p, M)
                    row.append(zp_eval(ints, x0 % m, m))
                table[i][j] = row
        return cls(p, M, table)

    def mul(self, u, v, modulus=None):
        m = modulus if modulus is not None else self.m
        d = self.d
        out = [0] * d
        for i in range(d):
            if not u[i]:
                continue
            for j in range(d):
                if not v[j]:
                    continue
                c = u[i] * v[j]
                row = self.table[i][j]
                for k in range(d):
                    if row[k]:
                        out[k] = (out[k] + c * row[k]) % m
        return out

    def trace_mult(self, v):
        d = self.d
        total = 0
        for mth in range(d):
            if v[mth]:
                tau = sum(self.table[mth][i][i] for i in range(d))
                total += v[mth] * tau
        return total % self.m

    def locate(self, bbar):
        """Local factor containing the point with residue b-values bbar.

        Returns (beta mod p^(M - loss), e_P, loss).  Raises when no factor
        has that residue or when the factor's point is not rational."""
        p, d = self.p, self.d
        for seed in _THETA_SEEDS:
            theta = [seed[i % len(seed)] % self.m for i in range(d)]
            theta[0] = 0
            result = self._try_theta(theta, bbar)
            if result is not None:
                return result
        raise ArithmeticError(
            "no rational very bad point found in this residue disk")

    def _try_theta(self, theta, bbar):
        import sympy

        p, d = self.p, self.d
        theta_at_pt = sum(t * b for t, b in zip(theta, bbar)) % p
        powers = [[1] + [0] * (d - 1)]
        for _ in range(d):
            powers.append(self.mul(powers[-1], theta))
        mu = _modp_minpoly([[c % p for c in row] for row in powers], p)
        T = sympy.Symbol("T")
        poly = sympy.Poly(list(reversed(mu)), T, modulus=p)
        factors = poly.factor_list()[1]
        target = None
        for f, mult in factors:
            if f.eval(theta_at_pt) % p == 0:
                if target is not None:
                    return None
                target = (f, mult)
        if target is None:
            return None
        f, mult = target
        g = f ** mult
        if g.degree() == poly.degree():
            ebar = [1] + [0] * (d - 1)
        else:
            h = sympy.Poly(sympy.div(poly, g, T)[0], T, modulus=p)
            try:
                hinv = sympy.invert(h, g)
            except sympy.polys.polyerrors.NotInvertible:
                return None
            epoly = sympy.rem(h * sympy.Poly(hinv, T, modulus=p), poly)
            coeffs = [int(c) % p for c in reversed(sympy.Poly(epoly, T).all_coeffs())]
            ebar = self._eval_poly(coeffs, theta, p)
        e = self._hensel_idempotent(ebar)
        if e is None:
            return None
        dim = self._factor_dim_modp(e)
        if dim == 0:
            return None
        loss = _int_val(dim, p)
        if loss >= self.M:
            return None
        beta = []
        unit = dim // self.p ** loss
        uinv = pow(unit, -1, self.p ** (self.M - loss))
        for j in range(d):
            bj = [0] * d
            bj[j] = 1
            tr = self.trace_mult(self.mul(bj, e))
            if tr % self.p ** loss:
                return None
            beta.append((tr // self.p ** loss) * uinv % self.p ** (self.M - loss))
        if any((beta[j] - bbar[j]) % p for j in range(d)):
            return None
        if not self._check_relations(beta, self.M - loss):
            return None
        return beta, dim, loss

    def _eval_poly(self, coeffs, theta, modulus):
        d = self.d
        acc = [0] * d
        for c in reversed(coeffs):
            acc = self.mul(acc, theta, modulus)
            acc[0] = (acc[0] + c) % modulus
        return acc

    def _hensel_idempotent(self, ebar):
        e = list(ebar)
        for _ in range(self.M.bit_length() + self.d.bit_length() + 4):
            sq = self.mul(e, e)
            if sq == e:
                return e
            cube = self.mul(sq, e)
            e = [(3 * a - 2 * b) % self.m for a, b in zip(sq, cube)]
        return None

    def _factor_dim_modp(self, e):
        p, d = self.p, self.d
        rows = []
        for j in range(d):
            bj = [0] * d
            bj[j] = 1
            rows.append([c % p for c in self.mul(bj, e)])
        return _modp_rank(rows, p)

    def _check_relations(self, beta, prec_units):
        mm = self.p ** prec_units
        for i in range(self.d):
            for j in range(self.d):
                lhs = beta[i] * beta[j] % mm
                rhs = sum(self.table[i][j][k] * beta[k] for k in range(self.d)) % mm
                if lhs != rhs:
                    return False
        return True


def _modp_minpoly(powers, p):
    """Monic minimal dependency among successive powers, coefficients mod p."""
    rows = [powers[0]]
    for k in range(1, len(powers)):
        if _modp_rank(rows + [powers[k]], p) < len(rows) + 1:
            sol = _modp_solve_dependency(rows, powers[k], p)
            return [(-c) % p for c in sol] + [1]
        rows.append(powers[k])
    raise ArithmeticError("minimal polynomial exceeds fiber dimension")


def _modp_rank(rows, p):
    work = [[c % p for c in r] for r in rows if any(c % p for c in r)]
    rank = 0
    ncols = len(work[0]) if work else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        inv = pow(work[rank][col], -1, p)
        work[rank] = [c * inv % p for c in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][col]:
                f = work[i][col]
                work[i] = [(a - f * b) % p for a, b in zip(work[i], work[rank])]
        rank += 1
    return rank


def _modp_solve_dependency(rows, target, p):
    if not rows:
        return []
    n = len(rows)
    m = len(target)
    aug = [[rows[j][i] % p for j in range(n)] + [target[i] % p] for i in range(m)]
    rank = 0
    pivots = []
    for col in range(n):
        piv = next((i for i in range(rank, m) if aug[i][col]), None)
        if piv is None:
            continue
        aug[rank], aug[piv] = aug[piv], aug[rank]
        inv = pow(aug[rank][col], -1, p)
        aug[rank] = [c * inv % p for c in aug[rank]]
        for i in range(m):
            if i != rank and aug[i][col]:
                f = aug[i][col]
                aug[i] = [(a - f * b) % p for a, b in zip(aug[i], aug[rank])]
        pivots.append(col)
        rank += 1
    sol = [0] * n
    for k, col in enumerate(pivots):
        sol[col] = aug[k][n]
    return sol


def _int_val(n, p):
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v
