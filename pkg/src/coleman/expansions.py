"""Local power-series expansions of the coordinate functions at a point.

The affine coordinate ring of the curve away from infinity is free over the
x-line with basis b_0..b_{d-1}, multiplication given by polynomial structure
constants n_{ijm}(x).  A point P gives scalar values (x0, beta_0..beta_{d-1});
a uniformizer t is one of the coordinates (x - x0, or b_i - beta_i) such that
the relation system has a unit Jacobian at P.  The remaining coordinates are
then the unique series solution of the system, which this module computes by
Newton iteration with a maintained inverse-Jacobian series matrix, doubling
the truncation each step.  The final residual check certifies the output
exactly: the returned series satisfy every chosen relation mod t^L.

Everything is generic over a coefficient ring adapter, so the same engine
serves exact expansions over Q (basis validation at infinite places) and
fixed-modulus expansions over Z/p^M (tiny integrals, endpoint moving).
"""

from __future__ import annotations

from fractions import Fraction

from .zmodp import zp_add, zp_mul, zp_norm, zp_scale, zp_sub


class QOps:
    """Exact rational coefficients."""

    name = "Q"

    def of_int(self, n):
        return Fraction(n)

    def add(self, a, b):
        return a + b

    def sub(self, a, b):
        return a - b

    def mul(self, a, b):
        return a * b

    def is_zero(self, a):
        return not a

    def inv_unit(self, a):
        return Fraction(1) / a

    def residue(self, a):
        return a

    def residue_is_zero(self, a):
        return not a

    def residue_solveable(self, rows):
        return _rank_frac(rows)

    def series_mul(self, f, g, L):
        if not f or not g:
            return []
        out = [Fraction(0)] * min(L, len(f) + len(g) - 1)
        for i, a in enumerate(f):
            if not a or i >= L:
                continue
            top = min(len(g), L - i)
            for j in range(top):
                if g[j]:
                    out[i + j] += a * g[j]
        return out


class POps:
    """Coefficients in Z/p^M with Kronecker series products."""

    def __init__(self, p, M):
        self.p = p
        self.M = M
        self.m = p ** M
        self.name = f"Z/{p}^{M}"

    def of_int(self, n):
        return n % self.m

    def add(self, a, b):
        return (a + b) % self.m

    def sub(self, a, b):
        return (a - b) % self.m

    def mul(self, a, b):
        return a * b % self.m

    def is_zero(self, a):
        return a % self.m == 0

    def inv_unit(self, a):
        return pow(a, -1, self.m)

    def residue(self, a):
        return a % self.p

    def residue_is_zero(self, a):
        return a % self.p == 0

    def residue_solveable(self, rows):
        return _rank_modp(rows, self.p)

    def series_mul(self, f, g, L):
        prod = zp_mul(list(f), list(g), self.m)
        return prod[:L]


def _rank_frac(rows):
    work = [list(r) for r in rows]
    rank = 0
    ncols = len(work[0]) if work else 0
    for col in range(ncols):
        piv = next((i for i in range(rank, len(work)) if work[i][col]), None)
        if piv is None:
            continue
        work[rank], work[piv] = work[piv], work[rank]
        pv = work[rank][col]
        work[rank] = [c / pv for c in work[rank]]
        for i in range(len(work)):
            if i != rank and work[i][col]:
                f = work[i][col]
                work[i] = [c - f * pc for c, pc in zip(work[i], work[rank])]
        rank += 1
    return rank


def _rank_modp(rows, p):
    work = [[c % p for c in r] for r in rows]
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
                work[i] = [(c - f * pc) % p for c, pc in zip(work[i], work[rank])]
        rank += 1
    return rank


# ---------------------------------------------------------------------------
# truncated series helpers (dense lists of ops scalars; index = power of t)


def ts_trim_to(f, L):
    return f[:L]


def ts_add(f, g, ops):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = ops.add(out[i], c)
    return out


def ts_sub(f, g, ops):
    out = list(f) + [ops.of_int(0)] * (len(g) - len(f))
    for i, c in enumerate(g):
        out[i] = ops.sub(out[i], c)
    return out


def ts_scale(f, c, ops):
    return [ops.mul(a, c) for a in f]


def ts_mul(f, g, L, ops):
    return ops.series_mul(f, g, L)


def ts_compose_poly(coeffs, xs, L, ops):
    """Evaluate a polynomial (list of ops scalars, ascending) at a series."""
    acc = [ops.of_int(0)] * L
    for c in reversed(coeffs):
        acc = ts_mul(acc, xs, L, ops)
        acc = ts_add(acc, [c], ops) if not ops.is_zero(c) else acc
        if len(acc) < L:
            acc = acc + [ops.of_int(0)] * (L - len(acc))
    return acc[:L]


def ts_deriv(f, ops):
    return [ops.mul(c, ops.of_int(i)) for i, c in enumerate(f)][1:]


def ts_inv_unit(f, L, ops):
    """Inverse of a series with unit constant term, Newton doubling."""
    if not f or ops.residue_is_zero(f[0]):
        raise ArithmeticError("series inverse needs a unit constant term")
    g = [ops.inv_unit(f[0])]
    prec = 1
    while prec < L:
        prec = min(2 * prec, L)
        fg = ts_mul(f[:prec], g, prec, ops)
        two = [ops.of_int(2)] + [ops.of_int(0)] * (prec - 1)
        g = ts_mul(g, ts_sub(two, fg, ops), prec, ops)
    return g[:L]


def ts_is_zero(f, ops):
    return all(ops.is_zero(c) for c in f)


# ---------------------------------------------------------------------------
# the expansion solver


class ExpansionProblem:
    """System data for one affine patch: structure constants and degrees.

    nconst[(i, j)] with i <= j is a list of d polynomials (ops-scalar lists):
    b_i b_j = sum_m nconst[(i,j)][m](x) b_m.
    """

    def __init__(self, d, nconst, ops):
        self.d = d
        self.nconst = nconst
        self.ops = ops
        self.nderiv = {
            key: [_poly_deriv(c, ops) for c in polys]
            for key, polys in nconst.items()
        }


def _poly_deriv(coeffs, ops):
    return [ops.mul(c, ops.of_int(i)) for i, c in enumerate(coeffs)][1:]


def choose_uniformizer(problem, center):
    """First coordinate (x, then b_i ascending) with a unit-Jacobian system.

    Returns (coord_index, relation_keys).  coord_index 0 is x, 1+i is b_i."""
    d, ops = problem.d, problem.ops
    nvars = d + 1
    grads = {}
    for key in sorted(problem.nconst):
        grads[key] = _relation_gradient(problem, key, center)
    for coord in range(nvars):
        coord_row = [ops.residue(ops.of_int(1 if k == coord else 0))
                     for k in range(nvars)]
        chosen = []
        rows = [coord_row]
        for key in sorted(problem.nconst):
            g = [ops.residue(c) for c in grads[key]]
            if problem.ops.residue_solveable(rows + [g]) > len(rows):
                rows.append(g)
                chosen.append(key)
                if len(rows) == nvars:
                    break
        if len(rows) == nvars:
            return coord, chosen
    raise ArithmeticError(
        "no coordinate gives a unit Jacobian; point is not smooth on this model")


def _relation_gradient(problem, key, center):
    """Gradient of b_i b_j - sum_m n_{ijm}(x) b_m at scalar center values."""
    i, j = key
    d, ops = problem.d, problem.ops
    x0 = center[0]
    betas = center[1:]
    grad = []
    dx = ops.of_int(0)
    for mth, dpoly in enumerate(problem.nderiv[key]):
        val = _poly_eval(dpoly, x0, ops)
        dx = ops.sub(dx, ops.mul(val, betas[mth]))
    grad.append(dx)
    for k in range(d):
        g = ops.of_int(0)
        if k == i:
            g = ops.add(g, betas[j])
        if k == j:
            g = ops.add(g, betas[i])
        nk = _poly_eval(problem.nconst[key][k], x0, ops)
        g = ops.sub(g, nk)
        grad.append(g)
    return grad


def _poly_eval(coeffs, x0, ops):
    acc = ops.of_int(0)
    for c in reversed(coeffs):
        acc = ops.add(ops.mul(acc, x0), c)
    return acc


def expand_at_point(problem, center, L, coord=None, relations=None):
    """Series solution (x(t), b_0(t), .., b_{d-1}(t)) with the chosen
    coordinate equal to its center value plus t.

    The residual of every chosen relation is checked to vanish mod t^L, so
    the output is certified, not just iterated."""
    ops = problem.ops
    d = problem.d
    nvars = d + 1
    if coord is None or relations is None:
        coord, relations = choose_uniformizer(problem, center)
    zero, one = ops.of_int(0), ops.of_int(1)

    z = [[c] for c in center]
    jac0 = _jacobian_scalar(problem, center, coord, relations)
    x0inv = _scalar_matrix_inverse(jac0, ops)
    X = [[[c] for c in row] for row in x0inv]
    prec = 1
    while prec < L:
        prec = min(2 * prec, L)
        zp = [row + [zero] * (prec - len(row)) for row in z]
        F = _system_residual(problem, zp, center, coord, relations, prec)
        delta = _matvec_series(X, F, prec, ops)
        z = [ts_trim_to(ts_sub(zi, di, ops), prec) for zi, di in zip(zp, delta)]
        if prec < L:
            J = _jacobian_series(problem, z, coord, relations, prec)
            JX = _matmul_series(J, X, prec, ops)
            two_i = [[([ops.of_int(2 if a == b else 0)] + [zero] * (prec - 1))
                      for b in range(nvars)] for a in range(nvars)]
            X = _matmul_series(X, _matsub_series(two_i, JX, ops), prec, ops)
    resid = _system_residual(problem, z, center, coord, relations, L)
    for fr in resid:
        if not ts_is_zero(fr, ops):
            raise ArithmeticError("expansion failed to certify; Jacobian degenerated")
    return coord, relations, [row + [zero] * (L - len(row)) for row in z]


def _system_residual(problem, z, center, coord, relations, L):
    ops = problem.ops
    zero = ops.of_int(0)
    rows = []
    # coordinate row: z[coord] - center[coord] - t
    c0 = list(z[coord][:L]) + [zero] * (L - len(z[coord][:L]))
    c0[0] = ops.sub(c0[0], center[coord])
    if L > 1:
        c0[1] = ops.sub(c0[1], ops.of_int(1))
    rows.append(c0)
    xs = z[0][:L]
    for key in relations:
        i, j = key
        val = ts_mul(z[1 + i][:L], z[1 + j][:L], L, ops)
        for mth, poly in enumerate(problem.nconst[key]):
            nm = ts_compose_poly(poly, xs, L, ops)
            val = ts_sub(val, ts_mul(nm, z[1 + mth][:L], L, ops), ops)
        rows.append(ts_trim_to(val, L))
    return rows


def _jacobian_scalar(problem, center, coord, relations):
    ops = problem.ops
    nvars = problem.d + 1
    rows = [[ops.of_int(1 if k == coord else 0) for k in range(nvars)]]
    for key in relations:
        rows.append(_relation_gradient(problem, key, center))
    return rows


def _jacobian_series(problem, z, coord, relations, L):
    ops = problem.ops
    d = problem.d
    nvars = d + 1
    zero = ops.of_int(0)
    xs = z[0][:L]
    rows = [[[ops.of_int(1 if k == coord else 0)] + [zero] * (L - 1)
             for k in range(nvars)]]
    for key in relations:
        i, j = key
        row = []
        dx = [zero] * L
        for mth, dpoly in enumerate(problem.nderiv[key]):
            nm = ts_compose_poly(dpoly, xs, L, ops)
            dx = ts_sub(dx, ts_mul(nm, z[1 + mth][:L], L, ops), ops)
        row.append(dx)
        for k in range(d):
            g = [zero] * L
            if k == i:
                g = ts_add(g, z[1 + j][:L], ops)
            if k == j:
                g = ts_add(g, z[1 + i][:L], ops)
            nk = ts_compose_poly(problem.nconst[key][k], xs, L, ops)
            g = ts_sub(g, nk, ops)
            row.append(ts_trim_to(g, L))
        rows.append(row)
    return rows


def _scalar_matrix_inverse(mat, ops):
    n = len(mat)
    work = [[mat[i][j] for j in range(n)]
            + [ops.of_int(1 if i == j else 0) for j in range(n)]
            for i in range(n)]
    for col in range(n):
        piv = next((r for r in range(col, n)
                    if not ops.residue_is_zero(work[r][col])), None)
        if piv is None:
            raise ArithmeticError("Jacobian not invertible at center")
        work[col], work[piv] = work[piv], work[col]
        inv = ops.inv_unit(work[col][col])
        work[col] = [ops.mul(c, inv) for c in work[col]]
        for r in range(n):
            if r != col and not ops.is_zero(work[r][col]):
                f = work[r][col]
                work[r] = [ops.sub(c, ops.mul(f, pc))
                           for c, pc in zip(work[r], work[col])]
    return [row[n:] for row in work]


def _matvec_series(X, F, L, ops):
    n = len(X)
    out = []
    for i in range(n):
        acc = [ops.of_int(0)] * L
        for j in range(n):
            acc = ts_add(acc, ts_mul(X[i][j][:L], F[j][:L], L, ops), ops)
        out.append(ts_trim_to(acc, L))
    return out


def _matmul_series(A, B, L, ops):
    n = len(A)
    m = len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = [ops.of_int(0)] * L
            for k in range(n):
                acc = ts_add(acc, ts_mul(A[i][k][:L], B[k][j][:L], L, ops), ops)
            row.append(ts_trim_to(acc, L))
        out.append(row)
    return out


def _matsub_series(A, B, ops):
    return [[ts_sub(a, b, ops) for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]
