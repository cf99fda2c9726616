"""Bookkeeping for guaranteed p-adic output precision.

Every bound here is evaluated exactly over the rationals.  Each operation
returns a small report object describing both the resulting precision and
the quantities that produced it, so that CLI output can show where digits
were lost.
"""

from fractions import Fraction

from .curve import _poly_at_scalar, classify_point
from .padics import PadicScalar


class PrecisionError(ArithmeticError):
    """A precision bound cannot be met or certified."""


def floor_log(n, p):
    """Largest m with p**m <= n, for n >= 1."""
    if n < 1:
        raise ValueError("floor_log needs n >= 1")
    m = 0
    q = p
    while q <= n:
        m += 1
        q *= p
    return m


def _tail_min(l, e, p):
    """min over i >= l of (i+1)/e - floor_log(i+1).

    Within a stretch of constant floor-log the function increases, so the
    minimum is attained at i = l or where i+1 is a power of p; those
    candidate values first decrease, then increase once p^m (p-1) > e.
    """
    best = Fraction(l + 1, e) - floor_log(l + 1, p)
    m = floor_log(l + 1, p) + 1
    while True:
        best = min(best, Fraction(p ** m, e) - m)
        if p ** m * (p - 1) > e:
            return best
        m += 1


def _truncation_order(e, N, p):
    """Least l such that (i+1)/e - floor_log(i+1) >= N for every i >= l."""
    # Fixpoint bound U: all i with i+1 >= U already satisfy the inequality.
    u = max(e * N, e, 1)
    while True:
        u2 = max(e * (N + floor_log(u, p) + 1) + 1, e + 1)
        if u2 <= u:
            break
        u = u2
    for i in range(u - 1, -1, -1):
        if Fraction(i + 1, e) - floor_log(i + 1, p) < N:
            return i + 1
    return 0


class TinyPrecisionReport:
    """Certified precision of one short path integral."""

    def __init__(self, nu1, nu2, nu3, l, k, e, N):
        self.nu1 = nu1
        self.nu2 = nu2
        self.nu3 = nu3
        self.l = l
        self.k = k
        self.e = e
        self.N = N

    @property
    def precision(self):
        terms = [nu for nu in (self.nu1, self.nu2, self.nu3)
                 if nu is not None]
        return min(terms)

    def as_json(self):
        enc = lambda nu: None if nu is None else str(nu)
        return {"kind": "tiny", "nu1": enc(self.nu1), "nu2": enc(self.nu2),
                "nu3": enc(self.nu3), "l": self.l, "pole_order": self.k,
                "e": self.e, "N": self.N, "precision": str(self.precision)}

    def __repr__(self):
        return f"TinyPrecisionReport(precision={self.precision}, l={self.l})"


def tiny_bounds(e, N, k, t_vals, p):
    """Precision of a term-by-term antiderivative evaluated at two points.

    The integrand g(t) dt has pole order k (k = 0 for a power series), is
    known to absolute precision N and truncated modulo t^l; t_vals are the
    valuations of the local coordinate at the two endpoints.  l is chosen
    minimal so that the truncation error alone would not be the binding
    constraint.
    """
    if e < 1 or N < 1 or k < 0:
        raise ValueError("need e >= 1, N >= 1, k >= 0")
    l = _truncation_order(e, N, p)
    nu1 = _tail_min(l, e, p)
    nu2 = None
    if l >= 1:
        nu2 = min(N + Fraction(i, e) - floor_log(i + 1, p)
                  for i in range(l))
    nu3 = None
    if k >= 2:
        top = max(Fraction(t) for t in t_vals)
        nu3 = N - k * top - floor_log(k - 1, p)
    return TinyPrecisionReport(nu1, nu2, nu3, l, k, e, N)


class ConvergenceReport:
    """Whether the pole parts of the lifted basis converge at a point."""

    def __init__(self, converges, required_e=None, epsilon=None, kind=None):
        self.converges = converges
        self.required_e = required_e
        self.epsilon = epsilon
        self.kind = kind

    def as_json(self):
        return {"converges": self.converges, "required_e": self.required_e,
                "epsilon": None if self.epsilon is None else str(self.epsilon),
                "point_kind": self.kind}

    def __repr__(self):
        if self.converges:
            return f"ConvergenceReport(converges, kind={self.kind!r})"
        return f"ConvergenceReport(must move, e={self.required_e})"


def convergence_test(curve, point):
    """Decide whether series evaluation is legitimate at the point.

    On a bad disk the pole parts only converge strictly outside the locus
    ord_p r(x) >= 1/p; at the disk's own center nothing converges and the
    point has to be replaced by a nearby one over a ramified extension,
    whose minimal degree is returned.
    """
    cls = classify_point(curve, point)
    must_move = ConvergenceReport(
        False, required_e=curve.p * cls.e_P + 1, kind=cls.kind)
    if cls.kind == "good":
        return ConvergenceReport(True, epsilon=Fraction(0), kind="good")
    if cls.very_bad:
        return must_move
    if cls.kind == "infinite":
        # the chart coordinate of an infinite point is s = 1/x
        return ConvergenceReport(
            True, epsilon=point.x_value.valuation, kind="infinite")
    rx = _poly_at_scalar([Fraction(c) for c in curve.r_ints],
                         point.x_value, curve.p, point.precision)
    if rx.is_zero():
        return must_move
    eps = rx.valuation
    if eps >= Fraction(1, curve.p):
        return must_move
    return ConvergenceReport(True, epsilon=eps, kind="finite-bad")


class EvalPrecisionReport:
    """Certified precision of series evaluation at one point."""

    def __init__(self, kind, epsilon, precision, k_argmin=None, scanned=None):
        self.kind = kind
        self.epsilon = epsilon
        self.precision = precision
        self.k_argmin = k_argmin
        self.scanned = scanned

    def as_json(self):
        return {"kind": self.kind,
                "epsilon": None if self.epsilon is None else str(self.epsilon),
                "k_argmin": self.k_argmin,
                "precision": str(self.precision)}

    def __repr__(self):
        return (f"EvalPrecisionReport(kind={self.kind!r}, "
                f"precision={self.precision})")


def _pi_value(k, N, e0, p):
    return max(N, k // p + 1 - floor_log(k * e0, p))


def eval_precision(kind, epsilon, N, e0, w_vals, p):
    """Precision kept when evaluating the lifted cohomology basis.

    kind is "good", "finite-bad", or "infinite"; epsilon is the valuation
    of r(x) at the point (finite bad) or of 1/x (infinite); e0 bounds the
    ramification of the finite bad disks; w_vals = (ord at 0 of the basis
    transition, ord at infinity of its inverse).
    """
    if kind == "good":
        return EvalPrecisionReport("good", Fraction(0), Fraction(N))
    epsilon = Fraction(epsilon)
    if kind == "infinite":
        ord0_w, ordinf_winv = w_vals
        drop = min(ordinf_winv + 1, p * (ord0_w + 1))
        return EvalPrecisionReport(
            "infinite", epsilon, N + epsilon * drop)
    if kind != "finite-bad":
        raise ValueError(f"unknown point kind {kind!r}")
    if epsilon >= Fraction(1, p):
        raise PrecisionError(
            "pole parts do not converge at this point; move it first")
    # pi(k) - k*eps eventually grows like k(1/p - eps), so a finite scan
    # bound K with K*eta - floor_log(K*e0) - 1 >= N covers the whole min.
    eta = Fraction(1, p) - epsilon
    bound = max(int((N + 2) / eta) + 1, p)
    while Fraction(bound) * eta - floor_log(bound * e0, p) - 1 < N:
        bound *= 2
    best = None
    argmin = None
    for k in range(1, bound + 1):
        val = _pi_value(k, N, e0, p) - k * epsilon
        if best is None or val < best:
            best = val
            argmin = k
    return EvalPrecisionReport("finite-bad", epsilon, best,
                               k_argmin=argmin, scanned=bound)


class SolvePrecisionReport:
    """Precision surviving the linear solve against Frobenius minus one."""

    def __init__(self, ord_det, delta, precision):
        self.ord_det = ord_det
        self.delta = delta
        self.precision = precision

    def as_json(self):
        return {"ord_det": str(self.ord_det), "delta": str(self.delta),
                "precision": str(self.precision)}

    def __repr__(self):
        return (f"SolvePrecisionReport(ord_det={self.ord_det}, "
                f"precision={self.precision})")


def padic_det(mat):
    """Determinant of a square matrix of p-adic scalars.

    Gaussian elimination pivoting on the entry of least valuation, so each
    division is by the largest available element.
    """
    n = len(mat)
    work = [list(row) for row in mat]
    sign = 1
    det = None
    for col in range(n):
        pivot_row = None
        pivot_val = None
        for i in range(col, n):
            entry = work[i][col]
            if entry.is_zero():
                continue
            if pivot_val is None or entry.valuation < pivot_val:
                pivot_row = i
                pivot_val = entry.valuation
        if pivot_row is None:
            return work[col][col]  # a zero to its own precision
        if pivot_row != col:
            work[col], work[pivot_row] = work[pivot_row], work[col]
            sign = -sign
        pivot = work[col][col]
        det = pivot if det is None else det * pivot
        for i in range(col + 1, n):
            factor = work[i][col] / pivot
            work[i] = [a - factor * b
                       for a, b in zip(work[i], work[col])]
    return det * sign


def solve_precision(phi, n_prime, delta=None):
    """Loss from inverting (Phi - I), measured by its determinant.

    delta is an extra penalty for a non-integral Phi; it defaults to 0 for
    integral Phi and must be supplied explicitly otherwise.
    """
    p = phi[0][0].p
    n = len(phi)
    shifted = [[phi[i][j] - (1 if i == j else 0) for j in range(n)]
               for i in range(n)]
    det = padic_det(shifted)
    if det is None or det.is_zero():
        raise PrecisionError(
            "det(Phi - I) is indistinguishable from zero at this precision")
    integral = all(entry.is_integral() for row in phi for entry in row)
    if delta is None:
        if not integral:
            raise PrecisionError(
                "Phi is not p-adically integral; supply the extra loss")
        delta = 0
    return SolvePrecisionReport(
        det.valuation, Fraction(delta),
        n_prime - det.valuation - Fraction(delta))
