"""Dense polynomial arithmetic over Z/m for large composite-width moduli.

Polynomials are plain lists of ints in [0, m), lowest degree first, with no
guarantee about trailing zeros unless a function says it trims.  Products
are formed by packing both operands into byte-aligned slots of one big
integer and multiplying once (Kronecker substitution); the superlinear work
then happens inside the big-integer layer, which gmpy2 accelerates when it
is installed.  Division is only ever by a divisor whose leading coefficient
is a unit mod m, through a cached Newton-inverted reversed series.
"""

try:
    from gmpy2 import mpz as _mpz
except ImportError:  # pragma: no cover
    _mpz = int

# below this many coefficient products the packing overhead dominates
_SCHOOLBOOK_CUTOFF = 400


def ptrim(f):
    n = len(f)
    while n and not f[n - 1]:
        n -= 1
    return list(f[:n])


def pmod(f, m):
    return [c % m for c in f]


def padd(f, g, m):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % m
    return out


def psub(f, g, m):
    out = list(f) + [0] * (len(g) - len(f))
    for i, c in enumerate(g):
        out[i] = (out[i] - c) % m
    return out


def pneg(f, m):
    return [(-c) % m for c in f]


def pscale(f, c, m):
    c %= m
    if not c:
        return []
    return [(a * c) % m for a in f]


def pderiv(f, m):
    return [(i * f[i]) % m for i in range(1, len(f))]


def peval(f, a, m):
    acc = 0
    for c in reversed(f):
        acc = (acc * a + c) % m
    return acc


def pmul(f, g, m):
    f = ptrim(f)
    g = ptrim(g)
    if not f or not g:
        return []
    if len(f) * len(g) <= _SCHOOLBOOK_CUTOFF:
        out = [0] * (len(f) + len(g) - 1)
        for i, a in enumerate(f):
            if a:
                for j, b in enumerate(g):
                    out[i + j] += a * b
        return [c % m for c in out]
    # slot width must exceed the largest convolution coefficient
    bound = min(len(f), len(g)) * (m - 1) * (m - 1)
    width = (bound.bit_length() + 7) // 8
    fa = int.from_bytes(
        b"".join(c.to_bytes(width, "little") for c in f), "little")
    ga = int.from_bytes(
        b"".join(c.to_bytes(width, "little") for c in g), "little")
    prod = int(_mpz(fa) * _mpz(ga))
    n = len(f) + len(g) - 1
    raw = prod.to_bytes(n * width + width, "little")
    return [
        int.from_bytes(raw[i * width:(i + 1) * width], "little") % m
        for i in range(n)
    ]


def pmul_low(f, g, n, m):
    """Product truncated to the first n coefficients."""
    return pmul(f[:n], g[:n], m)[:n]


def pinv_series(f, n, m):
    """Inverse of f as a power series mod x^n; f[0] must be a unit mod m."""
    if not f or not f[0] % m:
        raise ZeroDivisionError("series inverse needs a unit constant term")
    inv = [pow(f[0], -1, m)]
    while len(inv) < n:
        k = min(2 * len(inv), n)
        corr = psub([2], pmul_low(f, inv, k, m), m)
        inv = pmul_low(inv, corr, k, m)
        inv += [0] * (k - len(inv))  # pmul trims; the length drives the loop
    return inv


class PolyReducer:
    """Euclidean division by one fixed divisor, amortized over many calls.

    The divisor's leading coefficient must be a unit mod m; division then
    costs two multiplications once the reversed-inverse series has been
    grown far enough.
    """

    def __init__(self, g, m):
        g = ptrim(pmod(g, m))
        if not g:
            raise ZeroDivisionError("division by the zero polynomial")
        self.m = m
        self.lead_inv = pow(g[-1], -1, m)
        self.monic = pscale(g, self.lead_inv, m)
        self.g = g
        self._rev = self.monic[::-1]
        self._inv = [1]

    def _inverse(self, n):
        inv = self._inv
        while len(inv) < n:
            k = min(2 * len(inv), n)
            corr = psub([2], pmul_low(self._rev, inv, k, self.m), self.m)
            inv = pmul_low(inv, corr, k, self.m)
            inv += [0] * (k - len(inv))  # pmul trims; the length drives the loop
        self._inv = inv
        return inv[:n]

    def divmod(self, f):
        """q, rem with f = q*g + rem and deg rem < deg g."""
        m = self.m
        f = ptrim(pmod(f, m))
        dg = len(self.monic) - 1
        if len(f) <= dg:
            return [], f
        qn = len(f) - dg
        rf = f[::-1]
        qrev = pmul_low(rf, self._inverse(qn), qn, m)
        qrev += [0] * (qn - len(qrev))
        q_monic = qrev[::-1]
        rem = psub(f[:dg], pmul(q_monic, self.monic, m)[:dg], m)
        return pscale(q_monic, self.lead_inv, m), ptrim(rem)

    def rem(self, f):
        return self.divmod(f)[1]
