"""Pure numpy versions of the compiled kernels in ``_core.pyx``.

Signatures and return conventions match the compiled module one for one.
Double-double products use Dekker splitting since ``math.fma`` is not
available before Python 3.13.
"""
import math

import numpy as np

TWO_PI = 2.0 * math.pi
QUARTER_PI = 0.25 * math.pi
_SPLITTER = 134217729.0  # 2**27 + 1


def _split(a):
    c = _SPLITTER * a
    hi = c - (c - a)
    return hi, a - hi


def two_prod(a, b):
    """Error-free product: a*b == p + e exactly (no overflow assumed)."""
    p = a * b
    ah, al = _split(a)
    bh, bl = _split(b)
    e = ((ah * bh - p) + ah * bl + al * bh) + al * bl
    return p, e


def frac_dd(hi, lo):
    f = hi - np.floor(hi)
    f = f + lo
    return f - np.floor(f)


def _sieve_block(lo, hi, primes):
    n = hi - lo
    out = np.ones(n, dtype=np.uint32)
    prod = np.ones(n, dtype=np.uint64)
    cnt = np.zeros(n, dtype=np.uint32)
    for p in primes:
        p = int(p)
        if p * p >= hi:
            break
        pk = p
        while pk < hi:
            start = -lo % pk
            cnt[start::pk] += 1
            prod[start::pk] *= np.uint64(p)
            if pk > (hi - 1) // p:
                break
            pk *= p
        start = -lo % p
        out[start::p] *= cnt[start::p] + 1
        cnt[start::p] = 0
    nums = np.arange(lo, hi, dtype=np.uint64)
    out[(prod != nums) & (nums > 1)] *= 2
    if lo == 0:
        out[0] = 0
    return out


def sieve_range(lo, hi, primes):
    """d(n) for lo <= n < hi; `primes` must cover sqrt(hi - 1)."""
    if hi <= lo:
        return np.zeros(0, dtype=np.uint32)
    return _sieve_block(int(lo), int(hi), primes)


def sieve_table(limit, block, primes, threads=1):
    """Array v of length limit + 1 with v[n] = d(n), v[0] = 0."""
    out = np.empty(limit + 1, dtype=np.uint32)
    for lo in range(0, limit + 1, block):
        hi = min(lo + block, limit + 1)
        out[lo:hi] = _sieve_block(lo, hi, primes)
    return out


def _delta(D, x, c1):
    return D - x * np.log(x) - c1 * x


def _integrand(v, k, A, mode):
    if mode == 0:
        r = np.ones_like(v)
        for _ in range(k):
            r = r * v
        return r
    return np.abs(v) ** A


def _gl(D, a, b, k, A, mode, c1, nodes, weights):
    mid = 0.5 * (a + b)
    half = 0.5 * (b - a)
    x = mid[:, None] + half[:, None] * nodes[None, :]
    vals = _integrand(_delta(D[:, None], x, c1), k, A, mode)
    return half * (vals @ weights)


def grade_for(A):
    """Smallest p <= 4 with p*A integral (A < 4), else 4; 1 once A >= 4."""
    if A >= 4.0:
        return 1
    for p in range(1, 5):
        if float(p * A).is_integer():
            return p
    return 4


def _graded(D, r, e, k, A, mode, c1, nodes, weights, p):
    # integral between root r and endpoint e, x = r + (e - r) s**p
    if p == 1:
        lo, hi = np.minimum(r, e), np.maximum(r, e)
        return _gl(D, lo, hi, k, A, mode, c1, nodes, weights)
    sv = 0.5 * (nodes + 1.0)
    sp = sv ** (p - 1)
    x = r[:, None] + (e - r)[:, None] * (sp * sv)[None, :]
    vals = _integrand(_delta(D[:, None], x, c1), k, A, mode)
    return 0.5 * np.abs(e - r) * (vals @ (weights * p * sp))


def moment_block(D, n0, a_first, b_last, k, A, mode, c1, nodes, weights, split):
    """Integral of Delta**k (or |Delta|**A) over unit pieces; returns (sum, 0.0)."""
    m = len(D)
    if m == 0:
        return 0.0, 0.0
    Df = np.asarray(D, dtype=np.float64)
    a = n0 + np.arange(m, dtype=np.float64)
    b = a + 1.0
    a[0] = max(a[0], a_first)
    b[-1] = min(b[-1], b_last)
    keep = b > a
    Df, a, b = Df[keep], a[keep], b[keep]
    nodes = np.asarray(nodes)
    weights = np.asarray(weights)
    vals = np.zeros(len(a))
    if split:
        fa = _delta(Df, a, c1)
        fb = _delta(Df, b, c1)
        cross = (fa > 0.0) & (fb < 0.0)
    else:
        cross = np.zeros(len(a), dtype=bool)
    if cross.any():
        Dc, ac, bc = Df[cross], a[cross], b[cross]
        fa, fb = fa[cross], fb[cross]
        r = ac + (bc - ac) * fa / (fa - fb)
        for _ in range(30):
            r = r + _delta(Dc, r, c1) / (np.log(r) + 1.0 + c1)
        # a failed root (outside the piece) degenerates to one unsplit rule
        r = np.where((r > ac) & (r < bc), r, bc)
        grade = 1 if mode == 0 else grade_for(A)
        vals[cross] = (_graded(Dc, r, ac, k, A, mode, c1, nodes, weights, grade)
                       + _graded(Dc, r, bc, k, A, mode, c1, nodes, weights, grade))
    plain = ~cross
    if plain.any():
        vals[plain] = _gl(Df[plain], a[plain], b[plain], k, A, mode, c1, nodes, weights)
    return math.fsum(vals.tolist()), 0.0


def expsum(xs, n_lo, n_hi, chunk=1 << 22):
    """S(x) = sum_{n_lo <= n <= n_hi} e(x sqrt(n)) for every x in xs."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    out = np.zeros(len(xs), dtype=np.complex128)
    if n_hi < n_lo:
        return out
    n = np.arange(n_lo, n_hi + 1, dtype=np.float64)
    sh = np.sqrt(n)
    sq, sq_err = two_prod(sh, sh)
    sl = ((n - sq) - sq_err) / (2.0 * sh)
    step = max(1, chunk // len(n))
    for i in range(0, len(xs), step):
        x = xs[i:i + step, None]
        t, e = two_prod(x, sh[None, :])
        e = e + x * sl[None, :]
        f = TWO_PI * frac_dd(t, e)
        out[i:i + step] = np.cos(f).sum(axis=1) + 1j * np.sin(f).sum(axis=1)
    return out


def voronoi_sum(xs, coeff, chunk=1 << 22):
    """sum_{n=1}^{len(coeff)} coeff[n-1] * cos(4 pi sqrt(n x) - pi/4) for each x."""
    xs = np.ascontiguousarray(xs, dtype=np.float64)
    coeff = np.asarray(coeff, dtype=np.float64)
    out = np.zeros(len(xs))
    if len(coeff) == 0:
        return out
    n = np.arange(1, len(coeff) + 1, dtype=np.float64)
    step = max(1, chunk // len(n))
    for i in range(0, len(xs), step):
        x = xs[i:i + step, None]
        ph, pl = two_prod(n[None, :], x)
        s = np.sqrt(ph)
        sq, sq_err = two_prod(s, s)
        sl = (((ph - sq) - sq_err) + pl) / (2.0 * s)
        terms = coeff[None, :] * np.cos(TWO_PI * frac_dd(2.0 * s, 2.0 * sl) - QUARTER_PI)
        out[i:i + step] = [math.fsum(row) for row in terms.tolist()]
    return out
