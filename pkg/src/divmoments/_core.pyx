# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled inner loops.

Every function here has a numpy twin in :mod:`divmoments._fallback` with the
same signature and semantics; :mod:`divmoments._kernels` picks one at import.
"""

import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport cos, sin, sqrt, log, floor, fma, fabs, pow
from libc.stdlib cimport malloc, free
from libc.string cimport memset

cnp.import_array()

ctypedef unsigned long long u64

cdef double TWO_PI = 6.283185307179586476925286766559
cdef double QUARTER_PI = 0.78539816339744830961566084581988


cdef int _sieve_block(u64 lo, u64 hi, const long long* primes, Py_ssize_t nprimes,
                      unsigned int* out) noexcept nogil:
    # out[i] = d(lo + i); prime powers walked by stride, no division.
    cdef Py_ssize_t n = <Py_ssize_t>(hi - lo)
    cdef Py_ssize_t i, j
    cdef u64 p, pk, m, start
    cdef u64* prod = <u64*>malloc(n * sizeof(u64))
    cdef unsigned char* cnt = <unsigned char*>malloc(n)
    if prod == NULL or cnt == NULL:
        free(prod)
        free(cnt)
        return -1
    for i in range(n):
        prod[i] = 1
        out[i] = 1
    memset(cnt, 0, n)
    for j in range(nprimes):
        p = <u64>primes[j]
        if p * p >= hi:
            break
        pk = p
        while pk < hi:
            start = ((lo + pk - 1) // pk) * pk
            m = start
            while m < hi:
                i = <Py_ssize_t>(m - lo)
                cnt[i] += 1
                prod[i] *= p
                m += pk
            if pk > (hi - 1) // p:
                break
            pk *= p
        start = ((lo + p - 1) // p) * p
        m = start
        while m < hi:
            i = <Py_ssize_t>(m - lo)
            out[i] *= cnt[i] + 1
            cnt[i] = 0
            m += p
    for i in range(n):
        if prod[i] != lo + <u64>i and lo + <u64>i > 1:
            out[i] *= 2
    if lo == 0:
        out[0] = 0
    free(prod)
    free(cnt)
    return 0


def sieve_range(long long lo, long long hi, const long long[::1] primes):
    """d(n) for lo <= n < hi; `primes` must cover sqrt(hi - 1)."""
    if hi <= lo:
        return np.zeros(0, dtype=np.uint32)
    out = np.empty(hi - lo, dtype=np.uint32)
    cdef unsigned int[::1] ov = out
    cdef int rc
    with nogil:
        rc = _sieve_block(<u64>lo, <u64>hi, &primes[0] if primes.shape[0] else NULL,
                          primes.shape[0], &ov[0])
    if rc != 0:
        raise MemoryError("sieve block workspace allocation failed")
    return out


def sieve_table(long long limit, long long block, const long long[::1] primes, int threads=1):
    """Array v of length limit + 1 with v[n] = d(n), v[0] = 0; blocks filled independently."""
    out = np.empty(limit + 1, dtype=np.uint32)
    cdef unsigned int[::1] ov = out
    cdef Py_ssize_t nblocks = (limit + 1 + block - 1) // block
    cdef Py_ssize_t b
    cdef u64 lo, hi
    cdef int failed = 0
    cdef const long long* pp = &primes[0] if primes.shape[0] else NULL
    cdef Py_ssize_t np_ = primes.shape[0]
    for b in prange(nblocks, nogil=True, num_threads=threads, schedule="dynamic"):
        lo = <u64>b * <u64>block
        hi = lo + <u64>block
        if hi > <u64>(limit + 1):
            hi = <u64>(limit + 1)
        failed += _sieve_block(lo, hi, pp, np_, &ov[lo]) != 0
    if failed:
        raise MemoryError("sieve block workspace allocation failed")
    return out


cdef inline double _delta(double D, double x, double c1) noexcept nogil:
    return D - x * log(x) - c1 * x


cdef inline double _powk(double v, int k) noexcept nogil:
    cdef double r = 1.0
    cdef int i
    for i in range(k):
        r *= v
    return r


cdef inline double _integrand(double v, int k, double A, int mode) noexcept nogil:
    # mode 0: v**k (signed integer k); mode 1: |v|**A
    if mode == 0:
        return _powk(v, k)
    if k > 0:
        # integral A passed as k by the caller
        return _powk(fabs(v), k)
    return pow(fabs(v), A)


cdef double _gl_piece(double D, double a, double b, int k, double A, int mode, double c1,
                      const double* nodes, const double* weights, int q) noexcept nogil:
    cdef double mid = 0.5 * (a + b)
    cdef double half = 0.5 * (b - a)
    cdef double s = 0.0
    cdef int j
    for j in range(q):
        s += weights[j] * _integrand(_delta(D, mid + half * nodes[j], c1), k, A, mode)
    return half * s


cdef double _graded_piece(double D, double r, double e, int k, double A, int mode, double c1,
                          const double* nodes, const double* weights, int q, int p) noexcept nogil:
    # integral between the root r and the endpoint e with x = r + (e - r) s**p, s in [0, 1];
    # grading removes the |x - r|**A endpoint singularity for non-integral A
    cdef double L = fabs(e - r)
    cdef double acc = 0.0, sv, sp
    cdef int j
    if p == 1:
        if e > r:
            return _gl_piece(D, r, e, k, A, mode, c1, nodes, weights, q)
        return _gl_piece(D, e, r, k, A, mode, c1, nodes, weights, q)
    for j in range(q):
        sv = 0.5 * (nodes[j] + 1.0)
        sp = _powk(sv, p - 1)
        acc += weights[j] * p * sp * _integrand(_delta(D, r + (e - r) * sp * sv, c1), k, A, mode)
    return 0.5 * L * acc


cdef int _grade_for(double A) noexcept nogil:
    # smallest p <= 4 with p*A integral makes the graded integrand smooth in s
    cdef int p
    if A >= 4.0:
        return 1
    for p in range(1, 5):
        if p * A == floor(p * A):
            return p
    return 4


cdef double _unit_piece(double D, double a, double b, int k, double A, int mode, double c1,
                        bint split, const double* nodes, const double* weights, int q,
                        int grade) noexcept nogil:
    cdef double fa, fb, r, step
    cdef int it
    if split:
        fa = _delta(D, a, c1)
        fb = _delta(D, b, c1)
        if fa > 0.0 and fb < 0.0:
            # Delta is strictly decreasing on the piece; Newton from the secant point
            r = a + (b - a) * fa / (fa - fb)
            for it in range(30):
                step = _delta(D, r, c1) / (log(r) + 1.0 + c1)
                r = r + step
                if fabs(step) <= 1e-15 * r:
                    break
            if r > a and r < b:
                return (_graded_piece(D, r, a, k, A, mode, c1, nodes, weights, q, grade)
                        + _graded_piece(D, r, b, k, A, mode, c1, nodes, weights, q, grade))
    return _gl_piece(D, a, b, k, A, mode, c1, nodes, weights, q)


def moment_block(const long long[::1] D, long long n0, double a_first, double b_last,
                 int k, double A, int mode, double c1,
                 const double[::1] nodes, const double[::1] weights, bint split):
    """Compensated sum of the integral of Delta**k (or |Delta|**A) over pieces.

    Piece i covers [n0 + i, n0 + i + 1) clipped to [a_first, b_last] and carries
    the constant value D[i] of the summatory function.  Returns (hi, lo) of a
    Neumaier-compensated sum.
    """
    cdef Py_ssize_t m = D.shape[0]
    cdef Py_ssize_t i
    cdef double a, b, v, s = 0.0, c = 0.0, t
    cdef int q = nodes.shape[0]
    cdef int grade = 1
    if mode == 1:
        k = <int>A if A == floor(A) and A <= 64 else 0
        grade = _grade_for(A)
    with nogil:
        for i in range(m):
            a = <double>(n0 + i)
            b = a + 1.0
            if i == 0 and a_first > a:
                a = a_first
            if i == m - 1 and b_last < b:
                b = b_last
            if b <= a:
                continue
            v = _unit_piece(<double>D[i], a, b, k, A, mode, c1, split, &nodes[0], &weights[0], q, grade)
            t = s + v
            if fabs(s) >= fabs(v):
                c += (s - t) + v
            else:
                c += (v - t) + s
            s = t
    return s, c


cdef inline double _frac_dd(double hi, double lo) noexcept nogil:
    cdef double f = hi - floor(hi)
    f += lo
    return f - floor(f)


def expsum(const double[::1] xs, long long n_lo, long long n_hi):
    """S(x) = sum_{n_lo <= n <= n_hi} e(x sqrt(n)) for every x in xs."""
    cdef Py_ssize_t nx = xs.shape[0]
    cdef Py_ssize_t nn = n_hi - n_lo + 1 if n_hi >= n_lo else 0
    out = np.zeros(nx, dtype=np.complex128)
    cdef double complex[::1] ov = out
    sh = np.empty(nn, dtype=np.float64)
    sl = np.empty(nn, dtype=np.float64)
    cdef double[::1] shv = sh
    cdef double[::1] slv = sl
    cdef Py_ssize_t i, j
    cdef double n, s, x, t, e, f, re, im
    with nogil:
        for j in range(nn):
            n = <double>(n_lo + j)
            s = sqrt(n)
            shv[j] = s
            slv[j] = -fma(s, s, -n) / (2.0 * s)
        for i in range(nx):
            x = xs[i]
            re = 0.0
            im = 0.0
            for j in range(nn):
                t = x * shv[j]
                e = fma(x, shv[j], -t) + x * slv[j]
                f = TWO_PI * _frac_dd(t, e)
                re += cos(f)
                im += sin(f)
            ov[i] = re + 1j * im
    return out


def voronoi_sum(const double[::1] xs, const double[::1] coeff):
    """sum_{n=1}^{len(coeff)} coeff[n-1] * cos(4 pi sqrt(n x) - pi/4) for each x.

    sqrt(n x) is carried in double-double so the phase stays accurate when n x
    exceeds 2**53 / (4 pi)**2.
    """
    cdef Py_ssize_t nx = xs.shape[0]
    cdef Py_ssize_t nn = coeff.shape[0]
    out = np.zeros(nx, dtype=np.float64)
    cdef double[::1] ov = out
    cdef Py_ssize_t i, j
    cdef double x, ph, pl, s, sl, sq, r, acc, comp, term, t
    with nogil:
        for i in range(nx):
            x = xs[i]
            acc = 0.0
            comp = 0.0
            for j in range(nn):
                ph = <double>(j + 1) * x
                pl = fma(<double>(j + 1), x, -ph)
                s = sqrt(ph)
                sq = s * s
                r = (ph - sq) - fma(s, s, -sq) + pl
                sl = r / (2.0 * s)
                term = coeff[j] * cos(TWO_PI * _frac_dd(2.0 * s, 2.0 * sl) - QUARTER_PI)
                t = acc + term
                if fabs(acc) >= fabs(term):
                    comp += (acc - t) + term
                else:
                    comp += (term - t) + acc
                acc = t
            ov[i] = acc + comp
    return out
