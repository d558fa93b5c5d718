"""Exact arithmetic on integer combinations of square roots.

Every positive integer factors uniquely as n = a**2 * h with h squarefree, so
sqrt(n) = a * sqrt(h).  A sum of signed square roots therefore reduces to a
vector of integer coefficients indexed by squarefree kernels h.  Square roots
of distinct squarefree integers are linearly independent over the rationals
(Besicovitch), hence the sum vanishes exactly when every coefficient does;
``is_zero`` relies on this and never touches floating point.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import NamedTuple, Sequence

import mpmath
import numpy as np
from mpmath import libmp

from .errors import InvalidArgument


def squarefree_decompose(n: int) -> tuple[int, int]:
    """Return (a, h) with n = a*a*h and h squarefree."""
    n = int(n)
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    a = 1
    h = 1
    m = n
    p = 2
    while p * p <= m:
        if m % p == 0:
            e = 0
            while m % p == 0:
                m //= p
                e += 1
            a *= p ** (e // 2)
            if e % 2:
                h *= p
        p += 1 if p == 2 else 2
    h *= m
    return a, h


@lru_cache(maxsize=16)
def kernel_table(y: int) -> tuple[np.ndarray, np.ndarray]:
    """Arrays (a, h) of length y + 1 with n = a[n]**2 * h[n] for 1 <= n <= y.

    a[n] is the largest integer whose square divides n; index 0 holds zeros.
    """
    y = int(y)
    if y < 1:
        raise InvalidArgument(f"y must be >= 1, got {y}")
    a = np.ones(y + 1, dtype=np.int64)
    for i in range(2, math.isqrt(y) + 1):
        a[i * i::i * i] = i
    n = np.arange(y + 1, dtype=np.int64)
    h = n // (a * a)
    a[0] = 0
    a.setflags(write=False)
    h.setflags(write=False)
    return a, h


@dataclass(frozen=True, order=True)
class KernelTerm:
    h: int
    c: int

    def __post_init__(self):
        if self.c == 0:
            raise InvalidArgument("KernelTerm coefficient must be nonzero")
        if self.h < 1 or squarefree_decompose(self.h)[0] != 1:
            raise InvalidArgument(f"kernel {self.h} is not a squarefree positive integer")


@dataclass(frozen=True)
class RadicalSum:
    """sum c_h sqrt(h) over distinct squarefree kernels, sorted by h."""

    terms: tuple[KernelTerm, ...] = ()

    def __neg__(self):
        return RadicalSum(tuple(KernelTerm(t.h, -t.c) for t in self.terms))

    def expand(self) -> tuple[list[int], list[int]]:
        """(signs, ns) whose radical_sum reproduces this value."""
        signs, ns = [], []
        for t in self.terms:
            signs.append(1 if t.c > 0 else -1)
            ns.append(t.c * t.c * t.h)
        return signs, ns

    def __float__(self):
        return math.fsum(t.c * math.sqrt(t.h) for t in self.terms)


def _canonical(coeffs: dict[int, int]) -> RadicalSum:
    return RadicalSum(tuple(KernelTerm(h, c) for h, c in sorted(coeffs.items()) if c != 0))


def radical_sum(signs: Sequence[int], ns: Sequence[int]) -> RadicalSum:
    """Canonical form of sum_i signs[i] * sqrt(ns[i])."""
    if len(signs) != len(ns):
        raise InvalidArgument(f"length mismatch: {len(signs)} signs, {len(ns)} values")
    coeffs: dict[int, int] = {}
    for s, n in zip(signs, ns):
        if s not in (1, -1):
            raise InvalidArgument(f"signs must be +1 or -1, got {s}")
        a, h = squarefree_decompose(n)
        coeffs[h] = coeffs.get(h, 0) + s * a
    return _canonical(coeffs)


def is_zero(s: RadicalSum) -> bool:
    return not s.terms


def is_zero_batch(signs: Sequence[int], ns: np.ndarray, chunk: int = 1 << 16) -> np.ndarray:
    """Exact vanishing test for many tuples at once.

    ``ns`` has shape (m, k); row r is zero iff for every kernel the signed
    coefficients of the slots carrying that kernel cancel.
    """
    ns = np.asarray(ns, dtype=np.int64)
    if ns.ndim != 2 or ns.shape[1] != len(signs):
        raise InvalidArgument("ns must have shape (m, len(signs))")
    out = np.zeros(ns.shape[0], dtype=bool)
    if ns.size == 0:
        return out
    a_tab, h_tab = kernel_table(int(ns.max()))
    sg = np.asarray(signs, dtype=np.int64)
    for i in range(0, ns.shape[0], chunk):
        blk = ns[i:i + chunk]
        coef = a_tab[blk] * sg[None, :]
        H = h_tab[blk]
        same = H[:, :, None] == H[:, None, :]
        per_slot = np.einsum("mij,mj->mi", same, coef)
        out[i:i + chunk] = ~per_slot.any(axis=1)
    return out


class Enclosure(NamedTuple):
    """Closed interval [lo, hi] of mpmath numbers, with the precision used."""

    lo: mpmath.mpf
    hi: mpmath.mpf
    prec: int

    @property
    def mid(self):
        with mpmath.workprec(self.prec + 1):
            return (self.lo + self.hi) / 2

    @property
    def width(self):
        with mpmath.workprec(self.prec + 1):
            return self.hi - self.lo

    def sign(self) -> int:
        """+1 / -1 when the interval excludes zero, 0 when it is [0, 0]."""
        if self.lo > 0:
            return 1
        if self.hi < 0:
            return -1
        if self.lo == 0 and self.hi == 0:
            return 0
        raise ValueError("enclosure straddles zero")

    def __float__(self):
        return float(self.mid)


def _bound(terms, prec: int, rnd) -> tuple:
    # directed-rounding sum; c*sqrt(h) rounded toward rnd via the sqrt's own rounding
    other = libmp.round_ceiling if rnd == libmp.round_floor else libmp.round_floor
    acc = libmp.fzero
    for t in terms:
        r = libmp.mpf_sqrt(libmp.from_int(t.h), prec, rnd if t.c > 0 else other)
        acc = libmp.mpf_add(acc, libmp.mpf_mul(libmp.from_int(t.c), r, prec, rnd), prec, rnd)
    return acc


def enclose(s: RadicalSum, prec: int) -> Enclosure:
    """Rigorous enclosure of the value of ``s`` at ``prec`` bits."""
    if not s.terms:
        zero = mpmath.mpf(0)
        return Enclosure(zero, zero, prec)
    lo = mpmath.mp.make_mpf(_bound(s.terms, prec, libmp.round_floor))
    hi = mpmath.mp.make_mpf(_bound(s.terms, prec, libmp.round_ceiling))
    return Enclosure(lo, hi, prec)


def numeric_value(s: RadicalSum, rel_err: float = 1e-15, start_prec: int = 53) -> Enclosure:
    """Enclosure of ``s`` with width <= rel_err * |mid| and a determined sign.

    Precision starts at double (53 bits) and doubles until both conditions
    hold.  Nonzero sums are bounded away from zero, so this terminates; the
    empty sum returns [0, 0] immediately.
    """
    if rel_err <= 0:
        raise InvalidArgument(f"rel_err must be > 0, got {rel_err}")
    if not s.terms:
        return enclose(s, start_prec)
    prec = start_prec
    while True:
        e = enclose(s, prec)
        if (e.lo > 0 or e.hi < 0) and e.width <= rel_err * abs(e.mid):
            return e
        prec = 128 if prec < 128 else 2 * prec
