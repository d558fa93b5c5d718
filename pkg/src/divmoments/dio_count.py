"""Exact counts of small signed sums of square roots over dyadic boxes.

The counting routine is meet-in-the-middle: the slots are split into two
groups, partial sums of one group are sorted, and each partial sum of the
other group range-queries the sorted list.  Floating point only decides pairs
that sit clearly inside or outside the window; pairs within a tolerance band
of 0 or of +-Delta are settled exactly (kernel form for zero, certified
enclosures against Delta otherwise).

Lemma bounds are evaluated with implied constant 1, and every N**epsilon is
replaced by a single logarithm.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import mpmath
from mpmath import libmp
import numpy as np

from .errors import InvalidArgument, ResourceError
from .radical_arith import enclose, is_zero_batch, radical_sum

MAX_VOLUME = 10 ** 9
MAX_HALF = 1 << 26
MAX_CANDIDATES = 1 << 24
MAX_PREC = 1 << 14


@dataclass(frozen=True)
class DyadicBox:
    """Product of ranges (N_j, 2 N_j] with a sign per slot (first sign +1)."""

    Ns: tuple[int, ...]
    signs: tuple[int, ...]

    def __post_init__(self):
        Ns = tuple(int(n) for n in self.Ns)
        signs = tuple(int(s) for s in self.signs)
        object.__setattr__(self, "Ns", Ns)
        object.__setattr__(self, "signs", signs)
        if not (3 <= len(Ns) <= 7):
            raise InvalidArgument(f"box dimension must lie in [3, 7], got {len(Ns)}")
        if len(signs) != len(Ns):
            raise InvalidArgument("one sign per range required")
        if any(n < 1 for n in Ns):
            raise InvalidArgument("every N_j must be >= 1")
        if any(s not in (1, -1) for s in signs) or signs[0] != 1:
            raise InvalidArgument("signs must be +-1 with the first sign +1")

    @property
    def k(self) -> int:
        return len(self.Ns)

    @property
    def volume(self) -> int:
        return math.prod(self.Ns)

    def values(self, j: int) -> np.ndarray:
        return np.arange(self.Ns[j] + 1, 2 * self.Ns[j] + 1, dtype=np.int64)

    def spec(self) -> str:
        return " ".join(f"{'+' if s > 0 else '-'}{n}" for s, n in zip(self.signs, self.Ns))


@dataclass(frozen=True)
class CountReport:
    count: int
    bound: float
    ratio: float
    lemma_id: int | None
    bounds: dict = field(default_factory=dict)


def _as_fraction(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, mpmath.mpf):
        return _mpf_fraction(x)
    if isinstance(x, (int, float)):
        return Fraction(x)
    raise InvalidArgument(f"unsupported Delta type {type(x).__name__}")


def _mpf_fraction(v) -> Fraction:
    # man_exp drops the sign; to_rational keeps it
    p, q = libmp.to_rational(v._mpf_)
    return Fraction(int(p), int(q))


def compare_abs(signs, ns, delta: Fraction) -> int:
    """Sign of |sum signs*sqrt(ns)| - delta, certified; delta a Fraction."""
    s = radical_sum(signs, ns)
    if all(t.h == 1 for t in s.terms):
        v = abs(sum(t.c for t in s.terms))
        return (v > delta) - (v < delta)
    prec = 64
    while prec <= MAX_PREC:
        e = enclose(s, prec)
        lo, hi = _mpf_fraction(e.lo), _mpf_fraction(e.hi)
        if lo > 0 or hi < 0:
            alo, ahi = (lo, hi) if lo > 0 else (-hi, -lo)
            if alo > delta:
                return 1
            if ahi < delta:
                return -1
        prec *= 2
    raise ResourceError(f"could not separate |sum| from Delta within {MAX_PREC} bits",
                        required=MAX_PREC)


def _best_split(Ns) -> tuple[list[int], list[int]]:
    k = len(Ns)
    best = None
    for r in range(1, k):
        for left in itertools.combinations(range(k), r):
            right = [j for j in range(k) if j not in left]
            cost = max(math.prod(Ns[j] for j in left), math.prod(Ns[j] for j in right))
            if best is None or cost < best[0]:
                best = (cost, list(left), right)
    return best[1], best[2]


def _half_sums(box: DyadicBox, slots) -> np.ndarray:
    acc = np.zeros(1)
    for j in slots:
        acc = (acc[:, None] + box.signs[j] * np.sqrt(box.values(j).astype(np.float64))[None, :]).ravel()
    return acc


def _rows(box: DyadicBox, left, right, ia, ib) -> np.ndarray:
    # rebuild full tuples (in slot order) from flat half indices
    out = np.empty((len(ia), box.k), dtype=np.int64)
    for slots, idx in ((left, ia), (right, ib)):
        shape = [box.Ns[j] for j in slots]
        parts = np.unravel_index(idx, shape)
        for j, p in zip(slots, parts):
            out[:, j] = box.Ns[j] + 1 + p
    return out


def _expand_ranges(starts, stops):
    lens = np.maximum(stops - starts, 0)
    total = int(lens.sum())
    if total > MAX_CANDIDATES:
        raise ResourceError(f"{total} boundary candidates exceed the budget", required=total)
    ia = np.repeat(np.arange(len(starts)), lens)
    offs = np.arange(total) - np.repeat(np.cumsum(lens) - lens, lens)
    return ia, np.repeat(starts, lens) + offs


def mitm_count(box: DyadicBox, delta, exclude_zero: bool = True) -> int:
    """Number of tuples in the box with (0 <) |sum signs*sqrt(n)| < delta."""
    dfrac = _as_fraction(delta)
    if dfrac <= 0:
        raise InvalidArgument(f"Delta must be > 0, got {delta}")
    if box.volume > MAX_VOLUME:
        raise ResourceError(f"box volume {box.volume} exceeds {MAX_VOLUME}", required=box.volume)
    left, right = _best_split(box.Ns)
    A = _half_sums(box, left)
    B = _half_sums(box, right)
    if max(len(A), len(B)) > MAX_HALF:
        raise ResourceError(f"half enumeration of size {max(len(A), len(B))} too large",
                            required=max(len(A), len(B)))
    order = np.argsort(B, kind="stable")
    Bs = B[order]
    d = float(dfrac)
    tol = 1e-12 * sum(math.sqrt(2.0 * n) for n in box.Ns)

    def ss(v, side):
        return np.searchsorted(Bs, v, side=side)

    i1 = ss(-A - d - tol, "left")
    i6 = ss(-A + d + tol, "right")
    if d <= 4 * tol:
        sure = 0
        bands = [(i1, i6)]
    else:
        i2 = ss(-A - d + tol, "right")
        i3 = ss(-A - tol, "left")
        i4 = ss(-A + tol, "right")
        i5 = ss(-A + d - tol, "left")
        sure = int(np.maximum(i3 - i2, 0).sum() + np.maximum(i5 - i4, 0).sum())
        bands = [(i1, i2), (i5, i6)]
        zero_band = (i3, i4)
        if exclude_zero:
            bands.append(zero_band)
        else:
            sure += int((i4 - i3).sum())
    count = sure
    for lo, hi in bands:
        ia, pos = _expand_ranges(lo, hi)
        if len(ia) == 0:
            continue
        rows = _rows(box, left, right, ia, order[pos])
        zero = is_zero_batch(box.signs, rows)
        if not exclude_zero:
            count += int(zero.sum())
        for r in rows[~zero].tolist():
            if compare_abs(box.signs, r, dfrac) < 0:
                count += 1
    return count


def naive_count(box: DyadicBox, delta, exclude_zero: bool = True, limit: int = 4 * 10 ** 6) -> int:
    """Direct enumeration of the whole box; near-ties settled in 60-digit arithmetic."""
    if box.volume > limit:
        raise ResourceError(f"box volume {box.volume} over the naive limit {limit}", required=box.volume)
    dfrac = _as_fraction(delta)
    grids = np.meshgrid(*[box.values(j) for j in range(box.k)], indexing="ij")
    ns = np.stack([g.ravel() for g in grids], axis=1)
    vals = np.abs((np.sqrt(ns.astype(np.float64)) * np.asarray(box.signs, float)).sum(axis=1))
    d = float(dfrac)
    near = (np.abs(vals - d) < 1e-9) | (vals < 1e-9)
    count = int(((vals < d) & ~near).sum())
    with mpmath.workdps(60):
        dm = mpmath.mpf(dfrac.numerator) / dfrac.denominator
        for row in ns[near].tolist():
            if radical_sum(box.signs, row).terms == ():
                count += 0 if exclude_zero else 1
                continue
            v = abs(mpmath.fsum(s * mpmath.sqrt(n) for s, n in zip(box.signs, row)))
            count += v < dm
    return count


def _ln(x: float) -> float:
    return math.log(max(x, math.e))


def lemma7_bound(Ns, delta: float) -> float:
    """Delta E**-1/2 prod N + E**-1 prod N with E = max N."""
    P = math.prod(Ns)
    E = max(Ns)
    return delta * E ** -0.5 * P + P / E


def lemma8_bound(Ns, delta: float) -> float:
    """Delta Q**1/2 NMKLRS + NMKRS L**1/2 ln L for slots (n, m, k, l, r, s, q)."""
    N, M, K, L, R, S, Q = Ns
    return delta * Q ** 0.5 * N * M * K * L * R * S + N * M * K * R * S * L ** 0.5 * _ln(L)


lemma9_bound = lemma8_bound


def lemma10_bound(Ns, delta: float) -> float:
    """prod (Delta**1/7 N_j**13/14 + N_j**5/7), times ln(prod N_j)."""
    return math.prod(delta ** (1 / 7) * n ** (13 / 14) + n ** (5 / 7) for n in Ns) * _ln(math.prod(Ns))


def applicable_lemmas(signs) -> list[int]:
    """Lemmas whose sign pattern matches, most specific first."""
    signs = tuple(signs)
    out = []
    if len(signs) == 7:
        if signs == (1, 1, 1, 1, -1, -1, -1):
            out.append(8)
        if signs[:5] == (1, 1, 1, 1, 1) and signs[6] == -1:
            out.append(9)
        if signs[:4] == (1, 1, 1, 1) and signs[6] == -1:
            out.append(10)
    if len(signs) >= 3 and any(s < 0 for s in signs):
        out.append(7)
    return out


_BOUNDS = {7: lemma7_bound, 8: lemma8_bound, 9: lemma9_bound, 10: lemma10_bound}


def count_solutions(box: DyadicBox, delta, exclude_zero: bool = True) -> CountReport:
    """Exact count with every matching lemma bound; the first match is primary."""
    count = mitm_count(box, delta, exclude_zero)
    d = float(_as_fraction(delta))
    lemmas = applicable_lemmas(box.signs)
    bounds = {lid: _BOUNDS[lid](box.Ns, d) for lid in lemmas}
    if not lemmas:
        return CountReport(count, float("nan"), float("nan"), None, bounds)
    bound = bounds[lemmas[0]]
    return CountReport(count, bound, count / bound if bound > 0 else float("nan"), lemmas[0], bounds)


@dataclass(frozen=True)
class GapReport:
    k: int
    signs: tuple[int, ...]
    Nmax: int
    gap: float
    witness: tuple[int, ...]
    lo: mpmath.mpf
    hi: mpmath.mpf
    scaled: float


def min_nonzero_gap(k: int, signs, Nmax: int) -> GapReport:
    """Smallest nonzero |sum signs*sqrt(n_j)| over 1 <= n_j <= Nmax, with a witness.

    ``scaled`` is gap * Nmax**(2**(k-2) - 1/2).  The gap is certified: the
    returned enclosure [lo, hi] has relative width below 1e-30.
    """
    signs = tuple(int(s) for s in signs)
    if not (3 <= k <= 5) or len(signs) != k:
        raise InvalidArgument("need 3 <= k <= 5 and one sign per slot")
    if signs[0] != 1 or any(s not in (1, -1) for s in signs):
        raise InvalidArgument("signs must be +-1 with the first sign +1")
    if Nmax < 1:
        raise InvalidArgument(f"Nmax must be >= 1, got {Nmax}")
    if Nmax ** k > 10 ** 12 or (k == 5 and Nmax > 200):
        raise ResourceError(f"gap search over {Nmax}**{k} tuples exceeds the budget", required=Nmax ** k)
    left = list(range(k // 2))
    right = list(range(k // 2, k))
    vals = np.sqrt(np.arange(1, Nmax + 1, dtype=np.float64))

    def half(slots):
        acc = np.zeros(1)
        for j in slots:
            acc = (acc[:, None] + signs[j] * vals[None, :]).ravel()
        return acc

    A, B = half(left), half(right)
    order = np.argsort(B, kind="stable")
    Bs = B[order]
    tau = 1e-10 * k * math.sqrt(Nmax)
    # float upper bound U on the smallest value clearly away from zero
    pos = np.searchsorted(Bs, -A)
    U = math.inf
    for shift in range(-3, 3):
        p = np.clip(pos + shift, 0, len(Bs) - 1)
        v = np.abs(A + Bs[p])
        v = v[v > tau]
        if v.size:
            U = min(U, float(v.min()))
    if not math.isfinite(U):
        raise ResourceError("no nonzero value found in the search range", required=0)
    lo = np.searchsorted(Bs, -A - U - tau, side="left")
    hi = np.searchsorted(Bs, -A + U + tau, side="right")
    ia, p = _expand_ranges(lo, hi)
    ib = order[p]
    rows = np.empty((len(ia), k), dtype=np.int64)
    for slots, idx in ((left, ia), (right, ib)):
        parts = np.unravel_index(idx, [Nmax] * len(slots))
        for j, q in zip(slots, parts):
            rows[:, j] = q + 1
    zero = is_zero_batch(signs, rows)
    # one entry per distinct |value|: key is the positive canonical form
    cands = {}
    for row in rows[~zero].tolist():
        s = radical_sum(signs, row)
        e = enclose(s, 64)
        while not (e.lo > 0 or e.hi < 0):
            e = enclose(s, 2 * e.prec)
        key = s if e.lo > 0 else -s
        if key not in cands or tuple(row) < cands[key]:
            cands[key] = tuple(row)
    prec = 128
    while True:
        encs = {key: enclose(key, prec) for key in cands}
        top = min(e.hi for e in encs.values())
        cands = {key: w for key, w in cands.items() if encs[key].lo <= top}
        if len(cands) == 1:
            (key, witness), = cands.items()
            e = encs[key]
            if e.width <= e.lo * mpmath.mpf(10) ** -30:
                break
        if prec > MAX_PREC:
            raise ResourceError("gap candidates not separated", required=prec)
        prec *= 2
    gap = float(e.mid)
    return GapReport(k, signs, Nmax, gap, witness, e.lo, e.hi, gap * Nmax ** (2 ** (k - 2) - 0.5))


def fractional_count(alpha: float, beta: float, K: int, delta: float) -> CountReport:
    """#{K < k <= 2K : ||beta + alpha sqrt(k)|| < delta} with the matching bound.

    Bound: K delta + K**1/2 ln K.  Values within 1e-9 of delta are settled
    in 50-digit arithmetic.
    """
    K = int(K)
    if K < 10:
        raise InvalidArgument(f"K must be >= 10, got {K}")
    if not (0 < delta < 0.5):
        raise InvalidArgument(f"delta must lie in (0, 1/2), got {delta}")
    if not (2 * K ** -0.5 <= abs(alpha) <= 10 * K ** 0.5):
        raise InvalidArgument(f"|alpha| must lie in [2 K**-1/2, 10 K**1/2], got {alpha}")
    ks = np.arange(K + 1, 2 * K + 1, dtype=np.float64)
    frac = np.mod(beta + alpha * np.sqrt(ks), 1.0)
    dist = np.minimum(frac, 1.0 - frac)
    near = np.abs(dist - delta) < 1e-9
    count = int(((dist < delta) & ~near).sum())
    with mpmath.workdps(50):
        a, b, dm = mpmath.mpf(alpha), mpmath.mpf(beta), mpmath.mpf(delta)
        for kk in ks[near].astype(np.int64).tolist():
            v = b + a * mpmath.sqrt(kk)
            f = v - mpmath.floor(v)
            count += min(f, 1 - f) < dm
    bound = K * delta + K ** 0.5 * math.log(K)
    return CountReport(count, bound, count / bound, 4, {4: bound})
