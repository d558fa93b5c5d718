"""Balanced square-root tuples and the truncated singular series s_{k;l}(f; y).

A tuple (n_1, ..., n_k) is balanced when
sqrt(n_1) + ... + sqrt(n_l) = sqrt(n_{l+1}) + ... + sqrt(n_k).
Writing n = a**2 h with h squarefree, this holds iff for every kernel h the
a-values carrying h sum to the same total on both sides.  So the slots split
into blocks (one per kernel), each block holding at least one slot per side,
and distinct blocks carry distinct kernels.

Two independent evaluators are provided:

* ``enumerate_balanced`` walks the block structure and yields every ordered
  tuple once (per block, left and right a-tuples are joined on their sum);
  ``series_partial(method="enumerate")`` sums the terms with ``math.fsum``,
  which is exactly rounded and so independent of enumeration order.
* ``method="kernel"`` never builds tuples: per kernel the block weight is a
  dot product of convolution powers, and the distinct-kernel constraint is
  handled by Moebius inversion over set partitions of the blocks.
"""
from __future__ import annotations

import hashlib
import itertools
import json
import math
import os
from collections import defaultdict
from dataclasses import dataclass
from functools import lru_cache
from typing import Callable, Iterator, Sequence

import mpmath
import numpy as np

from .divisor_core import sieve_divisor_table
from .errors import ChecksumError, InvalidArgument
from .radical_arith import kernel_table, radical_sum

MAX_K = 9


@dataclass(frozen=True)
class BalancedTuple:
    k: int
    l: int
    ns: tuple[int, ...]


@dataclass(frozen=True)
class SeriesValue:
    k: int
    l: int
    y: int
    value: float
    n_solutions: int
    tail_bound: float
    method: str = "enumerate"


def _check_params(k, l, y):
    if not (2 <= k <= MAX_K):
        raise InvalidArgument(f"k must lie in [2, {MAX_K}], got {k}")
    if not (1 <= l < k):
        raise InvalidArgument(f"l must satisfy 1 <= l < k, got l={l}, k={k}")
    if y < 1:
        raise InvalidArgument(f"y must be >= 1, got {y}")


def set_partitions(items: Sequence[int]) -> Iterator[list[list[int]]]:
    """All set partitions of ``items``; blocks keep the input order."""
    items = list(items)
    if not items:
        yield []
        return
    first, rest = items[0], items[1:]
    for part in set_partitions(rest):
        yield [[first]] + part
        for i in range(len(part)):
            yield part[:i] + [[first] + part[i]] + part[i + 1:]


@lru_cache(maxsize=None)
def _block_partitions(k: int, l: int) -> tuple[tuple[tuple[tuple[int, ...], tuple[int, ...]], ...], ...]:
    # partitions of the k slots in which every block meets both sides;
    # each block is (left slots, right slots)
    out = []
    for part in set_partitions(range(k)):
        blocks = []
        for b in part:
            left = tuple(i for i in b if i < l)
            right = tuple(i for i in b if i >= l)
            if not left or not right:
                break
            blocks.append((left, right))
        else:
            out.append(tuple(sorted(blocks)))
    return tuple(sorted(out))


@lru_cache(maxsize=None)
def _compositions(count: int, amax: int) -> dict[int, tuple[tuple[int, ...], ...]]:
    # ordered count-tuples over 1..amax, grouped by their sum
    by_sum = defaultdict(list)
    for t in itertools.product(range(1, amax + 1), repeat=count):
        by_sum[sum(t)].append(t)
    return {s: tuple(v) for s, v in by_sum.items()}


@lru_cache(maxsize=None)
def _block_pairs(L: int, R: int, amax: int) -> tuple[tuple[tuple[int, ...], tuple[int, ...]], ...]:
    left = _compositions(L, amax)
    right = _compositions(R, amax)
    pairs = []
    for s in sorted(left):
        if s in right:
            pairs.extend(itertools.product(left[s], right[s]))
    return tuple(pairs)


def _kernels_upto(y: int) -> list[tuple[int, int]]:
    # (h, amax) for squarefree h <= y, amax = largest a with a*a*h <= y
    a_tab, h_tab = kernel_table(y)
    return [(h, math.isqrt(y // h)) for h in range(1, y + 1) if a_tab[h] == 1]


def _iter_tuples(k: int, l: int, y: int) -> Iterator[tuple[int, ...]]:
    kernels = _kernels_upto(y)
    for blocks in _block_partitions(k, l):
        sizes = [(len(lt), len(rt)) for lt, rt in blocks]
        feasible = [[(h, am) for h, am in kernels if am * min(L, R) >= max(L, R)]
                    for L, R in sizes]
        for choice in _injective(feasible):
            per_block = [_block_pairs(L, R, am) for (L, R), (h, am) in zip(sizes, choice)]
            for combo in itertools.product(*per_block):
                ns = [0] * k
                for (lt, rt), (h, _), (la, ra) in zip(blocks, choice, combo):
                    for slot, a in zip(lt, la):
                        ns[slot] = a * a * h
                    for slot, a in zip(rt, ra):
                        ns[slot] = a * a * h
                yield tuple(ns)


def _injective(options: list[list[tuple[int, int]]], used=()) -> Iterator[tuple]:
    if not options:
        yield ()
        return
    for opt in options[0]:
        if opt[0] in used:
            continue
        for rest in _injective(options[1:], used + (opt[0],)):
            yield (opt,) + rest


def enumerate_balanced(k: int, l: int, y: int) -> Iterator[BalancedTuple]:
    """Every ordered balanced tuple with all entries <= y, exactly once."""
    _check_params(k, l, y)
    for ns in _iter_tuples(k, l, int(y)):
        yield BalancedTuple(k, l, ns)


def enumerate_balanced_indexed(k: int, l: int, y: int) -> Iterator[BalancedTuple]:
    """Meet-in-the-middle enumeration keyed by canonical kernel vectors.

    All tuples of the smaller side go into a dict keyed by their RadicalSum;
    tuples of the larger side are streamed against it.  Cost y**l + y**(k-l),
    so this is a cross-check for moderate y rather than the main route.
    """
    _check_params(k, l, y)
    small_is_left = l <= k - l
    n_small, n_large = (l, k - l) if small_is_left else (k - l, l)
    index = defaultdict(list)
    rng = range(1, int(y) + 1)
    for t in itertools.product(rng, repeat=n_small):
        index[radical_sum([1] * n_small, t)].append(t)
    for t in itertools.product(rng, repeat=n_large):
        for u in index.get(radical_sum([1] * n_large, t), ()):
            yield BalancedTuple(k, l, (u + t) if small_is_left else (t + u))


def divisor_weights(y: int) -> np.ndarray:
    """d(n) for 0 <= n <= y as float64 (index 0 unused)."""
    return sieve_divisor_table(max(int(y), 1)).values.astype(np.float64)


def _weight_table(f, y: int) -> np.ndarray:
    if f is None:
        return divisor_weights(y)
    if isinstance(f, np.ndarray):
        if len(f) < y + 1:
            raise InvalidArgument(f"weight table covers n <= {len(f) - 1}, need {y}")
        return np.asarray(f[:y + 1], dtype=np.float64)
    w = np.zeros(y + 1)
    w[1:] = [float(f(n)) for n in range(1, y + 1)]
    return w


def series_term(fw: np.ndarray, ns: Sequence[int]) -> float:
    """prod f(n_i) / (prod n_i)**(3/4), with the product of the n_i taken exactly."""
    num = 1.0
    P = 1
    for n in ns:
        num *= fw[n]
        P *= n
    return num * float(P) ** -0.75


def _mobius_blocks(m: int) -> list[tuple[int, list[list[int]]]]:
    # (mu(0, rho), rho) for the partition lattice of m labelled blocks
    out = []
    for rho in set_partitions(range(m)):
        mu = 1
        for B in rho:
            mu *= (-1) ** (len(B) - 1) * math.factorial(len(B) - 1)
        out.append((mu, rho))
    return out


def _kernel_route(k: int, l: int, y: int, fw: np.ndarray, exact_count: bool):
    kernels = _kernels_upto(y)
    hs = [h for h, _ in kernels]

    def conv_pow(vec, e):
        r = np.ones(1, dtype=vec.dtype)
        for _ in range(e):
            r = np.convolve(r, vec)
        return r

    per_kernel_w = []
    per_kernel_c = []
    for h, am in kernels:
        a = np.arange(1, am + 1)
        n = a * a * h
        w = np.zeros(am + 1)
        w[1:] = fw[n] * n.astype(np.float64) ** -0.75
        per_kernel_w.append(w)
        c = np.zeros(am + 1, dtype=object)
        c[1:] = 1
        per_kernel_c.append(c)

    @lru_cache(maxsize=None)
    def F(L, R, counting):
        vals = []
        for w in (per_kernel_c if counting else per_kernel_w):
            pl, pr = conv_pow(w, L), conv_pow(w, R)
            m = min(len(pl), len(pr))
            vals.append(pl[:m].dot(pr[:m]))
        return np.array(vals, dtype=object if counting else np.float64)

    total_value = []
    total_count = 0
    for blocks in _block_partitions(k, l):
        sizes = [(len(lt), len(rt)) for lt, rt in blocks]
        fs = [F(L, R, False) for L, R in sizes]
        cs = [F(L, R, True) for L, R in sizes] if exact_count else None
        for mu, rho in _mobius_blocks(len(sizes)):
            prod_v = float(mu)
            prod_c = mu
            for B in rho:
                vec = fs[B[0]].copy()
                for i in B[1:]:
                    vec = vec * fs[i]
                prod_v *= math.fsum(vec.tolist())
                if exact_count:
                    cvec = cs[B[0]]
                    for i in B[1:]:
                        cvec = cvec * cs[i]
                    prod_c *= sum(cvec.tolist())
            total_value.append(prod_v)
            if exact_count:
                total_count += prod_c
    del hs
    return math.fsum(total_value), (int(total_count) if exact_count else -1)


def _tail_bound(value: float, y: int) -> float:
    # heuristic scale only: |s - s(y)| ~ C y**(-1/2) with C taken as |s(y)|
    return abs(value) * y ** -0.5


def series_partial(f=None, k: int = 2, l: int = 1, y: int = 1, method: str = "auto",
                   cache_dir=None) -> SeriesValue:
    """Truncated singular series s_{k;l}(f; y).

    ``f`` is a callable on positive integers, a weight array indexed by n, or
    None for the divisor function.  ``method`` is "enumerate" (sum over the
    tuple stream), "kernel" (convolution route, no tuples) or "auto", which
    enumerates while the tuple count stays small and switches to the kernel
    route otherwise.  With ``cache_dir`` the enumerated tuple list is stored
    and reused.
    """
    _check_params(k, l, y)
    y = int(y)
    fw = _weight_table(f, y)
    if method == "auto":
        method = "enumerate" if y ** (k / 2) <= 2e6 else "kernel"
    if method == "enumerate":
        if cache_dir is not None:
            arr = cached_tuples(k, l, y, cache_dir)
            terms = (series_term(fw, row) for row in arr.tolist())
            count = len(arr)
            value = math.fsum(terms)
        else:
            counter = itertools.count()
            value = math.fsum(series_term(fw, ns) for ns, _ in zip(_iter_tuples(k, l, y), counter))
            count = next(counter)
    elif method == "kernel":
        value, count = _kernel_route(k, l, y, fw, exact_count=True)
    else:
        raise InvalidArgument(f"unknown method {method!r}")
    return SeriesValue(k, l, y, value, count, _tail_bound(value, y), method)


def tsang_c1_partial(Y: int, f=None) -> float:
    """Partial sum of c_1 over alpha, beta >= 1 and squarefree h with (alpha+beta)**2 h <= Y.

    Each term is (alpha beta (alpha+beta))**(-3/2) h**(-9/4) d(alpha^2 h) d(beta^2 h) d((alpha+beta)^2 h),
    evaluated through ``series_term`` on the triple ((alpha+beta)^2 h, alpha^2 h, beta^2 h).
    """
    Y = int(Y)
    if Y < 1:
        raise InvalidArgument(f"Y must be >= 1, got {Y}")
    fw = _weight_table(f, Y)
    a_tab, _ = kernel_table(Y)
    terms = []
    for h in range(1, Y // 4 + 1):
        if a_tab[h] != 1:
            continue
        smax = math.isqrt(Y // h)
        for s in range(2, smax + 1):
            for alpha in range(1, s):
                beta = s - alpha
                terms.append(series_term(fw, (s * s * h, alpha * alpha * h, beta * beta * h)))
    return math.fsum(terms)


def tsang_c1_terms(Y: int, f=None) -> dict[int, list[float]]:
    """c_1 terms grouped by their largest entry (alpha+beta)^2 h, each group sorted."""
    Y = int(Y)
    fw = _weight_table(f, Y)
    a_tab, _ = kernel_table(Y)
    groups = defaultdict(list)
    for h in range(1, Y // 4 + 1):
        if a_tab[h] != 1:
            continue
        for s in range(2, math.isqrt(Y // h) + 1):
            for alpha in range(1, s):
                ns = (s * s * h, alpha * alpha * h, (s - alpha) ** 2 * h)
                groups[ns[0]].append(series_term(fw, ns))
    return {n: sorted(v) for n, v in groups.items()}


def y_from_T(T: float) -> int:
    """Truncation y = floor(T**(1/4)) used in the seventh-moment argument."""
    return max(1, int(math.floor(T ** 0.25 + 1e-12)))


def zeta_second_moment_constant() -> float:
    """zeta(3/2)**4 / (6 pi**2 zeta(3))."""
    with mpmath.workdps(30):
        return float(mpmath.zeta(1.5) ** 4 / (6 * mpmath.pi ** 2 * mpmath.zeta(3)))


SUPPORTED_K = (2, 3, 4, 7)


def coefficient_Ck(k: int, y: int = 256, method: str = "kernel") -> float:
    """Main-term coefficient C_k of the integral of Delta**k, with series truncated at y."""
    if k not in SUPPORTED_K:
        raise InvalidArgument(f"coefficient available for k in {SUPPORTED_K}, got {k}")
    pi = math.pi
    if k == 2:
        return zeta_second_moment_constant()
    if y < 1:
        raise InvalidArgument(f"y must be >= 1, got {y}")
    if k == 3:
        return 3.0 * tsang_c1_partial(y) / (28.0 * pi ** 3)
    if k == 4:
        return 3.0 * series_partial(None, 4, 2, y, method).value / (64.0 * pi ** 4)
    s3, s2, s1 = seventh_moment_series(y, method)
    return 7.0 * (5.0 * s3 - 3.0 * s2 - s1) / (2816.0 * pi ** 7)


def seventh_moment_series(y: int, method: str = "kernel") -> tuple[float, float, float]:
    """(s_{7;3}(d;y), s_{7;2}(d;y), s_{7;1}(d;y))."""
    return tuple(series_partial(None, 7, l, y, method).value for l in (3, 2, 1))


def tail_differences(k: int, l: int, ys: Sequence[int], exponent: float = 0.45,
                     method: str = "kernel") -> list[tuple[int, float, float]]:
    """(y, |s(2y) - s(y)|, |s(2y) - s(y)| * y**exponent) over ``ys``."""
    cache = {}

    def s(y):
        if y not in cache:
            cache[y] = series_partial(None, k, l, y, method).value
        return cache[y]

    rows = []
    for y in ys:
        diff = abs(s(2 * y) - s(y))
        rows.append((y, diff, diff * y ** exponent))
    return rows


def _cache_name(k, l, y) -> str:
    key = json.dumps({"kind": "balanced", "k": k, "l": l, "y": y, "v": 1}, sort_keys=True)
    return hashlib.sha256(key.encode()).hexdigest()[:24]


def cached_tuples(k: int, l: int, y: int, cache_dir) -> np.ndarray:
    """Tuple list for (k, l, y) as an (n, k) int64 array, reusing an on-disk copy.

    The file holds the array in .npy format followed by nothing else; a
    sidecar ``.sha256`` records the digest and a mismatch raises ChecksumError.
    """
    _check_params(k, l, y)
    os.makedirs(cache_dir, exist_ok=True)
    base = os.path.join(os.fspath(cache_dir), f"balanced-{k}-{l}-{y}-{_cache_name(k, l, y)}")
    path, digest_path = base + ".npy", base + ".sha256"
    if os.path.exists(path) and os.path.exists(digest_path):
        with open(path, "rb") as fh:
            raw = fh.read()
        with open(digest_path) as fh:
            want = fh.read().strip()
        if hashlib.sha256(raw).hexdigest() != want:
            raise ChecksumError(path)
        return np.load(path)
    rows = list(_iter_tuples(k, l, int(y)))
    arr = np.array(rows, dtype=np.int64).reshape(len(rows), k)
    np.save(path, arr)
    with open(path, "rb") as fh:
        digest = hashlib.sha256(fh.read()).hexdigest()
    with open(digest_path, "w") as fh:
        fh.write(digest + "\n")
    return arr
