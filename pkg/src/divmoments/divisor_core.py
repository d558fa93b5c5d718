"""Divisor function d(n), the summatory function D(x) and the error term Delta(x).

Error model: D(x) is an exact integer; ``gamma`` and ``log`` are evaluated in
double precision, so Delta(x) = D - x log x - (2 gamma - 1) x carries an
absolute error of a few ulps of x log x.  Delta is right-continuous: at an
integer x the term n = x is included in D(x).
"""
from __future__ import annotations

import math
import os
import struct
import zlib
from dataclasses import dataclass, field
from typing import Iterator

import numpy as np

from . import _kernels
from .errors import ChecksumError, InvalidArgument, ResourceError

EULER_GAMMA = 0.57721566490153286060651209008240243
DELTA_LINEAR = 2.0 * EULER_GAMMA - 1.0

DEFAULT_BLOCK = 1 << 15
DEFAULT_MAX_BYTES = 1 << 32

_CACHE_MAGIC = b"DDT1"
_CACHE_HEADER = struct.Struct("<4sQQI")


def primes_upto(n: int) -> np.ndarray:
    """Primes p <= n as an int64 array (plain Eratosthenes)."""
    if n < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(n + 1, dtype=bool)
    sieve[:2] = False
    for i in range(2, math.isqrt(n) + 1):
        if sieve[i]:
            sieve[i * i::i] = False
    return np.flatnonzero(sieve).astype(np.int64)


def _primes_for(hi: int) -> np.ndarray:
    # primes up to sqrt(hi - 1), enough to factor every n < hi
    return primes_upto(math.isqrt(max(hi - 1, 1)) + 1)


@dataclass(frozen=True, eq=False)
class DivisorTable:
    """Sieved values d(1..limit).

    ``values`` has length ``limit + 1`` and ``values[0] == 0`` so that
    ``values[n] == d(n)``.  The array is marked read-only.
    """

    limit: int
    values: np.ndarray = field(repr=False)
    block_size: int = DEFAULT_BLOCK

    def __post_init__(self):
        self.values.setflags(write=False)

    def __getitem__(self, n):
        return self.values[n]

    def __len__(self):
        return self.limit

    def blocks(self) -> Iterator[tuple[int, np.ndarray]]:
        """(start, view) pairs covering 1..limit in block_size steps."""
        for lo in range(0, self.limit + 1, self.block_size):
            hi = min(lo + self.block_size, self.limit + 1)
            start = max(lo, 1)
            yield start, self.values[start:hi]

    def summatory(self) -> np.ndarray:
        """Cumulative sums: result[n] = D(n) for 0 <= n <= limit (int64)."""
        return np.cumsum(self.values, dtype=np.int64)

    def total(self) -> int:
        return int(self.values.sum(dtype=np.int64))


def _check_budget(nbytes: int, max_bytes: int, what: str):
    if nbytes > max_bytes:
        raise ResourceError(
            f"{what} requires {nbytes} bytes, over the budget of {max_bytes} bytes",
            required=nbytes)


def sieve_divisor_table(X: int, block_size: int = DEFAULT_BLOCK, threads: int = 1,
                        max_bytes: int | None = None) -> DivisorTable:
    """Sieve d(n) for 1 <= n <= X with a segmented prime-power sieve.

    Each block of ``block_size`` integers is factored independently by walking
    prime-power strides, so blocks can be filled in parallel (``threads``)
    without changing the result.
    """
    X = int(X)
    if X < 1:
        raise InvalidArgument(f"X must be >= 1, got {X}")
    if block_size < 1:
        raise InvalidArgument(f"block_size must be >= 1, got {block_size}")
    if max_bytes is None:
        max_bytes = int(os.environ.get("DIVMOMENTS_MAX_BYTES", DEFAULT_MAX_BYTES))
    # table + per-block workspace (uint64 product + uint8 count)
    _check_budget(4 * (X + 1) + 9 * block_size * max(threads, 1), max_bytes,
                  f"divisor table to X={X}")
    primes = _primes_for(X + 1)
    values = _kernels.sieve_table(X, int(block_size), primes, int(threads))
    return DivisorTable(limit=X, values=values, block_size=int(block_size))


def divisor_count(n: int) -> int:
    """d(n) by trial division; an independent oracle for the sieve."""
    n = int(n)
    if n < 1:
        raise InvalidArgument(f"n must be >= 1, got {n}")
    count = 1
    p = 2
    while p * p <= n:
        e = 0
        while n % p == 0:
            n //= p
            e += 1
        count *= e + 1
        p += 1 if p == 2 else 2
    if n > 1:
        count *= 2
    return count


def _floor_checked(x) -> int:
    if isinstance(x, float) and not math.isfinite(x):
        raise InvalidArgument(f"x must be finite, got {x}")
    if x < 1:
        raise InvalidArgument(f"x must be >= 1, got {x}")
    # math.floor is exact for int, float, Fraction and Decimal inputs
    return math.floor(x)


def summatory_D(x) -> int:
    """D(x) = sum_{n <= x} d(n) by the hyperbola identity, O(sqrt x)."""
    n = _floor_checked(x)
    r = math.isqrt(n)
    return 2 * sum(n // k for k in range(1, r + 1)) - r * r


@dataclass(frozen=True)
class DeltaSample:
    x: float
    D: int
    delta: float
    gamma_const: float = EULER_GAMMA


def delta_from_D(D, x):
    """Delta = D - x log x - (2 gamma - 1) x; numpy-aware."""
    return D - x * np.log(x) - DELTA_LINEAR * x


def delta_at(x) -> DeltaSample:
    """Delta(x) with D(x) from the hyperbola method."""
    D = summatory_D(x)
    xf = float(x)
    return DeltaSample(x=xf, D=D, delta=D - xf * math.log(xf) - DELTA_LINEAR * xf)


def summatory_blocks(n_lo: int, n_hi: int, block: int = 1 << 16) -> Iterator[tuple[int, np.ndarray]]:
    """Yield (start, D-array) with D-array[i] = D(start + i), for n_lo <= n <= n_hi.

    A single hyperbola evaluation seeds the running sum; every later value
    comes from the segmented sieve.
    """
    if n_hi < n_lo:
        return
    if block < 1:
        raise InvalidArgument(f"block must be >= 1, got {block}")
    running = summatory_D(n_lo - 1) if n_lo > 1 else 0
    primes = _primes_for(n_hi + 1)
    for lo in range(n_lo, n_hi + 1, block):
        hi = min(lo + block, n_hi + 1)
        d = _kernels.sieve_range(lo, hi, primes)
        D = running + np.cumsum(d, dtype=np.int64)
        running = int(D[-1])
        yield lo, D


def delta_stream(T0, T1, block: int = 1 << 16) -> Iterator[tuple[tuple[float, float], int]]:
    """Maximal subintervals of [T0, T1) on which D is constant, with that D.

    Yields ((a, b), D) in increasing order.
    """
    if T0 < 1:
        raise InvalidArgument(f"T0 must be >= 1, got {T0}")
    if not T0 < T1:
        raise InvalidArgument(f"need T0 < T1, got T0={T0}, T1={T1}")
    n_lo = math.floor(T0)
    n_hi = math.ceil(T1) - 1
    for start, D in summatory_blocks(n_lo, n_hi, block):
        for i, Dn in enumerate(D.tolist()):
            n = start + i
            a = max(T0, n)
            b = min(T1, n + 1)
            if b > a:
                yield (a, b), Dn


def save_table(table: DivisorTable, path) -> None:
    """Write the DDT1 cache: header (magic, X, block_size, CRC32) + LE uint32 blocks."""
    payload = np.ascontiguousarray(table.values[1:], dtype="<u4").tobytes()
    header = _CACHE_HEADER.pack(_CACHE_MAGIC, table.limit, table.block_size,
                                zlib.crc32(payload) & 0xFFFFFFFF)
    tmp = f"{path}.tmp"
    with open(tmp, "wb") as fh:
        fh.write(header)
        fh.write(payload)
    os.replace(tmp, path)


def load_table(path) -> DivisorTable:
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < _CACHE_HEADER.size:
        raise ChecksumError(path, "truncated header")
    magic, X, block, crc = _CACHE_HEADER.unpack_from(raw)
    if magic != _CACHE_MAGIC:
        raise ChecksumError(path, f"bad magic {magic!r}")
    payload = raw[_CACHE_HEADER.size:]
    if len(payload) != 4 * X:
        raise ChecksumError(path, f"expected {4 * X} payload bytes, found {len(payload)}")
    if zlib.crc32(payload) & 0xFFFFFFFF != crc:
        raise ChecksumError(path)
    values = np.zeros(X + 1, dtype=np.uint32)
    values[1:] = np.frombuffer(payload, dtype="<u4")
    return DivisorTable(limit=X, values=values, block_size=block)
