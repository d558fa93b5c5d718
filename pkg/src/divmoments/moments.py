"""Power moments of Delta by exact piecewise quadrature.

D is constant on every [n, n + 1), so Delta is smooth there and a fixed
Gauss-Legendre rule per piece converges fast; the only loss would come from
a global rule straddling the jumps.  For |Delta|**A the single sign change
inside a piece (Delta is strictly decreasing between integers) is located by
Newton and the piece is split there.

Block partial sums are combined with ``math.fsum`` in block order, so the
result does not depend on the block size or on which backend ran the kernel.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence

import numpy as np

from . import _kernels
from .divisor_core import DELTA_LINEAR, summatory_blocks
from .errors import InvalidArgument
from .singular_series import coefficient_Ck

DEFAULT_QUAD_ORDER = 8
DEFAULT_T0 = 2.0
MAX_POWER = 9
MAIN_TERM_K = (1, 2, 3, 4, 7)


@dataclass(frozen=True)
class MomentResult:
    k_or_A: float
    signed: bool
    T0: float
    T1: float
    empirical: float
    predicted: float
    ratio: float
    slope: float | None = None


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    nodes, weights = np.polynomial.legendre.leggauss(order)
    return np.ascontiguousarray(nodes), np.ascontiguousarray(weights)


def _check_power(power, signed):
    if power > MAX_POWER:
        raise InvalidArgument(f"powers above {MAX_POWER} are not supported, got {power}")
    if signed:
        if float(power) != int(power) or int(power) < 0:
            raise InvalidArgument(f"signed moments need a non-negative integer power, got {power}")
        return int(power), 0.0, 0
    if power <= 0:
        raise InvalidArgument(f"absolute moments need a positive power, got {power}")
    return 0, float(power), 1


def moment_integral(power, signed: bool = True, T0: float = DEFAULT_T0, T1: float = 1e4,
                    quad_order: int = DEFAULT_QUAD_ORDER, block: int = 1 << 16,
                    backend: str | None = None) -> float:
    """Integral of Delta**power (signed) or |Delta|**power over [T0, T1]."""
    if T0 < 1:
        raise InvalidArgument(f"T0 must be >= 1, got {T0}")
    if T1 < T0:
        raise InvalidArgument(f"need T0 <= T1, got T0={T0}, T1={T1}")
    if not (2 <= quad_order <= 16):
        raise InvalidArgument(f"quad_order must lie in [2, 16], got {quad_order}")
    k, A, mode = _check_power(power, signed)
    if T1 == T0:
        return 0.0
    kern = _kernels.get_backend(backend) if backend else _kernels
    nodes, weights = gauss_legendre(int(quad_order))
    split = mode == 1
    parts = []
    n_lo, n_hi = math.floor(T0), math.ceil(T1) - 1
    for start, D in summatory_blocks(n_lo, n_hi, block):
        s, c = kern.moment_block(np.ascontiguousarray(D, dtype=np.int64), start, float(T0), float(T1),
                                 k, A, mode, DELTA_LINEAR, nodes, weights, split)
        parts.extend((s, c))
    return math.fsum(parts)


@lru_cache(maxsize=None)
def _coefficient(k: int, y: int) -> float:
    return coefficient_Ck(k, y)


def main_term(k: int, T: float, y: int = 256) -> float:
    """Leading term of the k-th moment: T/4, C_2 T**1.5, C_k(y) T**(1 + k/4)."""
    if k not in MAIN_TERM_K:
        raise InvalidArgument(f"main term available for k in {MAIN_TERM_K}, got {k}")
    if k == 1:
        return T / 4.0
    if k != 2 and y < 1:
        raise InvalidArgument(f"y must be >= 1, got {y}")
    return _coefficient(k, int(y) if k != 2 else 0) * T ** (1.0 + k / 4.0)


def fit_slope(Ts: Sequence[float], values: Sequence[float]) -> float:
    """Least-squares slope of ln|value| against ln T."""
    if len(Ts) < 2:
        return float("nan")
    return float(np.polyfit(np.log(np.asarray(Ts, float)), np.log(np.abs(np.asarray(values, float))), 1)[0])


def moment_report(k, T_grid: Sequence[float], y: int = 256, quad_order: int = DEFAULT_QUAD_ORDER,
                  signed: bool = True, T0: float = DEFAULT_T0) -> list[MomentResult]:
    """Empirical moment, main term and ratio at each T, plus one fitted slope.

    The grid is integrated segment by segment so the largest T costs one pass.
    Absolute moments and signed powers without a main term get predicted = nan.
    """
    grid = [float(t) for t in T_grid]
    if not grid or any(b <= a for a, b in zip(grid, grid[1:])) or grid[0] <= T0:
        raise InvalidArgument("T grid must be increasing and above T0")
    segs = []
    lo = T0
    acc = []
    for T in grid:
        segs.append(moment_integral(k, signed, lo, T, quad_order))
        acc.append(math.fsum(segs))
        lo = T
    has_main = signed and int(k) in MAIN_TERM_K
    slope = fit_slope(grid, acc) if len(grid) > 1 else None
    out = []
    for T, emp in zip(grid, acc):
        pred = main_term(int(k), T, y) if has_main else float("nan")
        ratio = emp / pred if has_main and pred != 0 else float("nan")
        out.append(MomentResult(float(k), signed, T0, T, emp, pred, ratio, slope))
    return out


def first_moment_deviation(T: float, T0: float = DEFAULT_T0, quad_order: int = DEFAULT_QUAD_ORDER) -> float:
    """(integral of Delta over [T0, T] - T/4) / T**(3/4)."""
    return (moment_integral(1, True, T0, T, quad_order) - T / 4.0) / T ** 0.75


def oscillatory_integral(A: float, B: float, T: float) -> float:
    """Integral of cos(A sqrt(t) + B) over [T, 2T] in closed form."""
    if A == 0:
        raise InvalidArgument("A must be nonzero")

    def F(u):
        return 2.0 * (u * math.sin(A * u + B) / A + math.cos(A * u + B) / (A * A))

    return F(math.sqrt(2.0 * T)) - F(math.sqrt(T))


def oscillatory_check(A: float, B: float, T: float) -> float:
    """|integral of cos(A sqrt t + B) over [T, 2T]| * |A| / sqrt(T)."""
    if T < 10:
        raise InvalidArgument(f"T must be >= 10, got {T}")
    return abs(oscillatory_integral(A, B, T)) * abs(A) / math.sqrt(T)


def seventh_moment_weights() -> tuple[tuple[float, float, float], tuple[float, float, float]]:
    """Weights of (s_{7;3}, s_{7;2}, s_{7;1}) built two ways.

    First from the cosine expansion of R1**7: binomial count of sign patterns
    times 2**-6 times cos of the leftover phase, times (1/(sqrt 2 pi))**7 and
    the factor 4/11 from integrating x**(7/4).  Second from the closed form
    7 (5, -3, -1) / (2816 pi**7).
    """
    pi = math.pi
    scale = (1.0 / (math.sqrt(2.0) * pi)) ** 7 * 4.0 / 11.0
    expanded = tuple(math.comb(7, m) / 64.0 * math.cos((7 - 2 * m) * pi / 4.0) * scale for m in (3, 2, 1))
    closed = tuple(7.0 * c / (2816.0 * pi ** 7) for c in (5.0, -3.0, -1.0))
    return expanded, closed
