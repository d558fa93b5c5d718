"""Truncated Voronoi expansion of Delta and the remainder left after truncation.

R1(x) = (1 / (sqrt(2) pi)) x**(1/4) sum_{n <= N} d(n) n**(-3/4) cos(4 pi sqrt(n x) - pi/4)
R2(x) = Delta(x) - R1(x)

The truncation length is always called N here; the moment argument calls the
same quantity y and takes y = T**(1/4).
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import _kernels
from .divisor_core import DELTA_LINEAR, DivisorTable, sieve_divisor_table, summatory_blocks, summatory_D
from .errors import InvalidArgument

VORONOI_SCALE = 1.0 / (math.sqrt(2.0) * math.pi)


@dataclass(frozen=True)
class TruncationConfig:
    N: int
    table: DivisorTable = field(repr=False)
    coeff: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        if self.N < 0:
            raise InvalidArgument(f"N must be >= 0, got {self.N}")
        if self.N > self.table.limit:
            raise InvalidArgument(f"N={self.N} exceeds the divisor table limit {self.table.limit}")
        n = np.arange(1, self.N + 1, dtype=np.float64)
        c = self.table.values[1:self.N + 1].astype(np.float64) * n ** -0.75
        c.setflags(write=False)
        object.__setattr__(self, "coeff", c)

    @classmethod
    def build(cls, N: int) -> "TruncationConfig":
        return cls(int(N), sieve_divisor_table(max(int(N), 1)))


def _as_points(x):
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    if xs.size and (not np.all(np.isfinite(xs)) or xs.min() < 1.0):
        raise InvalidArgument("x must be finite and >= 1")
    return xs


def eval_R1(x, cfg: TruncationConfig):
    """R1 at a scalar or array of points; requires N <= x."""
    xs = _as_points(x)
    if xs.size and cfg.N > xs.min():
        raise InvalidArgument(f"truncation N={cfg.N} exceeds x={xs.min()}")
    vals = VORONOI_SCALE * xs ** 0.25 * _kernels.voronoi_sum(np.ascontiguousarray(xs), cfg.coeff)
    return float(vals[0]) if np.ndim(x) == 0 else vals


def _delta_many(xs: np.ndarray) -> np.ndarray:
    # D(floor x) via one streamed sieve over the covered integer range
    n = np.floor(xs).astype(np.int64)
    lo, hi = int(n.min()), int(n.max())
    if hi - lo > 64 * len(xs) + 1024:
        D = np.array([summatory_D(int(v)) for v in n.tolist()], dtype=np.float64)
    else:
        Dtab = np.concatenate([blk for _, blk in summatory_blocks(lo, hi)])
        D = Dtab[n - lo].astype(np.float64)
    return D - xs * np.log(xs) - DELTA_LINEAR * xs


def eval_R2(x, cfg: TruncationConfig):
    """Delta(x) - R1(x)."""
    xs = _as_points(x)
    r1 = np.atleast_1d(eval_R1(xs, cfg))
    vals = _delta_many(xs) - r1
    return float(vals[0]) if np.ndim(x) == 0 else vals


def stratum_points(T: float, n_samples: int, seed: int | None = None) -> np.ndarray:
    """One point per stratum of width T / n_samples over [T, 2T).

    Midpoints when ``seed`` is None; otherwise a uniform point per stratum
    drawn from a generator seeded per stratum index, so any subset of strata
    reproduces the same points.
    """
    width = T / n_samples
    idx = np.arange(n_samples, dtype=np.float64)
    if seed is None:
        return T + (idx + 0.5) * width
    ss = np.random.SeedSequence(seed)
    offs = np.array([np.random.default_rng(c).random() for c in ss.spawn(n_samples)])
    return T + (idx + offs) * width


def mean_square_R2(T: float, cfg: TruncationConfig, n_samples: int = 4096,
                   seed: int | None = None) -> tuple[float, float]:
    """Stratified estimate of the integral of R2**2 over [T, 2T].

    Returns (estimate, estimate / (T**1.5 N**-0.5 ln(T)**3)).
    """
    if T < 10:
        raise InvalidArgument(f"T must be >= 10, got {T}")
    if n_samples < 1:
        raise InvalidArgument(f"n_samples must be >= 1, got {n_samples}")
    if cfg.N < 1:
        raise InvalidArgument("normalized ratio needs N >= 1")
    xs = stratum_points(T, n_samples, seed)
    r2 = eval_R2(xs, cfg)
    est = (T / n_samples) * math.fsum((r2 * r2).tolist())
    norm = T ** 1.5 * cfg.N ** -0.5 * math.log(T) ** 3
    return est, est / norm


def mean_square_R1(T: float, cfg: TruncationConfig, n_samples: int = 4096) -> float:
    """(1/T) times the stratified estimate of the integral of R1**2 over [T, 2T]."""
    if T < 10:
        raise InvalidArgument(f"T must be >= 10, got {T}")
    xs = stratum_points(T, n_samples)
    r1 = eval_R1(xs, cfg)
    return math.fsum((r1 * r1).tolist()) / n_samples


def cosine_product_expansion(angles) -> float:
    """2**(1-h) sum over sign vectors e (e_1 = +1) of cos(sum e_i a_i).

    Equal to prod cos(a_i); this is the identity used to expand R1**h.
    """
    a = [float(v) for v in angles]
    if not a:
        return 1.0
    h = len(a)
    terms = []
    for signs in itertools.product((1.0, -1.0), repeat=h - 1):
        terms.append(math.cos(a[0] + math.fsum(s * v for s, v in zip(signs, a[1:]))))
    return math.fsum(terms) / 2 ** (h - 1)
