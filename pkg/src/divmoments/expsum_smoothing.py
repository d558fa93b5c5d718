"""Exponential sums over sqrt(n) and a compactly supported smoothing bump.

S(x; N) = sum_{N < n <= 2N} e(x sqrt n), with x sqrt n reduced mod 1 in
double-double.  Integrals of |S|**p use Gauss-Legendre on panels narrow
enough that the fastest phase (2 pi x sqrt(2N)) turns by well under a radian.

The bump is phi = 1_[-a, a] convolved with k copies of the normalized box of
width 2 delta / k.  Its transform is the product
Phi(x) = sin(2 pi a x) / (pi x) * (sin(2 pi delta x / k) / (2 pi delta x / k))**k,
and phi itself is a difference of Irwin-Hall distribution functions, which is
evaluated here in exact rational arithmetic.  The construction is k - 1 times
continuously differentiable with a Lipschitz (k - 1)-th derivative; take
k + 1 copies when a genuinely C**k bump is needed.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np
from scipy import integrate

from . import _kernels
from .errors import InvalidArgument

DEFAULT_ORDER = 8


def eval_S(x, N: int):
    """S(x; N) at a scalar or an array of x."""
    N = int(N)
    if N < 1:
        raise InvalidArgument(f"N must be >= 1, got {N}")
    xs = np.ascontiguousarray(np.atleast_1d(np.asarray(x, dtype=np.float64)))
    vals = _kernels.expsum(xs, N + 1, 2 * N)
    return complex(vals[0]) if np.ndim(x) == 0 else vals


def panel_width(N: int) -> float:
    return min(0.1, 1.0 / (4.0 * math.sqrt(2.0 * N)))


def integrate_power_S(N: int, lo: float, hi: float, p: float, order: int = DEFAULT_ORDER) -> float:
    """Integral of |S(x; N)|**p over [lo, hi] by panel Gauss-Legendre, summed with fsum."""
    if hi <= lo:
        return 0.0
    w = panel_width(N)
    npan = max(1, math.ceil((hi - lo) / w))
    edges = np.linspace(lo, hi, npan + 1)
    nodes, weights = np.polynomial.legendre.leggauss(order)
    mid = 0.5 * (edges[:-1] + edges[1:])
    half = 0.5 * np.diff(edges)
    xs = (mid[:, None] + half[:, None] * nodes[None, :]).ravel()
    vals = np.abs(eval_S(xs, N)) ** p
    per_panel = half * (vals.reshape(npan, order) @ weights)
    return math.fsum(per_panel.tolist())


@dataclass(frozen=True)
class ExpsumResult:
    N: int
    U: float
    integral: float
    bound: float
    ratio: float


def mean_square_S(N: int, order: int = DEFAULT_ORDER) -> ExpsumResult:
    """Integral of |S|**2 over [0, sqrt N] against N**1.5 ln N."""
    if N < 16:
        raise InvalidArgument(f"N must be >= 16, got {N}")
    K0 = math.sqrt(N)
    val = integrate_power_S(N, 0.0, K0, 2, order)
    bound = N ** 1.5 * math.log(N)
    return ExpsumResult(N, K0, val, bound, val / bound)


def mean_square_S_exact(N: int, K0: float | None = None) -> float:
    """Integral of |S|**2 over [0, K0] as a double sum over pairs.

    Diagonal pairs give N K0; each off-diagonal pair (n, m) gives
    sin(2 pi K0 t) / (2 pi t) with t = sqrt n - sqrt m = (n - m) / (sqrt n + sqrt m).
    """
    K0 = math.sqrt(N) if K0 is None else K0
    n = np.arange(N + 1, 2 * N + 1, dtype=np.float64)
    rs = np.sqrt(n)
    terms = [N * K0]
    for i in range(N):
        t = (n[i] - n[i + 1:]) / (rs[i] + rs[i + 1:])
        terms.append(2.0 * math.fsum((np.sin(2 * math.pi * K0 * t) / (2 * math.pi * t)).tolist()))
    return math.fsum(terms)


def seventh_moment_S(N: int, U: float | None = None, order: int = DEFAULT_ORDER) -> ExpsumResult:
    """Integral of |S|**7 over [U, 2U] against N**6.5 + U N**5."""
    if N < 16:
        raise InvalidArgument(f"N must be >= 16, got {N}")
    U = math.sqrt(N) if U is None else float(U)
    if U < math.sqrt(N):
        raise InvalidArgument(f"U must be >= sqrt(N), got {U}")
    val = integrate_power_S(N, U, 2 * U, 7, order)
    bound = N ** 6.5 + U * N ** 5
    return ExpsumResult(N, U, val, bound, val / bound)


@dataclass(frozen=True)
class BumpConfig:
    a: float
    delta: float
    k: int

    def __post_init__(self):
        if not (self.a > 0):
            raise InvalidArgument(f"a must be > 0, got {self.a}")
        if not (0 < self.delta < self.a / 4):
            raise InvalidArgument(f"need 0 < delta < a/4, got delta={self.delta}, a={self.a}")
        if int(self.k) != self.k or self.k < 1:
            raise InvalidArgument(f"k must be a positive integer, got {self.k}")


@lru_cache(maxsize=64)
def _ih_coeffs(k: int) -> tuple[Fraction, ...]:
    return tuple(Fraction((-1) ** j * math.comb(k, j), math.factorial(k)) for j in range(k + 1))


def irwin_hall_cdf(s, k: int) -> float:
    """P(U_1 + ... + U_k <= s) for independent uniforms on [0, 1], exactly rounded.

    ``s`` may be a float or a Fraction; the sum is evaluated in rationals.
    """
    S = Fraction(s)
    if S <= 0:
        return 0.0
    if S >= k:
        return 1.0
    c = _ih_coeffs(k)
    return float(sum(c[j] * (S - j) ** k for j in range(math.floor(S) + 1)))


class Bump:
    """phi and its transform Phi for a BumpConfig."""

    def __init__(self, config: BumpConfig, method: str = "exact"):
        if method not in ("exact", "numeric"):
            raise InvalidArgument(f"unknown method {method!r}")
        self.config = config
        self.method = method

    @property
    def support(self) -> float:
        return self.config.a + self.config.delta

    def _G(self, t: Fraction) -> float:
        c = self.config
        d = Fraction(c.delta)
        return irwin_hall_cdf((t + d) * c.k / (2 * d), c.k)

    def phi(self, y):
        ys = np.atleast_1d(np.asarray(y, dtype=np.float64))
        if self.method == "exact":
            a = Fraction(self.config.a)
            vals = np.array([self._G(Fraction(v) + a) - self._G(Fraction(v) - a) for v in ys.tolist()])
        else:
            vals = np.array([self._phi_numeric(v) for v in ys.tolist()])
        return float(vals[0]) if np.ndim(y) == 0 else vals

    def _phi_numeric(self, y: float) -> float:
        # inverse transform: phi(y) = 2 * integral_0^inf Phi(x) cos(2 pi x y) dx
        y = abs(y)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", integrate.IntegrationWarning)
            if y == 0:
                head = integrate.quad(self.Phi, 0, 1.0, limit=400, epsabs=1e-15)[0]
                tail = integrate.quad(lambda t: self.Phi(1.0 / t) / (t * t), 1e-9, 1.0,
                                      limit=400, epsabs=1e-15)[0]
                return 2.0 * (head + tail)
            val, _ = integrate.quad(self.Phi, 0, np.inf, weight="cos", wvar=2 * math.pi * y,
                                    limlst=500, epsabs=1e-15)
        return 2.0 * val

    def Phi(self, x):
        c = self.config
        xs = np.asarray(x, dtype=np.float64)
        vals = 2 * c.a * np.sinc(2 * c.a * xs) * np.sinc(2 * c.delta * xs / c.k) ** c.k
        return float(vals) if np.ndim(x) == 0 else vals

    def Phi_numeric(self, x: float, order: int = 24) -> float:
        """Integral of e(-x y) phi(y) dy by Gauss-Legendre between the knots of phi."""
        c = self.config
        w = 2 * c.delta / c.k
        knots = sorted({s * c.a - c.delta + j * w for s in (-1, 1) for j in range(c.k + 1)})
        nodes, weights = np.polynomial.legendre.leggauss(order)
        parts = []
        for a, b in zip(knots, knots[1:]):
            # at most about one oscillation per sub-panel
            m = max(1, math.ceil(abs(x) * (b - a)))
            for lo, hi in zip(np.linspace(a, b, m + 1)[:-1], np.linspace(a, b, m + 1)[1:]):
                y = 0.5 * (lo + hi) + 0.5 * (hi - lo) * nodes
                parts.append(0.5 * (hi - lo) * float(np.dot(weights, self.phi(y) * np.cos(2 * math.pi * x * y))))
        return math.fsum(parts)

    def bound(self, x):
        """min(2a, 1/(pi|x|), (1/(pi|x|)) (k / (2 pi |x| delta))**k) and the active branch (0, 1, 2)."""
        c = self.config
        ax = np.abs(np.asarray(x, dtype=np.float64))
        with np.errstate(divide="ignore", over="ignore"):
            b0 = np.full_like(ax, 2 * c.a)
            b1 = 1.0 / (math.pi * ax)
            b2 = b1 * (c.k / (2 * math.pi * ax * c.delta)) ** c.k
        stack = np.stack([b0, b1, b2])
        return stack.min(axis=0), stack.argmin(axis=0)


def build_bump(cfg: BumpConfig, method: str = "exact") -> Bump:
    return Bump(cfg, method)


@dataclass(frozen=True)
class BoundCheck:
    xs: np.ndarray
    values: np.ndarray
    bounds: np.ndarray
    branch: np.ndarray
    violations: int


def check_bound(bump: Bump, xs, rel_slack: float = 1e-12) -> BoundCheck:
    """|Phi(x)| against the three-way min bound; ``rel_slack`` only absorbs rounding."""
    xs = np.asarray(xs, dtype=np.float64)
    vals = np.abs(bump.Phi(xs))
    b, br = bump.bound(xs)
    bad = int(np.count_nonzero(vals > b * (1 + rel_slack)))
    return BoundCheck(xs, vals, b, br, bad)


def log_grid(lo: float, hi: float, n: int) -> np.ndarray:
    return np.geomspace(lo, hi, n)


def parse_grid(spec: str) -> np.ndarray:
    """'log:lo:hi:n' or 'lin:lo:hi:n' or a comma list."""
    parts = spec.split(":")
    if parts[0] in ("log", "lin") and len(parts) == 4:
        lo, hi, n = float(parts[1]), float(parts[2]), int(parts[3])
        return np.geomspace(lo, hi, n) if parts[0] == "log" else np.linspace(lo, hi, n)
    try:
        return np.array([float(v) for v in spec.split(",")])
    except ValueError:
        raise InvalidArgument(f"bad grid {spec!r}") from None
