import math
import random

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from divmoments.errors import InvalidArgument
from divmoments.expsum_smoothing import (Bump, BumpConfig, build_bump, check_bound, eval_S,
                                         integrate_power_S, irwin_hall_cdf, log_grid, mean_square_S,
                                         mean_square_S_exact, parse_grid, seventh_moment_S)


def S_mp(x, N, dps=50):
    with mpmath.workdps(dps):
        return mpmath.fsum(mpmath.expjpi(2 * mpmath.mpf(x) * mpmath.sqrt(n)) for n in range(N + 1, 2 * N + 1))


def test_S_at_zero_counts_terms():
    for N in (1, 7, 64):
        assert eval_S(0.0, N) == complex(N, 0)


def test_S_against_high_precision():
    v = S_mp(1, 4)
    assert abs(eval_S(1.0, 4) - complex(v)) < 1e-14
    xs = np.array([0.37, 12.5, 101.03, 4096.7])
    got = eval_S(xs, 50)
    for x, g in zip(xs, got):
        assert abs(g - complex(S_mp(x, 50))) < 1e-12


@settings(max_examples=40, deadline=None)
@given(st.floats(-1e4, 1e4), st.integers(1, 300))
def test_S_trivial_bound(x, N):
    assert abs(eval_S(x, N)) <= N * (1 + 1e-14)


@settings(max_examples=20, deadline=None)
@given(st.floats(0, 100), st.integers(1, 100))
def test_S_conjugate_symmetry(x, N):
    assert eval_S(-x, N) == pytest.approx(eval_S(x, N).conjugate(), abs=1e-12)


def test_S_validation():
    with pytest.raises(InvalidArgument):
        eval_S(1.0, 0)


@pytest.mark.parametrize("N", [16, 64, 256])
def test_mean_square_matches_pair_sum(N):
    r = mean_square_S(N)
    assert r.integral == pytest.approx(mean_square_S_exact(N), rel=1e-12)
    assert r.U == math.sqrt(N)


def test_mean_square_ratio_bounded():
    ratios = [mean_square_S(N).ratio for N in (2 ** 6, 2 ** 8, 2 ** 10)]
    assert max(ratios) < 1.0 and min(ratios) > 0.05


def test_integral_quadrature_order_stable():
    a = integrate_power_S(100, 0.0, 3.0, 2, order=8)
    b = integrate_power_S(100, 0.0, 3.0, 2, order=16)
    assert a == pytest.approx(b, rel=1e-12)
    assert integrate_power_S(100, 1.0, 1.0, 2) == 0.0


def test_seventh_moment_within_trivial_envelope():
    for N in (16, 64):
        r = seventh_moment_S(N)
        assert 0 < r.integral <= r.U * N ** 7
        assert r.bound == N ** 6.5 + r.U * N ** 5
    with pytest.raises(InvalidArgument):
        seventh_moment_S(64, U=2.0)
    with pytest.raises(InvalidArgument):
        mean_square_S(8)


def test_irwin_hall_cdf():
    assert irwin_hall_cdf(0.5, 1) == 0.5
    assert irwin_hall_cdf(1.0, 2) == 0.5
    assert irwin_hall_cdf(0.5, 2) == 0.125
    assert irwin_hall_cdf(1.5, 3) == 0.5
    assert irwin_hall_cdf(-1, 4) == 0.0 and irwin_hall_cdf(9, 4) == 1.0


@settings(max_examples=40, deadline=None)
@given(st.floats(0, 6), st.integers(1, 6))
def test_irwin_hall_symmetry(s, k):
    assert irwin_hall_cdf(s, k) + irwin_hall_cdf(k - s, k) == pytest.approx(1.0, abs=1e-15)


def test_bump_config_validation():
    with pytest.raises(InvalidArgument):
        BumpConfig(1.0, 0.3, 2)
    with pytest.raises(InvalidArgument):
        BumpConfig(-1.0, 0.1, 2)
    with pytest.raises(InvalidArgument):
        BumpConfig(1.0, 0.1, 0)
    with pytest.raises(InvalidArgument):
        Bump(BumpConfig(1.0, 0.1, 2), method="fft")


@pytest.mark.parametrize("a,delta,k", [(1.2, 0.2, 4), (1.0, 0.1, 1), (3.0, 0.5, 7)])
def test_bump_three_cases(a, delta, k):
    b = build_bump(BumpConfig(a, delta, k))
    assert b.phi(0.0) == 1.0
    # float a - delta can land an ulp past the true plateau edge
    inner = np.linspace(-(a - delta), a - delta, 41) * (1 - 1e-12)
    assert np.all(b.phi(inner) == 1.0)
    ramp = np.linspace(a - delta, a + delta, 43)[1:-1]
    vals = b.phi(np.concatenate([ramp, -ramp]))
    assert np.all((vals > 0) & (vals < 1))
    outer = np.array([a + delta, a + delta + 1e-9, 2 * a, -(a + delta), 50.0]) * (1 + 1e-12)
    assert np.all(b.phi(outer) == 0.0)


def test_bump_transform_pair():
    b = Bump(BumpConfig(1.2, 0.2, 4))
    assert b.Phi(0.0) == pytest.approx(2 * 1.2, rel=1e-15)
    for x in (0.0, 0.1, 0.77, 2.5, 6.0):
        assert b.Phi_numeric(x) == pytest.approx(b.Phi(x), abs=1e-8)


def test_numeric_phi_support():
    b = Bump(BumpConfig(1.2, 0.2, 4), method="numeric")
    assert b.phi(0.0) == pytest.approx(1.0, abs=1e-6)
    assert b.phi(0.5) == pytest.approx(1.0, abs=1e-6)
    assert abs(b.phi(1.6)) < 1e-6
    exact = Bump(BumpConfig(1.2, 0.2, 4))
    assert b.phi(1.2) == pytest.approx(exact.phi(1.2), abs=1e-6)


def test_bump_smoothness_probe():
    # k copies give k - 1 continuous derivatives: the (k-1)-th difference
    # quotient stays bounded across the knot a - delta, the k-th one jumps
    a, d, k = 1.2, 0.2, 3
    b = Bump(BumpConfig(a, d, k))
    y0 = a - d
    h = 1e-3
    grid = y0 + h * np.arange(-k - 2, k + 3)
    vals = b.phi(grid)
    dk1 = np.diff(vals, k - 1) / h ** (k - 1)
    dk = np.diff(vals, k) / h ** k
    assert np.max(np.abs(np.diff(dk1))) < 1.0
    assert np.max(np.abs(dk)) > 10.0


def test_bound_check_branches():
    b = Bump(BumpConfig(1.2, 0.2, 4))
    chk = check_bound(b, log_grid(1e-3, 1e6, 400))
    assert chk.violations == 0
    assert set(np.unique(chk.branch).tolist()) == {0, 1, 2}


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10 ** 6))
def test_bound_holds_for_random_configs(seed):
    rng = random.Random(seed)
    a = rng.uniform(0.1, 10)
    cfg = BumpConfig(a, rng.uniform(0.01, 0.99) * a / 4, rng.randint(1, 8))
    assert check_bound(Bump(cfg), log_grid(1e-3, 1e6, 200)).violations == 0


def test_parse_grid():
    g = parse_grid("log:1e-3:1e3:7")
    assert g[0] == pytest.approx(1e-3) and g[-1] == pytest.approx(1e3) and len(g) == 7
    assert list(parse_grid("lin:0:1:3")) == [0.0, 0.5, 1.0]
    assert list(parse_grid("1,2.5,4")) == [1.0, 2.5, 4.0]
    with pytest.raises(InvalidArgument):
        parse_grid("log:a:b")
