import math
import random

import mpmath
import numpy as np
import pytest

from divmoments.divisor_core import delta_at, divisor_count
from divmoments.errors import InvalidArgument
from divmoments.voronoi_series import (TruncationConfig, cosine_product_expansion, eval_R1, eval_R2,
                                       mean_square_R1, mean_square_R2, stratum_points)


def test_empty_truncation_is_zero():
    assert eval_R1(50.0, TruncationConfig.build(0)) == 0.0


def test_one_term_closed_form():
    x = math.pi ** 2
    want = math.sqrt(math.pi) * math.cos(4 * math.pi ** 2 - math.pi / 4) / (math.sqrt(2) * math.pi)
    assert eval_R1(x, TruncationConfig.build(1)) == pytest.approx(want, abs=1e-14)


def test_matches_fifty_digit_sum():
    with mpmath.workdps(50):
        for N, x in ((10, 100), (10, 12345.678), (50, 1e9 + 0.25)):
            xm = mpmath.mpf(x)
            ref = sum(divisor_count(n) * mpmath.mpf(n) ** -0.75 * mpmath.cos(4 * mpmath.pi * mpmath.sqrt(n * xm) - mpmath.pi / 4)
                      for n in range(1, N + 1)) * xm ** 0.25 / (mpmath.sqrt(2) * mpmath.pi)
            got = eval_R1(x, TruncationConfig.build(N))
            assert abs(got - float(ref)) < 1e-10 * max(1.0, x ** 0.25)


def test_array_input():
    cfg = TruncationConfig.build(20)
    xs = np.array([100.0, 200.5, 333.0])
    assert np.allclose(eval_R1(xs, cfg), [eval_R1(float(x), cfg) for x in xs], rtol=0, atol=1e-13)


def test_R2_jump_at_integer():
    cfg = TruncationConfig.build(30)
    n = 5040
    left = eval_R2(n - 1e-9, cfg)
    right = eval_R2(float(n), cfg)
    assert right - left == pytest.approx(divisor_count(n), abs=1e-5)


def test_R2_is_delta_minus_R1_and_deterministic():
    cfg = TruncationConfig.build(100)
    a = eval_R2(1e4, cfg)
    assert a == eval_R2(1e4, cfg)
    assert a == pytest.approx(delta_at(1e4).delta - eval_R1(1e4, cfg), abs=1e-10)


def test_R1_derivative_matches_one_term_formula():
    cfg = TruncationConfig.build(1)
    c = 1 / (math.sqrt(2) * math.pi)
    for x in (10.0, 123.4, 1000.0):
        h = 1e-5 * x
        fd = (eval_R1(x + h, cfg) - eval_R1(x - h, cfg)) / (2 * h)
        ph = 4 * math.pi * math.sqrt(x) - math.pi / 4
        exact = c * (0.25 * x ** -0.75 * math.cos(ph) - x ** 0.25 * math.sin(ph) * 2 * math.pi / math.sqrt(x))
        assert fd == pytest.approx(exact, rel=1e-6)


def test_cosine_product_identity_seven_angles():
    rng = random.Random(11)
    for _ in range(100):
        angles = [rng.uniform(-10, 10) for _ in range(7)]
        assert cosine_product_expansion(angles) == pytest.approx(math.prod(map(math.cos, angles)), abs=1e-12)


def test_single_stratum():
    T = 1e4
    cfg = TruncationConfig.build(16)
    est, _ = mean_square_R2(T, cfg, 1)
    assert est == pytest.approx(eval_R2(1.5 * T, cfg) ** 2 * T, rel=1e-14)


def test_mean_square_ratios_flat_in_N():
    ratios = [mean_square_R2(1e4, TruncationConfig.build(N), 4096)[1] for N in (16, 64, 256)]
    assert max(ratios) / min(ratios) < 10


def test_full_truncation_shrinks_remainder():
    small = mean_square_R2(1e4, TruncationConfig.build(16), 2048)[0]
    full = mean_square_R2(1e4, TruncationConfig.build(10 ** 4), 2048)[0]
    assert full < small


def test_R1_mean_square_grows_like_sqrt_T():
    cfg = TruncationConfig.build(32)
    Ts = [1e3, 1e4, 1e5]
    vals = [mean_square_R1(T, cfg, 4096) for T in Ts]
    slope = np.polyfit(np.log(Ts), np.log(vals), 1)[0]
    assert abs(slope - 0.5) < 0.1


def test_seeded_strata_reproducible():
    a = stratum_points(100.0, 50, seed=5)
    b = stratum_points(100.0, 50, seed=5)
    assert np.array_equal(a, b)
    assert np.all((a >= 100.0 + np.arange(50) * 2.0) & (a < 100.0 + np.arange(1, 51) * 2.0))


def test_validation():
    with pytest.raises(InvalidArgument):
        eval_R1(5.0, TruncationConfig.build(10))
    with pytest.raises(InvalidArgument):
        TruncationConfig(20, TruncationConfig.build(10).table)
    with pytest.raises(InvalidArgument):
        mean_square_R2(5, TruncationConfig.build(2), 100)
    with pytest.raises(InvalidArgument):
        eval_R1(0.5, TruncationConfig.build(0))
