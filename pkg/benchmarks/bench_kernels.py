"""Time each hot kernel under the compiled and the pure-Python backend.

    python benchmarks/bench_kernels.py [--quick]

Prints one line per (kernel, backend) with the best of three wall times and
the speedup of the compiled build.  Outputs of the two backends are compared
as a side check.
"""
import argparse
import time

import numpy as np

from divmoments import _kernels
from divmoments.divisor_core import DELTA_LINEAR, _primes_for, summatory_blocks
from divmoments.moments import gauss_legendre


def best_of(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def cases(quick: bool):
    X = 10 ** 6 if quick else 10 ** 7
    primes = _primes_for(X + 1)
    yield "sieve_table", f"X={X:.0e}", lambda k: k.sieve_table(X, 1 << 15, primes, 1)

    T = 10 ** 5 if quick else 10 ** 6
    D = np.concatenate([blk for _, blk in summatory_blocks(2, T - 1, 1 << 16)])
    nodes, weights = gauss_legendre(8)
    yield "moment_block k=7", f"T={T:.0e}", lambda k: sum(k.moment_block(
        D, 2, 2.0, float(T), 7, 0.0, 0, DELTA_LINEAR, nodes, weights, False))
    yield "moment_block |.|^3", f"T={T:.0e}", lambda k: sum(k.moment_block(
        D, 2, 2.0, float(T), 0, 3.0, 1, DELTA_LINEAR, nodes, weights, True))

    N = 256 if quick else 1024
    xs = np.linspace(0.0, np.sqrt(N), 20000)
    yield "expsum", f"N={N}, 2e4 points", lambda k: k.expsum(xs, N + 1, 2 * N)

    coeff = np.random.default_rng(0).random(256)
    pts = np.linspace(1e4, 2e4, 4096)
    yield "voronoi_sum", "N=256, 4096 points", lambda k: k.voronoi_sum(pts, coeff)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    py = _kernels.get_backend("python")
    try:
        cc = _kernels.get_backend("compiled")
    except ImportError:
        cc = None
        print("compiled backend not built; timing the python backend only")
    print(f"{'kernel':22s} {'size':22s} {'python s':>10s} {'compiled s':>11s} {'speedup':>8s}  agree")
    for name, size, fn in cases(args.quick):
        tp, op = best_of(lambda: fn(py))
        if cc is None:
            print(f"{name:22s} {size:22s} {tp:10.4f}")
            continue
        tc, oc = best_of(lambda: fn(cc))
        agree = np.allclose(np.asarray(op), np.asarray(oc), rtol=1e-9, atol=1e-9)
        print(f"{name:22s} {size:22s} {tp:10.4f} {tc:11.4f} {tp / tc:8.1f}  {agree}")


if __name__ == "__main__":
    main()
