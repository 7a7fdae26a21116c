"""Benchmark the compiled simplex loops against the pure-python reference.

Both backends run the same pivot sequence on identical tableaus, so the
comparison is pure per-iteration cost.  Run:

    python3 benchmarks/bench_lp.py [--repeats 5]
"""

from __future__ import annotations

import argparse
import statistics
import time

import numpy as np

from lmmk.lp import _pyref
from lmmk.lp.backend import HAVE_COMPILED

if HAVE_COMPILED:
    from lmmk.lp import _speedups


def margin_problem(rng: np.random.Generator, n_triples: int, d: int):
    """A margin-slack shaped LP like the ones training assembles."""
    G = rng.normal(size=(n_triples, d))
    c = np.concatenate([rng.uniform(0.5, 2.0, size=d), np.full(n_triples, 0.7)])
    A = np.hstack([G, np.eye(n_triples)])
    b = np.ones(n_triples)
    return A, b, c


def allocation_tableau(rng: np.random.Generator, m: int, n: int):
    """max c.x s.t. Ax <= b, x >= 0 with positive data: many pivots to opt."""
    A = rng.uniform(0.1, 2.0, size=(m, n))
    b = rng.uniform(1.0, 5.0, size=m)
    c = rng.uniform(0.5, 3.0, size=n)
    T = np.zeros((m + 1, n + m + 1))
    T[:m, :n] = A
    T[:m, n : n + m] = np.eye(m)
    T[:m, -1] = b
    T[m, :n] = -c
    basis = np.arange(n, n + m, dtype=np.int64)
    return T, basis


def run_dense(loop, T, basis, max_iters):
    T = T.copy()
    basis = basis.copy()
    n_total = T.shape[1] - 1
    t0 = time.perf_counter()
    loop(T, basis, n_total, 1e-8, 1e-9, 10 * n_total, max_iters)
    return time.perf_counter() - t0


def run_dual(loop, A, b, c, d, max_iters):
    m = A.shape[0]
    R = np.ascontiguousarray(A[:, :d])       # M x d general block
    bobj = np.ascontiguousarray(b)
    cR = np.ascontiguousarray(c[:d])
    u = np.ascontiguousarray(c[d:])          # slack costs bound the duals
    t0 = time.perf_counter()
    loop(R, bobj, cR, u, 1e-8, 1e-9, 10 * (d + m), max_iters)
    return time.perf_counter() - t0


def bench(fn, repeats):
    times = [fn() for _ in range(repeats)]
    return statistics.median(times)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    if not HAVE_COMPILED:
        print("compiled backend is not available; build the extension first")
        return 1

    rng = np.random.default_rng(12345)
    print(f"{'path':<10} {'rows':>8} {'cols':>8} {'pure (ms)':>12} "
          f"{'compiled (ms)':>14} {'speedup':>9}")

    for n_triples, d in [(50, 8), (200, 16), (800, 16), (2000, 32)]:
        A, b, c = margin_problem(rng, n_triples, d)
        max_iters = 50 * (n_triples + d)
        t_pure = bench(lambda: run_dual(_pyref.bounded_dual_loop, A, b, c, d, max_iters), args.repeats)
        t_fast = bench(lambda: run_dual(_speedups.bounded_dual_loop, A, b, c, d, max_iters), args.repeats)
        print(f"{'dualized':<10} {n_triples:>8} {d:>8} {t_pure * 1e3:>12.2f} "
              f"{t_fast * 1e3:>14.2f} {t_pure / t_fast:>8.1f}x")

    for m, n in [(50, 30), (150, 100), (400, 250)]:
        T, basis = allocation_tableau(rng, m, n)
        max_iters = 50 * (m + n)
        t_pure = bench(lambda: run_dense(_pyref.dense_loop, T, basis, max_iters), args.repeats)
        t_fast = bench(lambda: run_dense(_speedups.dense_loop, T, basis, max_iters), args.repeats)
        print(f"{'dense':<10} {m:>8} {n:>8} {t_pure * 1e3:>12.2f} "
              f"{t_fast * 1e3:>14.2f} {t_pure / t_fast:>8.1f}x")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
