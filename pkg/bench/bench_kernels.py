"""Benchmark the compiled scan kernels against the pure-Python fallback.

Usage: python3 bench/bench_kernels.py
"""

import time

import numpy as np

from selmerforge import _kernels
from selmerforge._kernels import _sieve_py
from selmerforge.arith import _demand_tables, small_primes


def _time(fn, *args, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_filter_progression():
    demands = tuple((q, 1 if q % 3 == 1 else -1) for q in small_primes()[1:21])
    moduli, specs, targets = _demand_tables(demands)
    args = (17, 840, 1 << 20, moduli, specs, targets)
    t_py, out_py = _time(_sieve_py.filter_progression, *args)
    t_c, out_c = _time(_kernels._impl.filter_progression, *args)
    assert out_py == out_c, "backend outputs differ"
    return "filter_progression", t_py, t_c


def bench_sieve_line():
    rng = np.random.default_rng(0)
    steps = np.array(small_primes()[:2000] * 3, dtype=np.int64)
    starts = rng.integers(0, steps)
    width = 1 << 16
    t_py, out_py = _time(_sieve_py.sieve_line, width, starts, steps)
    t_c, out_c = _time(_kernels._impl.sieve_line, width, starts, steps)
    assert np.array_equal(out_py, out_c), "backend outputs differ"
    return "sieve_line", t_py, t_c


def main():
    print(f"active backend: {_kernels.BACKEND}")
    rows = [bench_filter_progression(), bench_sieve_line()]
    print(f"{'kernel':24s} {'python':>10s} {'compiled':>10s} {'speedup':>8s}")
    for name, t_py, t_c in rows:
        print(f"{name:24s} {t_py * 1e3:9.1f}ms {t_c * 1e3:9.1f}ms {t_py / t_c:7.1f}x")


if __name__ == "__main__":
    main()
