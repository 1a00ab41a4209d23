#!/usr/bin/env python3
"""Benchmark the compiled kernels against their numpy twins.

Run: python benchmarks/bench_kernels.py [--quick]

Expect the compiled core to win on small, call-overhead-bound workloads
(scalar L-evaluations, short Euler products: the fit and refinement paths)
and numpy's SIMD transcendentals to catch up or win on large arrays. The
scan engine's inner product is a BLAS GEMM either way, and is benchmarked
separately at the bottom.
"""

import argparse
import importlib
import time

import numpy as np

from univlab import _kernels_py as kpy

try:
    _kc = importlib.import_module("univlab._kernels")
except ImportError:
    _kc = None


def timeit(fn, reps):
    t0 = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - t0) / reps


def compare(name, fn_c, fn_py, reps):
    t_py = timeit(fn_py, reps)
    if _kc is None:
        print(f"{name:<42} python {t_py * 1e6:9.1f} us   (no compiled backend)")
        return
    t_c = timeit(fn_c, reps)
    ratio = t_py / t_c
    winner = "compiled" if ratio > 1 else "python"
    print(
        f"{name:<42} compiled {t_c * 1e6:9.1f} us   python {t_py * 1e6:9.1f} us"
        f"   x{ratio:5.2f} ({winner})"
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--quick", action="store_true")
    args = ap.parse_args()
    scale = 10 if args.quick else 100

    s = 0.8 + 40.0j
    bern = np.array([1 / 12, -1 / 720, 1 / 30240, -1 / 1209600])
    print(f"backend available: {'yes' if _kc else 'no'}\n")

    for n in (50, 200, 1000, 4000):
        compare(
            f"hurwitz_main_sum, {n} terms",
            lambda n=n: _kc.hurwitz_main_sum(s, 1.0, n),
            lambda n=n: kpy.hurwitz_main_sum(s, 1.0, n),
            reps=20 * scale,
        )
    compare(
        "hurwitz_em_tail (order 8)",
        lambda: _kc.hurwitz_em_tail(s, 1.0, 500, bern),
        lambda: kpy.hurwitz_em_tail(s, 1.0, 500, bern),
        reps=20 * scale,
    )

    for n_primes in (11, 168, 9592):
        primes = kpy.sieve_primes(
            {11: 31, 168: 1000, 9592: 100000}[n_primes]
        ).astype(np.float64)
        cv = np.ones(len(primes), dtype=np.complex128)
        th = np.zeros(len(primes))
        compare(
            f"euler_log_sum, {n_primes} primes",
            lambda p=primes, c=cv, t=th: _kc.euler_log_sum(s, p, c, t, 1e-14),
            lambda p=primes, c=cv, t=th: kpy.euler_log_sum(s, p, c, t, 1e-14),
            reps=(20 if n_primes < 1000 else 2) * scale,
        )

    coefs = np.array([0.31, 0.007])
    a_e = np.array([1.0, 0.5])
    b_e = np.array([0.0, -1.0])
    for n in (10_000, 100_000):
        compare(
            f"phase_exp_sum, N={n}",
            lambda n=n: _kc.phase_exp_sum(coefs, a_e, b_e, 2, n),
            lambda n=n: kpy.phase_exp_sum(coefs, a_e, b_e, 2, n),
            reps=max(1, scale // 10),
        )

    for limit in (10**6, 10**7):
        compare(
            f"sieve_spf, limit={limit:.0e}",
            lambda L=limit: _kc.sieve_spf(L),
            lambda L=limit: kpy.sieve_spf(L),
            reps=max(1, scale // 50),
        )
    compare(
        "sieve_primes, limit=1e7",
        lambda: _kc.sieve_primes(10**7),
        lambda: kpy.sieve_primes(10**7),
        reps=max(1, scale // 50),
    )

    # the scan hot path itself (shared by both backends: numpy GEMM)
    from univlab.characters import character
    from univlab.lfunc import GridEvaluator

    chi = character(1, 0)
    sig = np.linspace(0.75, 0.85, 32)
    tss = np.linspace(-0.1, 0.1, 32)
    shifts = 5000.0 + 0.05 * np.arange(512 if args.quick else 2048)
    for dtype, label in ((np.complex128, "fp64"), (np.complex64, "fp32")):
        ev = GridEvaluator(chi, sig, tss, 5200.0, abs_tol=1e-6, em_order=30,
                           gemm_dtype=dtype)
        t = timeit(lambda: ev.values(shifts), max(1, scale // 50))
        rate = len(shifts) / t
        print(
            f"{'scan grid chunk (' + label + ' GEMM)':<42} "
            f"{t * 1e3:9.1f} ms per {len(shifts)}-shift chunk "
            f"({rate:,.0f} shifts/s on a 32x32 grid)"
        )


if __name__ == "__main__":
    main()
