# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels. Signature-for-signature twin of _kernels_py."""

import math

import numpy as np

from libc.math cimport floor, log, pow, sqrt

cdef extern from "complex.h" nogil:
    double complex cexp(double complex)
    double complex clog(double complex)
    double cabs(double complex)

BACKEND_NAME = "compiled"

cdef double TWO_PI = 6.283185307179586476925287


def sieve_primes(limit):
    """All primes <= limit, ascending, as int64 (segmented)."""
    cdef long n = int(limit)
    if n < 2:
        return np.empty(0, dtype=np.int64)
    cdef long root = math.isqrt(n)
    cdef unsigned char[::1] base = np.ones(root + 1, dtype=np.uint8)
    base[0] = base[1] = 0
    cdef long p, i, lo, hi, seg_len, start
    for p in range(2, math.isqrt(root) + 1):
        if base[p]:
            for i in range(p * p, root + 1, p):
                base[i] = 0
    base_np = np.flatnonzero(np.asarray(base)).astype(np.int64)
    cdef long[::1] bp = base_np

    out = [base_np]
    cdef long segment = 1 << 20
    cdef unsigned char[::1] seg
    lo = root + 1
    while lo <= n:
        hi = min(lo + segment, n + 1)
        seg_len = hi - lo
        seg_np = np.ones(seg_len, dtype=np.uint8)
        seg = seg_np
        for i in range(bp.shape[0]):
            p = bp[i]
            start = (p - lo % p) % p  # C modulo: keep operands non-negative
            while start < seg_len:
                seg[start] = 0
                start += p
        out.append((np.flatnonzero(np.asarray(seg)) + lo).astype(np.int64))
        lo = hi
    return np.concatenate(out)


def sieve_spf(limit):
    """Smallest-prime-factor table spf[0..limit]; spf[n] = 0 for n < 2."""
    cdef long n = int(limit)
    spf_np = np.zeros(n + 1, dtype=np.int64)
    if n < 2:
        return spf_np
    cdef long[::1] spf = spf_np
    cdef long p, i
    for i in range(2, n + 1, 2):
        spf[i] = 2
    for p in range(3, math.isqrt(n) + 1, 2):
        if spf[p] == 0:
            for i in range(p * p, n + 1, 2 * p):
                if spf[i] == 0:
                    spf[i] = p
    for i in range(3, n + 1, 2):
        if spf[i] == 0:
            spf[i] = i
    return spf_np


def has_factor_ge(spf, y):
    """Boolean flags: n has some prime factor >= y."""
    cdef long[::1] t = np.ascontiguousarray(spf, dtype=np.int64)
    cdef long n = t.shape[0] - 1
    cdef long yy = int(y)
    flags_np = np.zeros(n + 1, dtype=np.uint8)
    cdef unsigned char[::1] flags = flags_np
    cdef long i, cur
    for i in range(2, n + 1):
        cur = i
        while cur > 1:
            if t[cur] >= yy:
                flags[i] = 1
                break
            cur //= t[cur]
    return flags_np.view(np.bool_)


def hurwitz_main_sum(double complex s, double a, long n_terms):
    """Sum of (n + a)^(-s) for n = 0..n_terms-1."""
    cdef double complex acc = 0
    cdef long n
    for n in range(n_terms):
        acc = acc + cexp(-s * log(n + a))
    return complex(acc)


def hurwitz_em_tail(double complex s, double a, long n_terms, bern):
    """Euler-Maclaurin correction; bern[k] = B_{2(k+1)} / (2(k+1))!."""
    cdef double[::1] bv = np.ascontiguousarray(bern, dtype=np.float64)
    cdef double x = n_terms + a
    cdef double lx = log(x)
    cdef double complex xms = cexp(-s * lx)
    cdef double complex total = xms * x / (s - 1.0) + 0.5 * xms
    cdef double complex rf = s
    cdef double complex xpow = xms / x
    cdef long k
    for k in range(bv.shape[0]):
        if k > 0:
            rf = rf * (s + (2 * k - 1)) * (s + 2 * k)
            xpow = xpow / (x * x)
        total = total + bv[k] * rf * xpow
    return complex(total)


def euler_log_sum(double complex s, primes, chi_vals, thetas, double singular_tol):
    """Sum over primes of -log(1 - chi*e(-theta)*p^(-s))."""
    cdef double[::1] p = np.ascontiguousarray(primes, dtype=np.float64)
    cdef double complex[::1] cv = np.ascontiguousarray(chi_vals, dtype=np.complex128)
    cdef double[::1] th = np.ascontiguousarray(thetas, dtype=np.float64)
    cdef double complex total = 0
    cdef double complex w, one_minus
    cdef double mag
    cdef long i
    cdef double complex MINUS_TWO_PI_I = -TWO_PI * 1j
    for i in range(p.shape[0]):
        w = cv[i] * cexp(MINUS_TWO_PI_I * th[i]) * cexp(-s * log(p[i]))
        one_minus = 1.0 - w
        mag = cabs(one_minus)
        if mag < singular_tol:
            return 0j, i, mag
        total = total - clog(one_minus)
    return complex(total), -1, 0.0


def phase_eval(coefs, a_exps, b_exps, ts):
    """Phase sum_j coef_j * t^a_j * (log t)^b_j at the points ts (> 1)."""
    cdef double[::1] c = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a_exps, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b_exps, dtype=np.float64)
    cdef double[::1] t = np.ascontiguousarray(ts, dtype=np.float64)
    out_np = np.empty(t.shape[0], dtype=np.float64)
    cdef double[::1] out = out_np
    cdef long i, j
    cdef double acc, x, lx, term
    for i in range(t.shape[0]):
        x = t[i]
        lx = log(x)
        acc = 0.0
        for j in range(c.shape[0]):
            term = c[j] * pow(x, av[j])
            if bv[j] != 0.0:
                term *= pow(lx, bv[j])
            acc += term
        out[i] = acc
    return out_np


def phase_exp_sum(coefs, a_exps, b_exps, k_start, k_end):
    """Sum of exp(2*pi*i*phase(k)) over integers k_start..k_end inclusive."""
    cdef double[::1] c = np.ascontiguousarray(coefs, dtype=np.float64)
    cdef double[::1] av = np.ascontiguousarray(a_exps, dtype=np.float64)
    cdef double[::1] bv = np.ascontiguousarray(b_exps, dtype=np.float64)
    cdef long k0 = int(k_start), k1 = int(k_end)
    cdef double complex total = 0
    cdef double complex I = 1j
    cdef long k, j
    cdef double acc, x, lx, term
    for k in range(k0, k1 + 1):
        x = k
        lx = log(x)
        acc = 0.0
        for j in range(c.shape[0]):
            term = c[j] * pow(x, av[j])
            if bv[j] != 0.0:
                term *= pow(lx, bv[j])
            acc += term
        total = total + cexp(TWO_PI * acc * I)
    return complex(total)
