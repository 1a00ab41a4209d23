"""Pure numpy implementations of the hot kernels.

Twin of the compiled ``_kernels`` extension: identical signatures, selected
at import time by ``_backend`` when the extension is unavailable (or when
``UNIVLAB_PURE_PYTHON=1``). Keep the two in sync; ``tests/test_backends.py``
cross-checks them.
"""

import math

import numpy as np

BACKEND_NAME = "python"

_SEGMENT = 1 << 20


def sieve_primes(limit):
    """All primes <= limit, ascending, as int64. Segmented, so limits up to
    1e8 stay within a few tens of MB."""
    limit = int(limit)
    if limit < 2:
        return np.empty(0, dtype=np.int64)
    root = math.isqrt(limit)
    base = np.ones(root + 1, dtype=bool)
    base[:2] = False
    for p in range(2, math.isqrt(root) + 1):
        if base[p]:
            base[p * p :: p] = False
    base_primes = np.flatnonzero(base)

    out = [base_primes.astype(np.int64)]
    lo = root + 1
    while lo <= limit:
        hi = min(lo + _SEGMENT, limit + 1)
        seg = np.ones(hi - lo, dtype=bool)
        for p in base_primes:
            start = (-lo) % p
            seg[start::p] = False
        out.append((np.flatnonzero(seg) + lo).astype(np.int64))
        lo = hi
    return np.concatenate(out)


def sieve_spf(limit):
    """Smallest-prime-factor table spf[0..limit]; spf[n] = 0 for n < 2."""
    limit = int(limit)
    spf = np.zeros(limit + 1, dtype=np.int64)
    if limit < 2:
        return spf
    spf[2::2] = 2
    for p in range(3, math.isqrt(limit) + 1, 2):
        if spf[p] == 0:
            seg = spf[p * p :: 2 * p]
            seg[seg == 0] = p
    rest = np.flatnonzero(spf[3::2] == 0) * 2 + 3
    spf[rest] = rest
    return spf


def has_factor_ge(spf, y):
    """Boolean flags: n has some prime factor >= y (n indexed 0..len-1)."""
    n = len(spf) - 1
    flags = np.zeros(n + 1, dtype=bool)
    idx = np.arange(2, n + 1)
    cur = idx.copy()
    while idx.size:
        f = spf[cur]
        flags[idx[f >= y]] = True
        cur //= f
        keep = cur > 1
        idx, cur = idx[keep], cur[keep]
    return flags


def hurwitz_main_sum(s, a, n_terms):
    """Sum of (n + a)^(-s) for n = 0..n_terms-1."""
    n = np.arange(int(n_terms), dtype=np.float64)
    return complex(np.sum(np.exp(-s * np.log(n + a))))


def hurwitz_em_tail(s, a, n_terms, bern):
    """Euler-Maclaurin correction after the first n_terms summands.

    bern[k] must hold B_{2(k+1)} / (2(k+1))!.
    """
    x = n_terms + a
    lx = math.log(x)
    xms = np.exp(-s * lx)  # x^{-s}
    total = xms * x / (s - 1.0) + 0.5 * xms
    rf = s  # rising factorial s(s+1)...(s+2k), built incrementally
    xpow = xms / x
    for k in range(len(bern)):
        if k > 0:
            rf = rf * (s + (2 * k - 1)) * (s + 2 * k)
            xpow = xpow / (x * x)
        total += bern[k] * rf * xpow
    return complex(total)


def euler_log_sum(s, primes, chi_vals, thetas, singular_tol):
    """Sum over primes of -log(1 - chi*e(-theta)*p^(-s)).

    Returns (total, singular_index, singular_magnitude); index -1 when no
    factor came within singular_tol of vanishing.
    """
    p = np.asarray(primes, dtype=np.float64)
    w = (
        np.asarray(chi_vals, dtype=np.complex128)
        * np.exp(-2j * np.pi * np.asarray(thetas, dtype=np.float64))
        * np.exp(-s * np.log(p))
    )
    one_minus = 1.0 - w
    mags = np.abs(one_minus)
    bad = np.flatnonzero(mags < singular_tol)
    if bad.size:
        i = int(bad[0])
        return 0j, i, float(mags[i])
    return complex(-np.sum(np.log(one_minus))), -1, 0.0


def phase_eval(coefs, a_exps, b_exps, ts):
    """Phase sum_j coef_j * t^a_j * (log t)^b_j at the points ts (> 1)."""
    t = np.asarray(ts, dtype=np.float64)
    lt = np.log(t)
    phase = np.zeros_like(t)
    for c, a, b in zip(coefs, a_exps, b_exps):
        term = c * t**a
        if b != 0.0:
            term = term * lt**b
        phase += term
    return phase


def phase_exp_sum(coefs, a_exps, b_exps, k_start, k_end):
    """Sum of exp(2*pi*i*phase(k)) over integers k_start..k_end inclusive."""
    total = 0j
    coefs = np.asarray(coefs, dtype=np.float64)
    a_exps = np.asarray(a_exps, dtype=np.float64)
    b_exps = np.asarray(b_exps, dtype=np.float64)
    for lo in range(int(k_start), int(k_end) + 1, _SEGMENT):
        hi = min(lo + _SEGMENT - 1, int(k_end))
        ks = np.arange(lo, hi + 1, dtype=np.float64)
        phase = phase_eval(coefs, a_exps, b_exps, ks)
        total += complex(np.sum(np.exp(2j * np.pi * phase)))
    return total
