"""Twisted truncated Euler products L_M(s, (theta_p); chi).

Products are accumulated in log space (sum of -log(1 - z) with the principal
branch) so supports of up to 1e6 primes neither overflow nor lose precision.
The shift/twist identity L_M(s + i*tau, (theta_p)) = L_M(s, (theta_p + tau
log p / 2pi)) is what `shifted_product` implements.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from ._backend import kernels
from .errors import DomainError, SingularFactorError

SIEVE_CAP = 10**8
SINGULAR_TOL = 1e-14

_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)


def is_prime(n):
    """Deterministic Miller-Rabin, valid for all n < 2^64."""
    n = int(n)
    if n < 2:
        return False
    for p in (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37):
        if n % p == 0:
            return n == p
    d = n - 1
    r = 0
    while d % 2 == 0:
        d //= 2
        r += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(r - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


class PrimeSet:
    """A finite, strictly increasing set of primes."""

    __slots__ = ("array",)

    def __init__(self, primes):
        arr = np.unique(np.asarray(list(primes), dtype=np.int64))
        for p in arr:
            if not is_prime(int(p)):
                raise DomainError(f"{int(p)} is not prime")
        self.array = arr

    @classmethod
    def explicit(cls, primes):
        return cls(primes)

    @classmethod
    def up_to(cls, y, exclude=()):
        """{p <= y} minus an exclusion set, by segmented sieve."""
        if y > SIEVE_CAP:
            raise DomainError(f"sieve limit {y} exceeds cap {SIEVE_CAP}")
        ps = cls.__new__(cls)
        arr = kernels.sieve_primes(int(y))
        if exclude:
            mask = ~np.isin(arr, np.asarray(sorted(exclude), dtype=np.int64))
            arr = arr[mask]
        ps.array = arr
        return ps

    @property
    def primes(self):
        return tuple(int(p) for p in self.array)

    def __len__(self):
        return len(self.array)

    def __iter__(self):
        return iter(self.primes)

    def __contains__(self, p):
        i = np.searchsorted(self.array, p)
        return i < len(self.array) and self.array[i] == p

    def __repr__(self):
        inner = ", ".join(map(str, self.primes[:6]))
        if len(self) > 6:
            inner += f", ... ({len(self)} primes)"
        return f"PrimeSet({inner})"


class Twist:
    """Real twist angles theta_p indexed by primes, stored mod 1.

    Missing primes twist by 0 (the constant zero sequence is Twist.zero())."""

    __slots__ = ("theta",)

    def __init__(self, theta=None):
        self.theta = {
            int(p): float(v) % 1.0 for p, v in (theta or {}).items()
        }

    @classmethod
    def zero(cls):
        return cls()

    def angle(self, p):
        return self.theta.get(int(p), 0.0)

    def angles_for(self, prime_array):
        return np.array([self.angle(p) for p in prime_array], dtype=np.float64)

    def shifted(self, tau, prime_array):
        """Twist with tau * log p / (2 pi) folded in, for the given support."""
        logs = np.log(np.asarray(prime_array, dtype=np.float64))
        new = {}
        for p, extra in zip(prime_array, tau * logs / (2.0 * math.pi)):
            new[int(p)] = (self.angle(p) + extra) % 1.0
        return Twist(new)

    def __repr__(self):
        return f"Twist({self.theta!r})"


def _chi_on_primes(chi, prime_array):
    vals = chi.values_period()
    return vals[np.asarray(prime_array, dtype=np.int64) % chi.modulus]


def log_truncated_euler_product(s, chi, m_set, theta=None):
    """log L_M(s, (theta_p); chi), principal-branch factor logs."""
    s = complex(s)
    if s.real <= 0:
        raise DomainError(f"Re(s) must be positive, got {s.real}")
    arr = m_set.array
    if len(arr) == 0:
        return 0j
    thetas = (theta or Twist.zero()).angles_for(arr)
    total, idx, mag = kernels.euler_log_sum(
        s, arr.astype(np.float64), _chi_on_primes(chi, arr), thetas, SINGULAR_TOL
    )
    if idx >= 0:
        raise SingularFactorError(int(arr[idx]), mag)
    return total


def truncated_euler_product(s, chi, m_set, theta=None):
    """L_M(s, (theta_p); chi) = prod over p in M of
    (1 - chi(p) e(-theta_p) p^{-s})^{-1}."""
    return cmath.exp(log_truncated_euler_product(s, chi, m_set, theta))


def shifted_product(s, tau, chi, m_set, theta=None):
    """L_M(s + i*tau, (theta_p); chi), computed by folding the shift into
    the twist instead of moving the evaluation point."""
    folded = (theta or Twist.zero()).shifted(tau, m_set.array)
    return truncated_euler_product(s, chi, m_set, folded)


def log_product_on_values(s_values, chi, m_set, theta=None, chunk=1 << 18):
    """log L_M at many points s at once (vectorized over primes and points).

    Raises SingularFactorError as the scalar path does; chunked so that
    len(primes) * len(points) work stays memory-bounded."""
    s = np.asarray(s_values, dtype=np.complex128)
    if s.size and s.real.min() <= 0:
        raise DomainError("Re(s) must be positive for every evaluation point")
    arr = m_set.array
    out = np.zeros(s.shape, dtype=np.complex128)
    if len(arr) == 0 or s.size == 0:
        return out
    logs = np.log(arr.astype(np.float64))
    cv = _chi_on_primes(chi, arr) * np.exp(
        -2j * np.pi * (theta or Twist.zero()).angles_for(arr)
    )
    flat = s.ravel()
    res = out.ravel()
    step = max(1, chunk // max(1, len(arr)))
    for lo in range(0, flat.size, step):
        hi = min(lo + step, flat.size)
        w = cv[:, None] * np.exp(-logs[:, None] * flat[None, lo:hi])
        one_minus = 1.0 - w
        mags = np.abs(one_minus)
        bad = np.argwhere(mags < SINGULAR_TOL)
        if bad.size:
            i = int(bad[0][0])
            raise SingularFactorError(int(arr[i]), float(mags[bad[0][0], bad[0][1]]))
        res[lo:hi] = -np.sum(np.log(one_minus), axis=0)
    return out
