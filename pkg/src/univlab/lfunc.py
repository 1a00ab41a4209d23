"""Evaluation of Dirichlet L-functions in the critical strip.

Strategy: Hurwitz-zeta decomposition L(s,chi) = q^{-s} sum_a chi(a) zeta(s,a/q)
with Euler-Maclaurin tails, not the approximate functional equation. Cost per
point grows linearly with |Im s|; heights are capped at HEIGHT_CAP.

Two paths share the same formula:
  * scalar, adaptive-N evaluation (hurwitz_zeta / l_value / l_derivative),
    backed by the compiled kernels when available;
  * a vectorized grid x shifts evaluator (GridEvaluator) whose inner product
    is one complex GEMM per shift chunk - the hot path of the scan engine.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .errors import DomainError, HeightCapError, PoleError, PrecisionError

HEIGHT_CAP = 1e5

# B_2, B_4, ..., B_32 (exact); em_order = 2K uses the first K of these, and
# the K+1st feeds the remainder estimate.
_BERNOULLI = [
    Fraction(1, 6), Fraction(-1, 30), Fraction(1, 42), Fraction(-1, 30),
    Fraction(5, 66), Fraction(-691, 2730), Fraction(7, 6), Fraction(-3617, 510),
    Fraction(43867, 798), Fraction(-174611, 330), Fraction(854513, 138),
    Fraction(-236364091, 2730), Fraction(8553103, 6),
    Fraction(-23749461029, 870), Fraction(8615841276005, 14322),
    Fraction(-7709321041217, 510),
]

_BERN_OVER_FACT = np.array(
    [float(b / math.factorial(2 * (k + 1))) for k, b in enumerate(_BERNOULLI)],
    dtype=np.float64,
)


@dataclass(frozen=True)
class EvalParams:
    """Accuracy knobs for the evaluation backend."""

    abs_tol: float = 1e-10
    max_terms: int = 2_000_000
    em_order: int = 26

    def __post_init__(self):
        if self.abs_tol < 1e-14:
            raise DomainError("abs_tol below 1e-14 is not supported")
        if self.em_order % 2 or not 2 <= self.em_order <= 30:
            raise DomainError("em_order must be an even integer in [2, 30]")
        if self.max_terms < 16:
            raise DomainError("max_terms too small")


DEFAULT_PARAMS = EvalParams()


def _check_height(t):
    if abs(t) > HEIGHT_CAP:
        raise HeightCapError(
            f"|Im(s)| = {abs(t):.4g} exceeds the evaluation cap {HEIGHT_CAP:.0e}"
        )


def _em_error_estimate(s, x, n_em):
    """Magnitude estimate for the first omitted Euler-Maclaurin term
    (K = n_em used), evaluated in logs to dodge overflow."""
    if n_em >= len(_BERN_OVER_FACT):
        n_em = len(_BERN_OVER_FACT) - 1
    log_rf = 0.0
    for i in range(2 * n_em + 1):
        log_rf += math.log(abs(s + i))
    sigma = s.real
    log_term = (
        math.log(abs(_BERN_OVER_FACT[n_em]))
        + log_rf
        - (sigma + 2 * n_em + 1) * math.log(x)
    )
    fudge = max(1.0, abs(s + 2 * n_em + 1) / (sigma + 2 * n_em + 1))
    if log_term > 600:
        return math.inf
    return math.exp(log_term) * fudge


def _choose_terms(s, a, params):
    """Smallest N (up to max_terms) meeting abs_tol, or raise PrecisionError."""
    k = params.em_order // 2
    n = max(2 * k + 2, 16, int(0.45 * abs(s.imag)) + 8)
    # 1.25x growth keeps the search cheap; accuracy improves ~(2*pi*N/|t|)^{-2K}
    while n <= params.max_terms:
        est = _em_error_estimate(s, n + a, k)
        if est <= 0.5 * params.abs_tol:
            return n, est
        n = int(n * 1.25) + 1
    est = _em_error_estimate(s, params.max_terms + a, k)
    raise PrecisionError(
        f"abs_tol={params.abs_tol:.1e} unreachable within {params.max_terms} terms "
        f"(achieved ~{est:.2e})",
        achieved=est,
    )


def hurwitz_zeta_with_error(s, a, params=DEFAULT_PARAMS):
    """zeta(s, a) plus an error-bound estimate, for Re(s) > 0, s != 1,
    a in (0, 1]."""
    s = complex(s)
    if s == 1:
        raise PoleError("zeta(s, a) has a pole at s = 1")
    if s.real <= 0:
        raise DomainError(f"Re(s) must be positive, got {s.real}")
    if not 0 < a <= 1:
        raise DomainError(f"a must lie in (0, 1], got {a}")
    _check_height(s.imag)
    n, est = _choose_terms(s, a, params)
    k = params.em_order // 2
    value = kernels.hurwitz_main_sum(s, a, n) + kernels.hurwitz_em_tail(
        s, a, n, _BERN_OVER_FACT[:k]
    )
    # second term: phase rounding, which dominates truncation at large heights
    return value, est + 4e-16 * (1.0 + abs(s.imag)) * math.log(n + 2.0)


def hurwitz_zeta(s, a, params=DEFAULT_PARAMS):
    return hurwitz_zeta_with_error(s, a, params)[0]


def _hurwitz_minus_pole_at_1(a, params):
    """zeta(s, a) - 1/(s-1) evaluated at s = 1 (the pole term of the EM
    formula degenerates to -log(N + a))."""
    k = params.em_order // 2
    n = max(2 * k + 2, 64)
    x = n + a
    value = kernels.hurwitz_main_sum(1.0 + 0j, a, n) - math.log(x) + 0.5 / x
    rf = 1.0
    xpow = 1.0 / (x * x)
    for j in range(k):
        if j > 0:
            rf *= (2 * j) * (2 * j + 1)
            xpow /= x * x
        value += _BERN_OVER_FACT[j] * rf * xpow
    return value


def l_value_with_error(s, chi, params=DEFAULT_PARAMS):
    """L(s, chi) plus an error bound. Pole at s = 1 for principal chi."""
    s = complex(s)
    _check_height(s.imag)
    q = chi.modulus
    if chi.is_principal:
        if s == 1:
            raise PoleError("L(s, chi_0) has a pole at s = 1")
        zeta, err = hurwitz_zeta_with_error(s, 1.0, params)
        factor = 1.0 + 0j
        for p, _ in chi.group.factors:
            factor *= 1.0 - cmath.exp(-s * math.log(p))
        return zeta * factor, err * abs(factor) + 1e-16
    if s == 1:
        # poles of the Hurwitz pieces cancel (sum of chi over units is 0)
        total = 0j
        vals = chi.values_period()
        for a in range(1, q + 1):
            c = vals[a % q]
            if c != 0:
                total += c * _hurwitz_minus_pole_at_1(a / q, params)
        return total / q, q * params.abs_tol
    total = 0j
    err = 0.0
    vals = chi.values_period()
    qs = cmath.exp(-s * math.log(q))
    for a in range(1, q + 1):
        c = vals[a % q]
        if c == 0:
            continue
        z, e = hurwitz_zeta_with_error(s, a / q, params)
        total += c * z
        err += e
    return qs * total, abs(qs) * err


def l_value(s, chi, params=DEFAULT_PARAMS):
    return l_value_with_error(s, chi, params)[0]


def cauchy_derivative(fn, s, radius=0.01, nodes=64):
    """f'(s) by the Cauchy integral over a circle, trapezoid quadrature.

    Spectrally accurate for fn analytic on the closed disc; the caller is
    responsible for keeping poles outside."""
    s = complex(s)
    acc = 0j
    for m in range(nodes):
        phase = 2 * math.pi * m / nodes
        w = cmath.exp(1j * phase)
        acc += fn(s + radius * w) / w
    return acc / (nodes * radius)


DERIV_RADIUS = 0.01


def l_derivative(s, chi, params=DEFAULT_PARAMS):
    """L'(s, chi) via a radius-0.01 Cauchy circle (64 nodes)."""
    s = complex(s)
    if chi.is_principal and abs(s - 1.0) <= DERIV_RADIUS + 1e-9:
        raise DomainError("pole of L(s, chi_0) inside the derivative contour")
    inner = EvalParams(
        abs_tol=max(params.abs_tol / 10.0, 1e-14),
        max_terms=params.max_terms,
        em_order=params.em_order,
    )
    return cauchy_derivative(lambda z: l_value(z, chi, inner), s, DERIV_RADIUS, 64)


class GridEvaluator:
    """Vectorized evaluation of L(sigma + i(t + shift), chi) over a fixed
    (sigma, t) grid and many shifts.

    The Dirichlet main sums collapse into one complex matrix product per
    shift chunk: B[g, m] = chi(m) m^{-(sigma_g + i t_g)} is fixed, while
    U[m, c] = m^{-i shift_c} varies, so values = B @ U + EM tails. Rows are
    the grid flattened sigma-major (g = i_sigma * len(ts) + i_t).

    B is sized for the largest declared shift, and each `values` call uses
    only the prefix its own heights need, so low-shift chunks stay cheap.
    gemm_dtype=complex64 halves the matrix-product cost; the EM tails and
    the U recurrence always run in double precision.
    """

    def __init__(self, chi, sigmas, ts, max_abs_shift, abs_tol=1e-9, em_order=26,
                 max_basis=6_000_000, gemm_dtype=np.complex128):
        self.chi = chi
        self.sigmas = np.asarray(sigmas, dtype=np.float64)
        self.ts = np.asarray(ts, dtype=np.float64)
        if self.sigmas.min() <= 0:
            raise DomainError("grid sigma values must be positive")
        q = chi.modulus
        self.abs_tol = float(abs_tol)
        self.t_grid_reach = float(np.max(np.abs(self.ts)))
        t_max = self.t_grid_reach + float(max_abs_shift)
        _check_height(t_max)
        self.k = em_order // 2
        self.max_basis = int(max_basis)
        n = self._terms_for(t_max)
        self.n_terms = n
        s_worst = complex(float(self.sigmas.min()), t_max)
        self.err_bound = q * _em_error_estimate(s_worst, n + 1.0, self.k) + 4e-16 * (
            1.0 + t_max
        ) * math.log(q * n + 2.0)

        grid_s = (self.sigmas[:, None] + 1j * self.ts[None, :]).ravel()
        self.grid_s = grid_s
        m = np.arange(1, q * n + 1, dtype=np.float64)
        self.log_m = np.log(m)
        coeff = np.tile(chi.values_period(), n + 1)[1 : q * n + 1]
        # B rows: chi(m) * m^{-s_g}; kept as one dense matrix for the GEMM
        self.basis = (
            coeff[None, :] * np.exp(-grid_s[:, None] * self.log_m[None, :])
        ).astype(gemm_dtype)
        self.gemm_dtype = gemm_dtype
        self.tail_a = [
            (a, complex(v))
            for a, v in enumerate(np.tile(chi.values_period(), 2)[1 : q + 1], start=1)
            if v != 0
        ]
        self.q = q

    def _terms_for(self, t_reach):
        """Smallest prefix length meeting abs_tol at heights up to t_reach."""
        s_worst = complex(float(self.sigmas.min()), t_reach)
        n = max(2 * self.k + 2, 48, int(0.26 * t_reach))
        while _em_error_estimate(s_worst, n + 1.0, self.k) > 0.5 * self.abs_tol:
            n = int(n * 1.12) + 1
            if self.chi.modulus * n > self.max_basis:
                raise PrecisionError(
                    f"basis of {self.chi.modulus * n} terms exceeds the "
                    "configured limit; reduce the height or modulus"
                )
        return n

    def _check_pole(self, shifts):
        if not self.chi.is_principal:
            return
        d2 = (self.grid_s[:, None].real - 1.0) ** 2 + (
            self.grid_s[:, None].imag + shifts[None, :]
        ) ** 2
        if d2.min() < 0.05**2:
            raise PoleError(
                "principal-character evaluation too close to the pole at s = 1"
            )

    def values(self, shifts):
        """Array of shape (n_grid, len(shifts))."""
        shifts = np.asarray(shifts, dtype=np.float64)
        self._check_pole(shifts)
        n = min(
            self.n_terms,
            self._terms_for(float(np.max(np.abs(shifts))) + self.t_grid_reach),
        )
        q = self.q
        u = self._unitary(shifts, q * n)
        if self.gemm_dtype != np.complex128:
            u = u.astype(self.gemm_dtype)
        out = (self.basis[:, : q * n] @ u).astype(np.complex128)
        s_tilde = self.grid_s[:, None] + 1j * shifts[None, :]
        for a, chi_a in self.tail_a:
            x = float(q * n + a)
            # scale factors fold q^{-s} into powers of X_a = qN + a
            col = np.exp(-self.grid_s * math.log(x))[:, None]
            row = np.exp(-1j * shifts * math.log(x))[None, :]
            g = (x / q) / (s_tilde - 1.0) + 0.5
            rf = s_tilde.copy()
            coef = _BERN_OVER_FACT[0] * (q / x)
            acc = coef * rf
            for j in range(1, self.k):
                rf = rf * (s_tilde + (2 * j - 1)) * (s_tilde + 2 * j)
                coef = _BERN_OVER_FACT[j] * (q / x) ** (2 * j + 1)
                acc += coef * rf
            g = g + acc
            out += chi_a * col * row * g
        return out

    def _unitary(self, shifts, m_len):
        """U[m, c] = m^{-i shift_c}; incremental recurrence on evenly spaced
        shift arrays, direct complex exponentials otherwise."""
        logs = self.log_m[:m_len]
        if len(shifts) > 2:
            d = np.diff(shifts)
            h = d[0]
            if np.max(np.abs(d - h)) < 1e-9 * (1.0 + abs(h)):
                u = np.empty((m_len, shifts.size), dtype=np.complex128)
                u[:, 0] = np.exp(-1j * shifts[0] * logs)
                w = np.exp(-1j * h * logs)
                for c in range(1, shifts.size):
                    np.multiply(u[:, c - 1], w, out=u[:, c])
                return u
        return np.exp(-1j * logs[:, None] * shifts[None, :])


def l_on_grid(chi, sigmas, ts, shifts, abs_tol=1e-9, em_order=26):
    """Convenience wrapper over GridEvaluator for a single shift batch."""
    shifts = np.asarray(shifts, dtype=np.float64)
    ev = GridEvaluator(
        chi, sigmas, ts, float(np.max(np.abs(shifts))) if shifts.size else 0.0,
        abs_tol=abs_tol, em_order=em_order,
    )
    return ev.values(shifts)
