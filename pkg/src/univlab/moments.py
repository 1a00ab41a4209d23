"""Mean-square diagnostics: Carlson tail sums, empirical second moments of
L - L_y along vertical lines and shifted curves, and Gallagher's inequality
as a numerical check.

Empirical moments run at modest heights (T, X <= 5000: evaluation cost is
linear in height) and report the empirical/predicted ratio instead of
asserting it; convergence of the mean square is slow and comes with no rate.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ._backend import kernels
from .errors import DomainError
from .euler_product import PrimeSet, log_product_on_values
from .lfunc import GridEvaluator
from .shifts import eval_shift

SPF_CAP = 10**7
RANGE_CAP = 5000.0


@dataclass(frozen=True)
class CarlsonTail:
    value: float
    remainder_bound: float
    y: int
    cutoff: int
    sigma: float

    def to_json(self):
        return {
            "value": self.value,
            "remainder_bound": self.remainder_bound,
            "y": self.y,
            "cutoff": self.cutoff,
            "sigma": self.sigma,
        }


def carlson_tail(sigma, chi, y, cutoff):
    """sum_{y <= n <= cutoff, c_n = 1} n^{-2 sigma} plus an integral bound on
    the rest, where c_n = 0 exactly when all prime factors of n are < y.

    The coefficient convention follows the mean-square limit literally; chi
    only tags the report (the c_n there are 0/1, not |chi(n)|^2). A cutoff
    of at least 10*y is recommended for a meaningful remainder split; the
    degenerate y > cutoff case returns an empty sum plus the bound."""
    sigma = float(sigma)
    if sigma <= 0.5:
        raise DomainError("the mean-square tail diverges for sigma <= 1/2")
    cutoff = int(cutoff)
    y = int(y)
    if cutoff > SPF_CAP:
        raise DomainError(f"cutoff {cutoff} exceeds the spf-sieve cap {SPF_CAP}")
    remainder = cutoff ** (1.0 - 2.0 * sigma) / (2.0 * sigma - 1.0)
    start = max(y, 2)
    if start > cutoff:
        return CarlsonTail(0.0, remainder, y, cutoff, sigma)
    spf = kernels.sieve_spf(cutoff)
    flags = kernels.has_factor_ge(spf, y)
    n = np.arange(start, cutoff + 1, dtype=np.float64)
    value = float(np.sum(flags[start:] * n ** (-2.0 * sigma)))
    return CarlsonTail(value, remainder, y, cutoff, sigma)


@dataclass(frozen=True)
class MeanSquareReport:
    kind: str
    sigma: float
    y: int
    range: tuple
    empirical: float
    predicted_tail: float
    ratio: float

    def to_json(self):
        return {
            "kind": self.kind,
            "sigma": self.sigma,
            "y": self.y,
            "range": list(self.range),
            "empirical": self.empirical,
            "predicted_tail": self.predicted_tail,
            "ratio": self.ratio,
        }


def _tail_for(sigma, chi, y):
    cutoff = min(max(10 * y, 10**6), SPF_CAP)
    return carlson_tail(sigma, chi, y, cutoff)


def _l_minus_ly_sq(s0, chi, shifts, y):
    """|L(s0 + i shift) - L_y(s0 + i shift)|^2 on an array of shifts."""
    ev = GridEvaluator(
        chi, [s0.real], [s0.imag], float(np.max(np.abs(shifts))), abs_tol=1e-10
    )
    lvals = ev.values(shifts)[0]
    points = s0 + 1j * shifts
    ly = np.exp(log_product_on_values(points, chi, PrimeSet.up_to(y)))
    return np.abs(lvals - ly) ** 2


def empirical_mean_square_vertical(s0, chi, y, t_max, step=0.25):
    """(1/(T-1)) integral_1^T |L(s0 + i tau) - L_y(s0 + i tau)|^2 d tau by
    trapezoid, against the Carlson tail."""
    s0 = complex(s0)
    if s0.real <= 0.6:
        raise DomainError("vertical mean squares need Re(s0) > 0.6")
    t_max = float(t_max)
    if t_max > RANGE_CAP:
        raise DomainError(f"T capped at {RANGE_CAP:g}")
    if step > 0.25:
        raise DomainError("step must be at most 0.25")
    taus = np.arange(1.0, t_max + step * 0.5, step)
    d2 = _l_minus_ly_sq(s0, chi, taus, y)
    empirical = float(np.trapezoid(d2, taus) / (taus[-1] - taus[0]))
    tail = _tail_for(s0.real, chi, y)
    predicted = tail.value
    ratio = empirical / predicted if predicted > 0 else math.inf
    return MeanSquareReport(
        "vertical", s0.real, int(y), (1.0, t_max), empirical, predicted, ratio
    )


def empirical_mean_square_shifted(s0, chi, y, family, x):
    """(1/X) integral_X^{2X} |L(s0 + i gamma(tau)) - L_y(...)|^2 d tau with
    the step adapted to gamma', compared against the substitution-scaled
    tail X^{-a} (log X)^{-b} * |gamma(2X)| * tail."""
    s0 = complex(s0)
    if family.a <= 0:
        raise DomainError("shifted mean squares need a > 0")
    x = float(x)
    if x > RANGE_CAP:
        raise DomainError(f"X capped at {RANGE_CAP:g}")
    alpha = family.alpha.value
    dbound = 0.0
    for t in (x, 1.5 * x, 2.0 * x):
        lt = math.log(t)
        dbound = max(
            dbound,
            abs(alpha) * t ** (family.a - 1.0) * lt ** (family.b - 1.0)
            * abs(family.a * lt + family.b),
        )
    step = min(0.25, 0.25 / max(dbound, 1e-12), x / 16.0)
    taus = np.arange(x, 2.0 * x + step * 0.5, step)
    shifts = eval_shift(family, taus)
    d2 = _l_minus_ly_sq(s0, chi, shifts, y)
    empirical = float(np.trapezoid(d2, taus) / x)
    tail = _tail_for(s0.real, chi, y)
    predicted = (
        x ** (-family.a)
        * math.log(x) ** (-family.b)
        * abs(eval_shift(family, 2.0 * x))
        * tail.value
    )
    ratio = empirical / predicted if predicted > 0 else math.inf
    return MeanSquareReport(
        "shifted", s0.real, int(y), (x, 2.0 * x), empirical, predicted, ratio
    )


@dataclass(frozen=True)
class GallagherResult:
    lhs: float
    rhs: float
    holds: bool

    def to_json(self):
        return {"lhs": self.lhs, "rhs": self.rhs, "holds": self.holds}


def gallagher_check(xs, fs, point_set, delta, dfs=None):
    """Check sum_{t in A} N_delta(t)^{-1} |f(t)|^2 <= (1/delta) I2 +
    sqrt(I2 * I2'), with I2, I2' trapezoid integrals of |f|^2 and |f'|^2.

    f is supplied sampled on xs (f' optional, else central differences);
    values at the points of A are linearly interpolated."""
    xs = np.asarray(xs, dtype=np.float64)
    fs = np.asarray(fs, dtype=np.complex128)
    pts = np.asarray(sorted(point_set), dtype=np.float64)
    delta = float(delta)
    t0, t_end = xs[0], xs[-1]
    big_t = t_end - t0
    if not big_t >= delta > 0:
        raise DomainError("need T >= delta > 0")
    if pts.size and (pts.min() < t0 + delta / 2 - 1e-12 or pts.max() > t_end - delta / 2 + 1e-12):
        raise DomainError("A must lie inside [T0 + delta/2, T0 + T - delta/2]")
    if dfs is None:
        dfs = np.gradient(fs, xs)
    else:
        dfs = np.asarray(dfs, dtype=np.complex128)
    i2 = float(np.trapezoid(np.abs(fs) ** 2, xs))
    i2d = float(np.trapezoid(np.abs(dfs) ** 2, xs))
    f_at = np.interp(pts, xs, fs.real) + 1j * np.interp(pts, xs, fs.imag)
    n_delta = np.array([np.sum(np.abs(pts - t) < delta) for t in pts], dtype=np.float64)
    lhs = float(np.sum(np.abs(f_at) ** 2 / n_delta)) if pts.size else 0.0
    rhs = i2 / delta + math.sqrt(i2 * i2d)
    return GallagherResult(lhs, rhs, lhs <= rhs * (1.0 + 1e-6))
