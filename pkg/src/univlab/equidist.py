"""Uniform-distribution mod 1 tests for shift curves sampled at primes.

The tested object is omega(t) = (gamma_j(t) * log p / 2pi) over the declared
(family, prime) components, via Weyl sums (discrete) or Weyl integrals
(continuous), plus exact star discrepancy in one dimension.

Phase coefficients alpha * log p / 2pi are recognized as exact rationals
whenever alpha is exact with r a power of p; harmonics whose surviving
components are all rational with integer a and b = 0 are summed in exact
integer arithmetic, which is what makes the pathological Weyl sums come out
as exactly 1 instead of 1 - epsilon.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from ._backend import kernels
from .errors import DomainError, QuadratureAccuracyError
from .shifts import pathology_summary

TWO_PI = 2.0 * math.pi
DEFAULT_WEYL_THRESHOLD = 0.05
NODE_BUDGET = 30_000_000


@dataclass(frozen=True)
class SequenceSpec:
    """Components (family, prime) of the curve under test.

    exclusions maps a family label to primes omitted on pathology grounds;
    in discrete mode an excluded prime must not appear among that family's
    components."""

    components: tuple  # ((ShiftFamily, prime), ...)
    mode: str = "discrete"
    exclusions: dict = field(default_factory=dict)

    def __post_init__(self):
        if not self.components:
            raise DomainError("sequence spec needs at least one component")
        if self.mode not in ("discrete", "continuous"):
            raise DomainError(f"unknown mode {self.mode!r}")
        if self.mode == "discrete":
            for fam, p in self.components:
                if p in self.exclusions.get(fam.label, ()):
                    raise DomainError(
                        f"excluded prime {p} appears among components of {fam.label!r}"
                    )

    @property
    def dimension(self):
        return len(self.components)


def phase_coefficient(family, p):
    """alpha * log p / 2pi as a Fraction when that is exact, else a float.

    Rational exactly when alpha = 2pi u/(v log r) with r = p^w: the
    coefficient is then u / (v w)."""
    alpha = family.alpha
    if alpha.is_exact:
        num, den = alpha.r.numerator, alpha.r.denominator
        w = None
        if den == 1:
            e = _pure_power_exponent(num, p)
            if e:
                w = e
        elif num == 1:
            e = _pure_power_exponent(den, p)
            if e:
                w = -e
        if w is not None:
            return Fraction(alpha.u, alpha.v * w)
    return alpha.value * math.log(p) / TWO_PI


def _pure_power_exponent(n, p):
    """e >= 1 with n == p^e, else 0."""
    e = 0
    while n > 1 and n % p == 0:
        n //= p
        e += 1
    return e if n == 1 and e >= 1 else 0


def _split_harmonic(spec, h, exact_allowed=True):
    """Collapse h against the components: exact buckets (Fraction coeff,
    integer a) and float per-family (coef, a, b) triples. Zero coefficients
    are dropped."""
    h = list(h)
    if len(h) != spec.dimension:
        raise DomainError(
            f"harmonic length {len(h)} does not match {spec.dimension} components"
        )
    if all(v == 0 for v in h):
        raise DomainError("the zero harmonic is excluded by Weyl's criterion")
    exact = {}  # int a -> Fraction
    floats = {}  # family -> float coefficient
    for (fam, p), hv in zip(spec.components, h):
        if hv == 0:
            continue
        c = phase_coefficient(fam, p)
        if (
            exact_allowed
            and isinstance(c, Fraction)
            and fam.a_is_integer
            and fam.b_is_zero
        ):
            a_int = round(fam.a)
            exact[a_int] = exact.get(a_int, Fraction(0)) + hv * c
        else:
            floats[fam] = floats.get(fam, 0.0) + hv * float(c)
    exact = {a: c for a, c in exact.items() if c != 0}
    floats = {f: c for f, c in floats.items() if c != 0.0}
    return exact, floats


def _exact_fractional_parts(coeff, a_int, ks):
    """(coeff * k^a) mod 1 for an integer array ks, exactly, as floats."""
    p, q = coeff.numerator, coeff.denominator
    kmod = ks % q
    r = np.ones_like(kmod)
    for _ in range(a_int):
        r = (r * kmod) % q
    num = (p % q) * r % q
    return num.astype(np.float64) / q


def weyl_sum_discrete(spec, h, n_max):
    """S_N(h) = (1/(N-1)) sum_{k=2}^{N} e(<h, omega(k)>)."""
    n_max = int(n_max)
    if n_max < 2:
        raise DomainError("N must be at least 2")
    exact, floats = _split_harmonic(spec, h)
    ks = np.arange(2, n_max + 1, dtype=np.int64)
    phase = np.zeros(ks.size, dtype=np.float64)
    for a_int, coeff in exact.items():
        phase += _exact_fractional_parts(coeff, a_int, ks)
    if floats:
        fams = list(floats)
        coefs = np.array([floats[f] for f in fams])
        a_e = np.array([f.a for f in fams])
        b_e = np.array([f.b for f in fams])
        phase += kernels.phase_eval(coefs, a_e, b_e, ks.astype(np.float64))
    total = np.exp(2j * np.pi * phase).sum()
    return complex(total) / (n_max - 1)


@dataclass(frozen=True)
class WeylIntegral:
    value: complex
    error_estimate: float
    nodes: int


def _phase_derivative_bound(floats, t0, t1):
    """Coarse upper bound for |d/dt sum c_j gamma_j(t)| on [t0, t1]."""
    worst = 0.0
    for f, c in floats.items():
        al = abs(c)
        for t in (t0, 0.5 * (t0 + t1), t1):
            lt = math.log(t)
            g = abs(al * t ** (f.a - 1.0) * lt ** (f.b - 1.0) * (f.a * lt + f.b))
            worst = max(worst, g)
    return 1.5 * worst


def _simpson(vals, h):
    n = vals.size - 1
    return (h / 3.0) * (vals[0] + vals[-1] + 4 * vals[1:-1:2].sum() + 2 * vals[2:-1:2].sum())


def weyl_integral_continuous(spec, h, t_max, quad_step=0.05):
    """Mean of e(<h, omega(t)>) over [2, T]: composite Simpson per block
    with the step refined against the local phase derivative, plus one
    Richardson extrapolation (the h/2 pass doubles as the error estimate)."""
    t_max = float(t_max)
    if t_max < 10.0:
        raise DomainError("T must be at least 10")
    if quad_step > 0.1:
        raise DomainError("quad_step must be at most 0.1")
    # continuous mode has no pathology split: rational coefficients are
    # ordinary reals here
    _, floats = _split_harmonic(spec, h, exact_allowed=False)
    if not floats:
        return WeylIntegral(1.0 + 0j, 0.0, 0)

    fams = list(floats)
    coefs = np.array([floats[f] for f in fams])
    a_e = np.array([f.a for f in fams])
    b_e = np.array([f.b for f in fams])

    edges = [2.0]
    while edges[-1] < t_max:
        edges.append(min(edges[-1] * 2.0, t_max))
    total = 0j
    err = 0.0
    nodes_used = 0
    for t0, t1 in zip(edges[:-1], edges[1:]):
        bound = _phase_derivative_bound(floats, t0, t1)
        step = quad_step if bound == 0.0 else min(quad_step, 0.125 / bound)
        n = int(math.ceil((t1 - t0) / step))
        n += n % 2
        nodes_used += 3 * n
        if nodes_used > NODE_BUDGET:
            raise QuadratureAccuracyError(
                "estimated phase change per step exceeds 0.5 within the node "
                "budget; reduce T or quad_step, or raise the budget"
            )
        for pts in (n, 2 * n):
            ts = np.linspace(t0, t1, pts + 1)
            vals = np.exp(2j * np.pi * kernels.phase_eval(coefs, a_e, b_e, ts))
            if pts == n:
                coarse = _simpson(vals, (t1 - t0) / pts)
            else:
                fine = _simpson(vals, (t1 - t0) / pts)
        total += fine + (fine - coarse) / 15.0
        err += abs(fine - coarse) / 15.0
    span = t_max - 2.0
    return WeylIntegral(complex(total) / span, err / span, nodes_used)


def discrepancy_star_1d(points):
    """Exact star discrepancy D*_N of a finite point set mod 1."""
    pts = np.sort(np.asarray(points, dtype=np.float64) % 1.0)
    n = pts.size
    if n == 0:
        raise DomainError("discrepancy of an empty point set is undefined")
    i = np.arange(1, n + 1)
    return float(np.max(np.maximum(i / n - pts, pts - (i - 1) / n)))


@dataclass(frozen=True)
class HypothesisCheck:
    """Outcome of the exact linear-independence check (pathology route)."""

    applicable: bool
    entries: tuple = ()
    lin_ind_with_1_violated: bool = False
    lin_ind_violated: bool = False

    def to_json(self):
        return {
            "applicable": self.applicable,
            "entries": [dict(e) for e in self.entries],
            "lin_ind_with_1_violated": self.lin_ind_with_1_violated,
            "lin_ind_violated": self.lin_ind_violated,
        }


def hypothesis_check(spec):
    """When every family is linear (a = 1, b = 0) with exact alpha, decide
    through the pathology machinery whether the rational relations of the
    exact alphas break the linear-independence hypotheses on the declared
    component primes."""
    fams = []
    for fam, _ in spec.components:
        if fam not in fams:
            fams.append(fam)
    applicable = all(
        f.alpha.is_exact and f.a_is_integer and round(f.a) == 1 and f.b_is_zero
        for f in fams
    )
    if not applicable:
        return HypothesisCheck(False)
    entries = []
    active = 0
    for f in fams:
        pd = pathology_summary(f.alpha)
        available = {
            p for g, p in spec.components if g == f
        } - set(spec.exclusions.get(f.label, ()))
        covers = set(pd.support).issubset(available)
        entries.append(
            {
                "label": f.label,
                "m_star": pd.m_star,
                "support": list(pd.support),
                "exponents": {str(p): k for p, k in pd.exponents.items()},
                "relation_active": covers,
            }
        )
        if covers:
            active += 1
    return HypothesisCheck(
        True,
        tuple(tuple(e.items()) for e in entries),
        lin_ind_with_1_violated=active >= 1,
        lin_ind_violated=active >= 2,
    )


@dataclass(frozen=True)
class UDReport:
    weyl: dict  # harmonic tuple -> (|S|, N or T)
    discrepancy_1d: float | None
    verdict: bool
    threshold: float
    hypothesis: HypothesisCheck
    mode: str

    def to_json(self):
        return {
            "mode": self.mode,
            "threshold": self.threshold,
            "weyl": [
                {"h": list(h), "abs_s": s, "range": r}
                for h, (s, r) in self.weyl.items()
            ],
            "discrepancy_1d": self.discrepancy_1d,
            "verdict": "pass" if self.verdict else "fail",
            "hypothesis_check": self.hypothesis.to_json(),
        }


def harmonics_box(dim, max_abs):
    """All nonzero integer vectors with sup-norm <= max_abs, in a fixed
    deterministic order."""
    out = []
    for h in itertools.product(range(-max_abs, max_abs + 1), repeat=dim):
        if any(h):
            out.append(h)
    return out


def ud_report(spec, harmonics, n_or_t, threshold=DEFAULT_WEYL_THRESHOLD,
              quad_step=0.05):
    """Aggregate Weyl data over the harmonic list into a verdict.

    Verdicts are empirical (thresholded at finite range), not proofs."""
    harmonics = list(harmonics)
    if not harmonics:
        raise DomainError("harmonic list must be nonempty")
    weyl = {}
    for h in harmonics:
        if spec.mode == "discrete":
            s = weyl_sum_discrete(spec, h, n_or_t)
        else:
            s = weyl_integral_continuous(spec, h, n_or_t, quad_step).value
        assert abs(s) <= 1.0 + 1e-9, "Weyl average left the unit disc"
        weyl[tuple(h)] = (abs(s), float(n_or_t))
    disc = None
    if spec.dimension == 1 and spec.mode == "discrete":
        fam, p = spec.components[0]
        ks = np.arange(2, int(n_or_t) + 1, dtype=np.float64)
        coeff = float(phase_coefficient(fam, p))
        vals = kernels.phase_eval(
            np.array([coeff]), np.array([fam.a]), np.array([fam.b]), ks
        )
        disc = discrepancy_star_1d(vals)
    verdict = all(s < threshold for s, _ in weyl.values())
    return UDReport(
        weyl=weyl,
        discrepancy_1d=disc,
        verdict=verdict,
        threshold=threshold,
        hypothesis=hypothesis_check(spec),
        mode=spec.mode,
    )
