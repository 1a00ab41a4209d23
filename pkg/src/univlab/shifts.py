"""Shift families gamma(t) = alpha * t^a * (log t)^b, their admissibility,
and the exact rationality arithmetic behind the discrete pathologies.

An alpha declared in the exact form 2*pi*u / (v * log r) (r rational, != 1)
makes "is exp(2*pi*m/alpha) rational?" decidable: exp(2*pi*m/alpha) =
r^(m*v/u), so everything reduces to integer divisibility on the prime
factorization of r. Plain floats are Generic and never trigger pathology
handling.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .characters import char_value
from .errors import DegenerateTargetError, DomainError
from .euler_product import is_prime

FACTOR_CAP = 10**6
INT_TOL = 1e-12  # |a - round(a)| below this counts as an integer exponent


def _factorize_capped(n):
    """Trial division up to FACTOR_CAP; a surviving prime cofactor is kept,
    anything else is an error (desk-scale r only)."""
    n = int(n)
    out = {}
    for p in range(2, FACTOR_CAP + 1):
        if p * p > n:
            break
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    if n > 1:
        if n <= FACTOR_CAP or is_prime(n):
            out[n] = out.get(n, 0) + 1
        else:
            raise DomainError(
                f"cofactor {n} resists trial division up to {FACTOR_CAP}"
            )
    return out


@dataclass(frozen=True)
class ExactAlpha:
    """alpha = 2*pi*u / (v * log r) when exact; a bare float when generic."""

    u: int = 0
    v: int = 1
    r: Fraction = None
    generic_value: float = None

    @classmethod
    def exact(cls, u, v, r_num, r_den=1):
        u, v = int(u), int(v)
        if u == 0:
            raise DomainError("u must be a nonzero integer")
        if v <= 0:
            raise DomainError("v must be a positive integer")
        r = Fraction(int(r_num), int(r_den))
        if r <= 0 or r == 1:
            raise DomainError(f"r must be a positive rational != 1, got {r}")
        return cls(u=u, v=v, r=r)

    @classmethod
    def generic(cls, x):
        x = float(x)
        if not math.isfinite(x) or x == 0.0:
            raise DomainError(f"generic alpha must be finite and nonzero, got {x}")
        return cls(generic_value=x)

    @property
    def is_exact(self):
        return self.r is not None

    @property
    def value(self):
        if self.is_exact:
            return 2.0 * math.pi * self.u / (self.v * math.log(self.r))
        return self.generic_value

    def spec_string(self):
        if self.is_exact:
            return f"2pi*{self.u}/({self.v}*log({self.r.numerator}/{self.r.denominator}))"
        return repr(self.generic_value)


_ALPHA_RE = re.compile(
    r"^\s*2\s*pi\s*\*\s*(-?\d+)\s*/\s*\(\s*(\d+)\s*\*\s*log\s*\(\s*(\d+)\s*(?:/\s*(\d+)\s*)?\)\s*\)\s*$",
    re.IGNORECASE,
)


def parse_alpha_spec(text):
    """Parse '2pi*u/(v*log(num/den))' into an exact alpha, or a float into a
    generic one."""
    m = _ALPHA_RE.match(text)
    if m:
        u, v, num, den = m.groups()
        return ExactAlpha.exact(int(u), int(v), int(num), int(den or 1))
    try:
        return ExactAlpha.generic(float(text))
    except (ValueError, DomainError) as exc:
        raise DomainError(f"cannot parse alpha spec {text!r}: {exc}") from None


@dataclass(frozen=True)
class ShiftFamily:
    """One shift curve gamma(t) = alpha * t^a * (log t)^b."""

    alpha: ExactAlpha
    a: float
    b: float
    label: str = ""

    def __post_init__(self):
        if self.a < 0:
            raise DomainError(f"exponent a must be non-negative, got {self.a}")

    @property
    def a_is_integer(self):
        return abs(self.a - round(self.a)) < INT_TOL

    @property
    def b_is_zero(self):
        return abs(self.b) < INT_TOL


def eval_shift(family, t):
    """gamma(t) for scalar or array t; requires t > 1."""
    t_arr = np.asarray(t, dtype=np.float64)
    if np.any(t_arr <= 1.0):
        raise DomainError("shift curves are evaluated for t > 1 only")
    out = family.alpha.value * t_arr**family.a
    if family.b != 0.0:
        out = out * np.log(t_arr) ** family.b
    return float(out) if np.isscalar(t) or t_arr.ndim == 0 else out


CASE_MONOTONE = "monotone-derivative"
CASE_LOG_POWER = "log-power"
CASE_IRRATIONAL_LIMIT = "irrational-limit"


@dataclass(frozen=True)
class FamilySetVerdict:
    accepted: bool
    reasons: dict = field(default_factory=dict)  # label -> proof-case code
    violations: tuple = ()

    def to_json(self):
        return {
            "accepted": self.accepted,
            "reasons": dict(self.reasons),
            "violations": list(self.violations),
        }


def classify_family_set(families):
    """Check the admissibility hypotheses on (a_j, b_j).

    Rejections: duplicate (a, b) pairs; integer a with b in (0, 1]; the
    constant shift a = 0, b = 0. Accepted families are annotated with which
    equidistribution argument covers them."""
    families = list(families)
    if not families:
        raise DomainError("family set must be nonempty")
    labels = [f.label or f"family{i}" for i, f in enumerate(families)]
    if len(set(labels)) != len(labels):
        raise DomainError("family labels must be distinct")
    violations = []
    seen = {}
    for lab, f in zip(labels, families):
        key = (f.a, f.b)
        if key in seen:
            violations.append(
                f"duplicate (a, b) pair {key} for {seen[key]} and {lab}"
            )
        else:
            seen[key] = lab
    reasons = {}
    for lab, f in zip(labels, families):
        if f.a_is_integer and not f.b_is_zero and 0.0 < f.b <= 1.0:
            violations.append(
                f"{lab}: integer a = {f.a:g} requires b in (-inf, 0] or (1, inf), got b = {f.b:g}"
            )
            continue
        if f.a_is_integer and round(f.a) == 0 and f.b_is_zero:
            violations.append(f"{lab}: a = 0, b = 0 gives a constant shift")
            continue
        if not f.a_is_integer:
            reasons[lab] = CASE_MONOTONE
        elif f.b_is_zero:
            reasons[lab] = CASE_IRRATIONAL_LIMIT
        elif f.b < 0.0:
            reasons[lab] = CASE_MONOTONE
        else:  # integer a, b > 1
            reasons[lab] = CASE_LOG_POWER
    if violations:
        return FamilySetVerdict(False, {}, tuple(sorted(violations)))
    return FamilySetVerdict(True, reasons, ())


@dataclass(frozen=True)
class PathologyData:
    """Exact data of a rational exp(2*pi*m*/alpha) = prod_p p^{k_p}."""

    m_star: int
    support: tuple  # primes, ascending
    exponents: dict  # p -> k_p, all nonzero
    p_star: int
    k_pstar: int

    def verify_identity(self, alpha):
        """Exact check: (prod p^{k_p})^u == r^(m* * v)."""
        lhs = Fraction(1)
        for p, k in self.exponents.items():
            lhs *= Fraction(p) ** (k * alpha.u)
        return lhs == alpha.r ** (self.m_star * alpha.v)

    def to_json(self):
        return {
            "m_star": self.m_star,
            "support": list(self.support),
            "exponents": {str(p): k for p, k in self.exponents.items()},
            "p_star": self.p_star,
            "k_pstar": self.k_pstar,
        }


def _r_factorization(alpha):
    """Signed prime exponents of r (negative entries from the denominator)."""
    fac = dict(_factorize_capped(alpha.r.numerator))
    for p, e in _factorize_capped(alpha.r.denominator).items():
        fac[p] = fac.get(p, 0) - e
    return {p: e for p, e in fac.items() if e != 0}


def minimal_rational_exponent(alpha):
    """Least m >= 1 with exp(2*pi*m/alpha) rational, or None for generic
    alpha. exp(2*pi*m/alpha) = r^(m*v/u) is rational iff u | m*v*e_p for
    every prime exponent e_p of r."""
    if not alpha.is_exact:
        return None
    u = abs(alpha.u)
    m = 1
    for e in _r_factorization(alpha).values():
        need = u // math.gcd(u, alpha.v * abs(e))
        m = m * need // math.gcd(m, need)
    return m


def pathology_summary(alpha):
    """PathologyData for an exact alpha (None for generic)."""
    m = minimal_rational_exponent(alpha)
    if m is None:
        return None
    exps = {}
    for p, e in sorted(_r_factorization(alpha).items()):
        num = e * m * alpha.v
        if num % alpha.u:  # pragma: no cover - contradicts minimality
            raise RuntimeError("non-integral exponent in pathology factorization")
        exps[p] = num // alpha.u
    support = tuple(sorted(exps))
    p_star = support[0]
    data = PathologyData(
        m_star=m,
        support=support,
        exponents=exps,
        p_star=p_star,
        k_pstar=exps[p_star],
    )
    if not data.verify_identity(alpha):  # pragma: no cover
        raise RuntimeError("pathology factorization failed its exact identity")
    return data


def q_star(pathologies):
    """lcm of |k_{p*}| over the supplied pathology records; 1 when empty."""
    out = 1
    for pd in pathologies:
        k = abs(pd.k_pstar)
        out = out * k // math.gcd(out, k)
    return out


def adjust_target(f, chi, support):
    """Compose the target with prod_{p in A} (1 - chi(p) p^{-s}).

    The composed target is checked for non-vanishing on the grid of f's
    rectangle."""
    pairs = [(p, char_value(chi, p)) for p in support]
    adjusted = f.with_adjustment(pairs)
    if support:
        s = f.rect.s_flat()
        for p, v in pairs:
            factor = 1.0 - v * np.exp(-s * math.log(p))
            if np.min(np.abs(factor)) <= 1e-15:
                raise DegenerateTargetError(
                    f"adjustment factor for p={p} vanishes on the grid"
                )
    return adjusted
