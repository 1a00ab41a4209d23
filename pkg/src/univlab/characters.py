"""Dirichlet characters mod q with exact root-of-unity arithmetic.

Characters are represented through generators of (Z/q)* obtained by CRT on
the prime-power factors of q (odd parts via primitive roots, the 2-part via
the {-1} x <5> decomposition). Values are stored as rational exponents r
with chi(n) = e(r) = exp(2*pi*i*r), so multiplicativity, conductors and
equivalence are decided exactly; complex values are produced on demand.
"""

from __future__ import annotations

import cmath
import math
from fractions import Fraction
from functools import lru_cache

import numpy as np

from .errors import DomainError

MAX_MODULUS = 10**6


def factorize(n):
    """Prime factorization by trial division, as a list of (p, e) pairs."""
    if n < 1:
        raise DomainError(f"cannot factorize {n}")
    out = []
    for p in range(2, math.isqrt(n) + 1):
        if n % p == 0:
            e = 0
            while n % p == 0:
                n //= p
                e += 1
            out.append((p, e))
    if n > 1:
        out.append((n, 1))
    return out


def _primitive_root_mod_p(p):
    if p == 2:
        return 1
    fac = [f for f, _ in factorize(p - 1)]
    for g in range(2, p):
        if all(pow(g, (p - 1) // f, p) != 1 for f in fac):
            return g
    raise RuntimeError(f"no primitive root mod {p}")  # unreachable for prime p


def _primitive_root_mod_pe(p, e):
    """Primitive root mod p^e for odd prime p."""
    g = _primitive_root_mod_p(p)
    if e == 1:
        return g
    # g or g+p generates mod p^2, and then mod every higher power
    if pow(g, p - 1, p * p) == 1:
        g += p
    return g


def _crt_pair(r1, m1, r2, m2):
    inv = pow(m1, -1, m2)
    return (r1 + m1 * ((r2 - r1) * inv % m2)) % (m1 * m2)


class CharacterGroup:
    """Structure of (Z/q)* plus a discrete-log table for fast evaluation.

    components: list of (kind, p, e, generator mod q, order) where kind is
    'odd' for odd prime powers, 'two4' for the mod-4 part, and
    'two_neg'/'two_five' for the two cyclic factors when 8 | q.
    """

    def __init__(self, q):
        if not 1 <= q <= MAX_MODULUS:
            raise DomainError(f"modulus must be in [1, {MAX_MODULUS}], got {q}")
        self.modulus = q
        self.factors = factorize(q) if q > 1 else []
        self.components = []
        for p, e in self.factors:
            if p == 2:
                if e == 1:
                    continue
                if e == 2:
                    self._add_component("two4", p, e, 3, 2)
                else:
                    self._add_component("two_neg", p, e, 2**e - 1, 2)
                    self._add_component("two_five", p, e, 5, 2 ** (e - 2))
            else:
                g = _primitive_root_mod_pe(p, e)
                self._add_component("odd", p, e, g, (p - 1) * p ** (e - 1))
        self.orders = tuple(order for *_, order in self.components)
        self.unit_count = 1
        for s in self.orders:
            self.unit_count *= s
        self._build_dlog()

    def _add_component(self, kind, p, e, gen_local, order):
        q = self.modulus
        pe = p**e
        rest = q // pe
        if rest > 1:
            gen = _crt_pair(gen_local % pe, pe, 1, rest)
        else:
            gen = gen_local % pe
        self.components.append((kind, p, e, gen, order))

    def _build_dlog(self):
        q = self.modulus
        self.dlog = np.full(max(q, 1), -1, dtype=np.int64)
        residues = [1 % q]
        for *_, gen, order in self.components:
            powers = []
            x = 1
            for _ in range(order):
                powers.append(x)
                x = x * gen % q
            residues = [r * y % q for r in residues for y in powers]
        for idx, r in enumerate(residues):
            self.dlog[r] = idx

    def decompose(self, flat):
        """Flat mixed-radix index -> exponent tuple (first component most
        significant, matching _build_dlog's enumeration order)."""
        out = []
        for s in reversed(self.orders):
            flat, k = divmod(flat, s)
            out.append(k)
        return tuple(reversed(out))

    def dlog_vectors(self):
        """Per-component dlog arrays k_i[n] for all residues n (units only)."""
        flat = self.dlog
        units = flat >= 0
        vecs = []
        rem = np.where(units, flat, 0)
        for s in reversed(self.orders):
            vecs.append(rem % s)
            rem = rem // s
        return units, list(reversed(vecs))


@lru_cache(maxsize=128)
def _group(q):
    return CharacterGroup(q)


class DirichletCharacter:
    """A character chi mod q, identified by its exponents on the group
    generators: chi(g_i) = e(c_i / s_i)."""

    __slots__ = ("group", "exponents", "index", "_conductor", "_primitive")

    def __init__(self, group, exponents):
        self.group = group
        self.exponents = tuple(int(c) % s for c, s in zip(exponents, group.orders))
        index = 0
        for c, s in zip(self.exponents, group.orders):
            index = index * s + c
        self.index = index
        self._conductor = None
        self._primitive = None

    @property
    def modulus(self):
        return self.group.modulus

    @property
    def is_principal(self):
        return all(c == 0 for c in self.exponents)

    def __repr__(self):
        return f"DirichletCharacter(modulus={self.modulus}, index={self.index})"

    def __eq__(self, other):
        return (
            isinstance(other, DirichletCharacter)
            and self.modulus == other.modulus
            and self.exponents == other.exponents
        )

    def __hash__(self):
        return hash((self.modulus, self.exponents))

    def exponent_at(self, n):
        """Exact exponent r in [0,1) with chi(n) = e(r), or None when
        gcd(n, q) > 1."""
        q = self.modulus
        if q == 1:
            return Fraction(0)
        n = n % q
        flat = int(self.group.dlog[n])
        if flat < 0:
            return None
        ks = self.group.decompose(flat)
        r = Fraction(0)
        for c, k, s in zip(self.exponents, ks, self.group.orders):
            r += Fraction(c * k, s)
        return r % 1

    def conjugate(self):
        return DirichletCharacter(
            self.group, tuple(-c % s for c, s in zip(self.exponents, self.group.orders))
        )

    def values_period(self):
        """chi(n) for n = 0..q-1 as a complex array (vectorized)."""
        q = self.modulus
        if q == 1:
            return np.ones(1, dtype=np.complex128)
        units, kvecs = self.group.dlog_vectors()
        r = np.zeros(q, dtype=np.float64)
        for c, kv, s in zip(self.exponents, kvecs, self.group.orders):
            r += (c * kv % s) / float(s)
        vals = np.exp(2j * np.pi * r)
        vals[~units] = 0.0
        return vals

    @property
    def conductor(self):
        if self._conductor is None:
            self._conductor = self._compute_conductor()
        return self._conductor

    @property
    def is_primitive(self):
        return self.conductor == self.modulus

    def _compute_conductor(self):
        f = 1
        by_prime = {}
        for (kind, p, e, _, order), c in zip(self.group.components, self.exponents):
            by_prime.setdefault(p, []).append((kind, e, order, c))
        for p, comps in by_prime.items():
            if p != 2:
                (kind, e, order, c), = comps
                if c != 0:
                    v = 0
                    cc = c
                    while cc % p == 0:
                        cc //= p
                        v += 1
                    f *= p ** max(1, e - v)
            else:
                kinds = {kind: (e, order, c) for kind, e, order, c in comps}
                if "two4" in kinds:
                    _, _, c = kinds["two4"]
                    if c != 0:
                        f *= 4
                else:
                    e, _, c_neg = kinds["two_neg"]
                    _, _, c5 = kinds["two_five"]
                    if c5 != 0:
                        v = 0
                        cc = c5
                        while cc % 2 == 0:
                            cc //= 2
                            v += 1
                        f *= 2 ** (e - v)
                    elif c_neg != 0:
                        f *= 4
        return f


def build_character_group(q):
    """All phi(q) characters mod q; the principal character comes first."""
    if q < 1:
        raise DomainError(f"modulus must be positive, got {q}")
    group = _group(q)
    chars = []
    for flat in range(group.unit_count):
        chars.append(DirichletCharacter(group, group.decompose(flat)))
    return chars


def character(q, index):
    """Single character mod q by its index in build_character_group order."""
    group = _group(q)
    if not 0 <= index < group.unit_count:
        raise DomainError(
            f"character index {index} out of range [0, {group.unit_count}) for q={q}"
        )
    return DirichletCharacter(group, group.decompose(index))


def char_value(chi, n):
    """chi(n) as a complex number (exact 0 on non-units)."""
    r = chi.exponent_at(n)
    if r is None:
        return 0j
    return cmath.exp(2j * cmath.pi * float(r))


def conductor_and_primitive(chi):
    """The conductor f | q and the primitive character mod f inducing chi."""
    f = chi.conductor
    target = _group(f)
    q = chi.modulus
    # q_other: the part of q built from primes not dividing f; lifts below
    # stay congruent to 1 mod q_other so they remain coprime to q.
    q_other = 1
    for p, e in chi.group.factors:
        if f % p != 0:
            q_other *= p**e
    exps = []
    for (_, _, _, gen, order) in target.components:
        n = _crt_pair(gen, f, 1, q_other) if q_other > 1 else gen
        r = chi.exponent_at(n)
        if r is None:  # pragma: no cover - would mean a conductor bug
            raise RuntimeError("lift of inducing-character generator hit a non-unit")
        d = r * order
        if d.denominator != 1:  # pragma: no cover
            raise RuntimeError("inducing character exponent is not integral")
        exps.append(int(d) % order)
    return f, DirichletCharacter(target, tuple(exps))


def are_equivalent(chi1, chi2):
    """True when both characters are induced by the same primitive one."""
    f1, psi1 = conductor_and_primitive(chi1)
    f2, psi2 = conductor_and_primitive(chi2)
    return f1 == f2 and psi1 == psi2


def phi(q):
    return _group(q).unit_count
