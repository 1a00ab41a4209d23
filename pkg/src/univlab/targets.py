"""Compact rectangles in the right half-strip, and target functions on them.

Targets are either polynomials (coefficients in ascending powers) or planted
L-samples (the function s -> L(s + i*shift, chi), used to seed scans with a
known good shift). Either kind can carry a finite Euler-factor adjustment
prod_p (1 - chi(p) p^{-s}) attached by shifts.adjust_target.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import euler_product, lfunc
from .errors import DegenerateTargetError, DomainError


@dataclass(frozen=True)
class CompactRect:
    """Closed rectangle K inside {1/2 < Re(s) < 1} with its sampling grid."""

    sigma_range: tuple
    t_range: tuple
    grid: tuple = (32, 32)

    def __post_init__(self):
        s1, s2 = self.sigma_range
        t1, t2 = self.t_range
        nx, ny = self.grid
        if not 0.5 < s1 <= s2 < 1.0:
            raise DomainError(
                f"sigma_range must satisfy 1/2 < s1 <= s2 < 1, got {self.sigma_range}"
            )
        if t1 > t2:
            raise DomainError(f"t_range out of order: {self.t_range}")
        if nx < 2 or ny < 2:
            raise DomainError(f"grid must be at least 2x2, got {self.grid}")

    @property
    def sigmas(self):
        return np.linspace(self.sigma_range[0], self.sigma_range[1], self.grid[0])

    @property
    def ts(self):
        return np.linspace(self.t_range[0], self.t_range[1], self.grid[1])

    def s_flat(self):
        """Grid points sigma + i t, flattened sigma-major."""
        return (self.sigmas[:, None] + 1j * self.ts[None, :]).ravel()

    def cell_neighborhood(self, flat_index, refine=3):
        """Points of the 2-cell neighborhood of a grid point, sampled at
        `refine`-fold density; used by the sup-distance refinement pass."""
        nx, ny = self.grid
        i, j = divmod(int(flat_index), ny)
        sig, ts = self.sigmas, self.ts
        lo_s, hi_s = sig[max(i - 1, 0)], sig[min(i + 1, nx - 1)]
        lo_t, hi_t = ts[max(j - 1, 0)], ts[min(j + 1, ny - 1)]
        fine_s = np.linspace(lo_s, hi_s, 2 * refine + 1)
        fine_t = np.linspace(lo_t, hi_t, 2 * refine + 1)
        return (fine_s[:, None] + 1j * fine_t[None, :]).ravel()


class TargetFunction:
    """A non-vanishing analytic target on a CompactRect.

    kinds: 'poly' (complex coefficients, ascending), 'planted' (sampled
    s -> L(s + i*shift, chi)), 'product' (a twisted truncated Euler product
    with known angles, the planted objective of the fit engine)."""

    __slots__ = (
        "rect", "kind", "coeffs", "chi", "shift", "m_set", "twist",
        "adjustment", "_grid_cache",
    )

    def __init__(self, rect, kind, coeffs=None, chi=None, shift=None,
                 m_set=None, twist=None, adjustment=()):
        self.rect = rect
        self.kind = kind
        self.coeffs = tuple(complex(c) for c in coeffs) if coeffs is not None else None
        self.chi = chi
        self.shift = shift
        self.m_set = m_set
        self.twist = twist
        self.adjustment = tuple((int(p), complex(v)) for p, v in adjustment)
        self._grid_cache = None

    @classmethod
    def poly(cls, coeffs, rect):
        coeffs = tuple(complex(c) for c in coeffs)
        if not coeffs or all(c == 0 for c in coeffs):
            raise DegenerateTargetError("polynomial target is identically zero")
        return cls(rect, "poly", coeffs=coeffs)

    @classmethod
    def planted(cls, chi, shift, rect):
        """The sampled-L target s -> L(s + i*shift, chi)."""
        return cls(rect, "planted", chi=chi, shift=float(shift))

    @classmethod
    def product(cls, chi, m_set, twist, rect):
        """The twisted product L_M(s, (theta_p); chi) as a target."""
        return cls(rect, "product", chi=chi, m_set=m_set, twist=twist)

    def with_adjustment(self, pairs):
        return TargetFunction(
            self.rect,
            self.kind,
            coeffs=self.coeffs,
            chi=self.chi,
            shift=self.shift,
            m_set=self.m_set,
            twist=self.twist,
            adjustment=self.adjustment + tuple(pairs),
        )

    def eval_at(self, s_values):
        s = np.asarray(s_values, dtype=np.complex128)
        if self.kind == "poly":
            out = np.zeros_like(s)
            for c in reversed(self.coeffs):
                out = out * s + c
        elif self.kind == "product":
            out = np.exp(
                euler_product.log_product_on_values(s, self.chi, self.m_set, self.twist)
            )
        else:
            flat = s.ravel()
            vals = np.array(
                [lfunc.l_value(z + 1j * self.shift, self.chi) for z in flat]
            )
            out = vals.reshape(s.shape)
        for p, v in self.adjustment:
            out = out * (1.0 - v * np.exp(-s * math.log(p)))
        return out

    def values_on_grid(self):
        if self._grid_cache is None:
            if self.kind == "planted":
                # one batched evaluation instead of a scalar call per point
                base = lfunc.l_on_grid(
                    self.chi, self.rect.sigmas, self.rect.ts, [self.shift]
                )[:, 0]
                s = self.rect.s_flat()
                for p, v in self.adjustment:
                    base = base * (1.0 - v * np.exp(-s * math.log(p)))
                self._grid_cache = base
            else:
                self._grid_cache = self.eval_at(self.rect.s_flat())
        return self._grid_cache

    def nonvanishing_margin(self):
        return float(np.min(np.abs(self.values_on_grid())))

    def require_nonvanishing(self):
        m = self.nonvanishing_margin()
        if m <= 0.0:
            raise DegenerateTargetError("target vanishes on the sampling grid")
        return m

    def describe(self):
        if self.kind == "poly":
            head = {"kind": "poly", "coeffs": [[c.real, c.imag] for c in self.coeffs]}
        elif self.kind == "product":
            head = {
                "kind": "product",
                "modulus": self.chi.modulus,
                "char_index": self.chi.index,
                "primes": list(self.m_set.primes),
            }
        else:
            head = {
                "kind": "planted",
                "modulus": self.chi.modulus,
                "char_index": self.chi.index,
                "shift": self.shift,
            }
        if self.adjustment:
            head["adjustment_primes"] = [p for p, _ in self.adjustment]
        return head
