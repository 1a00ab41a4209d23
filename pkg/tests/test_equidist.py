"""Weyl sums against closed forms, exact pathological sums, star
discrepancy, and the report plumbing."""

import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from univlab.equidist import (
    SequenceSpec,
    discrepancy_star_1d,
    harmonics_box,
    hypothesis_check,
    phase_coefficient,
    ud_report,
    weyl_integral_continuous,
    weyl_sum_discrete,
)
from univlab.errors import DomainError
from univlab.shifts import ExactAlpha, ShiftFamily


def gen_fam(alpha, a, b, label):
    return ShiftFamily(ExactAlpha.generic(alpha), a, b, label)


def test_phase_coefficient_rationality():
    f = ShiftFamily(ExactAlpha.exact(1, 1, 2), 2.0, 0.0, "p")
    assert phase_coefficient(f, 2) == Fraction(1)
    assert isinstance(phase_coefficient(f, 3), float)
    f4 = ShiftFamily(ExactAlpha.exact(1, 1, 4), 1.0, 0.0, "r4")
    assert phase_coefficient(f4, 2) == Fraction(1, 2)
    finv = ShiftFamily(ExactAlpha.exact(1, 1, 1, 8), 1.0, 0.0, "inv")
    assert phase_coefficient(finv, 2) == Fraction(1, -3)
    f12 = ShiftFamily(ExactAlpha.exact(1, 1, 12), 1.0, 0.0, "r12")
    assert isinstance(phase_coefficient(f12, 2), float)


def test_weyl_geometric_closed_form():
    """omega(k) = k*sqrt(2): compare against the geometric series."""
    beta = math.sqrt(2.0)
    fam = gen_fam(2 * math.pi * beta / math.log(2), 1.0, 0.0, "s2")
    spec = SequenceSpec(((fam, 2),))
    n = 10**4
    s = weyl_sum_discrete(spec, [1], n)
    z = np.exp(2j * np.pi * beta)
    closed = z**2 * (z ** (n - 1) - 1) / (z - 1) / (n - 1)
    assert abs(s - closed) < 1e-6
    assert abs(s) < 3e-3


def test_weyl_half_integer_exact():
    fam = ShiftFamily(ExactAlpha.exact(1, 2, 2), 1.0, 0.0, "half")  # coeff 1/2
    spec = SequenceSpec(((fam, 2),))
    assert weyl_sum_discrete(spec, [2], 1000) == 1.0 + 0j  # e(k) = 1 exactly
    # h=1: alternating signs cancel over an even number of terms
    assert abs(weyl_sum_discrete(spec, [1], 1001)) < 1e-15


def test_weyl_pathological_exact_one():
    fam = ShiftFamily(ExactAlpha.exact(1, 1, 2), 2.0, 0.0, "path")
    spec = SequenceSpec(((fam, 2),))
    s = weyl_sum_discrete(spec, [1], 10**5)
    assert s == 1.0 + 0j  # integer phases, exactly


def test_weyl_rejects_zero_harmonic():
    fam = gen_fam(1.0, 0.5, 0.0, "f")
    spec = SequenceSpec(((fam, 2),))
    with pytest.raises(DomainError):
        weyl_sum_discrete(spec, [0], 100)
    with pytest.raises(DomainError):
        weyl_sum_discrete(spec, [1, 1], 100)  # dimension mismatch


def test_weyl_modulus_bounded(rng):
    for _ in range(10):
        fam = gen_fam(1 + rng.random(), rng.random() * 2, rng.random() - 0.5, "f")
        spec = SequenceSpec(((fam, 2), (fam, 3)))
        h = [int(rng.integers(-3, 4)), int(rng.integers(-3, 4))]
        if not any(h):
            h[0] = 1
        assert abs(weyl_sum_discrete(spec, h, 3000)) <= 1.0 + 1e-12


def test_continuous_closed_form():
    c = 0.3
    fam = gen_fam(2 * math.pi * c / math.log(2), 1.0, 0.0, "lin")
    spec = SequenceSpec(((fam, 2),), mode="continuous")
    res = weyl_integral_continuous(spec, [1], 1000.0, 0.05)
    t = 1000.0
    closed = (np.exp(2j * np.pi * c * t) - np.exp(2j * np.pi * c * 2)) / (
        2j * np.pi * c
    ) / (t - 2)
    assert abs(res.value - closed) < 1e-6
    assert res.error_estimate < 1e-6


def test_continuous_zero_phase_returns_one():
    fam = gen_fam(1.0, 1.0, 0.0, "lin")
    spec = SequenceSpec(((fam, 2), (fam, 2)), mode="continuous")
    res = weyl_integral_continuous(spec, [1, -1], 100.0, 0.05)
    assert res.value == 1.0 + 0j


@pytest.mark.slow
def test_continuous_sqrt_decay():
    fam = gen_fam(1.0, 0.5, 0.0, "sq")
    spec = SequenceSpec(((fam, 2),), mode="continuous")
    res = weyl_integral_continuous(spec, [1], 10**5, 0.1)
    assert abs(res.value) < 0.02


def test_discrepancy_examples():
    n = 1000
    assert discrepancy_star_1d(np.arange(n) / n) == pytest.approx(1.0 / n, abs=1e-15)
    assert discrepancy_star_1d([0.5] * 10) == pytest.approx(0.5, abs=1e-15)
    phi_ratio = (1 + math.sqrt(5)) / 2
    pts = (np.arange(1, 1001) * phi_ratio) % 1.0
    assert discrepancy_star_1d(pts) < 0.01


def test_discrepancy_bounds_and_permutation(rng):
    for _ in range(20):
        n = int(rng.integers(2, 200))
        pts = rng.random(n)
        d = discrepancy_star_1d(pts)
        assert 1.0 / (2 * n) <= d <= 1.0
        perm = rng.permutation(pts)
        assert discrepancy_star_1d(perm) == d


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(min_value=0.0, max_value=0.999999), min_size=1, max_size=50))
def test_discrepancy_permutation_property(pts):
    d1 = discrepancy_star_1d(pts)
    d2 = discrepancy_star_1d(list(reversed(pts)))
    assert d1 == d2
    assert 1.0 / (2 * len(pts)) - 1e-12 <= d1 <= 1.0


def test_koksma_cross_check():
    """1-component spec: D*_N < 0.01 forces |S_N(1)| < 2 pi 0.01 + 2/N."""
    fam = gen_fam(1.0, 0.5, 0.0, "f")
    spec = SequenceSpec(((fam, 2),))
    n = 10**4
    from univlab._backend import kernels

    ks = np.arange(2, n + 1, dtype=np.float64)
    coeff = float(phase_coefficient(fam, 2))
    pts = kernels.phase_eval(
        np.array([coeff]), np.array([fam.a]), np.array([fam.b]), ks
    ) % 1.0
    d = discrepancy_star_1d(pts)
    s = abs(weyl_sum_discrete(spec, [1], n))
    if d < 0.01:
        assert s < 2 * math.pi * 0.01 + 2.0 / n


def test_ud_report_pass_and_fail():
    fam = gen_fam(1.0, 0.5, 0.0, "f1")
    spec = SequenceSpec(((fam, 2), (fam, 3)))
    rep = ud_report(spec, harmonics_box(2, 2), 10**5)
    assert rep.verdict
    assert all(s <= 1.0 + 1e-12 for s, _ in rep.weyl.values())

    pathological = SequenceSpec(
        ((ShiftFamily(ExactAlpha.exact(1, 1, 2), 2.0, 0.0, "p"), 2),)
    )
    rep2 = ud_report(pathological, [[1]], 10**4)
    assert not rep2.verdict
    offending = [h for h, (s, _) in rep2.weyl.items() if s >= rep2.threshold]
    assert (1,) in offending

    with pytest.raises(DomainError):
        ud_report(spec, [], 1000)


def test_ud_report_doubling_stability(rng):
    """Doubling N on a passing spec at most doubles the worst Weyl sum."""
    seeds = rng.integers(1, 10**6, size=5)
    for seed in seeds:
        r = np.random.default_rng(int(seed))
        fam = gen_fam(0.5 + r.random(), 0.3 + 0.4 * r.random(), 0.0, "f")
        spec = SequenceSpec(((fam, 2),))
        n = 2 * 10**4
        rep1 = ud_report(spec, [[1], [2]], n)
        if not rep1.verdict:
            continue
        rep2 = ud_report(spec, [[1], [2]], 2 * n)
        worst1 = max(s for s, _ in rep1.weyl.values())
        worst2 = max(s for s, _ in rep2.weyl.values())
        assert worst2 <= 2.0 * worst1 + 1e-9


def test_ud_report_discrepancy_only_for_1d():
    fam = gen_fam(1.0, 0.5, 0.0, "f")
    rep = ud_report(SequenceSpec(((fam, 2),)), [[1]], 10**4)
    assert rep.discrepancy_1d is not None
    rep2 = ud_report(SequenceSpec(((fam, 2), (fam, 3))), [[1, 0]], 10**4)
    assert rep2.discrepancy_1d is None


def test_hypothesis_check_paths():
    lin2 = ShiftFamily(ExactAlpha.exact(1, 1, 2), 1.0, 0.0, "lin2")
    hc = hypothesis_check(SequenceSpec(((lin2, 2),)))
    assert hc.applicable and hc.lin_ind_with_1_violated and not hc.lin_ind_violated

    # support {2,3} not fully among components: no active relation
    lin12 = ShiftFamily(ExactAlpha.exact(1, 1, 12), 1.0, 0.0, "lin12")
    hc = hypothesis_check(SequenceSpec(((lin12, 2),)))
    assert hc.applicable and not hc.lin_ind_with_1_violated

    hc = hypothesis_check(SequenceSpec(((lin12, 2), (lin12, 3))))
    assert hc.lin_ind_with_1_violated

    lin3 = ShiftFamily(ExactAlpha.exact(1, 1, 3), 1.0, 0.0, "lin3")
    hc = hypothesis_check(SequenceSpec(((lin2, 2), (lin3, 3))))
    assert hc.lin_ind_violated  # two active rational relations combine

    generic = gen_fam(1.0, 1.0, 0.0, "g")
    hc = hypothesis_check(SequenceSpec(((generic, 2),)))
    assert not hc.applicable


def test_exclusions_validated():
    fam = ShiftFamily(ExactAlpha.exact(1, 1, 2), 1.0, 0.0, "p")
    with pytest.raises(DomainError):
        SequenceSpec(((fam, 2),), exclusions={"p": (2,)})
    SequenceSpec(((fam, 3),), exclusions={"p": (2,)})  # fine: 2 not a component
