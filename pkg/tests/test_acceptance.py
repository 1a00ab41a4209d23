"""Acceptance gate: every criterion at its stated tolerance, one pass/fail
line per criterion (run with -s to see them as they complete).

Criterion 7's baseline scan covers tau in [2, 1e4] at step 0.05 and takes a
few minutes; everything else is seconds. `pytest tests/test_acceptance.py
--skip-slow` runs all but that scan.
"""

import math
import time
from fractions import Fraction

import numpy as np
import pytest

from univlab.approx import ScanJob, fit_finite_product, scan_continuous, scan_discrete, sup_distance
from univlab.characters import (
    are_equivalent,
    build_character_group,
    char_value,
    character,
    conductor_and_primitive,
    factorize,
)
from univlab.equidist import SequenceSpec, discrepancy_star_1d, weyl_sum_discrete
from univlab.euler_product import PrimeSet, Twist, shifted_product, truncated_euler_product
from univlab.lfunc import l_value
from univlab.moments import carlson_tail, empirical_mean_square_vertical, gallagher_check
from univlab.shifts import (
    ExactAlpha,
    ShiftFamily,
    classify_family_set,
    minimal_rational_exponent,
    pathology_summary,
)
from univlab.targets import CompactRect, TargetFunction

CATALAN = 0.915965594177219015


def _report(num, name, t0):
    print(f"\n[acceptance] criterion {num} ({name}): PASS ({time.time() - t0:.1f}s)")


# -- criterion 1 -------------------------------------------------------------

def test_criterion_1_character_algebra():
    t0 = time.time()
    # orthogonality and complete multiplicativity, exhaustive q <= 50
    for q in range(1, 51):
        chars = build_character_group(q)
        vmat = np.vstack([c.values_period() for c in chars])  # (phi, q)
        # multiplicativity chi(mn) = chi(m) chi(n) for all pairs
        mn = (np.arange(q)[:, None] * np.arange(q)[None, :]) % q
        for row in vmat:
            assert np.max(np.abs(row[mn] - row[:, None] * row[None, :])) < 1e-12
        # orthogonality (1/phi) sum_chi chi(m) conj(chi(n))
        gram = vmat.T @ np.conj(vmat) / len(chars)
        units = np.array([math.gcd(n, q) == 1 for n in range(q)])
        expect = np.diag(units.astype(float))
        assert np.max(np.abs(gram - expect)) < 1e-12, q

    # are_equivalent against the brute-force conductor oracle, q <= 24
    def oracle_key(chi):
        q = chi.modulus
        for d in range(1, q + 1):
            if q % d:
                continue
            if all(
                chi.exponent_at(n) == 0
                for n in range(1, q + 1)
                if math.gcd(n, q) == 1 and n % d == 1 % d
            ):
                table = tuple(
                    chi.exponent_at(n) for n in range(1, 2 * d + 1)
                    if math.gcd(n, chi.modulus) == 1
                )
                return d, table

    pool = []
    for q in range(1, 25):
        pool.extend(build_character_group(q))
    keys = []
    for chi in pool:
        f, psi = conductor_and_primitive(chi)
        d, _ = oracle_key(chi)
        assert f == d, (chi.modulus, chi.index)
        keys.append((f, psi.exponents))
    for i in range(len(pool)):
        for j in range(len(pool)):
            assert are_equivalent(pool[i], pool[j]) == (keys[i] == keys[j])
    assert time.time() - t0 < 10.0
    _report(1, "character algebra", t0)


# -- criterion 2 -------------------------------------------------------------

def test_criterion_2_l_values():
    t0 = time.time()
    chi4 = character(4, 1)
    chi1 = character(1, 0)
    assert abs(l_value(1.0, chi4) - math.pi / 4) < 1e-8
    assert abs(l_value(2.0, chi4) - CATALAN) < 1e-8
    assert abs(l_value(2.0, chi1) - math.pi**2 / 6) < 1e-10

    # equivalent characters differ by a finite Euler product
    rng = np.random.default_rng(42)
    cases = []
    for q in [6, 12, 15, 16, 24]:
        for chi in build_character_group(q):
            f, psi = conductor_and_primitive(chi)
            if f < q:
                cases.append((q, chi, f, psi))
    checked = 0
    while checked < 20:
        q, chi, f, psi = cases[checked % len(cases)]
        s = complex(0.65 + 0.3 * rng.random(), 40.0 * (rng.random() - 0.5))
        if chi.is_principal and abs(s - 1.0) < 0.2:
            continue
        factor = 1.0 + 0j
        for p, _ in factorize(q):
            if f % p:
                factor *= 1.0 - char_value(psi, p) * p ** (-s)
        assert abs(l_value(s, chi) - l_value(s, psi) * factor) < 1e-8
        checked += 1
    assert time.time() - t0 < 30.0
    _report(2, "L-values", t0)


# -- criterion 3 -------------------------------------------------------------

def test_criterion_3_euler_product():
    t0 = time.time()
    chi1 = character(1, 0)
    v = truncated_euler_product(2.0, chi1, PrimeSet.up_to(10**4))
    assert abs(v - math.pi**2 / 6) < 1e-4

    rng = np.random.default_rng(3)
    m = PrimeSet.up_to(100)
    chi4 = character(4, 1)
    for k in range(100):
        chi = chi1 if k % 2 else chi4
        s = complex(0.6 + rng.random(), 30 * (rng.random() - 0.5))
        tau = 300 * (rng.random() - 0.5)
        theta = Twist({p: rng.random() for p in m})
        lhs = shifted_product(s, tau, chi, m, theta)
        rhs = truncated_euler_product(s + 1j * tau, chi, m, theta)
        assert abs(lhs - rhs) <= 1e-12 * abs(rhs)
    assert time.time() - t0 < 20.0
    _report(3, "euler product", t0)


# -- criterion 4 -------------------------------------------------------------

def _int_nth_root(n, k):
    if k == 1 or n in (0, 1):
        return n
    hi = 1
    while hi**k < n:
        hi *= 2
    lo = hi // 2
    while lo < hi:
        mid = (lo + hi) // 2
        if mid**k < n:
            lo = mid + 1
        else:
            hi = mid
    return lo if lo**k == n else None


def _factor_map(n):
    out = {}
    d = 2
    while d * d <= n:
        while n % d == 0:
            out[d] = out.get(d, 0) + 1
            n //= d
        d += 1
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def test_criterion_4_pathology_arithmetic():
    t0 = time.time()

    def oracle(alpha):
        """Brute force: m = 1..100 rationality testing plus factorization."""
        for m in range(1, 101):
            e = Fraction(m * alpha.v, alpha.u)
            p_, q_ = abs(e.numerator), e.denominator
            rn = _int_nth_root(alpha.r.numerator**p_, q_)
            rd = _int_nth_root(alpha.r.denominator**p_, q_)
            if rn is None or rd is None:
                continue
            if e < 0:
                rn, rd = rd, rn
            exps = _factor_map(rn)
            for pp, ee in _factor_map(rd).items():
                exps[pp] = exps.get(pp, 0) - ee
            return m, {p: k for p, k in exps.items() if k}
        return None, None

    cases = []
    for u in [1, 2, 3, 4, 5, 6, -1, -3]:
        for v in [1, 2, 3]:
            for r in [(2, 1), (12, 1), (3, 2), (8, 1), (100, 1), (27, 8), (5, 1)]:
                cases.append(ExactAlpha.exact(u, v, *r))
    assert len(cases) >= 50
    for alpha in cases:
        m_ref, exps_ref = oracle(alpha)
        assert minimal_rational_exponent(alpha) == m_ref
        pd = pathology_summary(alpha)
        assert pd.m_star == m_ref
        assert pd.exponents == exps_ref  # exact integer arithmetic: equality
        assert pd.support == tuple(sorted(exps_ref))
        assert pd.p_star == min(exps_ref)
        assert pd.k_pstar == exps_ref[pd.p_star]

    # the named spot checks
    pd = pathology_summary(ExactAlpha.exact(1, 1, 2))
    assert (pd.m_star, pd.support) == (1, (2,))
    pd = pathology_summary(ExactAlpha.exact(2, 1, 12))
    assert (pd.m_star, pd.support, pd.p_star, pd.k_pstar) == (2, (2, 3), 2, 2)
    from univlab.shifts import q_star

    assert q_star([pd]) == 2
    assert time.time() - t0 < 5.0
    _report(4, "pathology arithmetic", t0)


# -- criterion 5 -------------------------------------------------------------

def test_criterion_5_equidistribution():
    t0 = time.time()
    n = 10**5
    # geometric closed form for omega(k) = k*beta
    for beta in [math.sqrt(2.0), math.pi / 3.0]:
        fam = ShiftFamily(
            ExactAlpha.generic(2 * math.pi * beta / math.log(2)), 1.0, 0.0, "g"
        )
        spec = SequenceSpec(((fam, 2),))
        s = weyl_sum_discrete(spec, [1], n)
        z = np.exp(2j * np.pi * beta)
        closed = z**2 * (z ** (n - 1) - 1) / (z - 1) / (n - 1)
        assert abs(s - closed) < 1e-6

    # pathological spec: S = 1 exactly
    famp = ShiftFamily(ExactAlpha.exact(1, 1, 2), 2.0, 0.0, "p")
    assert weyl_sum_discrete(SequenceSpec(((famp, 2),)), [1], n) == 1.0 + 0j

    # discrepancy of {k/N} equals 1/N; exactly so for dyadic N, where the
    # points k/N are themselves exact floats
    for nn in [16, 1024]:
        assert discrepancy_star_1d(np.arange(nn) / nn) == 1.0 / nn
    for nn in [10, 1000]:
        d = discrepancy_star_1d(np.arange(nn) / nn)
        assert abs(d - 1.0 / nn) < 1e-15

    # 20-case admissibility truth table
    cases = [
        (0.0, 0.0, False), (0.0, -1.0, True), (0.0, 0.5, False), (0.0, 2.0, True),
        (1.0, 0.0, True), (1.0, 0.5, False), (1.0, 1.0, False), (1.0, 1.5, True),
        (1.0, -3.0, True), (2.0, 0.0, True), (2.0, 1.0, False), (2.0, 2.5, True),
        (3.0, 0.25, False), (0.5, 0.0, True), (0.5, 0.5, True), (0.5, 1.0, True),
        (1.5, -2.0, True), (2.5, 7.0, True), (math.pi, 1.0, True), (4.0, 0.0, True),
    ]
    assert len(cases) == 20
    for a, b, expect in cases:
        fam = ShiftFamily(ExactAlpha.generic(1.0), a, b, "z")
        assert classify_family_set([fam]).accepted == expect, (a, b)
    assert time.time() - t0 < 60.0
    _report(5, "equidistribution", t0)


# -- criterion 6 -------------------------------------------------------------

def test_criterion_6_moments():
    t0 = time.time()
    chi1 = character(1, 0)
    rng = np.random.default_rng(6)
    for trial in range(200):
        degree = int(rng.integers(1, 21))
        t_len = float(rng.uniform(5.0, 40.0))
        start = float(rng.uniform(0.0, 3.0))
        coeff = rng.normal(size=2 * degree + 1) + 1j * rng.normal(size=2 * degree + 1)
        freqs = np.arange(-degree, degree + 1) * (2 * np.pi / t_len)
        xs = np.linspace(start, start + t_len, 6001)
        ph = np.exp(1j * np.outer(xs, freqs))
        fs, dfs = ph @ coeff, ph @ (1j * freqs * coeff)
        delta = float(rng.uniform(0.05, min(1.0, t_len / 4)))
        pts = np.linspace(start + delta / 2, start + t_len - delta / 2,
                          int(rng.integers(2, 40)))
        res = gallagher_check(xs, fs, pts, delta, dfs)
        assert res.lhs <= res.rhs * (1 + 1e-6), trial

    ct = carlson_tail(1.0, chi1, 2, 10**6)
    assert abs(ct.value - (math.pi**2 / 6 - 1)) <= ct.remainder_bound

    rep = empirical_mean_square_vertical(2.0 + 0j, chi1, 100, 500.0, 0.25)
    assert 0.5 <= rep.ratio <= 2.0
    assert time.time() - t0 < 300.0
    _report(6, "moments", t0)


# -- criterion 7 -------------------------------------------------------------

def test_criterion_7_planted_recovery_and_fit():
    t0 = time.time()
    chi1 = character(1, 0)
    rect = CompactRect((0.75, 0.85), (-0.1, 0.1), (16, 16))
    ident = ShiftFamily(ExactAlpha.generic(1.0), 1.0, 0.0, "id")

    tau0 = 50.0
    tgt = TargetFunction.planted(chi1, tau0, rect)
    out = scan_continuous([ScanJob(ident, chi1, tgt)], rect, 1e-3, 100.0, 0.5)
    assert tau0 in out.report.hits
    out2 = scan_continuous([ScanJob(ident, chi1, tgt)], rect, 2e-3, 100.0, 0.5)
    assert out2.report.density >= out.report.density  # monotone in epsilon

    k0 = 37
    tgtd = TargetFunction.planted(chi1, float(k0), rect)
    outd = scan_discrete([ScanJob(ident, chi1, tgtd)], rect, 1e-3, 60)
    assert k0 in outd.report.hits
    outd2 = scan_discrete([ScanJob(ident, chi1, tgtd)], rect, 2e-3, 60)
    assert outd2.report.density >= outd.report.density

    rng = np.random.default_rng(7)
    m_set = PrimeSet.up_to(31)
    theta = Twist({p: float(rng.random()) for p in m_set})
    rect_f = CompactRect((0.8, 0.9), (-0.05, 0.05), (12, 12))
    planted = TargetFunction.product(chi1, m_set, theta, rect_f)
    res = fit_finite_product(chi1, m_set, rect_f, planted, sweeps=50)
    assert res.distance < 1e-4
    _report(7, "planted recovery + fit (fast half)", t0)


@pytest.mark.slow
def test_criterion_7_baseline_scan():
    t0 = time.time()
    chi1 = character(1, 0)
    rect = CompactRect((0.75, 0.85), (-0.1, 0.1), (32, 32))
    ident = ShiftFamily(ExactAlpha.generic(1.0), 1.0, 0.0, "id")
    fone = TargetFunction.poly([1.0], rect)
    jobs = [ScanJob(ident, chi1, fone)]

    out = scan_continuous(jobs, rect, 0.4, 10000.0, 0.05, workers=2)
    assert out.report.density > 0.0
    assert out.report.n_points == 199961
    # every reported hit re-verifies through sup_distance
    for tau in out.report.hits[:25]:
        assert sup_distance(chi1, float(tau), rect, fone) < 0.4

    # replay determinism across worker counts, on the head of the range
    # (identical tau grid and chunk boundaries)
    head1 = scan_continuous(jobs, rect, 0.4, 500.0, 0.05, workers=1)
    head3 = scan_continuous(jobs, rect, 0.4, 500.0, 0.05, workers=3)
    assert head1.report == head3.report
    assert np.array_equal(head1.max_distance, head3.max_distance)
    # and the head agrees with the full run over the shared grid points
    n_head = head1.report.n_points
    full_head_hits = tuple(t for t in out.report.hits if t <= head1.shifts_axis[-1])
    assert full_head_hits == head1.report.hits

    assert time.time() - t0 < 900.0
    _report(7, "baseline exploratory scan", t0)


# -- criterion 8 -------------------------------------------------------------

def test_criterion_8_cli_replay(tmp_path, monkeypatch, capsys):
    t0 = time.time()
    from univlab.cli import main

    monkeypatch.chdir(tmp_path)
    monkeypatch.setenv("UNIVLAB_LOG", str(tmp_path / "runs.jsonl"))
    (tmp_path / "lab.ini").write_text(
        """
[scan]
mode = continuous
epsilon = 0.5
t_max = 60
step = 0.5
sigma_range = 0.75 0.85
t_range = -0.1 0.1
grid = 10 10
workers = 2
chunk = 32
families = alpha=1.0 a=1 b=0 label=lin
characters = 1:0
targets = planted 30.0

[ud-test]
mode = discrete
n_max = 5000
max_abs_harmonic = 1
families = alpha=1.0 a=0.5 b=0 label=f primes=2,3

[moments]
sigma = 2.0
y = 100
t_max = 120
step = 0.25
x = 200
family = alpha=1.0 a=0.5 b=0 label=g
delta = 0.5
seed = 3
degree = 6
t_len = 20
nodes = 6001
npoints = 10

[fit]
prime_limit = 13
sigma_range = 0.6 0.9
t_range = -1 1
grid = 6 8
target = product 11 13
sweeps = 15
"""
    )
    cmds = [
        ["characters", "--modulus", "8"],
        ["lvalue", "--sigma", "0.8", "--t", "14.0"],
        ["pathology", "--alpha", "2pi*2/(1*log(12))"],
        ["ud-test", "--config", "lab.ini"],
        ["moments", "gallagher", "--config", "lab.ini"],
        ["scan", "--config", "lab.ini"],
        ["fit", "--config", "lab.ini"],
    ]
    for c in cmds:
        assert main(c) == 0, c
    for idx in range(len(cmds)):
        assert main(["replay", "--index", str(idx)]) == 0, idx
    capsys.readouterr()

    # digest mismatch detection
    cfg = tmp_path / "lab.ini"
    cfg.write_text(cfg.read_text().replace("epsilon = 0.5", "epsilon = 0.499"))
    assert main(["replay", "--index", "5"]) == 4
    capsys.readouterr()
    _report(8, "CLI replay plumbing", t0)
