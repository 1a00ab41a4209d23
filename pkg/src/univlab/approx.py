"""Universality engine: sup-norm distances on compact rectangles,
constructive twisted-product fits, and continuous/discrete shift scans.

Scan layout: the shift grid is cut into fixed-size chunks (the chunk size is
configuration, never derived from the worker count), each chunk is one
batched grid evaluation, and results are written by chunk index. Reports are
therefore identical for any worker count, which is what `replay` relies on.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .characters import char_value
from .errors import DomainError, HeightCapError
from .euler_product import Twist
from .lfunc import HEIGHT_CAP, GridEvaluator
from .shifts import adjust_target, classify_family_set, eval_shift, pathology_summary, q_star
from .targets import TargetFunction

TWO_PI = 2.0 * math.pi


def _check_height(max_abs_shift, rect):
    reach = float(max_abs_shift) + float(np.max(np.abs(rect.ts)))
    if reach > HEIGHT_CAP:
        raise HeightCapError(
            f"scan reaches height {reach:.4g}, beyond the cap {HEIGHT_CAP:.0e}"
        )


def _strip_factor(s_values, strip):
    """prod_p (1 - chi(p) p^{-s}) on an array of points, for the pathology
    pass that removes the support-A Euler factors from L."""
    out = np.ones_like(s_values)
    for p, v in strip:
        out = out * (1.0 - v * np.exp(-s_values * math.log(p)))
    return out


def sup_distance(chi, shift, rect, target, abs_tol=1e-9, refine=3, strip=()):
    """max_{s in K} |L(s + i shift) - f(s)| over the sampling grid, sharpened
    by a refine-fold subdivision of the cells around the argmax."""
    target.require_nonvanishing()
    _check_height(abs(shift), rect)
    ev = GridEvaluator(chi, rect.sigmas, rect.ts, abs(shift), abs_tol=abs_tol)
    lv = ev.values(np.array([shift]))[:, 0]
    s_flat = rect.s_flat()
    if strip:
        lv = lv * _strip_factor(s_flat + 1j * shift, strip)
    d = np.abs(lv - target.values_on_grid())
    g = int(np.argmax(d))
    best = float(d[g])
    if refine > 1:
        pts = rect.cell_neighborhood(g, refine)
        sig = np.unique(pts.real)
        tss = np.unique(pts.imag)
        ev_loc = GridEvaluator(chi, sig, tss, abs(shift), abs_tol=abs_tol)
        lloc = ev_loc.values(np.array([shift]))[:, 0]
        ploc = (sig[:, None] + 1j * tss[None, :]).ravel()
        if strip:
            lloc = lloc * _strip_factor(ploc + 1j * shift, strip)
        dloc = np.abs(lloc - target.eval_at(ploc))
        best = max(best, float(np.max(dloc)))
    return best


@dataclass(frozen=True)
class FitResult:
    twist: Twist
    distance: float
    sweeps: int
    stagnated: bool
    history: tuple  # objective after each sweep

    def to_json(self):
        return {
            "theta": {str(p): v for p, v in sorted(self.twist.theta.items())},
            "distance": self.distance,
            "sweeps": self.sweeps,
            "stagnated": self.stagnated,
            "history": list(self.history),
        }


def _golden_min(fn, lo, hi, iters):
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    a, b = lo, hi
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = fn(c), fn(d)
    for _ in range(iters):
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = fn(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = fn(d)
    return (c, fc) if fc <= fd else (d, fd)


def _initial_thetas(chi, primes, target):
    """Seed angles from a Dirichlet-coefficient extraction of log f on a
    high-sigma line, where the prime basis p^{-s} is Fourier-like and well
    conditioned. Pure heuristic: any failure (targets that vanish off K,
    wildly non-unit coefficients) falls back to the zero start."""
    try:
        sig0 = 6.0
        ts = np.arange(0.0, 120.0, 0.05)
        line_s = sig0 + 1j * ts
        fl = target.eval_at(line_s)
        if not np.all(np.isfinite(fl)) or np.min(np.abs(fl)) < 1e-12:
            return [0.0] * len(primes)
        resid = np.log(fl)
        if np.max(np.abs(resid)) > 1.0:
            return [0.0] * len(primes)
        basis = np.column_stack([np.exp(-line_s * math.log(p)) for p in primes])
        coef = np.zeros(len(primes), dtype=np.complex128)
        for _ in range(4):
            higher = np.zeros_like(line_s)
            for c, p in zip(coef, primes):
                w = c * np.exp(-line_s * math.log(p))
                higher += -np.log(1.0 - w) - w
            coef, *_ = np.linalg.lstsq(basis, resid - higher, rcond=None)
        out = []
        for c, p in zip(coef, primes):
            cp = char_value(chi, p)
            if cp != 0 and 0.2 <= abs(c) <= 2.0:
                out.append((-np.angle(c / cp) / (2.0 * np.pi)) % 1.0)
            else:
                out.append(0.0)
        return out
    except Exception:
        return [0.0] * len(primes)


def fit_finite_product(chi, m_set, rect, target, sweeps=50, coarse=24,
                       golden_iters=32):
    """Coordinate descent over the twist angles theta_p in [0, 1),
    primes in increasing order, minimizing the sup-grid distance
    |L_M(s, (theta_p)) - f(s)|.

    Angles start from the high-sigma extraction heuristic (the sup
    objective has many local optima and a cold start jams). Each coordinate
    then gets a coarse circular scan followed by golden-section refinement
    of the best bracket; a move is kept only when it strictly improves the
    objective, so the per-sweep history is non-increasing. Stagnation (a
    sweep with no improvement) stops early and is flagged, not raised."""
    if len(m_set) > 500:
        raise DomainError("fit supports at most 500 primes")
    target.require_nonvanishing()
    s_flat = rect.s_flat()
    fv = target.values_on_grid()
    primes = list(m_set)
    base_w = [
        char_value(chi, p) * np.exp(-s_flat * math.log(p)) for p in primes
    ]

    def factor_log(i, theta):
        return -np.log(1.0 - base_w[i] * np.exp(-2j * np.pi * theta))

    thetas = _initial_thetas(chi, primes, target)
    log_z = np.zeros_like(s_flat)
    for i in range(len(primes)):
        log_z = log_z + factor_log(i, thetas[i])

    def objective(lz):
        return float(np.max(np.abs(np.exp(lz) - fv)))

    current = objective(log_z)
    history = []
    stagnated = False
    sweeps_done = 0
    for _ in range(sweeps):
        sweeps_done += 1
        improved = False
        for i in range(len(primes)):
            base = log_z - factor_log(i, thetas[i])

            def line(theta):
                return objective(base + factor_log(i, theta % 1.0))

            grid = [(k / coarse, line(k / coarse)) for k in range(coarse)]
            grid.append((thetas[i], current))
            t0, f0 = min(grid, key=lambda kv: kv[1])
            t_best, f_best = _golden_min(
                line, t0 - 1.0 / coarse, t0 + 1.0 / coarse, golden_iters
            )
            if f0 < f_best:
                t_best, f_best = t0, f0
            if f_best < current:
                thetas[i] = t_best % 1.0
                log_z = base + factor_log(i, thetas[i])
                current = f_best
                improved = True
        # rebuild the accumulated log to clear add/subtract drift
        log_z = np.zeros_like(s_flat)
        for i in range(len(primes)):
            log_z = log_z + factor_log(i, thetas[i])
        current = objective(log_z)
        if history:
            assert current <= history[-1] + 1e-12, "objective increased"
        history.append(current)
        if not improved:
            stagnated = True
            break
    return FitResult(
        twist=Twist(dict(zip(primes, thetas))),
        distance=current,
        sweeps=sweeps_done,
        stagnated=stagnated,
        history=tuple(history),
    )


@dataclass(frozen=True)
class ScanJob:
    """One (shift family, character, target) line of a joint scan."""

    family: object
    chi: object
    target: TargetFunction


@dataclass(frozen=True)
class ScanReport:
    mode: str
    epsilon: float
    range_end: float
    step: float
    n_points: int
    hits: tuple
    hit_measure: float
    density: float
    per_family: dict  # label -> {"best": float, "worst": float}
    pathology: dict | None = None

    def to_json(self):
        out = {
            "mode": self.mode,
            "epsilon": self.epsilon,
            "range_end": self.range_end,
            "step": self.step,
            "n_points": self.n_points,
            "hits": list(self.hits),
            "hit_count": len(self.hits),
            "hit_measure": self.hit_measure,
            "density": self.density,
            "per_family": {k: dict(v) for k, v in self.per_family.items()},
        }
        if self.pathology is not None:
            out["pathology"] = self.pathology
        return out


@dataclass(frozen=True)
class ScanOutcome:
    """Report plus the full screening-distance curve (for CSV export) and
    the per-hit per-family confirmed distances (for JSONL export)."""

    report: ScanReport
    shifts_axis: np.ndarray
    max_distance: np.ndarray
    hit_details: tuple = ()


def _labels(jobs):
    labels = [j.family.label or f"family{i}" for i, j in enumerate(jobs)]
    if len(set(labels)) != len(labels):
        raise DomainError("family labels must be distinct")
    return labels


GRID_TOL = 1e-6  # tolerance of the single-precision screening pass
HIT_TOL = 1e-9  # tolerance of the double-precision confirmation pass


def _grid_distances(jobs, rect, shift_arrays, strips, workers, chunk,
                    grid_tol=GRID_TOL, gemm_dtype=np.complex64):
    """Per-job, per-shift grid max distance, chunked and worker-parallel.

    This is the screening pass: single-precision matrix products at a loose
    tolerance (candidates get re-verified in double precision later). Chunk
    boundaries depend only on `chunk`, so the result is independent of the
    worker count."""
    n_pts = len(shift_arrays[0])
    fvals = [j.target.values_on_grid() for j in jobs]
    evs = []
    for j, shifts in zip(jobs, shift_arrays):
        evs.append(
            GridEvaluator(
                j.chi, rect.sigmas, rect.ts,
                float(np.max(np.abs(shifts))) if n_pts else 0.0,
                abs_tol=grid_tol, em_order=30, gemm_dtype=gemm_dtype,
            )
        )
    s_flat = rect.s_flat()
    dist = np.empty((len(jobs), n_pts), dtype=np.float64)

    def run_chunk(c0):
        c1 = min(c0 + chunk, n_pts)
        for ji in range(len(jobs)):
            vals = evs[ji].values(shift_arrays[ji][c0:c1])
            if strips[ji]:
                vals = vals * _strip_factor(
                    s_flat[:, None] + 1j * shift_arrays[ji][None, c0:c1],
                    strips[ji],
                )
            np.max(
                np.abs(vals - fvals[ji][:, None]), axis=0, out=dist[ji, c0:c1]
            )

    starts = range(0, n_pts, chunk)
    if workers <= 1:
        for c0 in starts:
            run_chunk(c0)
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(run_chunk, starts))
    return dist


class _RefineContext:
    """Per-job machinery for confirming candidate hits in double precision:
    a full-grid evaluator plus per-cell caches of the local evaluator and
    local target values (dips cluster, so cells repeat a lot)."""

    def __init__(self, job, rect, strip, max_abs_shift, refine=3, cache_cap=128):
        self.job = job
        self.rect = rect
        self.strip = strip
        self.refine = refine
        self.max_abs_shift = max_abs_shift
        self.ev = GridEvaluator(
            job.chi, rect.sigmas, rect.ts, max_abs_shift, abs_tol=HIT_TOL
        )
        self.fv = job.target.values_on_grid()
        self.s_flat = rect.s_flat()
        self.cells = {}
        self.cache_cap = cache_cap

    def _cell(self, g):
        got = self.cells.get(g)
        if got is None:
            pts = self.rect.cell_neighborhood(g, self.refine)
            sig = np.unique(pts.real)
            tss = np.unique(pts.imag)
            ev = GridEvaluator(
                self.job.chi, sig, tss, self.max_abs_shift, abs_tol=HIT_TOL
            )
            floc = self.job.target.eval_at((sig[:, None] + 1j * tss[None, :]).ravel())
            if len(self.cells) >= self.cache_cap:
                self.cells.pop(next(iter(self.cells)))
            got = self.cells[g] = (ev, floc, (sig[:, None] + 1j * tss[None, :]).ravel())
        return got

    def distance(self, shift):
        """sup_distance semantics (grid max + argmax-cell refinement)."""
        lv = self.ev.values(np.array([shift]))[:, 0]
        if self.strip:
            lv = lv * _strip_factor(self.s_flat + 1j * shift, self.strip)
        d = np.abs(lv - self.fv)
        g = int(np.argmax(d))
        best = float(d[g])
        ev, floc, pts = self._cell(g)
        lloc = ev.values(np.array([shift]))[:, 0]
        if self.strip:
            lloc = lloc * _strip_factor(pts + 1j * shift, self.strip)
        return max(best, float(np.max(np.abs(lloc - floc))))


def _confirm_hits(jobs, rect, shift_arrays, strips, candidates, epsilon):
    """Grid candidates re-verified at sup_distance semantics in double
    precision (full-grid pass batched over candidates, then the refinement
    pass per survivor)."""
    if len(candidates) == 0:
        return [], []
    ctxs = [
        _RefineContext(
            j, rect, strips[ji],
            float(np.max(np.abs(shift_arrays[ji]))),
        )
        for ji, j in enumerate(jobs)
    ]
    survivors = np.asarray(candidates, dtype=np.int64)
    for ji, ctx in enumerate(ctxs):
        keep = []
        cand_shifts = shift_arrays[ji][survivors]
        for lo in range(0, survivors.size, 2048):
            hi = min(lo + 2048, survivors.size)
            vals = ctx.ev.values(cand_shifts[lo:hi])
            if ctx.strip:
                vals = vals * _strip_factor(
                    ctx.s_flat[:, None] + 1j * cand_shifts[None, lo:hi], ctx.strip
                )
            dmax = np.max(np.abs(vals - ctx.fv[:, None]), axis=0)
            keep.append(dmax < epsilon)
        survivors = survivors[np.concatenate(keep)]
        if survivors.size == 0:
            return [], []
    hits = []
    details = []
    for idx in survivors:
        ds = {}
        for ji, ctx in enumerate(ctxs):
            d = ctx.distance(float(shift_arrays[ji][idx]))
            if d >= epsilon:
                ds = None
                break
            ds[ctx.job.family.label or f"family{ji}"] = d
        if ds is not None:
            hits.append(int(idx))
            details.append(ds)
    return hits, details


def _per_family_stats(labels, dist):
    return {
        lab: {"best": float(dist[i].min()), "worst": float(dist[i].max())}
        for i, lab in enumerate(labels)
    }


def scan_continuous(jobs, rect, epsilon, t_max, step, workers=1, chunk=2048,
                    override_classification=False):
    """Sample tau = 2, 2+step, ..., T; tau is a hit when sup_distance <
    epsilon simultaneously for every job. hit_measure is the step-weighted
    Riemann count; density is hits / sampled points."""
    jobs = list(jobs)
    labels = _labels(jobs)
    verdict = classify_family_set([j.family for j in jobs])
    if not verdict.accepted and not override_classification:
        raise DomainError(
            "family set rejected: " + "; ".join(verdict.violations)
        )
    for j in jobs:
        j.target.require_nonvanishing()
    n_pts = int(math.floor((t_max - 2.0) / step)) + 1
    if n_pts < 1:
        raise DomainError("empty scan range")
    taus = 2.0 + step * np.arange(n_pts)
    shift_arrays = [eval_shift(j.family, taus) for j in jobs]
    for arr in shift_arrays:
        _check_height(float(np.max(np.abs(arr))), rect)
    strips = [() for _ in jobs]
    dist = _grid_distances(jobs, rect, shift_arrays, strips, workers, chunk)
    dmax = dist.max(axis=0)
    candidates = np.flatnonzero(dmax < epsilon + 1e-4)
    hit_idx, details = _confirm_hits(jobs, rect, shift_arrays, strips, candidates, epsilon)
    hits = tuple(float(taus[i]) for i in hit_idx)
    report = ScanReport(
        mode="continuous",
        epsilon=float(epsilon),
        range_end=float(t_max),
        step=float(step),
        n_points=n_pts,
        hits=hits,
        hit_measure=float(step * len(hits)),
        density=len(hits) / n_pts,
        per_family=_per_family_stats(labels, dist),
    )
    return ScanOutcome(report, taus, dmax, tuple(details))


def _pathology_setup(jobs, rect, epsilon):
    """Pathology records, q*, adjusted targets and strip factors for the
    discrete scan's adjusted pass."""
    records = {}
    adjusted_targets = []
    strips = []
    for i, j in enumerate(jobs):
        fam = j.family
        if fam.alpha.is_exact and fam.a_is_integer and round(fam.a) >= 1 and fam.b_is_zero:
            pd = pathology_summary(fam.alpha)
            records[fam.label or f"family{i}"] = pd
            adjusted_targets.append(adjust_target(j.target, j.chi, pd.support))
            strips.append(tuple((p, char_value(j.chi, p)) for p in pd.support))
        else:
            adjusted_targets.append(j.target)
            strips.append(())
    qs = q_star(records.values())
    return records, qs, adjusted_targets, strips


def _fractional_condition(jobs, records, shift_arrays, epsilon):
    """max over p in A_j minus {p*_j} of ||gamma_j(q* k) log p / 2pi|| <
    epsilon, vectorized over the shift grid."""
    n_pts = len(shift_arrays[0])
    ok = np.ones(n_pts, dtype=bool)
    for ji, j in enumerate(jobs):
        pd = records.get(j.family.label or f"family{ji}")
        if pd is None:
            continue
        for p in pd.support:
            if p == pd.p_star:
                continue
            vals = shift_arrays[ji] * (math.log(p) / TWO_PI)
            frac = np.abs(vals - np.round(vals))
            ok &= frac < epsilon
    return ok


def scan_discrete(jobs, rect, epsilon, n_max, workers=1, chunk=2048,
                  override_classification=False):
    """Integer-shift scan k = 2..N; density = hits/(N-1).

    When some family has integer a >= 1, b = 0 and exact alpha, the discrete
    pathology machinery activates: the report gains the (m*, A, p*, q*)
    records, and a second pass scans the shifts gamma_j(q* k) testing the
    A-stripped L against the adjusted target f* (plus the fractional-part
    condition on A minus {p*}), reporting adjusted hit counts alongside the
    raw ones."""
    jobs = list(jobs)
    labels = _labels(jobs)
    verdict = classify_family_set([j.family for j in jobs])
    if not verdict.accepted and not override_classification:
        raise DomainError(
            "family set rejected: " + "; ".join(verdict.violations)
        )
    for j in jobs:
        j.target.require_nonvanishing()
    n_max = int(n_max)
    if n_max < 2:
        raise DomainError("N must be at least 2")
    ks = np.arange(2, n_max + 1, dtype=np.float64)
    n_pts = ks.size
    shift_arrays = [eval_shift(j.family, ks) for j in jobs]
    for arr in shift_arrays:
        _check_height(float(np.max(np.abs(arr))), rect)
    plain = [() for _ in jobs]
    dist = _grid_distances(jobs, rect, shift_arrays, plain, workers, chunk)
    dmax = dist.max(axis=0)
    candidates = np.flatnonzero(dmax < epsilon + 1e-4)
    hit_idx, details = _confirm_hits(jobs, rect, shift_arrays, plain, candidates, epsilon)
    hits = tuple(int(round(ks[i])) for i in hit_idx)

    pathology_json = None
    records, qs, adj_targets, strips = _pathology_setup(jobs, rect, epsilon)
    if records:
        adj_shift_arrays = [eval_shift(j.family, qs * ks) for j in jobs]
        for arr in adj_shift_arrays:
            _check_height(float(np.max(np.abs(arr))), rect)
        adj_jobs = [
            ScanJob(j.family, j.chi, t) for j, t in zip(jobs, adj_targets)
        ]
        adist = _grid_distances(
            adj_jobs, rect, adj_shift_arrays, strips, workers, chunk
        )
        amax = adist.max(axis=0)
        frac_ok = _fractional_condition(jobs, records, adj_shift_arrays, epsilon)
        acand = np.flatnonzero((amax < epsilon + 1e-4) & frac_ok)
        ahit_idx, _ = _confirm_hits(
            adj_jobs, rect, adj_shift_arrays, strips, acand, epsilon
        )
        adjusted_hits = tuple(int(round(ks[i])) for i in ahit_idx)
        pathology_json = {
            "per_family": {lab: pd.to_json() for lab, pd in records.items()},
            "q_star": qs,
            "adjusted_hits": list(adjusted_hits),
            "adjusted_hit_count": len(adjusted_hits),
            "adjusted_density": len(adjusted_hits) / n_pts,
        }

    report = ScanReport(
        mode="discrete",
        epsilon=float(epsilon),
        range_end=float(n_max),
        step=1.0,
        n_points=n_pts,
        hits=hits,
        hit_measure=float(len(hits)),
        density=len(hits) / n_pts,
        per_family=_per_family_stats(labels, dist),
        pathology=pathology_json,
    )
    return ScanOutcome(report, ks, dmax, tuple(details))
