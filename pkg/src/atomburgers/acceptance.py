"""Acceptance checks run by the test-suite and by ``atomburgers verify``.

Each check returns a :class:`CriterionResult`; none of them raise on a
numerical failure, so a report can always be written.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .engine import build_potentials, minimizers_at, velocity_profile
from .errors import DegenerateField, WindingAnomaly
from .forcing import (ForcingField, ForcingPoint, anchor_from_point, find_small_noise_zone,
                      regeneration_point, sample_compound_poisson, sample_fixed_count)
from .oracle import enumerate_minimizers
from .paths import circ_dist
from .shocks import forcing_emission, left_right_global, shock_set, track_shock
from .sweep import jump_identity, split_candidates, theta_derivative

REF_M = 0.5
REF_WEIGHTS = "exponential:1"
REF_WINDOW = (0.0, 15.0)
REF_T0 = 10.0


@dataclass
class CriterionResult:
    key: str
    name: str
    passed: bool
    measured: float
    threshold: float
    detail: str = ""

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status} {self.key} {self.name}: measured={self.measured:.3e} threshold={self.threshold:.3e} {self.detail}"


def reference_field(seed: int = 0, n: int = 30):
    """A 30-atom field on ``REF_WINDOW`` with a regeneration anchor before ``REF_T0``.

    Seeds without such an anchor are skipped deterministically.
    """
    for s in range(seed, seed + 1000):
        f = sample_fixed_count(n, REF_WEIGHTS, REF_WINDOW, s)
        if find_small_noise_zone(f, REF_M, REF_T0) is not None:
            return f, regeneration_point(f, REF_T0, REF_M)
    raise RuntimeError("no seed with a regeneration anchor")


def dp_vs_oracle(n_fields: int = 500, seed: int = 1, budget: float = 60.0) -> CriterionResult:
    rng = np.random.default_rng(seed)
    start = time.perf_counter()
    worst, mismatch = 0.0, 0
    for _ in range(n_fields):
        while True:
            f = sample_compound_poisson(2.0, REF_WEIGHTS, (0.0, 3.0), int(rng.integers(2**32)))
            if 1 <= len(f) <= 6:
                break
        anchor = anchor_from_point(f.points[0])
        theta = rng.uniform(-2, 2)
        t = rng.uniform(f.t[0] + 0.05, 3.0)
        x = rng.uniform()
        ms = minimizers_at(f, theta, t, x, potentials=build_potentials(f, theta, anchor))
        o = enumerate_minimizers(f, theta, anchor.T_star, anchor.y_star, t, x)
        worst = max(worst, abs(ms.action - o.min_action) / max(1.0, abs(o.min_action)))
        if ms.last_atom_times() != o.last_atom_times():
            mismatch += 1
    elapsed = time.perf_counter() - start
    ok = worst <= 1e-12 and mismatch == 0 and elapsed <= budget
    return CriterionResult("c01", "dp-vs-oracle", ok, worst, 1e-12,
                           f"fields={n_fields} last-atom-mismatches={mismatch} runtime={elapsed:.1f}s")


def mean_constraint(n: int = 200, seed: int = 2) -> CriterionResult:
    f, anchor = reference_field()
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        theta, t = rng.uniform(-2, 2), rng.uniform(REF_T0, REF_WINDOW[1])
        worst = max(worst, abs(velocity_profile(f, theta, t, anchor=anchor).mean() - theta))
    return CriterionResult("c02", "mean-constraint", worst <= 1e-9, worst, 1e-9, f"samples={n}")


def squeeze_bound(n_theta: int = 50, n_x: int = 200, t: float = 12.5, seed: int = 3) -> CriterionResult:
    f, anchor = reference_field()
    rng = np.random.default_rng(seed)
    thetas = np.sort(rng.uniform(-2, 2, n_theta))
    xs = np.linspace(0.0, 1.0, n_x, endpoint=False)
    H = np.array([[p.h(x) for x in xs] for p in (velocity_profile(f, th, t, anchor=anchor) for th in thetas)])
    viol = 0.0
    for i in range(n_theta):
        for j in range(i + 1, n_theta):
            d = H[j] - H[i]
            viol = max(viol, float(np.max(-d)), float(np.max(d - (thetas[j] - thetas[i]))))
    return CriterionResult("c03", "squeeze-bound", viol <= 1e-9, max(viol, 0.0), 1e-9,
                           f"grid={n_theta}x{n_x}")


def winding_law(n: int = 500, seed: int = 4) -> CriterionResult:
    f, anchor = reference_field()
    rng = np.random.default_rng(seed)
    anomalies = bad = total = 0
    for _ in range(n):
        theta, t = rng.uniform(-2, 2), rng.uniform(REF_T0, REF_WINDOW[1])
        try:
            shocks = shock_set(f, theta, t, anchor=anchor)
        except WindingAnomaly:
            anomalies += 1
            continue
        for s in shocks:
            total += 1
            if s.winding_gap not in (0, 1) or s.is_global != (s.winding_gap == 1) or not s.T_vee < t:
                bad += 1
    return CriterionResult("c04", "winding-law", anomalies == 0 and bad == 0, anomalies + bad, 0,
                           f"shocks={total}")


def global_count(n_theta: int = 100, n_t: int = 100, seed: int = 5) -> CriterionResult:
    f, anchor = reference_field()
    rng = np.random.default_rng(seed)
    thetas = rng.uniform(-2, 2, n_theta)
    ts = rng.uniform(REF_T0, REF_WINDOW[1], n_t)
    counts = {}
    for th in thetas:
        pot = build_potentials(f, th, anchor)
        for t in ts:
            c = sum(s.is_global for s in shock_set(f, th, t, potentials=pot))
            counts[c] = counts.get(c, 0) + 1
    bad = sum(v for k, v in counts.items() if k not in (1, 2))
    return CriterionResult("c05", "global-count", bad == 0, bad, 0, f"pairs={n_theta * n_t} counts={counts}")


def rankine_hugoniot(n_starts: int = 10, steps: int = 50, dt: float = 1e-4, seed: int = 6,
                     clearance: float = 100) -> CriterionResult:
    """Central-difference shock speed against the mean of the one-sided velocities.

    Tracking windows start at least ``clearance * dt`` after the most recent
    atom, since just after an emission the shock position grows like a square
    root and no fixed step resolves it.
    """
    f, anchor = reference_field()
    rng = np.random.default_rng(seed)
    worst, used = 0.0, 0
    while used < n_starts:
        theta, t0 = rng.uniform(-1, 1), rng.uniform(REF_T0, REF_WINDOW[1] - 0.1)
        if f.between(t0 - clearance * dt, t0 + steps * dt):
            continue
        used += 1
        pot = build_potentials(f, theta, anchor)
        for x0 in velocity_profile(f, theta, t0, potentials=pot).breakpoints:
            tr = track_shock(f, theta, x0, t0, t0 + steps * dt, dt, potentials=pot)
            S = tr.samples
            for p, q, r in zip(S, S[1:], S[2:]):
                if q.event or r.event:
                    continue
                fd = ((r.x - p.x + 0.5) % 1.0 - 0.5) / (r.t - p.t)
                worst = max(worst, abs(fd - 0.5 * (q.u_left + q.u_right)))
    return CriterionResult("c06", "rankine-hugoniot", worst <= 1e-3, worst, 1e-3, f"starts={used} dt={dt}")


def emission_scenario(rng) -> tuple[ForcingField, ForcingPoint, float]:
    """Anchor at time 0 and one emitting atom at time 1, away from the anchor's own shock."""
    theta = float(rng.uniform(-1.5, 1.5))
    y0 = float(rng.uniform())
    x = (y0 + theta + rng.uniform(-0.3, 0.3)) % 1.0
    atom = ForcingPoint(1.0, float(x), float(rng.uniform(0.05, 1.0)))
    return ForcingField((ForcingPoint(0.0, y0, 1.0), atom), (-1.0, 2.0)), atom, theta


def emission_match(n: int = 50, seed: int = 7) -> CriterionResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(n):
        f, atom, theta = emission_scenario(rng)
        anchor = anchor_from_point(f.points[0], REF_M)
        pot = build_potentials(f, theta, anchor)
        incoming = minimizers_at(f, theta, atom.time, atom.position, potentials=pot)
        for tau in (1e-2, 1e-3, 1e-4):
            rl, rr = forcing_emission(atom, theta, incoming, tau, f)
            bps = velocity_profile(f, theta, atom.time + tau, potentials=pot).breakpoints
            for r in (rl, rr):
                worst = max(worst, float(np.min(circ_dist(bps, atom.position + r))))
    return CriterionResult("c07", "emission-closed-form", worst <= 1e-6, worst, 1e-6, f"scenarios={n}")


def jump_formula(n_cases: int = 100, n_deriv: int = 50, seed: int = 8) -> CriterionResult:
    f, anchor = reference_field()
    rng = np.random.default_rng(seed)
    worst, nonzero = 0.0, 0
    for i in range(n_cases):
        th1, th2 = np.sort(rng.uniform(-2, 2, 2))
        t, x = rng.uniform(REF_T0, REF_WINDOW[1]), rng.uniform()
        J = jump_identity(f, th1, th2, t, x, "left" if i % 2 else "right", anchor=anchor)
        worst = max(worst, J.residual)
        nonzero += bool(J.terms)
    dworst = 0.0
    h = 1e-6
    for _ in range(n_deriv):
        th, t = rng.uniform(-2, 2), rng.uniform(REF_T0, REF_WINDOW[1])
        p = left_right_global(f, th, t, anchor=anchor)
        d = theta_derivative(f, th, t, "right", pair=p)
        q = left_right_global(f, th + h, t, anchor=anchor)
        fd = ((q.s_right - p.s_right + 0.5) % 1.0 - 0.5) / h
        dworst = max(dworst, abs(fd - d) / abs(d))
    ok = worst <= 1e-8 and dworst <= 1e-3
    return CriterionResult("c08", "theta-jump-formula", ok, worst, 1e-8,
                           f"cases={n_cases} with-terms={nonzero} derivative-rel-err={dworst:.2e} (<=1e-3)")


def _has_breakpoint(f, theta, t, x, anchor, tol=1e-9) -> bool:
    bps = velocity_profile(f, theta, t, anchor=anchor).breakpoints
    return bool(len(bps)) and float(np.min(circ_dist(bps, x))) <= tol


def jump_landing(times=(11.0, 12.5, 14.0), theta_range=(-1.0, 1.0), delta: float = 1e-7) -> CriterionResult:
    f, anchor = reference_field()
    tested = failed = 0
    worst_limit = 0.0
    for t in times:
        for th, _ in split_candidates(f, t, theta_range, anchor):
            pair = left_right_global(f, th, t, anchor=anchor)
            if not pair.split:
                continue
            tested += 1
            if not _has_breakpoint(f, th + delta, t, pair.s_left, anchor):
                failed += 1
            if not _has_breakpoint(f, th - delta, t, pair.s_right, anchor):
                failed += 1
            below = left_right_global(f, th - delta, t, anchor=anchor).s_right
            above = left_right_global(f, th + delta, t, anchor=anchor).s_left
            worst_limit = max(worst_limit, float(circ_dist(below, pair.s_left)),
                              float(circ_dist(above, pair.s_right)))
    ok = tested > 0 and failed == 0 and worst_limit <= 1e-4
    return CriterionResult("c09", "jump-landing", ok, failed, 0,
                           f"jumps={tested} one-sided-limit-gap={worst_limit:.2e}")


def split_interval(n_required: int = 3, t_ref: float = 14.9, theta_range=(-1.0, 1.0),
                   step: float = 0.02) -> CriterionResult:
    f, anchor = reference_field()
    cands = split_candidates(f, t_ref, theta_range, anchor)
    good = bad = closed = 0
    for th, i in cands[: 2 * n_required]:
        s = float(f.t[i])
        ts = np.arange(max(s - 0.3, anchor.T_star + REF_M), REF_WINDOW[1], step)
        flags, atoms = [], set()
        for t in ts:
            p = left_right_global(f, th, t, anchor=anchor)
            flags.append(p.split)
            if p.split:
                atoms.add(p.split_atom.time if p.split_atom else None)
        flags = np.array(flags)
        on = np.nonzero(flags)[0]
        first_after = int(np.searchsorted(ts, s, side="right"))
        shape_ok = (len(on) > 0 and on[0] == first_after and len(on) == on[-1] - on[0] + 1
                    and atoms == {s})
        just_after = left_right_global(f, th, s + 1e-6, anchor=anchor).split
        at_atom = left_right_global(f, th, s, anchor=anchor).split
        if shape_ok and just_after and not at_atom:
            good += 1
            closed += bool(len(on) and on[-1] < len(ts) - 1)
        else:
            bad += 1
    ok = good >= n_required and bad == 0
    return CriterionResult("c10", "split-interval", ok, good, n_required,
                           f"inconsistent={bad} re-merged-inside-window={closed}")


def regeneration_rate(n_seeds: int = 1000, rate: float = 2.0, window=(0.0, 40.0), M: float = REF_M,
                      weights: str = REF_WEIGHTS) -> CriterionResult:
    found = degenerate = 0
    for seed in range(n_seeds):
        try:
            f = sample_compound_poisson(rate, weights, window, seed)
        except DegenerateField:
            degenerate += 1
            continue
        if len(f) > 1 and float(np.min(np.diff(f.t))) <= 1e-12:
            degenerate += 1
        found += find_small_noise_zone(f, M, window[1]) is not None
    frac = found / n_seeds
    return CriterionResult("c11", "regeneration-frequency", frac >= 0.99 and degenerate == 0, frac, 0.99,
                           f"seeds={n_seeds} rate={rate} M={M} degenerate={degenerate}")


ALL = (dp_vs_oracle, mean_constraint, squeeze_bound, winding_law, global_count, rankine_hugoniot,
       emission_match, jump_formula, jump_landing, split_interval, regeneration_rate)


def run_all(quick: bool = False) -> list[CriterionResult]:
    """Run every check; ``quick`` shrinks sample counts for a smoke run."""
    if not quick:
        return [fn() for fn in ALL]
    return [
        dp_vs_oracle(50), mean_constraint(20), squeeze_bound(10, 50), winding_law(50),
        global_count(10, 10), rankine_hugoniot(2), emission_match(10), jump_formula(10, 5),
        jump_landing(times=(14.0,)), split_interval(), regeneration_rate(100),
    ]
