"""Shocks of the velocity profile: global/non-global classification, emission and tracking."""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .engine import DEFAULT_M, MinimizerSet, Potentials, minimizers_at, resolve, velocity_profile
from .errors import CountViolation, LostShock, WindingAnomaly
from .forcing import ForcingField, ForcingPoint
from .paths import LiftedPath, action, circ_dist, perturb

GAP_TOL = 1e-6
MAX_HALVINGS = 24
MERGE_TOL = 1e-9


@dataclass
class ShockPoint:
    theta: float
    t: float
    x: float
    u_left: float
    u_right: float
    T_vee: float
    winding_gap: int
    is_global: bool
    minimizers: MinimizerSet | None = dc_field(default=None, repr=False)

    @property
    def velocity(self) -> float:
        return 0.5 * (self.u_left + self.u_right)


@dataclass
class GlobalShockPair:
    s_left: float
    s_right: float
    split: bool
    split_atom: ForcingPoint | None = None
    left: ShockPoint | None = dc_field(default=None, repr=False)
    right: ShockPoint | None = dc_field(default=None, repr=False)


@dataclass
class TrajectorySample:
    t: float
    x: float
    u_left: float
    u_right: float
    event: str = ""


@dataclass
class ShockTrajectory:
    theta: float
    samples: list[TrajectorySample]
    events: list[tuple[float, str, float]]
    branches: list[tuple[float, float, float]] = dc_field(default_factory=list)


def merge_time(X_left: LiftedPath, X_right: LiftedPath) -> float:
    """Latest time before the common endpoint at which the two paths meet on the circle."""
    t = min(X_left.end, X_right.end)
    s0 = max(X_left.start, X_right.start)
    grid = np.union1d(np.array(X_left.times), np.array(X_right.times))
    grid = grid[(grid >= s0) & (grid <= t)][::-1]
    E = X_left.at(grid) - X_right.at(grid)
    if abs(E[1] - E[0]) <= MERGE_TOL and abs(E[0] - round(E[0])) <= MERGE_TOL:
        # the paths share their last segment; the supremum is not attained, report its start
        return float(grid[1])
    for rb, ra, eb, ea in zip(grid, grid[1:], E, E[1:]):
        lo, hi = min(ea, eb), max(ea, eb)
        ints = [n for n in range(math.ceil(lo + MERGE_TOL), math.floor(hi - MERGE_TOL) + 1)]
        if ints:
            n = min(ints, key=lambda v: abs(v - eb))
            return float(rb - (eb - n) / (eb - ea) * (rb - ra))
        if abs(ea - round(ea)) <= MERGE_TOL:
            return float(ra)
    return float(s0)


def classify_global(X_left: LiftedPath, X_right: LiftedPath) -> tuple[float, int, bool]:
    """``(T_vee, winding_gap, is_global)`` for the extreme minimizers of a shock."""
    tv = merge_time(X_left, X_right)
    gap = (X_left.at(X_left.end) - X_right.at(X_right.end)) - (X_left.at(tv) - X_right.at(tv))
    n = round(float(gap))
    if abs(gap - n) > GAP_TOL or n not in (0, 1):
        raise WindingAnomaly(f"winding gap {gap} after merge time {tv}")
    return tv, n, n == 1


def shock_at(ms: MinimizerSet) -> ShockPoint:
    tv, gap, glob = classify_global(ms.leftmost, ms.rightmost)
    return ShockPoint(ms.theta, ms.t, ms.x, ms.u_left, ms.u_right, tv, gap, glob, ms)


def shock_set(field: ForcingField, theta: float, t: float, *, anchor=None, M: float = DEFAULT_M,
              potentials: Potentials | None = None) -> list[ShockPoint]:
    """All shocks at time ``t``, with winding classification."""
    pot = resolve(field, theta, t, anchor, M, potentials)
    prof = velocity_profile(field, theta, t, potentials=pot)
    out = []
    for x in prof.breakpoints:
        out.append(shock_at(minimizers_at(field, theta, t, x, potentials=pot)))
    return out


def _interior_atoms(path: LiftedPath, after: float) -> dict[float, float]:
    return {a: b % 1.0 for a, b in zip(path.times[1:-1], path.positions[1:-1]) if a > after}


def _previous_anchor(path: LiftedPath, s: float) -> tuple[float, float]:
    i = path.times.index(s)
    return path.times[i - 1], round(path.positions[i] - path.positions[i - 1], 9)


def left_right_global(field: ForcingField, theta: float, t: float, *, anchor=None, M: float = DEFAULT_M,
                      potentials: Potentials | None = None,
                      shocks: list[ShockPoint] | None = None) -> GlobalShockPair:
    """Left and right global shock positions at ``(theta, t)``."""
    pot = resolve(field, theta, t, anchor, M, potentials)
    if shocks is None:
        shocks = shock_set(field, theta, t, potentials=pot)
    gl = [s for s in shocks if s.is_global]
    if len(gl) == 1:
        return GlobalShockPair(gl[0].x, gl[0].x, False, None, gl[0], gl[0])
    if len(gl) != 2:
        raise CountViolation(f"{len(gl)} global shocks at theta={theta}, t={t}")
    a, b = gl
    for L, R in ((a, b), (b, a)):
        via_right = _interior_atoms(L.minimizers.rightmost, L.T_vee)
        via_left = _interior_atoms(R.minimizers.leftmost, R.T_vee)
        common = sorted(set(via_right) & set(via_left), reverse=True)
        if common:
            # both paths share a stretch through the split atom; it is where they part going back
            P, Q = L.minimizers.rightmost, R.minimizers.leftmost
            for s in common:
                if _previous_anchor(P, s) != _previous_anchor(Q, s):
                    atom = field.atom_at(s, via_right[s], tol=1e-9)
                    return GlobalShockPair(L.x, R.x, True, atom, L, R)
    raise CountViolation(f"two global shocks at theta={theta}, t={t} without a shared split atom")


def emission_offsets(weight: float, slope_left: float, slope_right: float,
                     dur_left: float, dur_right: float, tau: float) -> tuple[float, float]:
    """Offsets of the two shocks leaving an atom ``tau`` after it fires.

    Each shock sits where keeping the atom costs the same as skipping it, which
    reduces to ``eta = tau * slope +- sqrt(2 tau (1 + tau / dur) weight)``.
    """
    if not tau > 0:
        raise ValueError("tau must be positive")
    rl = tau * slope_left - math.sqrt(2.0 * tau * (1.0 + tau / dur_left) * weight)
    rr = tau * slope_right + math.sqrt(2.0 * tau * (1.0 + tau / dur_right) * weight)
    return rl, rr


def forcing_emission(atom: ForcingPoint, theta: float, incoming: MinimizerSet, tau: float,
                     field: ForcingField | None = None) -> tuple[float, float]:
    """Shock offsets ``(r_left, r_right)`` at time ``atom.time + tau``.

    ``incoming`` is the minimizer set at the atom itself (atom not collected).
    When ``field`` is given, the two competing paths are checked to have
    equal action at each offset.
    """
    XL, XR = incoming.leftmost, incoming.rightmost
    rl, rr = emission_offsets(atom.weight, XL.terminal_slope, XR.terminal_slope,
                              XL.end - XL.times[-2], XR.end - XR.times[-2], tau)
    if field is not None:
        for X, r in ((XL, rl), (XR, rr)):
            skip = action(perturb(X, "skip_terminal", tau, r, field), theta, field)
            keep = action(perturb(X, "keep_terminal", tau, r, field), theta, field)
            if abs(skip - keep) > 1e-8 * max(1.0, abs(skip)):
                raise ArithmeticError(f"emission offset {r} does not balance actions ({skip} vs {keep})")
    return rl, rr


def track_shock(field: ForcingField, theta: float, x0: float, t0: float, t1: float, dt: float, *,
                anchor=None, M: float = DEFAULT_M, potentials: Potentials | None = None) -> ShockTrajectory:
    """Follow the shock at ``(t0, x0)`` forward to ``t1`` in steps of ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    pot = resolve(field, theta, t0, anchor, M, potentials)
    prof = velocity_profile(field, theta, t0, potentials=pot)
    if len(prof.breakpoints) == 0:
        raise ValueError(f"no shock at t={t0}")
    d = circ_dist(prof.breakpoints, x0)
    j = int(np.argmin(d))
    if d[j] > 1e-6:
        raise ValueError(f"({t0}, {x0}) is not a shock")
    x = float(prof.breakpoints[j])
    samples = [TrajectorySample(t0, x, float(prof.u_left[j]), float(prof.u_right[j]))]
    events, branches = [], []
    t = t0
    nsteps = int(math.ceil((t1 - t0) / dt - 1e-9))
    def advance(prof, j, x, t, tn, depth=0):
        # one step; halve it when the prediction misses, as happens when a fresh emission sweeps in
        h = tn - t
        vel = 0.5 * (prof.u_left + prof.u_right)
        nxt = velocity_profile(field, theta, tn, potentials=pot)
        if len(nxt.breakpoints) == 0:
            raise LostShock(f"profile at t={tn} has no shocks")
        v = float(vel[j])
        slack = 10.0 * h * (1.0 + abs(v))
        d = circ_dist(nxt.breakpoints, (x + v * h) % 1.0)
        k = int(np.argmin(d))
        if d[k] > slack:
            if depth >= MAX_HALVINGS:
                raise LostShock(f"no breakpoint within {slack:.3g} of {(x + v * h) % 1.0:.6f} at t={tn}")
            tm = 0.5 * (t + tn)
            mid, jm, merged = advance(prof, j, x, t, tm, depth + 1)
            nxt, k, merged2 = advance(mid, jm, float(mid.breakpoints[jm]), tm, tn, depth + 1)
            return nxt, k, merged or merged2
        owners = [int(np.argmin(circ_dist(nxt.breakpoints, p))) for p in (prof.breakpoints + vel * h) % 1.0]
        return nxt, k, sum(o == k for o in owners) >= 2

    for step in range(1, nsteps + 1):
        tn = min(t0 + step * dt, t1)
        h = tn - t
        v = float(0.5 * (prof.u_left[j] + prof.u_right[j]))
        nxt, k, merged = advance(prof, j, x, t, tn)
        slack = 10.0 * h * (1.0 + abs(v))
        tags = ["merge"] if merged else []
        for ia in field.between(t, tn + 1e-15):
            if field.t[ia] > tn:
                continue
            if circ_dist(field.x[ia], x + v * (field.t[ia] - t)) <= slack:
                tags.append("fork")
                near = np.nonzero(circ_dist(nxt.breakpoints, field.x[ia]) <= slack)[0]
                for b in near:
                    branches.append((tn, float(nxt.breakpoints[b]), float(field.t[ia])))
            else:
                tags.append("emission")
        for tag in tags:
            events.append((tn, tag, float(nxt.breakpoints[k])))
        x = float(nxt.breakpoints[k])
        samples.append(TrajectorySample(tn, x, float(nxt.u_left[k]), float(nxt.u_right[k]), "+".join(tags)))
        prof, j, t = nxt, k, tn
    return ShockTrajectory(float(theta), samples, events, branches)
