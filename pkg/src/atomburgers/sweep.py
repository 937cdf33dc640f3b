"""Dependence on the drift parameter ``theta`` at fixed time.

For a fixed path the action is ``A_0 - theta * W + theta^2 (t - s) / 2``
where ``W`` is the path's winding, so after removing the common quadratic
every winding class contributes a line in ``theta`` and the minimal action
is their lower envelope.  Breakpoints in ``theta`` of the minimizer set are
the corners of that envelope, and they are located exactly by intersecting
lines.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field

import numpy as np

from .engine import DEFAULT_M, minimizers_at, tie_tol
from .errors import RangeTooWide, ZeroJump
from .forcing import ForcingField, RegenerationPoint, regeneration_point
from .paths import LiftedPath, action, circ_dist
from .shocks import GlobalShockPair, left_right_global, shock_at

MAX_EVALS = 4000


@dataclass(frozen=True)
class AffineGap:
    """``gap(theta) = intercept + slope * theta`` for an action difference."""

    slope: float
    intercept: float

    def __call__(self, theta):
        return self.intercept + self.slope * theta

    def root(self) -> float:
        return -self.intercept / self.slope


def affine_action_gap(X: LiftedPath, Y: LiftedPath, window, field: ForcingField) -> AffineGap:
    """Exact affine form of ``A_theta[X] - A_theta[Y]`` over ``window``."""
    s, t = window
    for P in (X, Y):
        if P.start > s + 1e-12 or P.end < t - 1e-12:
            raise ValueError("both paths must span the window")
    if circ_dist(X.at(s), Y.at(s)) > 1e-12 or circ_dist(X.at(t), Y.at(t)) > 1e-12:
        raise ValueError("paths must share both endpoints on the circle")
    slope = Y.winding(s, t) - X.winding(s, t)
    return AffineGap(slope, action(X, 0.0, field, s, t) - action(Y, 0.0, field, s, t))


@dataclass(frozen=True)
class _Line:
    intercept: float
    winding: float

    def __call__(self, theta):
        return self.intercept - theta * self.winding


class _Envelope:
    """Queries the reduced minimal action at ``(t, x)`` for a given ``theta``."""

    def __init__(self, field, t, x, anchor, max_evals):
        self.field, self.t, self.x, self.anchor = field, t, x, anchor
        self.span = t - anchor.T_star
        self.evals = 0
        self.max_evals = max_evals

    def query(self, theta):
        self.evals += 1
        if self.evals > self.max_evals:
            raise RangeTooWide(f"more than {self.max_evals} minimizer evaluations")
        ms = minimizers_at(self.field, theta, self.t, self.x, anchor=self.anchor)
        g = ms.action - 0.5 * theta * theta * self.span
        lines = {}
        for m in (ms.right_class, ms.left_class):
            W = ms.x + m - self.anchor.y_star
            lines[m] = _Line(g + theta * W, W)
        return g, lines[ms.right_class], lines[ms.left_class]


def minimizer_breakpoints(field: ForcingField, t: float, x: float, theta_range, *, anchor=None,
                          M: float = DEFAULT_M, bracket: float = 0.25,
                          max_evals: int = MAX_EVALS) -> list[float]:
    """Every ``theta`` in the closed range at which the minimizers to ``(t, x)`` change winding."""
    lo, hi = float(theta_range[0]), float(theta_range[1])
    if not hi >= lo:
        raise ValueError("empty theta range")
    if anchor is None:
        anchor = regeneration_point(field, t, M)
    env = _Envelope(field, t, float(x) % 1.0, anchor, max_evals)
    n = max(1, int(math.ceil((hi - lo) / bracket)))
    grid = np.linspace(lo, hi, n + 1)
    found = []
    samples = [(th, *env.query(th)) for th in grid]
    for th, g, right, left in samples:
        if left.winding != right.winding:
            found.append(th)

    def between(a, la, b, lb, depth=0):
        if lb.winding <= la.winding or depth > 200:
            return
        ts = (lb.intercept - la.intercept) / (lb.winding - la.winding)
        if not a < ts < b:
            # rounding placed the corner on a bracket end, which is already recorded
            return
        g, right, left = env.query(ts)
        if g >= la(ts) - tie_tol(g) and g >= lb(ts) - tie_tol(g):
            found.append(ts)
            return
        if left.winding != right.winding:
            found.append(ts)
        between(a, la, ts, right, depth + 1)
        between(ts, left, b, lb, depth + 1)

    for (a, _, _, la), (b, _, lb, _) in zip(samples, samples[1:]):
        between(a, la, b, lb)
    found.sort()
    out = []
    for th in found:
        if not out or th - out[-1] > 1e-12:
            out.append(float(th))
    return out


def split_candidates(field: ForcingField, t: float, theta_range, anchor: RegenerationPoint,
                     **kw) -> list[tuple[float, int]]:
    """``(theta, atom index)`` pairs where an atom before ``t`` sits on a global shock."""
    out = []
    for i in field.between(anchor.T_star, t):
        s, y = float(field.t[i]), float(field.x[i])
        for th in minimizer_breakpoints(field, s, y, theta_range, anchor=anchor, **kw):
            ms = minimizers_at(field, th, s, y, anchor=anchor)
            if ms.u_left > ms.u_right and shock_at(ms).is_global:
                out.append((th, i))
    out.sort()
    return out


def theta_derivative(field: ForcingField, theta: float, t: float, side: str = "right", *, anchor=None,
                     M: float = DEFAULT_M, pair: GlobalShockPair | None = None) -> float:
    """One-sided ``theta``-derivative of the right (``theta+``) or left (``theta-``) global shock."""
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if pair is None:
        pair = left_right_global(field, theta, t, anchor=anchor, M=M)
    sp = pair.right if side == "right" else pair.left
    ms = sp.minimizers
    jump = ms.class_slope("left", side) - ms.class_slope("right", side)
    if not jump > 1e-12:
        raise ZeroJump(f"class jump {jump} at theta={theta}, t={t}, x={sp.x}")
    return 1.0 / jump


@dataclass
class JumpIdentity:
    lhs: float
    rhs: float
    rhs_all: float
    terms: list[tuple[float, float]]

    @property
    def residual(self) -> float:
        return abs(self.lhs - self.rhs)


def jump_identity(field: ForcingField, theta1: float, theta2: float, t: float, x: float, side: str, *,
                  anchor=None, M: float = DEFAULT_M) -> JumpIdentity:
    """Both sides of the velocity jump formula in ``theta`` at a fixed point ``(t, x)``.

    ``lhs`` is ``u(theta2) - u(theta1)`` for the chosen one-sided value.
    ``rhs`` sums class jumps over the breakpoints where the global shock of
    the same side sits at ``x``; ``rhs_all`` sums over every breakpoint.
    """
    if side not in ("left", "right"):
        raise ValueError("side must be 'left' or 'right'")
    if anchor is None:
        anchor = regeneration_point(field, t, M)
    x = float(x) % 1.0

    def u(th):
        ms = minimizers_at(field, th, t, x, anchor=anchor)
        return ms.u_left if side == "left" else ms.u_right

    lhs = u(theta2) - u(theta1)
    bps = minimizer_breakpoints(field, t, x, (theta1, theta2), anchor=anchor)
    if side == "left":
        bps = [b for b in bps if theta1 < b <= theta2]
    else:
        bps = [b for b in bps if theta1 <= b < theta2]
    rhs = rhs_all = 0.0
    terms = []
    for th in bps:
        ms = minimizers_at(field, th, t, x, anchor=anchor)
        jump = ms.class_slope("left", side) - ms.class_slope("right", side)
        rhs_all += jump
        pair = left_right_global(field, th, t, anchor=anchor)
        pos = pair.s_left if side == "left" else pair.s_right
        if circ_dist(pos, x) <= 1e-9:
            rhs += jump
            terms.append((th, jump))
    return JumpIdentity(lhs, rhs, rhs_all, terms)


def verify_jump_identity(field: ForcingField, theta1: float, theta2: float, t: float, x: float,
                         side: str, **kw) -> float:
    """Absolute residual of the velocity jump formula."""
    return jump_identity(field, theta1, theta2, t, x, side, **kw).residual


@dataclass
class ThetaSweep:
    """Global shock positions at fixed ``t`` as ``theta`` varies.

    ``samples`` rows are ``(theta, s_left, s_right, d s_right / d theta+)``.
    ``jumps`` rows are ``(theta, s_left, s_right, split atom index)``; the
    position jumps from ``s_left`` (limit from below) to ``s_right``.
    """

    t: float
    theta_range: tuple[float, float]
    anchor: RegenerationPoint
    samples: list[tuple[float, float, float, float]]
    jumps: list[tuple[float, float, float, int]]
    theta_otimes: list[tuple[float, int]]
    unexplained: list[tuple[float, float]] = dc_field(default_factory=list)
    field: ForcingField | None = dc_field(default=None, repr=False)

    @property
    def breakpoints(self) -> list[float]:
        return [j[0] for j in self.jumps]

    def pair(self, theta: float) -> GlobalShockPair:
        return left_right_global(self.field, theta, self.t, anchor=self.anchor)

    def s_left(self, theta: float) -> float:
        return self.pair(theta).s_left

    def s_right(self, theta: float) -> float:
        return self.pair(theta).s_right


def global_shock_vs_theta(field: ForcingField, t: float, theta_range, x_resolution: float = 0.02, *,
                          n_theta: int = 41, anchor=None, M: float = DEFAULT_M) -> ThetaSweep:
    """Sample the global shock over a ``theta`` grid and locate its jumps exactly."""
    lo, hi = float(theta_range[0]), float(theta_range[1])
    if anchor is None:
        anchor = regeneration_point(field, t, M)
    cands = split_candidates(field, t, (lo, hi), anchor)
    jumps = []
    for th, i in cands:
        pair = left_right_global(field, th, t, anchor=anchor)
        if pair.split:
            jumps.append((th, pair.s_left, pair.s_right, i))
    samples = []
    for th in np.linspace(lo, hi, n_theta):
        pair = left_right_global(field, th, t, anchor=anchor)
        try:
            d = theta_derivative(field, th, t, "right", pair=pair)
        except ZeroJump:
            d = math.nan
        samples.append((float(th), pair.s_left, pair.s_right, d))

    jump_thetas = np.array([j[0] for j in jumps])
    unexplained = []

    def check(a, sa, b, sb, depth=0):
        if np.any((jump_thetas > a) & (jump_thetas <= b)):
            return
        if circ_dist(sa, sb) <= x_resolution:
            return
        if b - a < 1e-9 or depth > 60:
            unexplained.append((a, b))
            return
        m = 0.5 * (a + b)
        sm = left_right_global(field, m, t, anchor=anchor).s_right
        check(a, sa, m, sm, depth + 1)
        check(m, sm, b, sb, depth + 1)

    for (a, _, sa, _), (b, sb, _, _) in zip(samples, samples[1:]):
        check(a, sa, b, sb)
    return ThetaSweep(float(t), (lo, hi), anchor, samples, jumps, cands, unexplained, field)
