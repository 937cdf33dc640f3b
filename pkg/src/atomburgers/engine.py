"""Backward minimizers by dynamic programming over forcing atoms.

Between atoms a minimizer is a straight line, so the minimal action from the
regeneration anchor to each atom satisfies a shortest-path recursion on the
time-ordered atoms.  Each edge also picks how many times it winds around the
circle (an integer lift).  Velocities at a terminal time then come from the
lower envelope of one parabola per (last atom, lift).
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field
from functools import cached_property, lru_cache

import numpy as np

from .forcing import ForcingField, RegenerationPoint, regeneration_point
from .paths import LiftedPath

TIE_RTOL = 1e-11
MAX_ENUMERATED = 64
DEFAULT_M = 0.5
LIFT_OFFSETS = np.arange(-2, 3)


def tie_tol(value: float) -> float:
    return TIE_RTOL * max(1.0, abs(value))


@dataclass(frozen=True)
class NodePotential:
    time: float
    position: float
    weight: float
    cost: float
    predecessors: tuple[tuple[int, int], ...]
    windings: frozenset


class Potentials:
    """Minimal actions from an anchor to every later atom, for one drift ``theta``.

    Node 0 is the anchor.  ``preds[j]`` lists every ``(i, k)`` attaining the
    minimum, where the edge displacement is ``x[j] + k - x[i]``.
    ``windings[j]`` is the set of integers ``n`` such that some optimal path
    reaches node ``j`` at lifted position ``x[j] + n`` when started at ``x[0]``.
    """

    def __init__(self, field: ForcingField, theta: float, anchor: RegenerationPoint, t_max: float):
        self.field = field
        self.theta = float(theta)
        self.anchor = anchor
        self.t_max = float(t_max)
        lo = int(np.searchsorted(field.t, anchor.T_star, side="right"))
        hi = int(np.searchsorted(field.t, t_max, side="right"))
        self.atom_index = np.concatenate([[-1], np.arange(lo, hi)]).astype(int)
        self.t = np.concatenate([[anchor.T_star], field.t[lo:hi]])
        self.x = np.concatenate([[anchor.y_star], field.x[lo:hi]])
        self.w = np.concatenate([[anchor.weight], field.w[lo:hi]])
        n = len(self.t)
        self.cost = np.empty(n)
        self.cost[0] = -anchor.weight
        self.preds: list[tuple[tuple[int, int], ...]] = [()]
        self.windings: list[frozenset] = [frozenset([0])]
        th = self.theta
        for j in range(1, n):
            dt = self.t[j] - self.t[:j]
            base = self.x[j] - self.x[:j]
            ks = np.rint(th * dt - base)[:, None] + LIFT_OFFSETS
            drift = (base[:, None] + ks) - th * dt[:, None]
            c = self.cost[:j, None] + drift * drift / (2.0 * dt[:, None])
            cmin = float(c.min())
            ii, kk = np.nonzero(c <= cmin + tie_tol(cmin))
            preds = tuple((int(i), int(ks[i, k])) for i, k in zip(ii, kk))
            self.cost[j] = cmin - self.w[j]
            self.preds.append(preds)
            self.windings.append(frozenset(m + k for i, k in preds for m in self.windings[i]))

    def __len__(self):
        return len(self.t)

    def nodes(self) -> list[NodePotential]:
        return [
            NodePotential(float(self.t[j]), float(self.x[j]), float(self.w[j]), float(self.cost[j]),
                          self.preds[j], self.windings[j])
            for j in range(len(self))
        ]

    def count_before(self, t: float) -> int:
        return int(np.searchsorted(self.t, t, side="left"))

    @cached_property
    def path_counts(self) -> np.ndarray:
        cnt = np.zeros(len(self), dtype=object)
        cnt[0] = 1
        for j in range(1, len(self)):
            cnt[j] = sum(cnt[i] for i, _ in self.preds[j])
        return cnt


@lru_cache(maxsize=256)
def _cached_potentials(field, theta, anchor, t_max):
    return Potentials(field, theta, anchor, t_max)


def build_potentials(field: ForcingField, theta: float, anchor: RegenerationPoint,
                     t_max: float | None = None) -> Potentials:
    """Potentials for every atom in ``(T_star, t_max]`` (memoized)."""
    t_max = field.window[1] if t_max is None else float(t_max)
    if t_max < anchor.T_star:
        raise ValueError("t_max precedes the anchor")
    return _cached_potentials(field, float(theta), anchor, t_max)


def resolve(field, theta, t, anchor=None, M=DEFAULT_M, potentials=None) -> Potentials:
    """Potentials valid at time ``t``: reuse the given ones or build from the regeneration anchor."""
    if potentials is not None:
        if not potentials.anchor.T_star < t:
            raise ValueError("query time must follow the anchor")
        return potentials
    if anchor is None:
        anchor = regeneration_point(field, t, M)
    return build_potentials(field, theta, anchor)


# ---------------------------------------------------------------- minimizers


@dataclass
class MinimizerSet:
    """All minimizers from the anchor to ``(t, x)`` together with their extremes.

    ``classes`` maps the endpoint lift ``m`` (endpoint at ``x + m`` when the
    path starts at the anchor's position) to the class-leftmost and
    class-rightmost members of that winding class.
    """

    theta: float
    t: float
    x: float
    action: float
    terminals: tuple[tuple[int, int], ...]
    paths: tuple[LiftedPath, ...]
    n_paths: int
    overflow: bool
    leftmost: LiftedPath
    rightmost: LiftedPath
    classes: dict = dc_field(default_factory=dict)
    anchor: RegenerationPoint | None = None

    @property
    def u_left(self) -> float:
        return self.leftmost.terminal_slope

    @property
    def u_right(self) -> float:
        return self.rightmost.terminal_slope

    @property
    def left_class(self) -> int:
        return max(self.classes)

    @property
    def right_class(self) -> int:
        return min(self.classes)

    def class_slope(self, cls: str, extreme: str) -> float:
        """Terminal slope of the ``extreme`` member of the class of the ``cls`` minimizer."""
        m = self.left_class if cls == "left" else self.right_class
        pair = self.classes[m]
        return pair[0 if extreme == "left" else 1].terminal_slope

    def last_atom_times(self) -> set[float]:
        return {p.times[-2] for p in self.paths}


def _terminal_costs(pot: Potentials, t: float, x: float):
    n = pot.count_before(t)
    if n == 0:
        raise ValueError("query time must follow the anchor")
    th = pot.theta
    dt = t - pot.t[:n]
    base = x - pot.x[:n]
    ks = np.rint(th * dt - base)[:, None] + LIFT_OFFSETS
    drift = (base[:, None] + ks) - th * dt[:, None]
    c = pot.cost[:n, None] + drift * drift / (2.0 * dt[:, None])
    return c, ks


def _chain_to_path(pot: Potentials, edges, t, x, k_term) -> tuple[LiftedPath, int]:
    # edges run from the anchor forward: (node, k of incoming edge)
    nodes = [0] + [j for j, _ in edges]
    lifts = [0]
    for _, k in edges:
        lifts.append(lifts[-1] + k)
    m = lifts[-1] + k_term
    ts = [pot.t[j] for j in nodes] + [t]
    xs = [pot.x[j] + n for j, n in zip(nodes, lifts)] + [x + m]
    return LiftedPath.of(ts, xs), m


def _extreme(pot: Potentials, terminals, t, x, leftmost: bool, target: int | None = None):
    """Greedy backward construction of the leftmost (or rightmost) minimizer.

    With ``target`` set, only paths ending at lift ``target`` are considered.
    Leftmost means steepest incoming segment at every junction.
    """
    pick = max if leftmost else min
    opts = [(i, k) for i, k in terminals if target is None or (target - k) in pot.windings[i]]
    i, k_term = pick(opts, key=lambda ik: (x + ik[1] - pot.x[ik[0]]) / (t - pot.t[ik[0]]))
    need = None if target is None else target - k_term
    edges = []
    while i != 0:
        opts = [(h, k) for h, k in pot.preds[i] if need is None or (need - k) in pot.windings[h]]
        h, k = pick(opts, key=lambda hk: (pot.x[i] + hk[1] - pot.x[hk[0]]) / (pot.t[i] - pot.t[hk[0]]))
        edges.append((i, k))
        if need is not None:
            need -= k
        i = h
    edges.reverse()
    return _chain_to_path(pot, edges, t, x, k_term)[0]


def _enumerate(pot: Potentials, terminals, t, x, cap: int):
    out = []

    def walk(i, edges):
        if len(out) > cap:
            return
        if i == 0:
            out.append(list(reversed(edges)))
            return
        for h, k in pot.preds[i]:
            walk(h, edges + [(i, k)])

    for i, k in terminals:
        start = len(out)
        walk(i, [])
        for j in range(start, len(out)):
            out[j] = (out[j], k)
        if len(out) > cap:
            break
    return [_chain_to_path(pot, e, t, x, k)[0] for e, k in out[:cap]]


def minimizers_at(field: ForcingField, theta: float, t: float, x: float, *, anchor=None,
                  M: float = DEFAULT_M, potentials: Potentials | None = None) -> MinimizerSet:
    """Every action minimizer from the regeneration anchor to ``(t, x)``."""
    pot = resolve(field, theta, t, anchor, M, potentials)
    x = float(x) % 1.0
    c, ks = _terminal_costs(pot, t, x)
    cmin = float(c.min())
    ii, kk = np.nonzero(c <= cmin + tie_tol(cmin))
    terminals = tuple((int(i), int(ks[i, k])) for i, k in zip(ii, kk))
    n_paths = int(sum(pot.path_counts[i] for i, _ in terminals))
    paths = tuple(_enumerate(pot, terminals, t, x, MAX_ENUMERATED))
    classes = sorted({k + n for i, k in terminals for n in pot.windings[i]})
    cls = {
        m: (_extreme(pot, terminals, t, x, True, m), _extreme(pot, terminals, t, x, False, m))
        for m in classes
    }
    return MinimizerSet(
        theta=pot.theta, t=float(t), x=x, action=cmin, terminals=terminals, paths=paths,
        n_paths=n_paths, overflow=n_paths > MAX_ENUMERATED,
        leftmost=_extreme(pot, terminals, t, x, True), rightmost=_extreme(pot, terminals, t, x, False),
        classes=cls, anchor=pot.anchor,
    )


def boundary_values(field: ForcingField, theta: float, t: float, x: float, **kw) -> tuple[float, float]:
    """``(u_left, u_right)``: terminal slopes of the leftmost and rightmost minimizers."""
    ms = minimizers_at(field, theta, t, x, **kw)
    return ms.u_left, ms.u_right


def winding_class_extremes(ms: MinimizerSet) -> dict:
    return dict(ms.classes)


# ---------------------------------------------------------------- profile


@dataclass(frozen=True)
class Piece:
    """Interval of ``x`` on which the minimizer's last straight segment is fixed."""

    x0: float
    x1: float
    node: int
    lift: int
    last_time: float
    last_pos: float
    duration: float

    def u(self, x):
        return (np.asarray(x) + self.lift - self.last_pos) / self.duration

    def antiderivative(self, x):
        d = np.asarray(x) + self.lift - self.last_pos
        return d * d / (2.0 * self.duration)


@dataclass
class Profile:
    """Velocity ``u(t, .)`` on ``[0, 1)`` as a piecewise-linear function."""

    theta: float
    t: float
    pieces: tuple[Piece, ...]
    breakpoints: np.ndarray
    u_left: np.ndarray
    u_right: np.ndarray
    anchor: RegenerationPoint | None = None

    @cached_property
    def _starts(self):
        return np.array([p.x0 for p in self.pieces])

    def piece_at(self, x: float, side: str = "right") -> Piece:
        x = float(x) % 1.0
        i = int(np.searchsorted(self._starts, x, side="right")) - 1
        if side == "left" and i >= 0 and x == self.pieces[i].x0:
            if i == 0:
                last = self.pieces[-1]
                return Piece(last.x0 - 1, last.x1 - 1, last.node, last.lift + 1,
                             last.last_time, last.last_pos, last.duration)
            i -= 1
        return self.pieces[max(i, 0)]

    def u(self, x, side: str = "right"):
        """Velocity at ``x``; at a breakpoint ``side`` picks the one-sided limit."""
        if np.ndim(x) == 0:
            return float(self.piece_at(x, side).u(float(x) % 1.0))
        return np.array([self.u(v, side) for v in np.asarray(x)])

    def h(self, x) -> float:
        """Integral of ``u`` from 0 to ``x`` for ``x`` in ``[0, 1]``."""
        total = 0.0
        for p in self.pieces:
            if p.x0 >= x:
                break
            hi = min(p.x1, x)
            total += float(p.antiderivative(hi) - p.antiderivative(p.x0))
        return total

    def mean(self) -> float:
        return self.h(1.0)

    @property
    def shock_positions(self) -> np.ndarray:
        return self.breakpoints


def _first_down_crossing(a, b, c, tol_c):
    """Smallest ``h > 0`` where ``a h^2 + b h + c`` turns negative, given it is >= 0 at 0."""
    h = np.full(a.shape, np.inf)
    tied = c <= tol_c
    with np.errstate(divide="ignore", invalid="ignore"):
        sel = tied & (b > 0) & (a < 0)
        h[sel] = -b[sel] / a[sel]
        pos = ~tied
        lin = pos & (np.abs(a) <= 1e-14 * (np.abs(b) + 1.0))
        sel = lin & (b < 0)
        h[sel] = -c[sel] / b[sel]
        quad = pos & ~lin
        disc = b * b - 4.0 * a * c
        ok = quad & (disc >= 0)
        sq = np.sqrt(np.where(ok, disc, 0.0))
        q = -0.5 * (b + np.where(b >= 0, sq, -sq))
        r1 = np.where(ok & (a != 0), q / a, np.inf)
        r2 = np.where(ok & (q != 0), c / q, np.inf)
        r1 = np.where(r1 > 0, r1, np.inf)
        r2 = np.where(r2 > 0, r2, np.inf)
        h[ok] = np.minimum(r1, r2)[ok]
    return h


def velocity_profile(field: ForcingField, theta: float, t: float, *, anchor=None, M: float = DEFAULT_M,
                     potentials: Potentials | None = None) -> Profile:
    """Exact velocity profile at time ``t`` from the lower envelope of terminal costs."""
    pot = resolve(field, theta, t, anchor, M, potentials)
    th = pot.theta
    n = pot.count_before(t)
    dur = t - pot.t[:n]
    cen0 = pot.x[:n] + th * dur
    nodes, lifts = [], []
    for i in range(n):
        # lifts whose parabola vertex lies in [-1.5, 2.5]; only the nearest can win on [0, 1]
        for k in range(int(np.ceil(cen0[i] - 2.5)), int(np.floor(cen0[i] + 1.5)) + 1):
            nodes.append(i)
            lifts.append(k)
    nodes = np.array(nodes)
    lifts = np.array(lifts, float)
    V = pot.cost[nodes]
    C = cen0[nodes] - lifts
    D = 1.0 / dur[nodes]

    def f(x):
        return V + 0.5 * D * (x - C) ** 2

    def df(x):
        return D * (x - C)

    def best(idx, x):
        # among tied candidates take the one lowest just to the right of x
        g = df(x)[idx]
        idx = idx[g <= g.min() + 1e-12 * (1 + abs(g.min()))]
        return int(idx[np.argmin(D[idx])])

    x0 = 0.0
    v0 = f(0.0)
    cur = best(np.nonzero(v0 <= v0.min() + 1e-12 * max(1.0, abs(v0.min())))[0], 0.0)
    starts, owners = [0.0], [cur]
    for _ in range(10 * len(V) + 100):
        fx = f(x0)
        c = fx - fx[cur]
        b = df(x0) - df(x0)[cur]
        a = 0.5 * (D - D[cur])
        h = _first_down_crossing(a, b, c, 1e-12 * max(1.0, abs(fx[cur])))
        h[cur] = np.inf
        h[(nodes == nodes[cur]) & (lifts == lifts[cur])] = np.inf
        hmin = float(h.min())
        if not x0 + hmin < 1.0:
            break
        cand = np.nonzero(h <= hmin + 1e-13)[0]
        xb = x0 + hmin
        nxt = best(cand, xb)
        # one Newton step on the equal-cost condition between the two parabolas
        g = f(xb)[nxt] - f(xb)[cur]
        dg = df(xb)[nxt] - df(xb)[cur]
        if dg != 0:
            xb = xb - g / dg
        x0 = max(xb, x0)
        cur = nxt
        starts.append(x0)
        owners.append(cur)
    else:
        raise RuntimeError("lower envelope did not terminate")

    pieces = []
    ends = starts[1:] + [1.0]
    for s, e, o in zip(starts, ends, owners):
        i = int(nodes[o])
        pieces.append(Piece(float(s), float(e), i, int(lifts[o]), float(pot.t[i]), float(pot.x[i]),
                            float(dur[i])))
    bps, ul, ur = [], [], []
    first, last = pieces[0], pieces[-1]
    if not (first.node == last.node and first.lift == last.lift + 1):
        bps.append(0.0)
        ul.append(float(last.u(1.0)))
        ur.append(float(first.u(0.0)))
    for p, q in zip(pieces, pieces[1:]):
        bps.append(q.x0)
        ul.append(float(p.u(q.x0)))
        ur.append(float(q.u(q.x0)))
    return Profile(th, float(t), tuple(pieces), np.array(bps), np.array(ul), np.array(ur), pot.anchor)
