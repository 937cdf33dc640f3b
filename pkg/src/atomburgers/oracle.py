"""Exhaustive point-to-point minimizer search for tiny fields.

Every time-ordered subset of the atoms strictly between the endpoints is
tried, with every lift in a window of ``2K + 1`` integers per segment.  This
is exponential and only meant to cross-check the dynamic program.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np

from .errors import TooLarge
from .forcing import ForcingField
from .paths import LiftedPath

MAX_ORACLE_ATOMS = 8
ORACLE_RTOL = 1e-12


@dataclass
class OracleResult:
    min_action: float
    paths: list[LiftedPath]
    windings: list[float]

    def last_atom_times(self) -> set[float]:
        return {p.times[-2] for p in self.paths}


def enumerate_minimizers(field: ForcingField, theta: float, s: float, y: float, t: float, x: float,
                         K: int = 3) -> OracleResult:
    """Minimal action and all minimizers from ``(s, y)`` to ``(t, x)``.

    The weight of an atom sitting at the start point is collected; one at the
    end point is not.
    """
    if K < 3:
        raise ValueError("K must be at least 3")
    inside = [i for i in range(len(field)) if s < field.t[i] < t]
    if len(inside) > MAX_ORACLE_ATOMS:
        raise TooLarge(f"{len(inside)} atoms between endpoints, limit is {MAX_ORACLE_ATOMS}")
    start_atom = field.atom_at(s, y)
    w0 = start_atom.weight if start_atom is not None else 0.0
    y = float(y) % 1.0
    x = float(x) % 1.0

    best = np.inf
    found = []  # (cost, subset, lift tuple)
    for r in range(len(inside) + 1):
        for subset in itertools.combinations(inside, r):
            ts = [s] + [field.t[i] for i in subset] + [t]
            xs = [y] + [field.x[i] for i in subset] + [x]
            collected = w0 + sum(field.w[i] for i in subset)
            grids, seg_costs = [], []
            for a in range(len(ts) - 1):
                dt = ts[a + 1] - ts[a]
                ks = np.arange(-K, K + 1) + round(theta * dt)
                d = xs[a + 1] - xs[a] + ks
                grids.append(ks)
                seg_costs.append((d - theta * dt) ** 2 / (2.0 * dt))
            total = seg_costs[0]
            for sc in seg_costs[1:]:
                total = np.add.outer(total, sc)
            total = total - collected
            cmin = float(total.min())
            if cmin < best - ORACLE_RTOL * max(1.0, abs(best)):
                found = [f for f in found if f[0] <= cmin + ORACLE_RTOL * max(1.0, abs(cmin))]
            best = min(best, cmin)
            tol = ORACLE_RTOL * max(1.0, abs(best))
            for flat in np.nonzero(total.ravel() <= best + tol)[0]:
                idx = np.unravel_index(flat, total.shape)
                found.append((float(total.ravel()[flat]), subset, tuple(int(g[i]) for g, i in zip(grids, idx))))
    tol = ORACLE_RTOL * max(1.0, abs(best))
    paths, windings = [], []
    for cost, subset, lifts in found:
        if cost > best + tol:
            continue
        ts = [s] + [float(field.t[i]) for i in subset] + [t]
        xs = [y] + [float(field.x[i]) for i in subset] + [x]
        pos = [y]
        for a, k in enumerate(lifts):
            pos.append(pos[-1] + (xs[a + 1] - xs[a] + k))
        paths.append(LiftedPath.of(ts, pos))
        windings.append(pos[-1] - pos[0])
    return OracleResult(best, paths, windings)
