"""Piecewise-linear lifted paths, their action and the surgery/perturbation operators."""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import JunctionMismatch
from .forcing import ForcingField

ON_PATH_TOL = 1e-12


def circ_dist(a, b):
    """Distance on the unit circle."""
    return np.abs((np.asarray(a) - np.asarray(b) + 0.5) % 1.0 - 0.5)


@dataclass(frozen=True)
class LiftedPath:
    """Path on the real line, linear between consecutive anchors.

    ``times`` are strictly increasing; ``positions`` are lifted (not reduced
    mod 1), so ``positions[-1] - positions[0]`` is the winding.
    """

    times: tuple[float, ...]
    positions: tuple[float, ...]

    def __post_init__(self):
        if len(self.times) != len(self.positions) or len(self.times) < 2:
            raise ValueError("a path needs at least two anchors with matching coordinates")
        if any(b <= a for a, b in zip(self.times, self.times[1:])):
            raise ValueError("anchor times must increase strictly")

    @classmethod
    def of(cls, times, positions) -> "LiftedPath":
        return cls(tuple(float(v) for v in times), tuple(float(v) for v in positions))

    @cached_property
    def _t(self):
        return np.array(self.times)

    @cached_property
    def _x(self):
        return np.array(self.positions)

    @property
    def start(self) -> float:
        return self.times[0]

    @property
    def end(self) -> float:
        return self.times[-1]

    def at(self, r):
        return np.interp(r, self._t, self._x)

    def slopes(self) -> np.ndarray:
        return np.diff(self._x) / np.diff(self._t)

    def slope_before(self, r: float) -> float:
        """Left derivative at ``r``."""
        i = int(np.searchsorted(self._t, r, side="left"))
        i = min(max(i, 1), len(self.times) - 1)
        return float(self.slopes()[i - 1])

    def slope_after(self, r: float) -> float:
        i = int(np.searchsorted(self._t, r, side="right"))
        i = min(max(i, 1), len(self.times) - 1)
        return float(self.slopes()[i - 1])

    @property
    def terminal_slope(self) -> float:
        return float(self.slopes()[-1])

    def winding(self, s: float | None = None, t: float | None = None) -> float:
        s = self.start if s is None else s
        t = self.end if t is None else t
        return float(self.at(t) - self.at(s))

    def restrict(self, s: float, t: float) -> "LiftedPath":
        if s < self.start - 1e-15 or t > self.end + 1e-15 or not t > s:
            raise ValueError(f"[{s}, {t}] is not inside the path domain")
        inner = [(a, b) for a, b in zip(self.times, self.positions) if s < a < t]
        ts = [s] + [a for a, _ in inner] + [t]
        xs = [float(self.at(s))] + [b for _, b in inner] + [float(self.at(t))]
        return LiftedPath.of(ts, xs)

    def shifted(self, n: float) -> "LiftedPath":
        return LiftedPath.of(self.times, [p + n for p in self.positions])

    def torus(self) -> np.ndarray:
        return self._x % 1.0

    def equals(self, other: "LiftedPath", tol: float = 1e-12) -> bool:
        """Same path as a function of time (extra collinear anchors are ignored)."""
        if abs(self.start - other.start) > tol or abs(self.end - other.end) > tol:
            return False
        grid = np.union1d(self._t, other._t)
        return bool(np.all(np.abs(self.at(grid) - other.at(grid)) <= tol))


def atoms_on_path(path: LiftedPath, field: ForcingField, s: float, t: float) -> np.ndarray:
    """Indices of atoms with time in ``[s, t)`` lying on the path."""
    if len(field) == 0:
        return np.zeros(0, int)
    ft = field.t
    idx = np.nonzero((ft >= s - ON_PATH_TOL) & (ft < t - ON_PATH_TOL))[0]
    if idx.size == 0:
        return idx
    d = circ_dist(path.at(ft[idx]), field.x[idx])
    on = idx[d <= ON_PATH_TOL]
    anchors = path._t
    for i in on:
        if np.min(np.abs(anchors - ft[i])) > ON_PATH_TOL:
            warnings.warn(f"segment passes through atom at t={ft[i]} without an anchor", RuntimeWarning)
    return on


def kinetic(path: LiftedPath, theta: float, s: float | None = None, t: float | None = None) -> float:
    """Half the integral of ``(X' - theta)^2`` over ``[s, t]``."""
    p = path if s is None and t is None else path.restrict(
        path.start if s is None else s, path.end if t is None else t
    )
    dt = np.diff(p._t)
    dx = np.diff(p._x)
    return float(np.sum((dx - theta * dt) ** 2 / (2.0 * dt)))


def action(path: LiftedPath, theta: float, field: ForcingField, s: float | None = None,
           t: float | None = None) -> float:
    """Kinetic energy relative to drift ``theta`` minus the weight collected on ``[s, t)``."""
    s = path.start if s is None else s
    t = path.end if t is None else t
    if s < path.start - 1e-15 or t > path.end + 1e-15:
        raise ValueError(f"path on [{path.start}, {path.end}] does not cover [{s}, {t}]")
    on = atoms_on_path(path, field, s, t)
    return kinetic(path, theta, s, t) - float(np.sum(field.w[on]))


def concat(X: LiftedPath, Y: LiftedPath, r: float) -> LiftedPath:
    """Follow ``X`` up to time ``r`` and ``Y`` afterwards, re-lifting ``Y`` to join continuously."""
    if not (X.start <= r <= X.end and Y.start <= r <= Y.end):
        raise ValueError(f"junction time {r} outside one of the paths")
    gap = float(X.at(r) - Y.at(r))
    n = round(gap)
    if abs(gap - n) > 1e-12:
        raise JunctionMismatch(f"paths are {gap - n:+.3e} apart on the circle at r={r}")
    Y = Y.shifted(n)
    ts = [a for a in X.times if a < r] + [r] + [a for a in Y.times if a > r]
    xs = [b for a, b in zip(X.times, X.positions) if a < r] + [float(X.at(r))]
    xs += [b for a, b in zip(Y.times, Y.positions) if a > r]
    return LiftedPath.of(ts, xs)


def perturb(path: LiftedPath, variant: str, tau: float, eta: float, field: ForcingField) -> LiftedPath:
    """Move the endpoint to ``(t + tau, X(t) + eta)``, re-drawing the last straight piece.

    ``skip_terminal`` pivots at the last anchor strictly before ``t``;
    ``keep_terminal`` pivots at ``t`` itself when ``(t, X(t))`` is an atom
    and otherwise coincides with ``skip_terminal``.
    """
    if variant not in ("skip_terminal", "keep_terminal"):
        raise ValueError(f"unknown variant {variant!r}")
    t = path.end
    xt = path.positions[-1]
    pivot = len(path.times) - 2
    if variant == "keep_terminal" and field.atom_at(t, xt % 1.0) is not None:
        if not tau > 0:
            raise ValueError("keep_terminal needs tau > 0")
        pivot = len(path.times) - 1
    t0 = path.times[pivot]
    if not t + tau > t0:
        raise ValueError(f"tau={tau} moves the endpoint before the pivot at {t0}")
    ts = list(path.times[: pivot + 1]) + [t + tau]
    xs = list(path.positions[: pivot + 1]) + [xt + eta]
    return LiftedPath.of(ts, xs)
