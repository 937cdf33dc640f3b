"""Atomic space-time forcing on the circle: sampling, CSV I/O and regeneration zones.

A forcing field is a finite set of atoms ``(time, position, weight)`` with
position on the unit circle ``[0, 1)`` and pairwise distinct times, observed
inside a time window.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import DegenerateField, EmptyWindow, NoRegeneration

TIME_RESOLUTION = 1e-12


@dataclass(frozen=True)
class ForcingPoint:
    time: float
    position: float
    weight: float


@dataclass(frozen=True)
class SmallNoiseZone:
    """An atom that is alone in ``[s - M, s + M]`` and heavier than ``1/(4M)``."""

    s: float
    y: float
    weight: float
    M: float


@dataclass(frozen=True)
class RegenerationPoint:
    """Anchor through which every backward minimizer from later times passes."""

    T_star: float
    y_star: float
    M: float
    weight: float = 0.0


@dataclass(frozen=True)
class WeightDist:
    """Distribution of atom weights.

    ``kind`` is one of ``constant`` (params ``(w,)``), ``exponential``
    (params ``(mean,)``) or ``uniform`` (params ``(a, b)``).
    """

    kind: str
    params: tuple[float, ...]

    def __post_init__(self):
        p = self.params
        if self.kind == "constant":
            ok = len(p) == 1 and p[0] > 0
        elif self.kind == "exponential":
            ok = len(p) == 1 and p[0] > 0
        elif self.kind == "uniform":
            ok = len(p) == 2 and 0 < p[0] <= p[1]
        else:
            raise ValueError(f"unknown weight distribution {self.kind!r}")
        if not ok:
            raise ValueError(f"weight distribution {self} must have support in (0, inf)")

    @classmethod
    def parse(cls, text: str) -> "WeightDist":
        """Parse ``"constant:1"``, ``"exponential:0.5"`` or ``"uniform:0.5,2"``."""
        kind, _, rest = text.partition(":")
        params = tuple(float(v) for v in rest.split(",") if v.strip())
        return cls(kind.strip(), params)

    def __str__(self):
        return f"{self.kind}:{','.join(repr(v) for v in self.params)}"

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        if self.kind == "constant":
            return np.full(n, self.params[0])
        if self.kind == "exponential":
            w = rng.exponential(self.params[0], n)
            # exponential draws of exactly 0 are possible in floating point
            return np.where(w > 0, w, np.finfo(float).tiny)
        return rng.uniform(self.params[0], self.params[1], n)


@dataclass(frozen=True)
class ForcingField:
    """Atoms sorted by time together with the observation window."""

    points: tuple[ForcingPoint, ...]
    window: tuple[float, float]

    def __post_init__(self):
        a, b = self.window
        if not b > a:
            raise EmptyWindow(f"window {self.window} has no length")
        prev = -math.inf
        for p in self.points:
            if not p.weight > 0:
                raise DegenerateField(f"non-positive weight at {p}")
            if not 0.0 <= p.position < 1.0:
                raise DegenerateField(f"position outside [0, 1) at {p}")
            if not a < p.time < b:
                raise DegenerateField(f"time outside window at {p}")
            if p.time - prev <= TIME_RESOLUTION:
                raise DegenerateField(f"atom times not distinct near t={p.time}")
            prev = p.time

    @classmethod
    def from_arrays(cls, t, x, w, window) -> "ForcingField":
        t = np.asarray(t, float)
        order = np.argsort(t, kind="stable")
        x = np.asarray(x, float) % 1.0
        x[x >= 1.0] = 0.0  # tiny negatives round up to 1.0
        pts = tuple(ForcingPoint(float(t[i]), float(x[i]), float(np.asarray(w, float)[i])) for i in order)
        return cls(pts, (float(window[0]), float(window[1])))

    def __len__(self):
        return len(self.points)

    @cached_property
    def t(self) -> np.ndarray:
        return np.array([p.time for p in self.points], float)

    @cached_property
    def x(self) -> np.ndarray:
        return np.array([p.position for p in self.points], float)

    @cached_property
    def w(self) -> np.ndarray:
        return np.array([p.weight for p in self.points], float)

    def between(self, s: float, t: float) -> list[int]:
        """Indices of atoms with ``s < time < t``."""
        lo = int(np.searchsorted(self.t, s, side="right"))
        hi = int(np.searchsorted(self.t, t, side="left"))
        return list(range(lo, hi))

    def atom_at(self, time: float, position: float, tol: float = 1e-12) -> ForcingPoint | None:
        """Return the atom located at ``(time, position mod 1)`` if there is one."""
        i = int(np.searchsorted(self.t, time - tol))
        if i < len(self.points) and abs(self.t[i] - time) <= tol:
            d = abs((self.x[i] - position + 0.5) % 1.0 - 0.5)
            if d <= tol:
                return self.points[i]
        return None


def sample_compound_poisson(rate: float, weight_dist: WeightDist | str, window, seed) -> ForcingField:
    """Sample a compound Poisson field with uniform intensity ``rate`` on window x circle."""
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise EmptyWindow(f"window {window} has no length")
    if not rate > 0:
        raise ValueError("rate must be positive")
    if isinstance(weight_dist, str):
        weight_dist = WeightDist.parse(weight_dist)
    rng = np.random.default_rng(seed)
    n = rng.poisson(rate * (b - a))
    t = rng.uniform(a, b, n)
    x = rng.uniform(0.0, 1.0, n)
    w = weight_dist.sample(rng, n)
    return ForcingField.from_arrays(t, x, w, (a, b))


def sample_fixed_count(n: int, weight_dist: WeightDist | str, window, seed) -> ForcingField:
    """Sample ``n`` atoms uniformly on window x circle (a Poisson field conditioned on its count)."""
    a, b = float(window[0]), float(window[1])
    if not b > a:
        raise EmptyWindow(f"window {window} has no length")
    if isinstance(weight_dist, str):
        weight_dist = WeightDist.parse(weight_dist)
    rng = np.random.default_rng(seed)
    t = rng.uniform(a, b, n)
    x = rng.uniform(0.0, 1.0, n)
    w = weight_dist.sample(rng, n)
    return ForcingField.from_arrays(t, x, w, (a, b))


def serialize_field(field: ForcingField) -> str:
    buf = io.StringIO()
    buf.write("t,x,w\n")
    for p in field.points:
        buf.write(f"{p.time!r},{p.position!r},{p.weight!r}\n")
    return buf.getvalue()


def parse_field(text: str, window) -> ForcingField:
    """Parse a ``t,x,w`` CSV into a field; rows may come in any order."""
    reader = csv.DictReader(io.StringIO(text))
    if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["t", "x", "w"]:
        raise ValueError("forcing CSV must have header t,x,w")
    t, x, w = [], [], []
    for row in reader:
        row = {k.strip(): v for k, v in row.items()}
        t.append(float(row["t"]))
        x.append(float(row["x"]))
        w.append(float(row["w"]))
    if any(not v > 0 for v in w):
        raise DegenerateField("weights must be positive")
    return ForcingField.from_arrays(t, x, w, window)


def find_small_noise_zone(field: ForcingField, M: float, before: float) -> SmallNoiseZone | None:
    """Latest zone with ``s <= before - M`` whose whole strip lies inside the window."""
    if not M > 0:
        raise ValueError("M must be positive")
    t = field.t
    a, b = field.window
    for i in range(len(t) - 1, -1, -1):
        s = t[i]
        if s > before - M:
            continue
        if s - M < a or s + M > b:
            continue
        if field.w[i] <= 1.0 / (4.0 * M):
            continue
        if i > 0 and s - t[i - 1] <= M:
            continue
        if i + 1 < len(t) and t[i + 1] - s <= M:
            continue
        return SmallNoiseZone(float(s), float(field.x[i]), float(field.w[i]), float(M))
    return None


def regeneration_point(field: ForcingField, t: float, M: float) -> RegenerationPoint:
    """Anchor for minimizers ending at time ``t``; raises NoRegeneration if none exists."""
    zone = find_small_noise_zone(field, M, t)
    if zone is None:
        raise NoRegeneration(f"window too short: no small-noise zone of half-width {M} before t={t}")
    return RegenerationPoint(zone.s, zone.y, zone.M, zone.weight)


def anchor_from_point(point: ForcingPoint, M: float = 0.0) -> RegenerationPoint:
    """Use an arbitrary atom as the start point of a point-to-point problem."""
    return RegenerationPoint(point.time, point.position, M, point.weight)
