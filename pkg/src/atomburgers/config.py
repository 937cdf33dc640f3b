"""Scenario configuration shared by the CLI and the experiment scripts."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .forcing import ForcingField, WeightDist, parse_field, sample_compound_poisson

OUTPUT_ENV = "ATOMBURGERS_OUTPUT_DIR"


class ConfigError(ValueError):
    """Invalid scenario or frame settings."""


@dataclass
class FrameSpec:
    t_view: tuple[float, float] | None = None
    x_view: tuple[float, float] = (0.0, 1.0)
    show_profile: bool = True
    show_minimizers: bool = True
    show_shocks: bool = True
    show_atoms: bool = True
    rows: int = 60
    n_minimizers: int = 24


@dataclass
class Scenario:
    seed: int = 0
    rate: float = 2.0
    weight_dist: str = "exponential:1"
    window: tuple[float, float] = (0.0, 15.0)
    M: float = 0.5
    theta_range: tuple[float, float] = (-1.0, 1.0)
    t_range: tuple[float, float] | None = None
    t_grid: int = 11
    x_grid: int = 101
    theta_grid: int = 21
    track_dt: float = 1e-3
    output_dir: str = "out"
    field_file: str | None = None
    frame: FrameSpec = field(default_factory=FrameSpec)

    def validate(self) -> "Scenario":
        try:
            WeightDist.parse(self.weight_dist)
        except ValueError as e:
            raise ConfigError(str(e)) from None
        if not self.rate > 0:
            raise ConfigError("rate must be positive")
        if not self.window[1] > self.window[0]:
            raise ConfigError("window must have positive length")
        if not self.M > 0:
            raise ConfigError("M must be positive")
        if not self.theta_range[1] >= self.theta_range[0]:
            raise ConfigError("theta_range is reversed")
        lo, hi = self.times
        if not (self.window[0] < lo <= hi <= self.window[1]):
            raise ConfigError(f"t_range {self.t_range} must lie inside the window {self.window}")
        for name in ("t_grid", "x_grid", "theta_grid"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be at least 1")
        if not self.track_dt > 0:
            raise ConfigError("track_dt must be positive")
        return self

    @property
    def times(self) -> tuple[float, float]:
        if self.t_range is not None:
            return tuple(self.t_range)
        a, b = self.window
        return (a + 0.6 * (b - a), b - 1e-9 * (b - a))

    def load_field(self) -> ForcingField:
        if self.field_file:
            return parse_field(Path(self.field_file).read_text(), self.window)
        return sample_compound_poisson(self.rate, self.weight_dist, self.window, self.seed)

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=2)


def _coerce(cls, data: dict):
    known = {f.name: f for f in fields(cls)}
    unknown = set(data) - set(known)
    if unknown:
        raise ConfigError(f"unknown {cls.__name__} keys: {sorted(unknown)}")
    out = {}
    for k, v in data.items():
        if isinstance(v, list):
            v = tuple(v)
        out[k] = v
    return out


def load_scenario(path: str | None = None, overrides: dict | None = None) -> Scenario:
    """Build a scenario from JSON, then the output-dir env var, then explicit overrides."""
    data = {}
    if path:
        try:
            data = json.loads(Path(path).read_text())
        except json.JSONDecodeError as e:
            raise ConfigError(f"{path}: {e}") from None
    frame = data.pop("frame", {})
    kw = _coerce(Scenario, data)
    if os.environ.get(OUTPUT_ENV):
        kw["output_dir"] = os.environ[OUTPUT_ENV]
    for k, v in (overrides or {}).items():
        if v is not None:
            kw[k] = tuple(v) if isinstance(v, list) else v
    kw["frame"] = FrameSpec(**_coerce(FrameSpec, frame))
    try:
        sc = Scenario(**kw)
    except TypeError as e:
        raise ConfigError(str(e)) from None
    return sc.validate()
