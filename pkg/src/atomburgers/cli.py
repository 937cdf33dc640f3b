"""Command-line entry point: ``atomburgers <command> [--config scenario.json] [overrides]``.

Exit codes: 0 success, 2 invalid input, 3 no regeneration anchor in the
window, 4 an acceptance check failed.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np

from . import acceptance
from .config import ConfigError, Scenario, load_scenario
from .engine import build_potentials, velocity_profile
from .errors import DegenerateField, EmptyWindow, LostShock, NoRegeneration
from .forcing import regeneration_point, serialize_field
from .render import render_frame
from .shocks import shock_set, track_shock
from .sweep import global_shock_vs_theta

EXIT_OK, EXIT_INVALID, EXIT_NO_REGEN, EXIT_ACCEPTANCE = 0, 2, 3, 4


def _out(sc: Scenario, name: str) -> Path:
    d = Path(sc.output_dir)
    d.mkdir(parents=True, exist_ok=True)
    return d / name


def _thetas(sc: Scenario) -> np.ndarray:
    return np.linspace(sc.theta_range[0], sc.theta_range[1], sc.theta_grid)


def _times(sc: Scenario) -> np.ndarray:
    lo, hi = sc.times
    return np.linspace(lo, hi, sc.t_grid)


def cmd_sample(sc: Scenario, args) -> int:
    field = sc.load_field()
    path = _out(sc, "field.csv")
    path.write_text(serialize_field(field))
    _out(sc, "scenario.json").write_text(sc.to_json())
    print(f"{len(field)} atoms -> {path}")
    return EXIT_OK


def cmd_solve(sc: Scenario, args) -> int:
    field = sc.load_field()
    anchor = regeneration_point(field, sc.times[0], sc.M)
    xs = np.linspace(0.0, 1.0, sc.x_grid, endpoint=False)
    path = _out(sc, "profile.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "t", "x", "u_left", "u_right", "is_shock", "is_global"])
        for th in _thetas(sc):
            pot = build_potentials(field, th, anchor)
            for t in _times(sc):
                prof = velocity_profile(field, th, t, potentials=pot)
                shocks = {s.x: s for s in shock_set(field, th, t, potentials=pot)}
                rows = [(x, prof.u(x, "left"), prof.u(x, "right"), 0, 0) for x in xs]
                rows += [(x, s.u_left, s.u_right, 1, int(s.is_global)) for x, s in shocks.items()]
                for x, ul, ur, sh, gl in sorted(rows):
                    w.writerow([repr(float(th)), repr(float(t)), repr(float(x)), repr(float(ul)),
                                repr(float(ur)), sh, gl])
    print(f"profiles -> {path}")
    return EXIT_OK


def cmd_shocks(sc: Scenario, args) -> int:
    field = sc.load_field()
    t0, t1 = sc.times
    anchor = regeneration_point(field, t0, sc.M)
    path = _out(sc, "trajectories.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["theta", "t", "x", "u_left", "u_right", "event"])
        for th in _thetas(sc):
            pot = build_potentials(field, th, anchor)
            for x0 in velocity_profile(field, th, t0, potentials=pot).breakpoints:
                try:
                    tr = track_shock(field, th, x0, t0, t1, sc.track_dt, potentials=pot)
                except LostShock as e:
                    print(f"theta={th}: {e}", file=sys.stderr)
                    continue
                for s in tr.samples:
                    w.writerow([repr(float(th)), repr(s.t), repr(s.x), repr(s.u_left), repr(s.u_right), s.event])
    print(f"trajectories -> {path}")
    return EXIT_OK


def cmd_sweep(sc: Scenario, args) -> int:
    field = sc.load_field()
    anchor = regeneration_point(field, sc.times[0], sc.M)
    path = _out(sc, "sweep.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["t", "theta", "s_left", "s_right", "dtheta_s_right"])
        for t in _times(sc):
            sw = global_shock_vs_theta(field, t, sc.theta_range, n_theta=sc.theta_grid, anchor=anchor)
            rows = [(th, sl, sr, d) for th, sl, sr, d in sw.samples]
            rows += [(th, sl, sr, float("nan")) for th, sl, sr, _ in sw.jumps]
            for th, sl, sr, d in sorted(rows):
                w.writerow([repr(float(t)), repr(th), repr(sl), repr(sr), repr(d)])
            if sw.unexplained:
                print(f"t={t}: unexplained jumps in {sw.unexplained}", file=sys.stderr)
    print(f"sweep -> {path}")
    return EXIT_OK


def cmd_verify(sc: Scenario, args) -> int:
    results = acceptance.run_all(quick=args.quick)
    path = _out(sc, "acceptance.csv")
    with path.open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["criterion", "name", "passed", "measured", "threshold", "detail"])
        for r in results:
            print(r.line())
            w.writerow([r.key, r.name, int(r.passed), repr(float(r.measured)), repr(float(r.threshold)), r.detail])
    return EXIT_OK if all(r.passed for r in results) else EXIT_ACCEPTANCE


def cmd_render(sc: Scenario, args) -> int:
    field = sc.load_field()
    spec = sc.frame
    if spec.t_view is None:
        spec.t_view = sc.times
    anchor = regeneration_point(field, spec.t_view[0], sc.M)
    frames = _out(sc, "frames")
    frames.mkdir(exist_ok=True)
    with (frames / "index.csv").open("w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["frame", "theta"])
        for k, th in enumerate(_thetas(sc)):
            name = f"frame_{k:04d}.svg"
            (frames / name).write_text(render_frame(field, th, anchor, spec))
            w.writerow([name, repr(float(th))])
    print(f"{sc.theta_grid} frames -> {frames}")
    return EXIT_OK


COMMANDS = {
    "sample": cmd_sample,
    "solve": cmd_solve,
    "shocks": cmd_shocks,
    "sweep": cmd_sweep,
    "verify": cmd_verify,
    "render": cmd_render,
}


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="atomburgers", description=__doc__.splitlines()[0])
    p.add_argument("command", choices=sorted(COMMANDS))
    p.add_argument("--config", help="scenario JSON file")
    p.add_argument("--seed", type=int)
    p.add_argument("--rate", type=float)
    p.add_argument("--weight-dist", dest="weight_dist")
    p.add_argument("--window", type=float, nargs=2)
    p.add_argument("--M", type=float)
    p.add_argument("--theta-range", dest="theta_range", type=float, nargs=2)
    p.add_argument("--t-range", dest="t_range", type=float, nargs=2)
    p.add_argument("--t-grid", dest="t_grid", type=int)
    p.add_argument("--x-grid", dest="x_grid", type=int)
    p.add_argument("--theta-grid", dest="theta_grid", type=int)
    p.add_argument("--field-file", dest="field_file")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--quick", action="store_true", help="verify: smaller sample counts")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    keys = ("seed", "rate", "weight_dist", "window", "M", "theta_range", "t_range", "t_grid", "x_grid",
            "theta_grid", "field_file", "output_dir")
    try:
        sc = load_scenario(args.config, {k: getattr(args, k) for k in keys})
        return COMMANDS[args.command](sc, args)
    except NoRegeneration as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_NO_REGEN
    except (ConfigError, DegenerateField, EmptyWindow, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
