"""Frames of the space-time picture as theta increases.

Writes ``frame_%04d.svg`` plus ``index.csv`` and marks which frames sit at a
theta where the global shock splits.  Assemble a movie with any external tool.
"""

import argparse
import csv
from pathlib import Path

import numpy as np

from atomburgers.acceptance import reference_field
from atomburgers.config import FrameSpec
from atomburgers.render import render_frame
from atomburgers.sweep import split_candidates

ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
ap.add_argument("--seed", type=int, default=0)
ap.add_argument("--frames", type=int, default=60)
ap.add_argument("--theta", type=float, nargs=2, default=(-1.0, 1.0))
ap.add_argument("--t-view", type=float, nargs=2, default=(9.0, 14.9))
ap.add_argument("--out", default="out/animation")
args = ap.parse_args()

field, anchor = reference_field(args.seed)
spec = FrameSpec(t_view=tuple(args.t_view), rows=80, n_minimizers=32)
out = Path(args.out)
out.mkdir(parents=True, exist_ok=True)

thetas = list(np.linspace(*args.theta, args.frames))
splits = {th for th, _ in split_candidates(field, args.t_view[1], args.theta, anchor)}
thetas = sorted(set(thetas) | splits)

with open(out / "index.csv", "w", newline="") as fh:
    w = csv.writer(fh)
    w.writerow(["frame", "theta", "split"])
    for k, th in enumerate(thetas):
        name = f"frame_{k:04d}.svg"
        (out / name).write_text(render_frame(field, th, anchor, spec))
        w.writerow([name, repr(float(th)), int(th in splits)])
        print(f"{name} theta={th:+.6f}{'  split' if th in splits else ''}")
