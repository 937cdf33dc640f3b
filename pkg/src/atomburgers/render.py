"""SVG frames of the space-time picture at fixed theta.

Time runs upward.  Atoms are yellow dots with a black rim, minimizers are
dotted black, ordinary shocks dark blue and global shocks thicker light blue.
An optional panel on top shows the velocity profile at the last time.
"""

from __future__ import annotations

import xml.etree.ElementTree as ET
from dataclasses import dataclass, field as dc_field

import numpy as np

from .config import FrameSpec
from .engine import build_potentials, minimizers_at, velocity_profile
from .forcing import ForcingField, RegenerationPoint
from .paths import LiftedPath, circ_dist
from .shocks import shock_set

WIDTH = 640
MAIN_H = 640
PROFILE_H = 160
MARGIN = 40


@dataclass
class FrameLayers:
    theta: float
    t_view: tuple[float, float]
    atoms: list[tuple[float, float]] = dc_field(default_factory=list)
    minimizers: list[list[list[tuple[float, float]]]] = dc_field(default_factory=list)
    shocks: list[tuple[float, float, float, float]] = dc_field(default_factory=list)
    global_shocks: list[tuple[float, float, float, float]] = dc_field(default_factory=list)
    shock_points: list[tuple[float, float, bool]] = dc_field(default_factory=list)
    profile: list[list[tuple[float, float]]] = dc_field(default_factory=list)


def wrap_polyline(path: LiftedPath, t0: float, t1: float) -> list[list[tuple[float, float]]]:
    """Pieces of the path inside ``[t0, t1]``, reduced to the circle and cut where it wraps."""
    t0, t1 = max(t0, path.start), min(t1, path.end)
    if not t1 > t0:
        return []
    p = path.restrict(t0, t1)
    pieces, cur = [], []
    for (ta, xa), (tb, xb) in zip(zip(p.times, p.positions), zip(p.times[1:], p.positions[1:])):
        cuts = [ta]
        lo, hi = sorted((xa, xb))
        for n in range(int(np.floor(lo)) + 1, int(np.ceil(hi))):
            cuts.append(ta + (n - xa) / (xb - xa) * (tb - ta))
        cuts.append(tb)
        cuts.sort()
        for r0, r1 in zip(cuts, cuts[1:]):
            mid = 0.5 * (r0 + r1)
            shift = np.floor(p.at(mid))
            a = (r0, float(p.at(r0) - shift))
            b = (r1, float(p.at(r1) - shift))
            if cur and (abs(cur[-1][0] - a[0]) > 1e-12 or abs(cur[-1][1] - a[1]) > 1e-9):
                pieces.append(cur)
                cur = []
            if not cur:
                cur.append(a)
            cur.append(b)
    if cur:
        pieces.append(cur)
    return pieces


def frame_layers(field: ForcingField, theta: float, anchor: RegenerationPoint, spec: FrameSpec) -> FrameLayers:
    t_lo, t_hi = spec.t_view
    pot = build_potentials(field, theta, anchor)
    lay = FrameLayers(float(theta), (t_lo, t_hi))
    for i in field.between(t_lo, t_hi):
        lay.atoms.append((float(field.t[i]), float(field.x[i])))
    rows = np.linspace(max(t_lo, anchor.T_star + 1e-9), t_hi, spec.rows)
    prev = None
    for t in rows:
        cur = [(float(s.x), s.velocity, s.is_global) for s in shock_set(field, theta, t, potentials=pot)]
        lay.shock_points += [(float(t), x, g) for x, _, g in cur]
        if prev is not None:
            tp, pts = prev
            h = t - tp
            for x, v, g in pts:
                if not cur:
                    break
                pred = (x + v * h) % 1.0
                d = circ_dist([c[0] for c in cur], pred)
                k = int(np.argmin(d))
                if d[k] <= 10.0 * h * (1.0 + abs(v)) and abs(cur[k][0] - x) < 0.5:
                    seg = (float(tp), x, float(t), cur[k][0])
                    # a shock running into the global one is drawn with it, since its end moves with theta
                    (lay.global_shocks if g or cur[k][2] else lay.shocks).append(seg)
        prev = (t, cur)
    for x in np.linspace(0.0, 1.0, spec.n_minimizers, endpoint=False):
        ms = minimizers_at(field, theta, t_hi, x, potentials=pot)
        lay.minimizers.append(wrap_polyline(ms.leftmost, t_lo, t_hi))
    prof = velocity_profile(field, theta, t_hi, potentials=pot)
    for p in prof.pieces:
        xs = np.linspace(p.x0, p.x1, 8)
        lay.profile.append([(float(a), float(b)) for a, b in zip(xs, p.u(xs))])
    return lay


def layers_to_svg(lay: FrameLayers, spec: FrameSpec) -> str:
    top = MARGIN + (PROFILE_H + MARGIN if spec.show_profile else 0)
    height = top + MAIN_H + MARGIN
    width = WIDTH + 2 * MARGIN
    t_lo, t_hi = lay.t_view
    x_lo, x_hi = spec.x_view

    def px(x):
        return MARGIN + (x - x_lo) / (x_hi - x_lo) * WIDTH

    def py(t):
        return top + (t_hi - t) / (t_hi - t_lo) * MAIN_H

    svg = ET.Element("svg", xmlns="http://www.w3.org/2000/svg", width=str(width), height=str(height),
                     viewBox=f"0 0 {width} {height}")
    ET.SubElement(svg, "rect", x="0", y="0", width=str(width), height=str(height), fill="white")
    ET.SubElement(svg, "rect", x=f"{MARGIN}", y=f"{top}", width=f"{WIDTH}", height=f"{MAIN_H}",
                  fill="none", stroke="#888")
    title = ET.SubElement(svg, "text", x=f"{MARGIN}", y=f"{MARGIN * 0.6:.1f}", fill="black")
    title.set("font-size", "14")
    title.text = f"theta = {lay.theta:.6f}   t in [{t_lo:.3f}, {t_hi:.3f}]"

    def poly(parent, pts, xf, yf, **attrs):
        s = " ".join(f"{xf(a):.2f},{yf(b):.2f}" for a, b in pts)
        ET.SubElement(parent, "polyline", points=s, fill="none", **attrs)

    if spec.show_minimizers:
        g = ET.SubElement(svg, "g", id="layer-minimizers")
        for pieces in lay.minimizers:
            for pc in pieces:
                poly(g, [(x, t) for t, x in pc], px, py, stroke="black")
                g[-1].set("stroke-dasharray", "1,3")
                g[-1].set("stroke-width", "0.8")
    if spec.show_shocks:
        g = ET.SubElement(svg, "g", id="layer-shocks")
        for t0, x0, t1, x1 in lay.shocks:
            ET.SubElement(g, "line", x1=f"{px(x0):.2f}", y1=f"{py(t0):.2f}", x2=f"{px(x1):.2f}",
                          y2=f"{py(t1):.2f}", stroke="#00008b")
            g[-1].set("stroke-width", "1.5")
        g = ET.SubElement(svg, "g", id="layer-global-shocks")
        for t0, x0, t1, x1 in lay.global_shocks:
            ET.SubElement(g, "line", x1=f"{px(x0):.2f}", y1=f"{py(t0):.2f}", x2=f"{px(x1):.2f}",
                          y2=f"{py(t1):.2f}", stroke="#87cefa")
            g[-1].set("stroke-width", "4")
    if spec.show_atoms:
        g = ET.SubElement(svg, "g", id="layer-atoms")
        for t, x in lay.atoms:
            ET.SubElement(g, "circle", cx=f"{px(x):.2f}", cy=f"{py(t):.2f}", r="4", fill="yellow",
                          stroke="black")
    if spec.show_profile and lay.profile:
        g = ET.SubElement(svg, "g", id="layer-profile")
        us = np.concatenate([[b for _, b in pc] for pc in lay.profile])
        lo, hi = float(us.min()), float(us.max())
        if hi - lo < 1e-9:
            lo, hi = lo - 1, hi + 1

        def qy(u):
            return MARGIN + (hi - u) / (hi - lo) * PROFILE_H

        ET.SubElement(g, "rect", x=f"{MARGIN}", y=f"{MARGIN}", width=f"{WIDTH}", height=f"{PROFILE_H}",
                      fill="none", stroke="#888")
        for pc in lay.profile:
            poly(g, pc, px, qy, stroke="black")
    return ET.tostring(svg, encoding="unicode")


def render_frame(field: ForcingField, theta: float, anchor: RegenerationPoint, spec: FrameSpec) -> str:
    return layers_to_svg(frame_layers(field, theta, anchor, spec), spec)
