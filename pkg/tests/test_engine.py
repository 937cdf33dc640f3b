import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomburgers.engine import (MAX_ENUMERATED, boundary_values, build_potentials, minimizers_at,
                                velocity_profile, winding_class_extremes)
from atomburgers.forcing import ForcingField, RegenerationPoint
from atomburgers.oracle import enumerate_minimizers
from atomburgers.paths import action

from conftest import field_of, random_small_field

EMPTY = ForcingField((), (-1.0, 10.0))


def test_single_edge_potential():
    anchor = RegenerationPoint(0.0, 0.1, 0.5, 1.0)
    f = field_of([(1.5, 0.6, 0.5)])
    nodes = build_potentials(f, 0.2, anchor).nodes()
    assert nodes[0].cost == -1.0 and nodes[0].windings == frozenset([0])
    best = min(0.5 * 1.5 * ((0.5 + k) / 1.5 - 0.2) ** 2 for k in range(-5, 6))
    assert nodes[1].cost == pytest.approx(-1.0 + best - 0.5, abs=1e-14)


def test_lift_tie_keeps_both(origin):
    f = field_of([(1.0, 0.5, 0.3)])
    node = build_potentials(f, 0.0, origin).nodes()[1]
    assert set(node.predecessors) == {(0, 0), (0, -1)}
    assert node.cost == pytest.approx(0.125 - 0.3, abs=1e-15)
    assert node.windings == frozenset([0, -1])


def test_empty_field_straight_path(origin):
    ms = minimizers_at(EMPTY, 0.7, 2.0, 0.3, anchor=origin)
    assert ms.n_paths == 1
    (p,) = ms.paths
    assert p.times == (0.0, 2.0)
    # slope closest to theta among 0.15 + k / 2
    assert p.terminal_slope == pytest.approx(0.65)


def test_symmetric_shock(origin):
    # images of the anchor at 0 and 1 are symmetric about x = 0.5
    ms = minimizers_at(EMPTY, 0.0, 1.0, 0.5, anchor=origin)
    assert ms.n_paths == 2
    assert not ms.leftmost.equals(ms.rightmost)
    assert ms.u_left == pytest.approx(0.5) and ms.u_right == pytest.approx(-0.5)
    assert boundary_values(EMPTY, 0.0, 1.0, 0.5, anchor=origin) == (ms.u_left, ms.u_right)


def test_non_shock_values(origin):
    ul, ur = boundary_values(EMPTY, 0.0, 1.0, 0.2, anchor=origin)
    assert ul == ur == pytest.approx(0.2)


@pytest.mark.parametrize("seed", range(12))
def test_potentials_match_oracle(seed):
    rng = np.random.default_rng(seed)
    f = random_small_field(rng, 8)
    anchor = RegenerationPoint(0.0, float(rng.uniform()), 0.0, 0.0)
    theta = float(rng.uniform(-1.5, 1.5))
    pot = build_potentials(f, theta, anchor)
    for node in pot.nodes()[1:]:
        orc = enumerate_minimizers(f, theta, 0.0, anchor.y_star, node.time, node.position)
        assert node.cost + node.weight == pytest.approx(orc.min_action, rel=1e-12, abs=1e-12)
    for t, x in zip(rng.uniform(0.1, 3.0, 8), rng.uniform(0, 1, 8)):
        ms = minimizers_at(f, theta, t, x, potentials=pot)
        orc = enumerate_minimizers(f, theta, 0.0, anchor.y_star, t, x)
        assert ms.action == pytest.approx(orc.min_action, rel=1e-12, abs=1e-12)
        assert ms.last_atom_times() == orc.last_atom_times()


@given(st.integers(0, 10_000), st.floats(-1.5, 1.5))
def test_profile_mean_is_theta(seed, theta):
    rng = np.random.default_rng(seed)
    f = random_small_field(rng, 6)
    prof = velocity_profile(f, theta, 2.9, anchor=RegenerationPoint(0.0, 0.3, 0.0, 0.0))
    assert prof.mean() == pytest.approx(theta, abs=1e-12)


def test_profile_shape(ref_field, ref_anchor):
    prof = velocity_profile(ref_field, 0.4, 12.0, anchor=ref_anchor)
    assert prof.pieces[0].x0 == 0.0 and prof.pieces[-1].x1 == 1.0
    for a, b in zip(prof.pieces, prof.pieces[1:]):
        assert a.x1 == b.x0
    assert np.all(prof.u_left > prof.u_right)


def test_single_node_profile(origin):
    # one candidate: every piece uses the anchor; only the fan shock opposite it remains
    prof = velocity_profile(EMPTY, 0.1, 1.0, anchor=RegenerationPoint(0.0, 0.2, 0.0, 0.0))
    assert {p.node for p in prof.pieces} == {0}
    assert prof.breakpoints == pytest.approx([0.8], abs=1e-14)


def test_profile_breakpoints_match_grid(ref_field, ref_anchor):
    theta, t = -0.3, 13.0
    pot = build_potentials(ref_field, theta, ref_anchor)
    prof = velocity_profile(ref_field, theta, t, potentials=pot)
    xs = np.linspace(0, 1, 10_000, endpoint=False)
    u = np.array([minimizers_at(ref_field, theta, t, x, potentials=pot).u_left for x in xs])
    # u rises between shocks and drops at each one
    drops = xs[1:][np.diff(u) < 0]
    for b in prof.breakpoints:
        assert np.min(np.abs(drops - b)) <= 1e-4 + 1e-12 or b < 1e-4
    assert len(drops) == len([b for b in prof.breakpoints if b >= xs[1]])


def test_profile_agrees_with_minimizers(ref_field, ref_anchor):
    pot = build_potentials(ref_field, 0.8, ref_anchor)
    prof = velocity_profile(ref_field, 0.8, 11.5, potentials=pot)
    for x in np.linspace(0.01, 0.99, 50):
        ms = minimizers_at(ref_field, 0.8, 11.5, x, potentials=pot)
        assert prof.u(x, "left") == pytest.approx(ms.u_left, abs=1e-9)
        assert prof.u(x, "right") == pytest.approx(ms.u_right, abs=1e-9)
    for b in prof.breakpoints:
        ms = minimizers_at(ref_field, 0.8, 11.5, b, potentials=pot)
        assert ms.u_left > ms.u_right


def test_order_sandwich(ref_field, ref_anchor):
    pot = build_potentials(ref_field, 0.0, ref_anchor)
    prof = velocity_profile(ref_field, 0.0, 12.5, potentials=pot)
    for b in prof.breakpoints:
        ms = minimizers_at(ref_field, 0.0, 12.5, b, potentials=pot)
        grid = np.unique(np.concatenate([p.times for p in ms.paths]))
        # compare lifts that agree at the common endpoint
        end = ms.leftmost.positions[-1]
        lo, hi = ms.leftmost.at(grid), ms.rightmost.shifted(end - ms.rightmost.positions[-1]).at(grid)
        for p in ms.paths:
            p = p.shifted(end - p.positions[-1])
            assert np.all(lo - 1e-12 <= p.at(grid)) and np.all(p.at(grid) <= hi + 1e-12)
            assert action(p, 0.0, ref_field) == pytest.approx(ms.action, abs=1e-9)


def test_class_extremes(ref_field, ref_anchor):
    pot = build_potentials(ref_field, 0.25, ref_anchor)
    ms = minimizers_at(ref_field, 0.25, 12.0, 0.123, potentials=pot)
    if len(ms.classes) == 1:
        (cl, cr), = winding_class_extremes(ms).values()
        assert cl.equals(ms.leftmost) and cr.equals(ms.rightmost)
    for b in velocity_profile(ref_field, 0.25, 12.0, potentials=pot).breakpoints:
        ms = minimizers_at(ref_field, 0.25, 12.0, b, potentials=pot)
        ex = winding_class_extremes(ms)
        for m, (cl, cr) in ex.items():
            W = ms.x + m - ref_anchor.y_star
            assert cl.winding() == pytest.approx(W) and cr.winding() == pytest.approx(W)


def test_enumeration_cap(origin):
    # atoms alternate between 0 and 1/2, so every unit step ties between two lifts
    rows = [(float(k), 0.5 * (k % 2), 10.0) for k in range(1, 9)]
    f = field_of(rows, window=(-1, 12))
    ms = minimizers_at(f, 0.0, 9.0, 0.0, anchor=origin)
    assert ms.n_paths == 2**8
    assert ms.overflow and len(ms.paths) == MAX_ENUMERATED
