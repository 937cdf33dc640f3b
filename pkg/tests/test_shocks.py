import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from atomburgers import shocks
from atomburgers.engine import build_potentials, minimizers_at, velocity_profile
from atomburgers.errors import CountViolation, LostShock, WindingAnomaly
from atomburgers.forcing import ForcingField, RegenerationPoint, regeneration_point, sample_compound_poisson
from atomburgers.paths import LiftedPath
from atomburgers.shocks import (classify_global, emission_offsets, forcing_emission, left_right_global,
                                merge_time, shock_at, shock_set, track_shock)
from atomburgers.sweep import split_candidates

from conftest import field_of

EMPTY = ForcingField((), (-1.0, 10.0))
FAN = RegenerationPoint(0.0, 0.2, 0.0, 0.0)


def test_fan_has_one_global_shock():
    sh = shock_set(EMPTY, 0.3, 1.5, anchor=FAN)
    assert len(sh) == 1
    s = sh[0]
    assert s.is_global and s.winding_gap == 1 and s.T_vee == 0.0
    assert s.x == pytest.approx((0.2 + 0.3 * 1.5 + 0.5) % 1.0, abs=1e-14)


def test_shock_between_images_of_an_atom():
    f = field_of([(1.0, 0.2, 5.0)])
    sh = shock_set(f, 0.0, 2.0, anchor=FAN)
    assert [s.x for s in sh] == pytest.approx([0.7], abs=1e-14)
    assert sh[0].u_left == pytest.approx(-sh[0].u_right)


def test_every_shock_strict(ref_field, ref_anchor):
    for th in (-1.0, 0.0, 0.6):
        for s in shock_set(ref_field, th, 13.0, anchor=ref_anchor):
            assert s.u_left > s.u_right
            assert s.T_vee >= ref_anchor.T_star
            assert s.winding_gap in (0, 1) and s.is_global == (s.winding_gap == 1)


def test_merge_time_examples():
    X = LiftedPath.of([0, 1, 2, 3], [0, 0.4, 0.1, 0.5])
    assert merge_time(X, X) == 2.0
    Y = LiftedPath.of([0, 3], [0, -0.5])
    assert merge_time(X, Y) == 0.0


def test_merge_time_dense_scan(ref_field, ref_anchor):
    step = 1e-4
    for th in (-0.7, 0.2, 0.9):
        for s in shock_set(ref_field, th, 12.3, anchor=ref_anchor):
            XL, XR = s.minimizers.leftmost, s.minimizers.rightmost
            XR = XR.shifted(XL.positions[0] - XR.positions[0])
            grid = np.arange(ref_anchor.T_star, 12.3, step)
            E = XL.at(grid) - XR.at(grid)
            last = grid[np.abs(E - np.round(E)) <= 1e-9].max()
            assert abs(last - s.T_vee) <= step + 1e-12


def test_classify_examples(ref_field, ref_anchor):
    kinds = {s.is_global for s in shock_set(ref_field, 0.1, 12.0, anchor=ref_anchor)}
    assert kinds == {True, False}
    # a leftmost path that winds less than the rightmost one is an engine bug
    with pytest.raises(WindingAnomaly):
        classify_global(LiftedPath.of([0, 1], [0, 0.5]), LiftedPath.of([0, 1], [0, 1.5]))


def test_generic_theta_single_global(ref_field, ref_anchor):
    for th in np.linspace(-1, 1, 9):
        p = left_right_global(ref_field, th, 12.0, anchor=ref_anchor)
        assert not p.split and p.s_left == p.s_right


def test_count_violation():
    with pytest.raises(CountViolation):
        left_right_global(EMPTY, 0.0, 1.0, anchor=FAN, shocks=[])


def test_split_pair(ref_field, ref_anchor):
    th, i = split_candidates(ref_field, 14.9, (-1, 1), ref_anchor)[0]
    atom = ref_field.points[i]
    p = left_right_global(ref_field, th, atom.time + 0.01, anchor=ref_anchor)
    assert p.split and p.split_atom == atom and p.s_left != p.s_right
    for X in (p.left.minimizers.rightmost, p.right.minimizers.leftmost):
        assert math.isclose(X.at(atom.time) % 1.0, atom.position, abs_tol=1e-12)
    # the split atom is the only atom on either global shock
    on = [s for s in (p.left, p.right) if ref_field.atom_at(atom.time, s.x, 1e-9)]
    assert on == []
    before = minimizers_at(ref_field, th, atom.time, atom.position, anchor=ref_anchor)
    assert shock_at(before).is_global


def test_emission_example():
    rl, rr = emission_offsets(0.5, 0.0, 0.0, 1.0, 1.0, 0.04)
    assert rr == pytest.approx(0.2039607805437114, abs=1e-12)
    assert rl == pytest.approx(-rr, abs=1e-15)


def test_emission_limits():
    for tau in (1e-6, 1e-9, 1e-12):
        rl, rr = emission_offsets(0.7, 0.3, 0.1, 1.0, 2.0, tau)
        assert abs(rl) < 10 * math.sqrt(tau) and abs(rr) < 10 * math.sqrt(tau)
    lead = [abs(emission_offsets(0.7, 0.3, 0.3, 1.0, 1.0, tau)[1] - math.sqrt(2 * tau * 0.7)) / math.sqrt(tau)
            for tau in (1e-2, 1e-3, 1e-4)]
    assert lead[0] > lead[1] > lead[2]
    with pytest.raises(ValueError):
        emission_offsets(1, 0, 0, 1, 1, 0.0)


def test_emission_balances_actions():
    anchor = RegenerationPoint(0.0, 0.3, 0.0, 1.0)
    f = field_of([(0.0, 0.3, 1.0), (1.0, 0.55, 0.4)], window=(-1, 3))
    atom = f.points[1]
    incoming = minimizers_at(f, 0.2, 1.0, atom.position, anchor=anchor)
    rl, rr = forcing_emission(atom, 0.2, incoming, 0.01, f)
    bps = velocity_profile(f, 0.2, 1.01, anchor=anchor).breakpoints
    for r in (rl, rr):
        assert np.min(np.abs((bps - atom.position - r + 0.5) % 1 - 0.5)) < 1e-9


def test_symmetric_shock_stationary():
    f = field_of([(1.0, 0.2, 5.0)])
    tr = track_shock(f, 0.0, 0.7, 2.0, 2.05, 0.01, anchor=FAN)
    assert all(abs(s.x - 0.7) < 1e-12 for s in tr.samples)


def test_fan_shock_speed():
    # at t = 1/2 the fan shock has u_left = theta + 1 and u_right = theta - 1
    anchor = RegenerationPoint(0.0, 0.0, 0.0, 0.0)
    (s,) = shock_set(EMPTY, 1.0, 0.5, anchor=anchor)
    assert (s.u_left, s.u_right, s.velocity) == pytest.approx((2.0, 0.0, 1.0))
    tr = track_shock(EMPTY, 1.0, s.x, 0.5, 0.6, 0.01, anchor=anchor)
    assert tr.samples[-1].x == pytest.approx(0.1, abs=1e-12)


def test_tracking_speed_matches_average(ref_field, ref_anchor):
    dt = 1e-4
    pot = build_potentials(ref_field, 0.4, ref_anchor)
    t0 = 12.6
    assert not ref_field.between(t0 - 0.01, t0 + 0.01)
    for x0 in velocity_profile(ref_field, 0.4, t0, potentials=pot).breakpoints:
        S = track_shock(ref_field, 0.4, x0, t0, t0 + 30 * dt, dt, potentials=pot).samples
        for p, q, r in zip(S, S[1:], S[2:]):
            fd = ((r.x - p.x + 0.5) % 1 - 0.5) / (r.t - p.t)
            assert abs(fd - 0.5 * (q.u_left + q.u_right)) <= 1e-3


def test_lost_shock(monkeypatch):
    # a heavy atom fires at t ~ 10.9424 and its left shock sweeps into the tracked one within one step
    monkeypatch.setattr(shocks, "MAX_HALVINGS", 0)
    f = sample_compound_poisson(2.0, "exponential:1", (0, 15), 0)
    anchor = regeneration_point(f, 9.0, 0.5)
    pot = build_potentials(f, 1.0, anchor)
    (x0,) = velocity_profile(f, 1.0, 10.94, potentials=pot).breakpoints
    with pytest.raises(LostShock):
        track_shock(f, 1.0, x0, 10.94, 10.95, 1e-3, potentials=pot)
    monkeypatch.undo()
    tr = track_shock(f, 1.0, x0, 10.94, 10.95, 1e-3, potentials=pot)
    assert any(tag == "merge" for _, tag, _ in tr.events)


@given(st.floats(-1, 1), st.floats(10.5, 14.9))
def test_global_count_in_range(theta, t):
    from atomburgers.acceptance import reference_field
    f, anchor = reference_field()
    n = sum(s.is_global for s in shock_set(f, theta, t, anchor=anchor))
    assert n in (1, 2)


def test_emission_drift_is_incoming_slope():
    # with the incoming slope away from theta only tau * slope puts the offsets on the profile
    anchor = RegenerationPoint(0.0, 0.1, 0.0, 1.0)
    f = field_of([(0.0, 0.1, 1.0), (1.0, 0.45, 0.6)], window=(-1, 3))
    theta, tau = -0.2, 1e-3
    incoming = minimizers_at(f, theta, 1.0, 0.45, anchor=anchor)
    slope = incoming.u_left
    assert abs(slope - theta) > 0.3
    bps = velocity_profile(f, theta, 1.0 + tau, anchor=anchor).breakpoints
    root = math.sqrt(2 * tau * (1 + tau) * 0.6)

    def miss(drift):
        return max(np.min(np.abs((bps - 0.45 - (drift + s * root) + 0.5) % 1 - 0.5)) for s in (-1, 1))

    assert miss(tau * slope) < 1e-12
    assert miss(tau * (2 * theta - slope)) > 1e-4
