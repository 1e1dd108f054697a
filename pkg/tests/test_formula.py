"""Approximate length/phase calculus: estimates, bounds, triangle defects, Fermat."""

import math

import numpy as np
import pytest

import oracles
from pantcalc import halfspace as hs
from pantcalc import segments as sg
from pantcalc import synth
from pantcalc.errors import (
    DegenerateTriangleError,
    DomainError,
    HypothesisViolationError,
)
from pantcalc.segments import limit_inefficiency as ineff
from pantcalc.synth import BASE_FRAME

RNG = np.random.default_rng(77)
LOG2 = math.log(2.0)


# ---------------------------------------------------------------------------
# limit inefficiency


def test_inefficiency_reference_values():
    assert ineff(0.0) == 0.0
    assert ineff(math.pi / 3) == pytest.approx(2 * LOG2 - math.log(3), abs=1e-15)
    assert ineff(math.pi / 2) == pytest.approx(LOG2, abs=1e-15)


def test_inefficiency_domain():
    with pytest.raises(DomainError):
        ineff(math.pi)
    with pytest.raises(DomainError):
        ineff(-0.1)


def test_inefficiency_increasing_and_convex():
    xs = np.sort(RNG.uniform(0, math.pi * 0.999, size=60))
    vals = [ineff(x) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))
    for _ in range(200):
        a, b, c = np.sort(RNG.uniform(0, math.pi * 0.999, size=3))
        if c - a < 1e-6 or b - a < 1e-9 or c - b < 1e-9:
            continue
        chord = ((c - b) * ineff(a) + (b - a) * ineff(c)) / (c - a)
        assert ineff(b) < chord


def test_inefficiency_is_the_asymptotic_defect():
    # |CA| + |CB| - |AB| tends to I(theta) for angle C = pi - theta
    theta = 1.1
    for L in (5.0, 10.0, 20.0):
        ab = oracles.side_from_sas(L, L, math.pi - theta)
        defect = 2 * L - ab
        assert abs(defect - ineff(theta)) < 3.0 * math.exp(-L)


# ---------------------------------------------------------------------------
# prediction formulas


def test_predict_single_segment_exact():
    s = sg.segment_from_pose(BASE_FRAME, 16.1, 0.7)
    pred = sg.predict_chain(sg.Chain((s,)), L=8.0, theta=math.pi / 2, delta=1e-4)
    assert pred == sg.Prediction(16.1, 0.7, 0.0, 0.0)


def test_predict_two_sixteens_right_angle():
    s = sg.segment_from_pose(BASE_FRAME, 16.0, 0.0)
    t = sg.segment_from_pose(s.terminal.turned(math.pi / 2), 16.0, 0.0)
    chain = sg.Chain((s, t))
    pred = sg.predict_chain(chain, L=7.63, theta=math.pi / 2 + 1e-9, delta=1e-6)
    assert pred.length_est == pytest.approx(32.0 - LOG2, abs=1e-9)
    exact = sg.reduce_chain(chain).length
    assert exact == pytest.approx(math.acosh(math.cosh(16.0) ** 2), abs=1e-9)
    assert abs(exact - pred.length_est) < pred.length_err


def test_predict_cycle_formula_instantiation():
    # four equal segments, equal bends: estimate is 4 l - 4 I(theta)
    theta_bend = 0.4
    pose = BASE_FRAME.turned(theta_bend)
    segs = []
    for _ in range(4):
        seg = sg.segment_from_pose(pose, 17.0, 0.0)
        segs.append(seg)
        pose = seg.terminal.turned(theta_bend)
    cyc = sg.Chain(tuple(segs[:4]), cyclic=True, base_frame=BASE_FRAME)
    pred = sg.predict_cycle(cyc, L=8.0, theta=math.pi / 2, delta=1e-6)
    assert pred.length_est == pytest.approx(4 * 17.0 - 4 * ineff(theta_bend), abs=1e-9)


def test_predict_hypothesis_violations_name_clause():
    s = sg.segment_from_pose(BASE_FRAME, 16.0, 0.0)
    chain = sg.Chain((s,))
    with pytest.raises(HypothesisViolationError) as err:
        sg.predict_chain(chain, L=16.0, theta=math.pi / 2, delta=1e-4)
    assert "length" in err.value.clause
    with pytest.raises(HypothesisViolationError) as err:
        sg.predict_chain(chain, L=2.0, theta=math.pi / 2, delta=1e-4)
    assert "10 log 2" in err.value.clause
    with pytest.raises(HypothesisViolationError) as err:
        sg.predict_chain(chain, L=8.0, theta=4.0, delta=1e-4)
    assert "theta" in err.value.clause

    t = sg.segment_from_pose(s.terminal.turned(1.2), 16.0, 0.0)
    with pytest.raises(HypothesisViolationError) as err:
        sg.predict_chain(sg.Chain((s, t)), L=7.63, theta=1.0, delta=1e-4)
    assert "bending" in err.value.clause

    t2 = sg.segment_from_pose(s.terminal.rotated(0.01), 16.0, 0.0)
    with pytest.raises(HypothesisViolationError) as err:
        sg.predict_chain(sg.Chain((s, t2)), L=7.63, theta=1.0, delta=1e-4)
    assert "consecutive" in err.value.clause


@pytest.mark.parametrize("theta", [math.pi / 3, math.pi / 2])
def test_formula_bound_sweep(theta):
    rng = np.random.default_rng(hash(theta) % 2**32)
    L0 = ineff(theta) + 10 * LOG2
    for trial in range(150):
        L = L0 + rng.uniform(0, 20 - L0)
        delta = 10 ** rng.uniform(-6, -2)
        m = int(rng.integers(1, 9))
        cyclic = trial % 2 == 1
        chain, _ = synth.random_tame_chain(rng, m, L, theta, delta, cyclic=cyclic)
        if cyclic:
            pred = sg.predict_cycle(chain, L, theta, delta)
            exact_l, exact_p = sg.reduce_cycle(chain)
        else:
            pred = sg.predict_chain(chain, L, theta, delta)
            red = sg.reduce_chain(chain)
            exact_l, exact_p = red.length, red.phase
        assert abs(exact_l - pred.length_est) < pred.length_err + 1e-12
        assert hs.circle_distance(exact_p, pred.phase_est) < pred.phase_err + 1e-12


def test_regrouping_constants_decay_below_stated_bound():
    # the per-step constants of the iterative midpoint regrouping sum to
    # less than the packaged error coefficient
    theta, delta = math.pi / 2, 1e-3
    L = ineff(theta) + 10 * LOG2
    for m in (2, 4, 8):
        betas = oracles.regrouping_constants(L, theta, delta, m)
        length_term = sum(
            2 * (m - r + 1) * betas[r] / (L - LOG2) for r in range(1, m)
        )
        packaged = (m - 1) * math.exp((-L + 10 * LOG2) / 2) * math.sin(theta / 2) / (L - LOG2)
        assert length_term < packaged


# ---------------------------------------------------------------------------
# tame triangle bounds


def test_triangle_bounds_formulas():
    a, lo, hi = sg.tame_triangle_bounds(10.0, math.pi / 2)
    assert hi == pytest.approx(LOG2)
    assert a == pytest.approx(math.exp((-10 + 3 * LOG2) / 2) * math.sin(math.pi / 4))
    assert lo == pytest.approx(
        LOG2 - math.exp((-10 + 5 * LOG2) / 2) * math.sin(math.pi / 4) / (10 - LOG2)
    )
    assert 0 < lo < hi


def test_triangle_bounds_tend_to_inefficiency():
    theta = 1.0
    gaps = []
    for L in (10.0, 20.0, 40.0):
        _, lo, hi = sg.tame_triangle_bounds(L, theta)
        assert hi == pytest.approx(ineff(theta))
        gaps.append(hi - lo)
    assert gaps[0] > gaps[1] > gaps[2] > 0


def test_triangle_bounds_boundary_of_precondition():
    a, lo, hi = sg.tame_triangle_bounds(LOG2 + ineff(math.pi / 2), math.pi / 2)
    assert math.isfinite(a) and math.isfinite(lo) and math.isfinite(hi) and a > 0


def test_triangle_bounds_guard():
    with pytest.raises(HypothesisViolationError):
        sg.tame_triangle_bounds(0.5, math.pi / 2)
    with pytest.raises(HypothesisViolationError):
        sg.tame_triangle_bounds(10.0, math.pi)


def test_triangle_inequalities_random():
    # random triangles with |CA|, |CB| > L and angle C = pi - theta obey both
    # both stated inequalities (law-of-cosines oracle)
    rng = np.random.default_rng(3)
    for theta in (math.pi / 3, math.pi / 2, 2.0):
        L = 10.0
        bound_angle, lo, hi = sg.tame_triangle_bounds(L, theta)
        b = L + rng.uniform(0.001, 10.0, size=2000)
        c = L + rng.uniform(0.001, 10.0, size=2000)
        for bb, cc in zip(b, c):
            ab = oracles.side_from_sas(bb, cc, math.pi - theta)
            angle_a = oracles.angle_from_sides(bb, ab, cc)
            angle_b = oracles.angle_from_sides(cc, ab, bb)
            assert angle_a + angle_b < bound_angle
            assert lo < bb + cc - ab < hi + 1e-12


# ---------------------------------------------------------------------------
# Fermat point


def _equilateral(d):
    # three points pairwise equidistant around the vertical axis
    f = BASE_FRAME
    out = []
    for k in range(3):
        direction = hs.rotate_about(f.normal, f.tangent, 2 * math.pi * k / 3)
        pose = sg.FramedPoint(f.position, direction, f.tangent)
        out.append(sg.segment_from_pose(pose, d, 0.0).terminal.position)
    return out


def test_fermat_equilateral_symmetric():
    A, B, C = _equilateral(2.0)
    rep = sg.fermat_point(A, B, C, 0.5)
    d0 = rep.distances[0]
    assert rep.distances[1] == pytest.approx(d0, abs=1e-6)
    assert rep.distances[2] == pytest.approx(d0, abs=1e-6)
    # the center of the configuration is the base point
    assert oracles.distance(rep.point, BASE_FRAME.position) < 1e-5
    assert rep.at_vertex is None


def test_fermat_obtuse_vertex():
    # 150 degree angle at C: the minimizer is C itself
    C = BASE_FRAME.position
    arm1 = sg.FramedPoint(C, BASE_FRAME.normal, BASE_FRAME.tangent)
    A = sg.segment_from_pose(arm1, 2.0, 0.0).terminal.position
    dir2 = hs.rotate_about(BASE_FRAME.normal, BASE_FRAME.tangent, math.radians(150))
    arm2 = sg.FramedPoint(C, dir2, BASE_FRAME.tangent)
    B = sg.segment_from_pose(arm2, 2.0, 0.0).terminal.position
    rep = sg.fermat_point(A, B, C, 0.1)
    assert rep.at_vertex is not None
    assert np.allclose(rep.point, C)
    # descent oracle agrees on the minimal value
    _, fx = oracles.fermat_descent(A, B, C)
    assert sum(rep.distances) <= fx + 1e-5


def test_fermat_random_matches_descent_oracle():
    rng = np.random.default_rng(8)
    for _ in range(5):
        pts = [sg.segment_from_pose(synth.random_pose(rng), rng.uniform(1.0, 2.0), 0.0).terminal.position
               for _ in range(3)]
        try:
            rep = sg.fermat_point(*pts, d=0.01)
        except DegenerateTriangleError:
            continue
        _, fx = oracles.fermat_descent(*pts)
        assert sum(rep.distances) <= fx + 1e-5


def test_fermat_hypothesis_certificate():
    A, B, C = _equilateral(4.0)
    d = 0.5
    rep = sg.fermat_point(A, B, C, d)
    # vertices are ~ 6.9 apart; segments stay far from the opposite vertex
    assert rep.hypothesis_holds
    assert min(rep.distances) > d


def test_fermat_degenerate_triangle():
    s = sg.segment_from_pose(BASE_FRAME, 1.0, 0.0)
    t = sg.segment_from_pose(s.terminal, 1.0, 0.0)
    with pytest.raises(DegenerateTriangleError):
        sg.fermat_point(BASE_FRAME.position, s.terminal.position, t.terminal.position, 0.1)
