import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.optimize import fsolve
from scipy.special import roots_gegenbauer

from engelkit.curves import (GEIGES, Curve, SelfIntersection, cusp_parameters,
                             find_self_intersections, horizontal_residual, panel_nodes,
                             total_area, xsh)
from engelkit.errors import AreaObstruction, NotRegular, WindowOverlap
from engelkit.families import TAU, polynomial_front, unknot_front
from engelkit.invariants import front_diagram, rotation_number, thurston_bennequin
from engelkit.lifts import (add_area_lobe, add_area_pair, area_at_tangency, area_twist,
                            area_twist_front, check_window, double_stabilization,
                            geiges_deviation, lift_horizontal, stabilize, tangency_reports,
                            tangency_suite, tangent_front)
from engelkit.local import Cumulative

# Gauss rule for the weight (1 - c^2)^(3/2): exact on the polynomial part
XG, WG = roots_gegenbauer(16, 2.0)


def zero_area(coef):
    """Shift the constant term so that the polynomial front has zero area."""
    out = np.array(coef, float)
    out[0] -= np.dot(WG, np.polynomial.Polynomial(coef)(XG)) / WG.sum()
    return out


coefs = st.lists(st.floats(-1, 1), min_size=2, max_size=4)


@settings(max_examples=8, deadline=None)
@given(coefs, st.floats(0.2, 0.8))
def test_lift_exists_iff_zero_area(coef, a):
    assume(max(abs(v) for v in coef[1:]) > 0.2)  # P constant flattens the front
    shifted = zero_area(coef)
    shifted[0] += 0.05
    bent = polynomial_front(shifted, a)
    flat = polynomial_front(zero_area(coef), a)
    assert abs(total_area(flat)) < 1e-12
    lift = lift_horizontal(flat)
    assert horizontal_residual(lift) < 1e-6
    assert abs(total_area(bent)) > 1e-8
    with pytest.raises(AreaObstruction):
        lift_horizontal(bent)


def test_standard_unknot_has_no_lift():
    with pytest.raises(AreaObstruction):
        lift_horizontal(unknot_front())


@settings(max_examples=15, deadline=None)
@given(st.floats(0.01, 0.2) | st.floats(-0.2, -0.01), st.floats(0.3, 0.8))
def test_tangent_front_epsilon_is_2aq(q, a):
    # at c0 = 0 the loop area is exactly 2 a q by construction
    c = tangent_front(0.0, q, 0.0, a)
    reps = tangency_reports(c)
    assert len(reps) == 1
    assert reps[0].epsilon_A == pytest.approx(2 * a * q, rel=1e-9)


def test_tangent_front_perturbations():
    # pushing the strands apart removes the tangency, pushing them through adds two crossings
    assert find_self_intersections(tangent_front(0.1, 0.05, 0.02)) == []
    apart = front_diagram(tangent_front(0.1, 0.05, 0.02))
    through = front_diagram(tangent_front(0.1, 0.05, -0.02))
    assert len(through.crossings) == len(apart.crossings) + 2
    assert find_self_intersections(tangent_front(0.1, 0.05, -0.02)) == []


def test_framing_agrees_with_lower_branch():
    fronts = [f for f, _ in tangency_suite(3, 10)] + [area_twist_front(1, 0.25),
                                                      area_twist_front(0.5, 0.75)]
    for f in fronts:
        for r in tangency_reports(f):
            assert r.framing_sign == 1
            assert r.delta in (1, -1)


def test_area_twist_disk_geometry():
    a, r = 0.5, 0.05
    e1 = tangency_reports(area_twist_front(1.0, 0.25, a, r, r))
    e3 = tangency_reports(area_twist_front(1.0, 0.75, a, r, r))
    assert e1[0].epsilon_A == pytest.approx(2 * a * r, rel=1e-9)
    assert e3[0].epsilon_A == pytest.approx(-2 * a * r, rel=1e-9)
    centre = tangency_reports(area_twist_front(0.0, 0.0, a, r, r))
    assert abs(centre[0].epsilon_A) < 1e-12
    assert not lift_horizontal(area_twist_front(0.0, 0.0)).meta["embedded"]
    for theta in (0.0, 0.1, 0.4, 0.6, 0.9):
        assert lift_horizontal(area_twist_front(1.0, theta)).meta["embedded"]


def test_area_twist_loop_is_embedded_and_zero_area():
    fam = area_twist(8)
    for th in fam.thetas():
        c = fam(th)
        assert c.meta["embedded"]
        assert abs(total_area(c.meta["base"])) < 1e-12


@pytest.mark.parametrize("seed", [0, 1])
def test_tangency_suite_certificate(seed):
    from engelkit.curves import brute_force_self_intersections
    for front, expected in tangency_suite(seed, 10):
        lift = lift_horizontal(front)
        assert lift.meta["embedded"] == expected
        assert (not brute_force_self_intersections(lift, 2048)) == expected


# --------------------------------------------------------------------------
# a tangency sliding through a cusp


def _x(u): return np.cos(u) - 0.6 * np.cos(2 * u) + 0.15 * np.sin(u)
def _dx(u): return -np.sin(u) + 1.2 * np.sin(2 * u) + 0.15 * np.cos(u)
def _ddx(u): return -np.cos(u) + 2.4 * np.cos(2 * u) - 0.15 * np.sin(u)


def _bump(u, c, h, deriv=False):
    s = (u - c) / h
    out = np.zeros_like(s)
    m = np.abs(s) < 1
    e = np.exp(-1 / (1 - s[m] ** 2))
    out[m] = e * (-2 * s[m] / (1 - s[m] ** 2) ** 2) / h if deriv else e
    return out


def four_cusp_front(l1: float, l2: float) -> Curve:
    """Closed front with four cusps; l1, l2 steer the slope on two strands."""
    def w0(u, d=False):
        base = -np.sin(u) if d else np.cos(u)
        base = np.cos(u) if d else np.sin(u)
        return base + l1 * _bump(u, 1.64, 0.3, d) + l2 * _bump(u, 0.5, 0.4, d)
    nd, wt = panel_nodes(np.linspace(0, 1, 513))
    uu = TAU * nd - np.pi
    kap = np.dot(wt, w0(uu) * _dx(uu)) / np.dot(wt, _dx(uu) ** 2)  # closes the height

    def w(u): return w0(u) - kap * _dx(u)
    def dw(u): return w0(u, True) - kap * _ddx(u)
    cum = Cumulative(lambda t: TAU * w(TAU * t - np.pi) * _dx(TAU * t - np.pi), 0.0, 1.0, 512)

    def f(t):
        u = TAU * t - np.pi
        return np.stack([_x(u), cum(t), w(u)], 1)

    def df(t):
        u = TAU * t - np.pi
        return np.stack([TAU * _dx(u), TAU * w(u) * _dx(u), TAU * dw(u)], 1)
    return Curve(f, df, frame=GEIGES, legendrian=True)


def test_epsilon_flips_through_a_cusp():
    base = four_cusp_front(0.0, 0.0)
    tc = min(cusp_parameters(base), key=lambda t: abs(t - 0.324))
    guess = [0.7617, -3.8, -6.0]
    eps, order = {}, {}
    for d in (-0.01, -0.005, 0.005, 0.01):
        tT = tc + d

        def resid(v):
            c = four_cusp_front(v[1], v[2])
            return c.eval([v[0]])[0] - c.eval([tT])[0]
        sol = fsolve(resid, guess, xtol=1e-13)
        guess = sol
        c = four_cusp_front(sol[1], sol[2])
        assert np.max(np.abs(resid(sol))) < 1e-10
        _, _, _, dx, dw, _ = xsh(c, [tT, sol[0]])
        order[d] = np.sign(dw[0] / dx[0] - dw[1] / dx[1])
        s = SelfIntersection(tT, float(sol[0]), tuple(c.eval([tT])[0]), 0.0)
        eps[d] = area_at_tangency(c, s).epsilon_A
    # no higher-contact tangency on either side: the front curvatures keep their order
    assert order[-0.01] == order[-0.005] and order[0.005] == order[0.01]
    assert np.sign(eps[-0.01]) == np.sign(eps[-0.005]) != np.sign(eps[0.005]) == \
        np.sign(eps[0.01])
    # the loop area itself is continuous through the cusp
    assert abs(abs(eps[-0.005]) - abs(eps[0.005])) < 0.05 * abs(eps[0.005])


# --------------------------------------------------------------------------
# lobes and stabilizations


@settings(max_examples=10, deadline=None)
@given(st.floats(0.001, 0.02) | st.floats(-0.02, -0.001), st.integers(1, 4))
def test_lobe_shifts_area(A, N):
    c = unknot_front()
    lobe = add_area_lobe(c, 0.3, A, N=N)
    assert total_area(lobe) - total_area(c) == pytest.approx(A, abs=1e-8)


def test_lobe_outside_window_is_untouched():
    c = unknot_front()
    lobe = add_area_lobe(c, 0.3, 0.01, eps=0.05)
    t = np.array([0.1, 0.2, 0.24])
    assert np.array_equal(lobe.eval(t), c.eval(t))
    t = np.array([0.36, 0.45])
    assert np.allclose(lobe.eval(t)[:, 0], c.eval(t)[:, 0])


def test_pair_and_inverse_stay_close():
    c = unknot_front()
    A, N, e = 0.005, 2, 0.05
    out = add_area_pair(c, 0.3, 0.7, A, N, eps=e)
    back = add_area_pair(out, 0.15, 0.85, -A, N, eps=e)
    assert abs(total_area(back) - total_area(c)) < 1e-8
    bound = max(geiges_deviation(c, add_area_lobe(c, p, A, N, eps=e), p - e, p + e)
                for p in (0.15, 0.3, 0.7, 0.85))
    assert geiges_deviation(c, back, 0.0, 1.0) <= 2 * bound


def test_pair_rejects_overlapping_windows():
    with pytest.raises(WindowOverlap):
        add_area_pair(unknot_front(), 0.3, 0.35, 0.01)


def test_windows_must_be_regular():
    with pytest.raises(NotRegular):
        check_window(unknot_front(), 0.45, 0.55)  # contains the cusp at t = 1/2
    with pytest.raises(NotRegular):
        stabilize(unknot_front(), 1, loc=0.99)


def test_double_stabilization_unknot():
    c = unknot_front()
    a = 2e-4
    r = double_stabilization(c, loc=0.35, a=a)
    d0, d1 = front_diagram(c), front_diagram(r.curve)
    assert thurston_bennequin(d1) == thurston_bennequin(d0) - 2
    assert rotation_number(r.curve) == rotation_number(c)
    assert len(d1.cusps) == len(d0.cusps) + 2
    assert len(d1.crossings) == len(d0.crossings) + 1
    assert abs(r.report.epsilon_A) == pytest.approx(a, rel=1e-6)
    assert len(find_self_intersections(r.tangency_curve)) == 1
    assert 0.5 < r.u_star < 1.0
    assert find_self_intersections(r.family(0.25)) == []


def test_double_stabilization_rejects_bad_input():
    with pytest.raises(ValueError):
        double_stabilization(unknot_front(), loc=0.35, a=0.0)
    with pytest.raises(NotRegular):
        double_stabilization(unknot_front(), loc=0.02)
