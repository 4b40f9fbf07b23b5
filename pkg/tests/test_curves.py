import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad

from engelkit.curves import (CONTACT, ENGEL, GEIGES, Curve, as_frame,
                             brute_force_self_intersections, find_self_intersections,
                             geiges_project, horizontal_residual, legendrian_residual,
                             segment_area, table_curve, total_area)
from engelkit.errors import HorizontalViolation
from engelkit.families import (TAU, circle_xz, figure_eight, polynomial_front,
                               stereographic_torus_knot, torus_knot, unknot_front,
                               unknot_horizontal)
from engelkit.lifts import lift_horizontal, tangent_front


def ellipse(A, B):
    return Curve(lambda t: np.stack([A * np.cos(TAU * t), B * np.sin(TAU * t), 0 * t], 1),
                 lambda t: np.stack([-A * TAU * np.sin(TAU * t), B * TAU * np.cos(TAU * t),
                                     0 * t], 1), frame=GEIGES)


def test_circle_area_is_minus_pi():
    # loop integral of z dx over the counterclockwise unit circle
    assert total_area(circle_xz()) == pytest.approx(-np.pi, abs=1e-12)


def test_unknot_front_area_closed_form():
    # integral of a sin^3 u (-sin u) du over a period = -3 pi a / 4
    for a in (0.3, 0.5, 0.8):
        assert total_area(unknot_front(a)) == pytest.approx(-0.75 * np.pi * a, abs=1e-12)


def test_polynomial_front_area_against_quad():
    coef = [0.3, -0.2, 0.7, 0.1]
    a = 0.4
    P = np.polynomial.Polynomial(coef)
    ref = -2 * a * quad(lambda c: (1 - c * c) ** 1.5 * P(c), -1, 1, epsabs=1e-14)[0]
    assert total_area(polynomial_front(coef, a)) == pytest.approx(ref, abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.2, 3.0))
def test_ellipse_area(A, B):
    assert total_area(ellipse(A, B)) == pytest.approx(-np.pi * A * B, rel=1e-12)


@settings(max_examples=20, deadline=None)
@given(st.floats(0.0, 1.0), st.floats(0.0, 1.0))
def test_segment_areas_add_up(t0, t1):
    c = unknot_front()
    lo, hi = sorted((t0, t1))
    total = segment_area(c, 0, lo) + segment_area(c, lo, hi) + segment_area(c, hi, 1.0)
    assert total == pytest.approx(total_area(c), abs=1e-11)


@pytest.mark.parametrize("make", [unknot_front, lambda: torus_knot(2, 3),
                                  lambda: polynomial_front([0.2, 1, -0.5])])
def test_area_quadrature_converges(make):
    # d(N) = |A(N) - A(2N)|; trapezoid errors oscillate, so the quadratic rate
    # is checked across two doublings: d(4N) <= d(N) / 16, down to round-off
    c = make()
    vals = [total_area(c, n) for n in (32, 64, 128, 256, 512, 1024, 2048)]
    diffs = [abs(vals[k] - vals[k + 1]) for k in range(len(vals) - 1)]
    for d0, d2 in zip(diffs, diffs[2:]):
        assert d2 <= max(d0 / 16, 1e-14)


def test_legendrian_residuals():
    assert legendrian_residual(unknot_front()) < 1e-12
    assert legendrian_residual(torus_knot(3, 4)) < 1e-10
    assert legendrian_residual(unknot_front(frame=CONTACT)) < 1e-12
    assert legendrian_residual(circle_xz()) > 0.5


def test_frame_conversion_round_trip():
    c = unknot_front()
    back = as_frame(as_frame(c, CONTACT), GEIGES)
    t = np.linspace(0, 1, 333, endpoint=False)
    assert np.max(np.abs(back.eval(t) - c.eval(t))) == 0.0


def test_geiges_project_rejects_non_horizontal():
    bad = Curve(lambda t: np.stack([np.cos(TAU * t), np.sin(TAU * t), 0 * t, 0 * t], 1),
                frame=ENGEL)
    with pytest.raises(HorizontalViolation):
        geiges_project(bad)


@pytest.mark.parametrize("front", [unknot_horizontal().meta["base"],
                                   tangent_front(0.1, 0.02, 0.01, 0.4),
                                   tangent_front(-0.2, 0.0, -0.02, 0.7)], ids=str)
def test_lift_round_trip(front):
    assert abs(total_area(front)) < 1e-12
    lift = lift_horizontal(front)
    t = np.linspace(0, 1, 1001, endpoint=False)
    # compare the lift's own coordinates, not the stored base curve
    assert np.max(np.abs(lift.eval(t)[:, [0, 2, 3]] - front.eval(t))) < 1e-9
    assert horizontal_residual(lift) < 1e-6


def test_lift_y_closes():
    lift = unknot_horizontal()
    assert abs(lift.eval(1 - 1e-12)[0, 1] - lift.eval(0.0)[0, 1]) < 1e-9


def test_table_curve_interpolates():
    t = np.arange(64) / 64
    pts = unknot_front().eval(t)
    c = table_curve(t, pts, frame=GEIGES, legendrian=True)
    assert np.max(np.abs(c.eval(t) - pts)) < 1e-12
    assert total_area(c) == pytest.approx(total_area(unknot_front()), abs=1e-3)


FAMILIES = [figure_eight(), stereographic_torus_knot(5, 2), stereographic_torus_knot(2, 3),
            unknot_front(), torus_knot(2, 3), polynomial_front([0, 1])]


@pytest.mark.parametrize("c", FAMILIES, ids=lambda c: c.name)
def test_self_intersections_match_brute_force(c):
    fast = find_self_intersections(c, 4096)
    slow = brute_force_self_intersections(c, 4096)
    assert len(fast) == len(slow)
    key = lambda s: (s.t0, s.t1)
    for a, b in zip(sorted(fast, key=key), sorted(slow, key=key)):
        assert abs(a.t0 - b.t0) < 1e-6 and abs(a.t1 - b.t1) < 1e-6


def test_figure_eight_double_point():
    s = find_self_intersections(figure_eight())
    assert len(s) == 1
    assert sorted((s[0].t0 % 1, s[0].t1 % 1)) == pytest.approx([0.0, 0.5], abs=1e-9)


def test_stereographic_torus_formula():
    c = stereographic_torus_knot(5, 2)
    t = np.array([0.0, 0.1])
    u, v = TAU * 5 * t, TAU * 2 * t
    ref = np.stack([(np.cos(v) + 2) * np.cos(u), (np.cos(v) + 2) * np.sin(u), -np.sin(v)], 1)
    assert np.allclose(c.eval(t), ref, atol=1e-15)


@pytest.mark.parametrize("pq", [(2, 3), (3, 2), (5, 2)])
def test_torus_knot_lies_on_the_tube(pq):
    # (r - 2)^2 + z^2 = 1 with r the distance from the z-axis
    a = stereographic_torus_knot(*pq).sample(4000)
    r = np.hypot(a[:, 0], a[:, 1])
    assert np.max(np.abs((r - 2) ** 2 + a[:, 2] ** 2 - 1)) < 1e-12


def test_operations_are_pure():
    c = torus_knot(2, 3)
    assert total_area(c) == total_area(torus_knot(2, 3))
    a = find_self_intersections(figure_eight())
    b = find_self_intersections(figure_eight())
    assert a == b
