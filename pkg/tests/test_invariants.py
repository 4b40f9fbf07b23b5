import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from engelkit.curves import Curve, CurveFamily
from engelkit.errors import NonGeneric
from engelkit.families import (TAU, figure_eight, polynomial_front, torus_knot, unknot_front,
                               unknot_horizontal)
from engelkit.invariants import (front_diagram, horizontal_rotation_number,
                                 loop_rotation_number, parity_check, polygon_linking,
                                 rotation_number, tb_linking_oracle, thurston_bennequin,
                                 winding_of_vectors)
from engelkit.lifts import lift_horizontal, stabilize, tangent_front


def circle(center, normal_axis, n=400):
    t = np.arange(n) / n * TAU
    pts = np.zeros((n, 3))
    a, b = [k for k in range(3) if k != normal_axis]
    pts[:, a], pts[:, b] = np.cos(t), np.sin(t)
    return pts + np.asarray(center, float)


def test_hopf_link_linking_number():
    a = circle([0, 0, 0], 2)
    b = circle([1, 0, 0], 1)
    assert abs(polygon_linking(a, b)) == pytest.approx(1.0, abs=1e-3)


def test_separated_circles_do_not_link():
    assert polygon_linking(circle([0, 0, 0], 2), circle([5, 0, 0], 1)) == \
        pytest.approx(0.0, abs=1e-6)


def test_winding_of_vectors():
    t = np.arange(100) / 100
    v = np.stack([np.cos(3 * TAU * t), -np.sin(3 * TAU * t)], 1)
    assert winding_of_vectors(v) == pytest.approx(-3.0)


def test_unknot_invariants():
    c = unknot_front()
    d = front_diagram(c)
    assert (thurston_bennequin(d), rotation_number(c), len(d.cusps), len(d.crossings)) == \
        (-1, 0, 2, 0)
    assert tb_linking_oracle(c, 1024) == -1


@pytest.mark.parametrize("pq", [(2, 3), (2, 5), (3, 4), (3, 2)])
def test_torus_knot_tb(pq):
    # maximal tb of the positive (p, q) torus knot is pq - p - q
    p, q = pq
    c = torus_knot(p, q)
    d = front_diagram(c)
    assert thurston_bennequin(d) == p * q - p - q
    assert rotation_number(c) == 0
    assert tb_linking_oracle(c, 1024) == p * q - p - q


def test_crossing_signs_positive_for_torus_knots():
    assert all(cr.sign == 1 for cr in front_diagram(torus_knot(2, 5)).crossings)


def test_figure_eight_is_not_a_generic_front():
    with pytest.raises(NonGeneric):
        front_diagram(figure_eight())


def test_front_diagram_text():
    txt = front_diagram(torus_knot(2, 3)).to_text()
    assert txt.startswith("frame geiges-xzw")
    assert txt.count("crossing") == 3 and txt.count("cusp") == 4


def reparametrize(c: Curve, eps: float, k: int, shift: float) -> Curve:
    """c(phi(t)) with phi(t) = t + shift + eps sin(2 pi k t) / (2 pi k), phi' > 0."""
    def phi(t):
        return t + shift + eps * np.sin(TAU * k * t) / (TAU * k)

    def dphi(t):
        return 1 + eps * np.cos(TAU * k * t)
    return Curve(lambda t: c.eval(phi(t)), lambda t: c.deriv(phi(t)) * dphi(t)[:, None],
                 frame=c.frame, samples=c.samples, legendrian=True)


STAB = {1: stabilize(unknot_front(), 1), -1: stabilize(unknot_front(), -1)}


@settings(max_examples=15, deadline=None)
@given(st.floats(-0.9, 0.9), st.integers(1, 4), st.floats(0, 1), st.sampled_from([1, -1]))
def test_rotation_number_reparametrization_invariant(eps, k, shift, sign):
    c = STAB[sign]
    assert rotation_number(reparametrize(c, eps, k, shift)) == rotation_number(c) == sign


def test_parity_on_generated_curves():
    for c in [unknot_front(), torus_knot(2, 3), STAB[1], STAB[-1],
              polynomial_front([1 / 6, 0, -1])]:
        assert parity_check(c)


@pytest.mark.parametrize("sign", [1, -1])
def test_stabilize_bookkeeping(sign):
    c = STAB[sign]
    d = front_diagram(c)
    assert thurston_bennequin(d) == -2
    assert rotation_number(c) == sign
    assert len(d.cusps) == 4
    assert tb_linking_oracle(c, 1024) == -2


def synthetic(k):
    return lambda th: np.array([np.cos(TAU * k * th), np.sin(TAU * k * th)])


def concat(f, g):
    return lambda th: f(2 * th) if th < 0.5 else g(2 * th - 1)


@settings(max_examples=20, deadline=None)
@given(st.integers(-3, 3), st.integers(-3, 3))
def test_loop_rotation_concatenation(k1, k2):
    fam = CurveFamily(lambda th: unknot_front(), 64)
    a = loop_rotation_number(fam, vector_at=synthetic(k1))
    b = loop_rotation_number(fam, vector_at=synthetic(k2))
    ab = loop_rotation_number(fam, vector_at=concat(synthetic(k1), synthetic(k2)))
    assert ab == a + b == k1 + k2


def shift_loop(c):
    """theta -> c(. + theta): the derivative at t = 0 sweeps the whole curve."""
    def at(th):
        return Curve(lambda t: c.eval(t + th), lambda t: c.deriv(t + th), frame=c.frame,
                     samples=c.samples, legendrian=True)
    return CurveFamily(at, 256)


def test_shift_loop_rotation_equals_rot():
    assert loop_rotation_number(shift_loop(STAB[1])) == 1
    assert loop_rotation_number(shift_loop(STAB[-1])) == -1
    assert loop_rotation_number(shift_loop(unknot_front())) == 0


@pytest.mark.parametrize("front", [polynomial_front([1 / 6, 0, -1]),
                                   tangent_front(0.1, 0.02, 0.01),
                                   tangent_front(0.0, 0.0, -0.03)], ids=str)
def test_horizontal_rotation_of_lift(front):
    assert horizontal_rotation_number(lift_horizontal(front)) == rotation_number(front)


def test_horizontal_unknot_rot():
    assert horizontal_rotation_number(unknot_horizontal()) == 0


def test_horizontal_rotation_needs_engel_curve():
    with pytest.raises(ValueError):
        horizontal_rotation_number(unknot_front())
