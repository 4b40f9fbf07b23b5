import numpy as np
import pytest
from hypothesis import assume, given, settings, strategies as st
from scipy.spatial.transform import Rotation

from engelkit.degree import (SphereMap, antipodal_s2, antipodal_s3, degree_3_to_s3,
                             degree_regular_value, degree_s2, degree_s2_result,
                             degree_s2_table, identity_s2, kalman_capping_disk, kalman_degree,
                             kalman_loop, kalman_obstruction_sphere, power_circle, reflect, s2_grid, square_s3,
                             suspension_s2, winding_number)
from engelkit.errors import BadParameters, InterpolationDegenerate


def test_identity_and_antipodal_s2():
    assert degree_s2(identity_s2()) == 1
    assert degree_s2(antipodal_s2()) == -1


def test_antipodal_and_square_s3():
    assert degree_3_to_s3(antipodal_s3()) == 1
    assert degree_3_to_s3(square_s3()) == 2


@pytest.mark.parametrize("k", [-3, -1, 0, 2, 4])
def test_suspension_degree(k):
    assert degree_s2(suspension_s2(k)) == k
    assert degree_s2(reflect(suspension_s2(k))) == -k


@pytest.mark.parametrize("k", [-2, 0, 1, 5])
def test_power_circle(k):
    assert winding_number(power_circle(k)) == k


def rotated(f, seed):
    """Random rotations before and after f: same degree, no aligned poles."""
    R1, R2 = Rotation.random(2, random_state=seed)
    return SphereMap("sphere2", lambda x: R2.apply(f(R1.apply(np.asarray(x, float)))),
                     name=f"rot({f.name})")


SYNTHETIC = [rotated(g, s) for s, g in enumerate(
    [identity_s2(), antipodal_s2(), suspension_s2(2), suspension_s2(-3),
     reflect(suspension_s2(3)), suspension_s2(4), reflect(identity_s2()), suspension_s2(0),
     suspension_s2(5), reflect(suspension_s2(-2))])]


@pytest.mark.parametrize("f", SYNTHETIC, ids=lambda f: f.name)
def test_quadrature_agrees_with_regular_value_count(f):
    q = np.array([0.3, -0.5, 0.81])
    assert degree_s2(f) == degree_regular_value(f, q)


def test_regular_value_on_s3_and_circle():
    q = np.array([0.2, 0.4, -0.3, 0.84])
    assert degree_regular_value(square_s3(), q) == 2
    assert degree_regular_value(antipodal_s3(), q) == 1
    assert degree_regular_value(power_circle(3), np.array([0.6, 0.8])) == 3


def test_degree_from_table():
    F = suspension_s2(3)(s2_grid(64).reshape(-1, 3)).reshape(65, 129, 3)
    r = degree_s2_table(F)
    assert (r.degree, r.grid) == (3, 64)
    with pytest.raises(BadParameters):
        degree_s2_table(F[:, :-1])


def test_grid_refinement_reduces_defect():
    f = rotated(suspension_s2(2), 11)
    d = [degree_s2_result(f, n).defect for n in (16, 64)]
    assert d[1] <= d[0]
    assert d[1] < 1e-6


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.integers(3, 12))
def test_table_area_is_always_an_integer(seed, n):
    # constant pole rows and a periodic seam close the triangulated surface,
    # so its signed area is a whole number of spheres even for random data
    rng = np.random.default_rng(seed)
    F = rng.normal(size=(n + 1, 2 * n + 1, 3))
    F[0], F[-1] = F[0, 0], F[-1, 0]
    F[:, -1] = F[:, 0]
    F /= np.linalg.norm(F, axis=-1, keepdims=True)
    r = degree_s2_table(F)
    assert r.defect < 1e-9


def test_undersampled_map_gives_the_wrong_integer():
    # hence the grid must resolve the map; the default grid does for these
    assert degree_s2_result(suspension_s2(40), 8).degree != 40
    assert degree_s2_result(suspension_s2(40), 64).degree == 40


def test_kalman_loop_basics():
    loop = kalman_loop(5, 2, 2, 4)
    z = loop.gamma(0.3, np.linspace(0, 1, 17))
    assert np.allclose(np.linalg.norm(z, axis=-1), np.sqrt(2))
    assert loop.min_framing_norm() > 0
    with pytest.raises(BadParameters):
        kalman_loop(4, 2, 2, 2)
    with pytest.raises(BadParameters):
        kalman_loop(5, 2, 1, 2)


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_capping_disk(alpha):
    disk = kalman_capping_disk(alpha)
    th = np.linspace(0, 1, 33)
    assert np.allclose(disk.matrix(np.zeros_like(th), th), np.eye(3), atol=1e-12)
    assert np.allclose(disk.matrix(np.ones_like(th), th), disk.boundary(th), atol=1e-12)
    # the boundary loop turns e_x 2 alpha times about the z-axis
    ex = np.array([1.0, 0, 0])
    turn = SphereMap("circle", lambda t: (disk.boundary(t) @ ex)[:, :2])
    assert winding_number(turn) == 2 * alpha


def test_kalman_degree_scales_with_alpha():
    base = kalman_degree(5, 2, 1).degree
    assert base != 0
    for alpha in (2, 3):
        assert kalman_degree(5, 2, alpha).degree == alpha * base


def test_kalman_degree_matches_regular_value():
    f = kalman_obstruction_sphere(5, 2, 2)
    assert degree_regular_value(f, np.array([0.31, 0.52, -0.79])) == kalman_degree(5, 2, 2).degree


@settings(max_examples=10, deadline=None)
@given(st.floats(0.0, 1.0))
def test_kalman_degree_independent_of_t0(t0):
    # expected from the construction; measured: the sign follows t0 (see notes)
    try:
        d = kalman_degree(5, 2, 1, t0=t0, grid=128).degree
    except InterpolationDegenerate:
        assume(False)
    assert d == kalman_degree(5, 2, 1, t0=0.1, grid=128).degree
