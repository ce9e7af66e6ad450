import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ellipsoid_fit.errors import DegenerateQuadricError, InvalidInputError, NotAnEllipsoidError
from ellipsoid_fit.quadric import (
    algebraic_distance,
    constraint_block,
    constraint_matrix,
    design_matrix,
    fisher_block,
    invariants_IJ,
    quadric_to_fisher,
)

coeffs = arrays(np.float64, 10, elements=st.floats(-10, 10))


def test_design_column_by_hand():
    # x=1, y=2, z=3: x^2, y^2, z^2, 2yz, 2xz, 2xy, 2x, 2y, 2z, 1
    col = design_matrix([[1.0, 2.0, 3.0]])[:, 0]
    assert np.array_equal(col, [1, 4, 9, 12, 6, 4, 2, 4, 6, 1])


def test_design_matrix_shape_and_validation():
    assert design_matrix(np.zeros((7, 3))).shape == (10, 7)
    with pytest.raises(InvalidInputError):
        design_matrix(np.zeros((4, 2)))
    with pytest.raises(InvalidInputError):
        design_matrix([[0.0, np.inf, 0.0]])


def test_invariants_by_hand():
    v = [1, 2, 3, 0, 0, 0, 0, 0, 0, -1]
    assert invariants_IJ(v) == (6.0, 11.0)
    # k=4: 4*11 - 36 = 8
    assert v @ constraint_matrix(4) @ np.array(v, float) == pytest.approx(8.0)


def test_constraint_block_entries():
    c = constraint_block(6.0)
    assert np.array_equal(np.diag(c), [-1, -1, -1, -6, -6, -6])
    assert c[0, 1] == c[1, 2] == c[0, 2] == 2.0  # k/2 - 1
    assert np.all(c[:3, 3:] == 0)
    big = constraint_matrix(6.0)
    assert big.shape == (10, 10) and np.all(big[6:] == 0) and np.all(big[:, 6:] == 0)


def test_constraint_rejects_small_k():
    with pytest.raises(InvalidInputError):
        constraint_block(3.999)


@given(coeffs, st.floats(4, 1e6))
def test_constraint_form_equals_kJ_minus_I2(v, k):
    i, j = invariants_IJ(v)
    lhs = v @ constraint_matrix(k) @ v
    rhs = k * j - i * i
    assert abs(lhs - rhs) <= 1e-12 * max(1.0, k * np.sum(v[:6] ** 2))


def test_constraint_identity_over_many_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(10_000):
        v = rng.uniform(-1, 1, 10)
        k = rng.uniform(4, 1e3)
        i, j = invariants_IJ(v)
        assert abs(v @ constraint_matrix(k) @ v - (k * j - i * i)) <= 1e-12 * k


def test_unit_sphere_has_zero_algebraic_distance(rng):
    u = rng.standard_normal((50, 3))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, -1.0])
    assert algebraic_distance(v, design_matrix(u)) < 1e-25
    # scaling v scales the distance quadratically
    w = np.array([1, 1, 1, 0, 0, 0, 0, 0, 0, -0.5])
    assert algebraic_distance(w, design_matrix(u)) == pytest.approx(50 * 0.25)


def test_fisher_block_layout():
    k = fisher_block([1, 2, 3, 4, 5, 6, 0, 0, 0, 0])
    assert np.array_equal(k, [[1, 6, 5], [6, 2, 4], [5, 4, 3]])


def test_shifted_sphere_center_and_level():
    # (x-1)^2 + (y-2)^2 + (z-3)^2 = 4
    v = [1, 1, 1, 0, 0, 0, -1, -2, -3, 10]
    form = quadric_to_fisher(v)
    assert np.allclose(form.center, [1, 2, 3])
    assert form.scale == pytest.approx(4.0)
    assert np.allclose(form.normalized, np.eye(3) / 4)


def test_sign_flip_gives_same_form():
    v = np.array([1, 4, 9, 0, 0, 0, 0, 0, 0, -1.0])
    a, b = quadric_to_fisher(v), quadric_to_fisher(-v)
    assert np.allclose(a.normalized, b.normalized)


def test_degenerate_and_cone_quadrics_raise():
    with pytest.raises(DegenerateQuadricError):
        quadric_to_fisher([1, 1, 0, 0, 0, 0, 0, 0, 0, -1])  # cylinder
    with pytest.raises(NotAnEllipsoidError):
        quadric_to_fisher([1, 1, -1, 0, 0, 0, 0, 0, 0, 0])  # cone
