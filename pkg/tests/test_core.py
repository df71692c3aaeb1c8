import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ntunet.core import (
    InputError,
    NetworkData,
    PairwiseTransform,
    angle_domain,
    angles_to_direction,
    as_direction,
    direction_to_angles,
    pairwise_index,
    register_transform,
)

finite = st.floats(-5, 5, allow_nan=False)


def test_symmetric_abs_diff_example():
    w = PairwiseTransform("symmetric_abs_diff")
    out = pairwise_index(w, [0.2, -0.1, 0.4], [-0.3, -0.1, 0.1])
    np.testing.assert_allclose(out, [0.5, 0.0, 0.3], atol=1e-15)


def test_identical_inputs_give_zero():
    w = PairwiseTransform("symmetric_abs_diff")
    x = np.array([0.3, -0.2, 0.1])
    assert np.array_equal(pairwise_index(w, x, x), np.zeros(3))


def test_asymmetric_last_coord_hand_values():
    w = PairwiseTransform("asymmetric_last_coord")
    a = pairwise_index(w, [0, 0, 0.3], [0, 0, 0.6])
    b = pairwise_index(w, [0, 0, 0.6], [0, 0, 0.3])
    np.testing.assert_allclose(a, [0, 0, 0.0], atol=1e-15)
    np.testing.assert_allclose(b, [0, 0, 0.6], atol=1e-12)
    assert not np.array_equal(a, b)


def test_dimension_mismatch():
    w = PairwiseTransform("symmetric_abs_diff")
    with pytest.raises(InputError):
        pairwise_index(w, [0.1, 0.2], [0.1, 0.2, 0.3])


@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3))
def test_symmetric_variant_is_exactly_symmetric(x, y):
    w = PairwiseTransform("symmetric_abs_diff")
    assert np.array_equal(pairwise_index(w, x, y), pairwise_index(w, y, x))


@given(st.lists(finite, min_size=3, max_size=3), st.lists(finite, min_size=3, max_size=3))
def test_asymmetric_variant_differs_generically(x, y):
    if x[2] == y[2] or abs(2 * x[2] - y[2]) == abs(2 * y[2] - x[2]):
        return
    w = PairwiseTransform("asymmetric_last_coord")
    assert not np.array_equal(pairwise_index(w, x, y), pairwise_index(w, y, x))


def test_custom_registry():
    register_transform("sq_diff_test", lambda x, y: (x - y) ** 2)
    w = PairwiseTransform("sq_diff_test")
    np.testing.assert_allclose(pairwise_index(w, [1.0, 2.0], [0.0, 0.0]), [1.0, 4.0])
    with pytest.raises(InputError):
        PairwiseTransform("not_registered")


def test_matrix_matches_pairwise_index():
    rng = np.random.default_rng(0)
    X = rng.uniform(-0.5, 0.5, size=(7, 3))
    for name in ("symmetric_abs_diff", "asymmetric_last_coord"):
        w = PairwiseTransform(name)
        W = w.matrix(X)
        for i in range(7):
            for k in range(7):
                np.testing.assert_array_equal(W[i, k], pairwise_index(w, X[i], X[k]))


def test_angle_examples():
    np.testing.assert_allclose(angles_to_direction([0.0, 0.0]), [1, 0, 0], atol=1e-15)
    for t2 in (-2.0, 0.0, 1.3):
        np.testing.assert_allclose(angles_to_direction([np.pi / 2, t2]), [0, 0, 1], atol=1e-15)
    np.testing.assert_allclose(
        angles_to_direction([math.asin(1 / math.sqrt(3)), math.pi / 4]), np.ones(3) / math.sqrt(3), atol=1e-15
    )


def test_inverse_examples():
    np.testing.assert_array_equal(direction_to_angles([1.0, 0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_allclose(direction_to_angles([0.0, 0.0, 1.0]), [np.pi / 2, 0.0])
    b = np.ones(3) / np.sqrt(3)
    assert np.linalg.norm(angles_to_direction(direction_to_angles(b)) - b) < 1e-10


@pytest.mark.parametrize("d", [2, 3, 4, 6])
def test_roundtrip_10k(d):
    rng = np.random.default_rng(d)
    B = rng.normal(size=(10_000, d))
    B /= np.linalg.norm(B, axis=1)[:, None]
    back = angles_to_direction(direction_to_angles(B))
    assert np.max(np.linalg.norm(back - B, axis=1)) < 1e-10
    th = direction_to_angles(B)
    lo, hi = angle_domain(d)
    assert np.all(th >= lo) and np.all(th <= hi)


@settings(max_examples=200)
@given(st.lists(st.floats(-3, 3, allow_nan=False), min_size=1, max_size=5))
def test_angles_give_unit_vectors(theta):
    b = angles_to_direction(theta)
    assert abs(np.linalg.norm(b) - 1.0) < 1e-12


def test_pole_convention_higher_d():
    th = direction_to_angles([0.0, 0.0, 0.0, 1.0])
    np.testing.assert_allclose(th, [np.pi / 2, 0.0, 0.0])


def test_as_direction_rejects_zero():
    with pytest.raises(InputError):
        as_direction([0.0, 0.0])


def test_network_validation():
    X = np.zeros((3, 1))
    with pytest.raises(InputError):
        NetworkData(np.array([[0, 1, 0], [0, 0, 0], [0, 0, 0]]), X)
    with pytest.raises(InputError):
        NetworkData(np.eye(3, dtype=int), X)
    with pytest.raises(InputError):
        NetworkData(np.zeros((3, 3)), np.array([[0.0], [np.nan], [1.0]]))
    net = NetworkData(np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]]), X)
    assert net.n == 3 and net.density == pytest.approx(2 / 6)
    with pytest.raises(ValueError):
        net.adjacency[0, 1] = 0
