"""Two-sample pooling and weight vector construction."""

from fractions import Fraction

import numpy as np
import pytest

from graphtv import DimensionMismatch, EmptySample, build_two_sample


def test_balanced_pair_weights():
    ts = build_two_sample([[0.0], [1.0]], [[2.0], [3.0]])
    assert ts.n1 == 2 and ts.n2 == 2 and ts.n == 4 and ts.dim == 1
    half = Fraction(1, 2)
    assert ts.a == (half, half, -half, -half)
    assert ts.a_int.tolist() == [2, 2, -2, -2]


def test_unbalanced_weights():
    ts = build_two_sample([[0.0]], [[1.0], [2.0], [3.0]])
    third = Fraction(1, 3)
    assert ts.a == (Fraction(1), -third, -third, -third)
    assert ts.a_int.tolist() == [3, -1, -1, -1]


def test_weights_sum_to_zero_exactly():
    rng = np.random.default_rng(7)
    for _ in range(20):
        n1 = int(rng.integers(1, 30))
        n2 = int(rng.integers(1, 30))
        ts = build_two_sample(rng.random((n1, 3)), rng.random((n2, 3)))
        assert sum(ts.a, Fraction(0)) == 0
        assert int(ts.a_int.sum()) == 0


def test_label_swap_negates_weights():
    x = [[0.1, 0.2], [0.3, 0.4]]
    y = [[0.5, 0.6], [0.7, 0.8], [0.9, 0.1]]
    ab = build_two_sample(x, y)
    ba = build_two_sample(y, x)
    # Weights of the same physical point flip sign under the swap.
    assert ab.a[:2] == tuple(-w for w in ba.a[3:])
    assert ab.a[2:] == tuple(-w for w in ba.a[:3])


def test_pooled_order_and_block_membership():
    x = np.array([[1.0, 2.0]])
    y = np.array([[3.0, 4.0], [5.0, 6.0]])
    ts = build_two_sample(x, y)
    assert np.array_equal(ts.points, np.vstack([x, y]))
    assert ts.is_x(0) and not ts.is_x(1) and not ts.is_x(2)


def test_points_are_read_only():
    ts = build_two_sample([[0.0]], [[1.0]])
    with pytest.raises(ValueError):
        ts.points[0, 0] = 9.0


def test_one_dimensional_input_promoted():
    # A flat vector is a single d-dimensional point.
    ts = build_two_sample([0.0, 1.0], [2.0, 3.0])
    assert ts.points.shape == (2, 2)
    assert ts.n1 == 1 and ts.n2 == 1


def test_validation_errors():
    with pytest.raises(EmptySample):
        build_two_sample([], [[1.0]])
    with pytest.raises(EmptySample):
        build_two_sample([[1.0]], [])
    with pytest.raises(DimensionMismatch):
        build_two_sample([[1.0, 2.0]], [[1.0]])
    with pytest.raises(ValueError):
        build_two_sample([[np.nan]], [[1.0]])
    with pytest.raises(ValueError):
        build_two_sample([[np.inf]], [[1.0]])
