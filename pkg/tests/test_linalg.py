import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from ebicr.errors import RankDeficient, ZeroColumn
from ebicr.linalg import (gram_eigenvalue_range, least_squares_fit, normalize_columns,
                          residual_matrix, residual_sq_norm)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def random_problem(seed):
    r = np.random.default_rng(seed)
    N = int(r.integers(3, 30))
    m = int(r.integers(1, N + 1))
    L = int(r.integers(1, 5))
    return r.standard_normal((N, m)), r.standard_normal((N, L)), r


class TestLeastSquares:
    def test_identity_design(self, rng):
        Y = rng.standard_normal((3, 2))
        np.testing.assert_allclose(least_squares_fit(np.eye(3), Y), Y, atol=1e-14)

    def test_mean_of_two_points(self):
        np.testing.assert_allclose(least_squares_fit([[1.0], [1.0]], [[0.0], [2.0]]), [[1.0]])

    def test_line_fit_matches_normal_equations(self):
        # by hand: A^T A = [[3, 3], [3, 5]], A^T y = [3, 5]  ->  x = (0, 1)
        A = np.array([[1.0, 0], [1, 1], [1, 2]])
        Y = np.array([[0.0], [1], [2]])
        np.testing.assert_allclose(least_squares_fit(A, Y), [[0.0], [1.0]], atol=1e-14)

    def test_vector_response(self):
        assert least_squares_fit([[1.0], [1.0]], [0.0, 2.0]).shape == (1, 1)

    def test_rank_deficient(self):
        A = np.array([[1.0, 2.0], [2.0, 4.0], [3.0, 6.0]])
        with pytest.raises(RankDeficient):
            least_squares_fit(A, np.ones((3, 1)))

    def test_too_many_columns(self, rng):
        with pytest.raises(RankDeficient):
            least_squares_fit(rng.standard_normal((2, 3)), np.ones((2, 1)))

    def test_empty_design(self):
        assert least_squares_fit(np.zeros((4, 0)), np.ones((4, 2))).shape == (0, 2)


class TestResiduals:
    def test_square_invertible_gives_zero(self, rng):
        A = rng.standard_normal((5, 5))
        Y = rng.standard_normal((5, 3))
        assert residual_sq_norm(A, Y) <= 1e-10 * np.sum(Y**2)
        np.testing.assert_allclose(residual_matrix(A, Y), 0, atol=1e-10)

    def test_empty_design(self):
        assert residual_sq_norm(np.zeros((2, 0)), np.ones((2, 2))) == 4.0
        Y = np.arange(6.0).reshape(3, 2)
        np.testing.assert_array_equal(residual_matrix(np.zeros((3, 0)), Y), Y)

    def test_two_point_residual(self):
        assert residual_sq_norm([[1.0], [1.0]], [[0.0], [2.0]]) == pytest.approx(2.0)

    def test_orthogonal_complement_unchanged(self):
        A = np.column_stack([np.array([1.0, 1.0, 0.0]) / np.sqrt(2), [0.0, 0.0, 1.0]])
        Y = np.cross(A[:, 0], A[:, 1])[:, None]
        assert np.allclose(A.T @ Y, 0)
        np.testing.assert_allclose(residual_matrix(A, Y), Y, atol=1e-15)


class TestNormalize:
    def test_345(self):
        np.testing.assert_allclose(normalize_columns([[3.0], [4.0]]), [[0.6], [0.8]])

    def test_idempotent(self):
        A = np.eye(3)[:, :2]
        np.testing.assert_allclose(normalize_columns(A), A, atol=1e-14)

    def test_random_unit_norms(self, rng):
        A = rng.standard_normal((10, 4))
        B = normalize_columns(A)
        np.testing.assert_allclose(np.sqrt((B**2).sum(axis=0)), 1.0, atol=1e-12)
        assert not np.shares_memory(A, B)

    def test_zero_column(self):
        with pytest.raises(ZeroColumn) as exc:
            normalize_columns([[1.0, 0.0], [1.0, 0.0]])
        assert exc.value.index == 1


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_projection_properties(seed):
    A, Y, r = random_problem(seed)
    R = residual_matrix(A, Y)
    scale = np.linalg.norm(Y)
    np.testing.assert_allclose(residual_matrix(A, R), R, atol=1e-10 * scale)
    assert np.linalg.norm(A.T @ R) <= 1e-10 * np.linalg.norm(A) * scale
    fit = A @ least_squares_fit(A, Y)
    total = np.sum(Y**2)
    assert abs(np.sum(fit**2) + residual_sq_norm(A, Y) - total) <= 1e-10 * total


@settings(max_examples=200, deadline=None)
@given(seeds)
def test_column_scaling_and_monotonicity(seed):
    A, Y, r = random_problem(seed)
    c = r.choice([-1.0, 1.0], A.shape[1]) * 10.0 ** r.uniform(-3, 3, A.shape[1])
    base = residual_sq_norm(A, Y)
    total = np.sum(Y**2)
    assert abs(residual_sq_norm(A * c, Y) - base) <= 1e-10 * total
    if A.shape[1] < A.shape[0]:
        bigger = np.column_stack([A, r.standard_normal(A.shape[0])])
        assert residual_sq_norm(bigger, Y) <= base + 1e-12 * total


def test_gram_range_identity():
    lo, hi = gram_eigenvalue_range(np.sqrt(4.0) * np.eye(4))
    assert lo == pytest.approx(1.0) and hi == pytest.approx(1.0)
