import unittest

import numpy as np
from numpy.testing import assert_allclose

from app.core.errors import DimensionError, NonComplementarySubspacesError, NumericalFailureError
from app.core.fixtures import FIXTURE_A, FIXTURE_W
from app.core.matrix_core import as_matrix, conj_transpose, identity, mat_mul, mat_power, zeros
from app.core.spectral import (
    SvdFactors,
    index,
    joint_index,
    null_basis,
    numerical_rank,
    oblique_projector,
    power_scale,
    range_basis,
    range_projector,
    spectral_norm,
    svd,
)
from app.core.verify_harness import random_weighted_pair
from app.models.verification import IndexInfo, RandomSpec, ToleranceConfig


def random_complex(rng, shape):
    return as_matrix(rng.standard_normal(shape) + 1j * rng.standard_normal(shape))


def rotated_jordan(size, seed=0):
    """Q J Q^T with J a single nilpotent Jordan block and Q real orthogonal."""
    q, _ = np.linalg.qr(np.random.default_rng(seed).standard_normal((size, size)))
    return as_matrix(q @ np.eye(size, k=1) @ q.T)


class TestSvd(unittest.TestCase):

    def test_diagonal(self):
        f = svd(as_matrix(np.diag([3.0, 1.0])))
        assert_allclose(f.singular_values, [3.0, 1.0])

    def test_zero_rectangular(self):
        f = svd(zeros(2, 3))
        assert_allclose(f.singular_values, [0.0, 0.0])
        self.assertEqual(f.left.shape, (2, 2))
        self.assertEqual(f.right.shape, (3, 3))

    def test_fixture_leading_singular_value(self):
        self.assertAlmostEqual(svd(FIXTURE_A).singular_values[0], 3.0071, delta=1e-4)

    def test_factors_are_unitary_and_reconstruct(self):
        a = random_complex(np.random.default_rng(3), (5, 3))
        f = svd(a)
        assert_allclose(f.left @ np.conj(f.left).T, np.eye(5), atol=1e-12)
        assert_allclose(f.right @ np.conj(f.right).T, np.eye(3), atol=1e-12)
        assert_allclose(f.reconstruct(), a, atol=1e-12)
        self.assertTrue(np.all(np.diff(f.singular_values) <= 0))

    def test_phase_normalisation_makes_pivot_real_positive(self):
        f = svd(random_complex(np.random.default_rng(11), (4, 4)))
        for i in range(4):
            col = f.right[:, i]
            pivot = col[np.nonzero(np.abs(col) > 1e-8)[0][0]]
            self.assertAlmostEqual(pivot.imag, 0.0, places=12)
            self.assertGreater(pivot.real, 0.0)

    def test_factors_validate_shapes(self):
        with self.assertRaises(NumericalFailureError):
            SvdFactors(identity(2), np.array([1.0]), identity(3))
        with self.assertRaises(NumericalFailureError):
            SvdFactors(as_matrix(np.ones((2, 3))), np.array([1.0, 0.0]), identity(3))

    def test_factors_validate_singular_values(self):
        with self.assertRaises(NumericalFailureError):
            SvdFactors(identity(2), np.array([1.0, 2.0]), identity(2))
        with self.assertRaises(NumericalFailureError):
            SvdFactors(identity(2), np.array([1.0, -1e-3]), identity(2))

    def test_factors_validate_unitarity(self):
        with self.assertRaises(NumericalFailureError) as ctx:
            SvdFactors(as_matrix([[1, 1], [0, 1]]), np.array([2.0, 1.0]), identity(2))
        self.assertIn("not unitary", ctx.exception.message)

    def test_deterministic(self):
        a = random_complex(np.random.default_rng(5), (4, 6))
        first, second = svd(a), svd(a)
        np.testing.assert_array_equal(first.left, second.left)
        np.testing.assert_array_equal(first.right, second.right)


class TestRankAndIndex(unittest.TestCase):

    def test_rank_identity(self):
        self.assertEqual(numerical_rank(identity(4)), 4)

    def test_rank_outer_product(self):
        rng = np.random.default_rng(1)
        u, v = random_complex(rng, (4, 1)), random_complex(rng, (3, 1))
        self.assertEqual(numerical_rank(mat_mul(u, conj_transpose(v))), 1)

    def test_rank_zero(self):
        self.assertEqual(numerical_rank(zeros(3, 3)), 0)

    def test_rank_fixture(self):
        self.assertEqual(numerical_rank(FIXTURE_A), 4)

    def test_index_nonsingular(self):
        self.assertEqual(index(identity(3)), 0)

    def test_index_nilpotent(self):
        self.assertEqual(index(as_matrix([[0, 1], [0, 0]])), 2)

    def test_index_zero_matrix(self):
        self.assertEqual(index(zeros(2, 2)), 1)

    def test_index_non_square(self):
        with self.assertRaises(DimensionError):
            index(zeros(2, 3))

    def test_fixture_products_have_index_three(self):
        self.assertEqual(index(mat_mul(FIXTURE_A, FIXTURE_W)), 3)
        self.assertEqual(index(mat_mul(FIXTURE_W, FIXTURE_A)), 3)

    def test_joint_index(self):
        info = joint_index(FIXTURE_A, FIXTURE_W)
        self.assertEqual(info, IndexInfo(ind_aw=3, ind_wa=3, k=3))

    def test_rank_stabilises_past_index(self):
        wa = mat_mul(FIXTURE_W, FIXTURE_A)
        k = index(wa)
        ranks = [numerical_rank(mat_power(wa, j)) for j in range(k, k + 3)]
        self.assertEqual(len(set(ranks)), 1)

    def test_index_depends_on_rank_tolerance(self):
        a = as_matrix(np.diag([1.0, 1e-3, 1e-6, 1e-9]))
        self.assertEqual(index(a), 0)
        self.assertEqual(index(a, ToleranceConfig(rank_rel_tol=1e-4)), 2)

    def test_index_of_rotated_jordan_block(self):
        a = rotated_jordan(3, seed=3)
        self.assertEqual(numerical_rank(mat_power(a, 3), scale=power_scale(spectral_norm(a), 3)), 0)
        self.assertEqual(index(a), 3)

    def test_index_of_rotated_jordan_block_sizes(self):
        # Powers past the nilpotency order are rounding noise, not rank.
        tol = ToleranceConfig(rank_rel_tol=1e-10)
        for size in (2, 3, 4, 6):
            with self.subTest(size=size):
                self.assertEqual(index(rotated_jordan(size, seed=size), tol), size)

    def test_index_of_rotated_jordan_with_live_part(self):
        rng = np.random.default_rng(5)
        q, _ = np.linalg.qr(rng.standard_normal((5, 5)))
        core = np.zeros((5, 5))
        core[0, 0], core[1, 1] = 0.9, -1.1
        core[2, 3] = core[3, 4] = 1.0
        self.assertEqual(index(as_matrix(q @ core @ q.T)), 3)

    def test_index_norm_hint_for_noise_matrix(self):
        noise = as_matrix(1e-17 * random_complex(np.random.default_rng(2), (3, 3)))
        self.assertEqual(index(noise), 0)
        self.assertEqual(index(noise, norm=1.0), 1)

    def test_rank_scale_raises_threshold(self):
        a = as_matrix(np.diag([1e-12, 1e-13]))
        self.assertEqual(numerical_rank(a), 2)
        self.assertEqual(numerical_rank(a, scale=1e4), 0)
        self.assertEqual(numerical_rank(a, scale=1e-13), 2)


class TestSubspaces(unittest.TestCase):

    def test_range_basis_identity(self):
        basis = range_basis(identity(2))
        self.assertEqual(basis.shape, (2, 2))
        assert_allclose(np.conj(basis).T @ basis, np.eye(2), atol=1e-12)

    def test_null_basis_coordinate(self):
        basis = null_basis(as_matrix([[1, 0], [0, 0]]))
        self.assertEqual(basis.shape, (2, 1))
        self.assertAlmostEqual(abs(basis[1, 0]), 1.0)
        self.assertAlmostEqual(abs(basis[0, 0]), 0.0)

    def test_trivial_spaces_have_no_columns(self):
        self.assertEqual(range_basis(zeros(3, 2)).shape, (3, 0))
        self.assertEqual(null_basis(identity(3)).shape, (3, 0))

    def test_fixture_range_dimension(self):
        wa3 = mat_power(mat_mul(FIXTURE_W, FIXTURE_A), 3)
        self.assertEqual(range_basis(wa3).shape[1], numerical_rank(wa3))

    def test_range_projector_is_orthogonal(self):
        p = range_projector(FIXTURE_A)
        assert_allclose(p @ p, p, atol=1e-12)
        assert_allclose(np.conj(p).T, p, atol=1e-12)
        assert_allclose(p @ FIXTURE_A, FIXTURE_A, atol=1e-12)


class TestObliqueProjector(unittest.TestCase):
    E1 = as_matrix([[1], [0]])
    E2 = as_matrix([[0], [1]])

    def test_coordinate_projector(self):
        assert_allclose(oblique_projector(self.E1, self.E2), [[1, 0], [0, 0]], atol=1e-14)

    def test_skew_projector(self):
        s = as_matrix([[1], [1]])
        assert_allclose(oblique_projector(self.E1, s), [[1, -1], [0, 0]], atol=1e-14)

    def test_full_range_is_identity(self):
        assert_allclose(oblique_projector(identity(3), zeros(3, 0)), np.eye(3), atol=1e-14)

    def test_overlapping_subspaces(self):
        with self.assertRaises(NonComplementarySubspacesError):
            oblique_projector(self.E1, as_matrix([[2], [0]]))

    def test_too_few_columns(self):
        with self.assertRaises(NonComplementarySubspacesError):
            oblique_projector(self.E1, zeros(2, 0))

    def test_projects_random_complements(self):
        rng = np.random.default_rng(9)
        t, s = random_complex(rng, (4, 2)), random_complex(rng, (4, 2))
        p = oblique_projector(t, s)
        assert_allclose(p @ p, p, atol=1e-10)
        assert_allclose(p @ t, t, atol=1e-10)
        assert_allclose(p @ s, np.zeros((4, 2)), atol=1e-10)


class TestWeightedPowerRanks(unittest.TestCase):

    def test_aw_and_wa_powers_share_rank_at_k(self):
        for seed, (q, n, t) in enumerate([(3, 3, 1), (4, 4, 2), (5, 3, 2), (3, 6, 3), (6, 6, 3), (4, 7, 1)]):
            with self.subTest(q=q, n=n, t=t):
                p = random_weighted_pair(RandomSpec(seed=seed, q=q, n=n, target_index=t))
                rank_wa = numerical_rank(mat_power(p.wa, p.k), p.tolerance, p.wa_scale(p.k))
                rank_aw = numerical_rank(mat_power(p.aw, p.k), p.tolerance, p.aw_scale(p.k))
                self.assertEqual(rank_wa, rank_aw)
                self.assertEqual(rank_wa, min(q, n) - t)


if __name__ == "__main__":
    unittest.main()
