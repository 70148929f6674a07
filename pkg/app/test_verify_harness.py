import unittest

import numpy as np
from pydantic import ValidationError

from app.core.errors import InapplicableMethodError, PairValidationError
from app.core.fixtures import FIXTURE_A, FIXTURE_W
from app.core.geninv import WeightedPair, relative_gap
from app.core.matrix_core import as_matrix, frobenius_norm, mat_mul
from app.core.reporting import cross_check_csv
from app.core.spectral import index
from app.core.verify_harness import (
    PINV_POWER_MINIMAL,
    VerificationEngine,
    identity_weighted_pair,
    random_suite_specs,
    random_weighted_pair,
)
from app.core.wmwg import ReprMethod, wmwg
from app.models.verification import RandomSpec

SUITE_TOL = 1e-8


class TestCrossCheck(unittest.TestCase):

    @classmethod
    def setUpClass(cls):
        cls.p = WeightedPair.of(FIXTURE_A, FIXTURE_W)
        cls.report = VerificationEngine().cross_check(cls.p, [1, 2, 3])

    def test_fixture_grid(self):
        self.assertEqual(len(self.report.methods), 13)
        self.assertNotIn(ReprMethod.DEFINITIONAL.value, self.report.methods)
        self.assertEqual(len(self.report.rows), 39)

    def test_fixture_errors_are_tiny(self):
        applicable = self.report.applicable_cells()
        self.assertEqual(len(applicable), 38)
        for cell in applicable:
            self.assertLess(cell.error, 1e-10, cell)

    def test_single_not_applicable_cell(self):
        flagged = self.report.inapplicable_cells()
        self.assertEqual(len(flagged), 1)
        self.assertEqual((flagged[0].method, flagged[0].m), (ReprMethod.CORE_K.value, 3))
        self.assertIn("k >= m+1", flagged[0].reason)

    def test_identity_pair_grid(self):
        eye = as_matrix(np.eye(4))
        report = VerificationEngine().cross_check(WeightedPair.of(eye, eye), [1, 2])
        self.assertEqual(report.k, 0)
        for cell in report.applicable_cells():
            self.assertLess(cell.error, 1e-12, cell)
        flagged = {c.method for c in report.inapplicable_cells()}
        self.assertEqual(flagged, {ReprMethod.CORE_K.value, ReprMethod.CORE_K_PLUS_1.value})

    def test_extension_row(self):
        report = VerificationEngine().cross_check(self.p, [1, 2], include_extensions=True)
        self.assertEqual(report.methods[-1], PINV_POWER_MINIMAL)
        self.assertLess(report.cell(PINV_POWER_MINIMAL, 2).error, 1e-10)

    def test_parallel_matches_serial(self):
        parallel = VerificationEngine(workers=4).cross_check(self.p, [1, 2, 3])
        self.assertEqual(cross_check_csv(parallel), cross_check_csv(self.report))

    def test_rejects_bad_m(self):
        with self.assertRaises(InapplicableMethodError):
            VerificationEngine().cross_check(self.p, [0, 1])

    def test_seeded_pair_is_deterministic(self):
        spec = RandomSpec(seed=2024, q=5, n=4, target_index=2)
        first = cross_check_csv(VerificationEngine().cross_check(random_weighted_pair(spec), [1, 2, 3]))
        second = cross_check_csv(VerificationEngine().cross_check(random_weighted_pair(spec), [1, 2, 3]))
        self.assertEqual(first, second)

    def test_degenerate_canonical_form_is_flagged(self):
        p = WeightedPair.of(as_matrix([[1, 0], [0, 0]]), as_matrix([[0, 0], [0, 1]]))
        report = VerificationEngine().cross_check(p, [1])
        self.assertTrue(report.cell(ReprMethod.SVD_CANONICAL.value, 1).inapplicable)


class TestResidualSuite(unittest.TestCase):

    def setUp(self):
        self.p = WeightedPair.of(FIXTURE_A, FIXTURE_W)
        self.engine = VerificationEngine()

    def test_fixture_passes(self):
        for m in (1, 2, 3):
            with self.subTest(m=m):
                report = self.engine.residual_suite(self.p, m, tol=1e-10)
                self.assertTrue(report.passed, report.violations)
                self.assertEqual(report.k, 3)

    def test_named_residual_families(self):
        report = self.engine.residual_suite(self.p, 2)
        names = set(report.residuals)
        for expected in (
            "penrose.axa", "w_drazin.power", "w_core_ep.projector", "w_weak_group.square",
            "projector.WAW_X.idempotent", "projector.W_X_WA.null", "core_ep.power_3",
            "core_ep.w_times", "core_ep.wa_power_2", "core_ep.projector.range", "commutation",
        ):
            self.assertIn(expected, names)
        self.assertIn("outer_inverse", report.informative)
        self.assertIn("oblique.AW_X_W", report.informative)

    def test_commutation_only_from_order_two(self):
        self.assertNotIn("commutation", self.engine.residual_suite(self.p, 1).residuals)

    def test_impossible_tolerance_fails(self):
        report = self.engine.residual_suite(self.p, 2, tol=1e-20)
        self.assertFalse(report.passed)
        self.assertTrue(report.violations)
        self.assertTrue(all(v.residual > 1e-20 for v in report.violations))

    def test_reductions_on_fixture(self):
        self.assertEqual(set(self.engine.reduction_suite(self.p, 1)), {"weak_group"})
        self.assertEqual(set(self.engine.reduction_suite(self.p, 3)), {"drazin"})
        for value in self.engine.reduction_suite(self.p, 3).values():
            self.assertLess(value, 1e-10)

    def test_identity_weight_reductions(self):
        p = identity_weighted_pair(RandomSpec(seed=17, q=5, n=5, target_index=3))
        reductions = self.engine.reduction_suite(p, 2)
        self.assertEqual(set(reductions), {"m_weak_group", "generalized_group", "weak_group_of_power", "core_of_power", "shift"})
        self.assertLess(max(reductions.values()), SUITE_TOL, reductions)


class TestRandomPairs(unittest.TestCase):

    def test_planted_index(self):
        spec_a = RandomSpec(seed=1, q=4, n=4, target_index=2)
        spec_b = RandomSpec(seed=2, q=4, n=4, target_index=2)
        p, r = random_weighted_pair(spec_a), random_weighted_pair(spec_b)
        self.assertFalse(np.allclose(p.a, r.a))
        for pair in (p, r):
            self.assertEqual(max(index(pair.aw, pair.tolerance), index(pair.wa, pair.tolerance)), 2)

    def test_rectangular_shapes(self):
        for q, n in ((6, 3), (3, 6)):
            p = random_weighted_pair(RandomSpec(seed=5, q=q, n=n, target_index=3))
            self.assertEqual(p.a.shape, (q, n))
            self.assertEqual(p.w.shape, (n, q))
            self.assertEqual(p.k, 3)

    def test_magnitude(self):
        p = random_weighted_pair(RandomSpec(seed=9, q=3, n=3, target_index=1, magnitude=4.0))
        self.assertAlmostEqual(float(np.max(np.abs(p.a))), 4.0)
        self.assertAlmostEqual(float(np.max(np.abs(p.w))), 4.0)

    def test_rectangular_index_zero_is_impossible(self):
        with self.assertRaises(PairValidationError):
            random_weighted_pair(RandomSpec(seed=0, q=3, n=2, target_index=0))

    def test_target_bounded_by_dimensions(self):
        with self.assertRaises(ValidationError):
            RandomSpec(seed=0, q=2, n=5, target_index=3)

    def test_suite_specs_are_reproducible(self):
        self.assertEqual(random_suite_specs(20, seed=3), random_suite_specs(20, seed=3))
        for spec in random_suite_specs(50):
            self.assertLessEqual(max(spec.q, spec.n), 8)
            self.assertLessEqual(spec.target_index, 3)


class TestPropertySuite(unittest.TestCase):
    """Seeded random pairs, dimensions up to 8, planted index 0..3, m in 1..3."""

    M_VALUES = (1, 2, 3)

    def test_random_pairs(self):
        engine = VerificationEngine()
        for spec in random_suite_specs(200, max_dim=8, seed=0):
            with self.subTest(spec=spec):
                self._check_pair(engine, random_weighted_pair(spec))

    def test_fully_nilpotent_pairs(self):
        # Planted index equal to min(q, n) leaves no invertible part.
        engine = VerificationEngine()
        for seed, (q, n) in enumerate([(2, 2), (3, 3), (5, 3), (3, 5), (2, 7), (8, 3)]):
            t = min(q, n)
            with self.subTest(q=q, n=n, t=t):
                p = random_weighted_pair(RandomSpec(seed=100 + seed, q=q, n=n, target_index=t))
                self.assertEqual(p.k, t)
                self._check_pair(engine, p)

    def test_identity_weighted_pairs(self):
        engine = VerificationEngine()
        for seed in range(20):
            n = 2 + seed % 6
            with self.subTest(seed=seed):
                p = identity_weighted_pair(RandomSpec(seed=seed, q=n, n=n, target_index=seed % min(n, 4)))
                self._check_pair(engine, p)
                for m in self.M_VALUES:
                    reductions = engine.reduction_suite(p, m)
                    self.assertIn("m_weak_group", reductions)
                    self.assertLess(max(reductions.values()), SUITE_TOL, reductions)

    def _check_pair(self, engine, p):
        report = engine.cross_check(p, self.M_VALUES)
        for m in self.M_VALUES:
            scale = 1.0 + frobenius_norm(wmwg(p, m))
            for method in report.methods:
                cell = report.cell(method, m)
                if not cell.inapplicable:
                    self.assertLess(cell.error / scale, SUITE_TOL, cell)

            residuals = engine.residual_suite(p, m, tol=SUITE_TOL)
            self.assertTrue(residuals.passed, residuals.violations)

            reductions = engine.reduction_suite(p, m)
            if m == 1:
                self.assertIn("weak_group", reductions)
            if p.k <= m:
                self.assertIn("drazin", reductions)
            for name, value in reductions.items():
                self.assertLess(value, SUITE_TOL, name)


class TestReductionConsistency(unittest.TestCase):

    def test_wmwg_shift_identity_with_identity_weight(self):
        p = identity_weighted_pair(RandomSpec(seed=31, q=4, n=4, target_index=3))
        x2 = wmwg(p, 2)
        x1 = wmwg(p, 1)
        self.assertLess(relative_gap(mat_mul(p.a, x2), mat_mul(x1, p.a)), SUITE_TOL)


if __name__ == "__main__":
    unittest.main()
