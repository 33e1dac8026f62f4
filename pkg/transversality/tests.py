import math

import numpy as np
from django.test import SimpleTestCase
from scipy.stats import special_ortho_group

from ifs_core.attractor import symbol_point
from ifs_core.catalog import load_system
from ifs_core.exceptions import (
    BudgetExceededError, PreconditionError, UnsupportedSystemError,
)
from ifs_core.maps import SelfSimilarIFS, Similarity

from .family import ProjectedFamily, family_limit, hyperplane_coordinates, rho, tangent_frame
from .jacobian import ambient_jacobian, jacobian_analytic, jacobian_fd
from .profile import projected_dimension_profile
from .scan import (
    FLAG, PASS, VACUOUS, check_pair, sample_directions, synthetic_violation_selftest,
    transversality_scan, word_images,
)


def random_units(rng, n, count):
    draws = rng.standard_normal((count, n))
    return draws / np.linalg.norm(draws, axis=1, keepdims=True)


def random_word(rng, size, depth):
    return tuple(int(letter) for letter in rng.integers(1, size + 1, size=depth))


class RhoTests(SimpleTestCase):
    def test_drops_the_normal_component(self):
        np.testing.assert_allclose(rho([0.0, 0.0, 1.0], [1.0, 2.0, 3.0]), [1.0, 2.0, 0.0])

    def test_parallel_vector_goes_to_zero(self):
        e = np.array([0.6, 0.8])
        np.testing.assert_allclose(rho(e, 2.5 * e), [0.0, 0.0], atol=1e-15)

    def test_idempotent_and_pythagorean(self):
        rng = np.random.default_rng(11)
        for n in (2, 3, 4):
            for e in random_units(rng, n, 30):
                x = rng.uniform(-3, 3, size=n)
                projected = rho(e, x)
                np.testing.assert_allclose(rho(e, projected), projected, atol=1e-12)
                self.assertAlmostEqual(projected @ e, 0.0, delta=1e-12)
                self.assertAlmostEqual(
                    x @ x, projected @ projected + (x @ e) ** 2, delta=1e-12 * max(1.0, x @ x)
                )
                self.assertLessEqual(np.linalg.norm(projected), np.linalg.norm(x) + 1e-12)

    def test_rejects_non_unit_directions(self):
        with self.assertRaises(PreconditionError):
            rho([1.0, 1.0], [0.0, 1.0])

    def test_tangent_frame_spans_the_hyperplane(self):
        rng = np.random.default_rng(12)
        for n in (2, 3, 5):
            for u in random_units(rng, n, 10):
                frame = tangent_frame(u)
                self.assertEqual(frame.shape, (n, n - 1))
                np.testing.assert_allclose(frame.T @ frame, np.eye(n - 1), atol=1e-12)
                np.testing.assert_allclose(u @ frame, np.zeros(n - 1), atol=1e-12)

    def test_planar_frame_is_the_quarter_turn(self):
        np.testing.assert_allclose(tangent_frame([1.0, 0.0]), [[0.0], [1.0]])


class FamilyTests(SimpleTestCase):
    def test_limit_at_fixed_points(self):
        family = ProjectedFamily(load_system('four_corner_cantor').system)
        rng = np.random.default_rng(13)
        for e in random_units(rng, 2, 5):
            for letter, g in enumerate(family.base_system.maps, start=1):
                np.testing.assert_allclose(
                    family_limit(family, e, (letter,) * 30), rho(e, g.fixed_point()), atol=1e-12
                )

    def test_limit_matches_direct_composition(self):
        rng = np.random.default_rng(14)
        for name in ('four_corner_cantor', 'cantor_dust_3d', 'sierpinski_triangle'):
            family = ProjectedFamily(load_system(name).system)
            units = random_units(rng, family.ambient_dim, 100)
            for e in units:
                word = random_word(rng, family.size, int(rng.integers(1, 12)))
                np.testing.assert_allclose(
                    family_limit(family, e, word),
                    rho(e, symbol_point(family.base_system, word)),
                    atol=1e-10,
                )

    def test_induced_maps_keep_the_ratios(self):
        family = ProjectedFamily(load_system('cantor_dust_3d').system)
        rng = np.random.default_rng(15)
        e = random_units(rng, 3, 1)[0]
        xi, eta = rho(e, rng.standard_normal(3)), rho(e, rng.standard_normal(3))
        for letter, ratio in enumerate(family.ratios, start=1):
            gap = family.induced(e, letter, xi) - family.induced(e, letter, eta)
            self.assertAlmostEqual(np.linalg.norm(gap), ratio * np.linalg.norm(xi - eta), places=12)

    def test_planar_family_is_a_line_system(self):
        system = load_system('four_corner_cantor').system
        family = ProjectedFamily(system)
        for angle in (0.3, 1.1, 2.5):
            e = np.array([math.cos(angle), math.sin(angle)])
            t = np.array([-math.sin(angle), math.cos(angle)])
            line = SelfSimilarIFS(
                [Similarity.scaling(g.ratio, [g.translation @ t]) for g in system.maps]
            )
            for word in [(1, 2, 3, 4), (4, 4, 1), (2, 3, 2, 3, 2, 3)]:
                limit = family_limit(family, e, word)
                self.assertAlmostEqual(
                    hyperplane_coordinates(e, limit)[0], symbol_point(line, word)[0], places=12
                )

    def test_rotations_are_unsupported(self):
        with self.assertRaises(UnsupportedSystemError):
            ProjectedFamily(load_system('pinwheel_quarter_turn').system)
        with self.assertRaises(UnsupportedSystemError):
            ProjectedFamily(load_system('golden_graph').system)


class JacobianTests(SimpleTestCase):
    def test_normal_vector(self):
        for n in (2, 3, 4):
            u = np.eye(n)[-1]
            determinant, matrix = jacobian_analytic(u, u)
            np.testing.assert_allclose(matrix, -np.eye(n - 1))
            self.assertEqual(determinant, (-1.0) ** (n - 1))

    def test_tangent_vector_is_degenerate(self):
        determinant, matrix = jacobian_analytic([1.0, 0.0, 0.0], [0.0, 0.0, 1.0])
        self.assertEqual(determinant, 0.0)
        self.assertFalse(np.any(matrix))

    def test_determinant_formula_and_rotation_invariance(self):
        rng = np.random.default_rng(16)
        rotations = special_ortho_group.rvs(3, size=20, random_state=17)
        for rotation, u in zip(rotations, random_units(rng, 3, 20)):
            z = rng.standard_normal(3)
            determinant = jacobian_analytic(z, u).determinant
            self.assertAlmostEqual(determinant, (z @ u) ** 2, places=12)
            self.assertAlmostEqual(jacobian_analytic(rotation @ z, rotation @ u).determinant, determinant, places=12)

    def test_ambient_derivative_restricts_to_the_analytic_matrix(self):
        rng = np.random.default_rng(18)
        for n in (2, 3, 4):
            for u in random_units(rng, n, 10):
                z = rng.standard_normal(n)
                frame = tangent_frame(u)
                np.testing.assert_allclose(
                    frame.T @ ambient_jacobian(z, u) @ frame, jacobian_analytic(z, u).matrix, atol=1e-12
                )

    def test_zero_vector_rejected(self):
        with self.assertRaises(PreconditionError):
            jacobian_analytic([0.0, 0.0], [1.0, 0.0])

    def test_finite_differences_at_the_normal(self):
        h = 1e-4
        for n in (2, 3):
            u = np.eye(n)[0]
            np.testing.assert_allclose(jacobian_fd(u, u, h), -np.eye(n - 1), atol=10 * h ** 2)

    def test_finite_differences_match_the_formula(self):
        rng = np.random.default_rng(19)
        worst = 0.0
        for n in (2, 3, 4):
            for u in random_units(rng, n, 34):
                z = rng.standard_normal(n)
                analytic = jacobian_analytic(z, u).matrix
                error = np.max(np.abs(jacobian_fd(z, u, 1e-4) - analytic)) / abs(z @ u)
                worst = max(worst, error)
        self.assertLess(worst, 1e-6)

    def test_finite_differences_converge_at_second_order(self):
        rng = np.random.default_rng(20)
        coarse, fine = 0.0, 0.0
        for u in random_units(rng, 3, 20):
            z = rng.standard_normal(3)
            analytic = jacobian_analytic(z, u).matrix
            coarse = max(coarse, np.max(np.abs(jacobian_fd(z, u, 1e-3) - analytic)))
            fine = max(fine, np.max(np.abs(jacobian_fd(z, u, 5e-4) - analytic)))
        self.assertAlmostEqual(coarse / fine, 4.0, delta=0.3)

    def test_step_range(self):
        for h in (0.0, -1e-4, 2e-3):
            with self.assertRaises(PreconditionError):
                jacobian_fd([1.0, 0.0], [1.0, 0.0], h)


class ImplicationTests(SimpleTestCase):
    def test_close_projections_force_a_large_normal_component(self):
        rng = np.random.default_rng(21)
        witnesses = 0
        for n in (2, 3, 4):
            for _ in range(2000):
                c = rng.uniform(0.1, 2.0)
                u = random_units(rng, n, 1)[0]
                z = rng.uniform(-2 * c, 2 * c, size=n)
                projected = rho(u, z)
                if projected @ projected < c ** 2 / 2 and z @ z > c ** 2:
                    witnesses += 1
                    self.assertGreater((z @ u) ** 2, c ** 2 / 2)
        self.assertGreater(witnesses, 100)

    def test_far_projection_is_vacuous(self):
        self.assertEqual(check_pair([0.0, 1.0], [1.0, 0.0], 1.0)[0], VACUOUS)

    def test_large_normal_component_passes(self):
        outcome, margin = check_pair([1.0, 0.0], [1.0, 0.0], 0.5)
        self.assertEqual(outcome, PASS)
        self.assertAlmostEqual(margin, 1.0 - 0.5 / math.sqrt(2))

    def test_short_difference_is_flagged(self):
        self.assertEqual(check_pair([0.3, 0.0], [1.0, 0.0], 1.0)[0], FLAG)


class ScanTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.system = load_system('four_corner_cantor').system

    def test_four_corner_family_has_no_violations(self):
        report = transversality_scan(self.system, 360, 6)
        self.assertEqual(report.violations, ())
        self.assertTrue(report.exhaustive)
        self.assertGreater(report.pair_count, 0)
        self.assertGreater(report.pass_count, 0)
        self.assertGreater(report.vacuous_count, 0)
        self.assertEqual(report.direction_count, 360)
        self.assertGreater(report.min_margin, -12 * report.tail)

    def test_selftest_is_flagged(self):
        report = synthetic_violation_selftest(self.system)
        self.assertTrue(report.violations)
        for row in report.violations:
            self.assertLess(row.projected_distance + 2 * report.tail, report.antecedent_bound)
            self.assertNotEqual(row.first_word[0], row.second_word[0])

    def test_explicit_directions_and_separation(self):
        report = transversality_scan(self.system, [[1.0, 0.0], [0.0, 1.0]], 3, separation=0.4)
        self.assertEqual(report.separation, 0.4)
        self.assertEqual(report.direction_count, 2)
        self.assertEqual(report.violations, ())

    def test_pair_budget_keeps_the_closest_pairs(self):
        report = transversality_scan(self.system, 8, 3, pair_budget=5, separation=1.0)
        self.assertFalse(report.exhaustive)
        self.assertEqual(report.pair_count, 5)

    def test_uncertified_separation(self):
        overlapping = SelfSimilarIFS(
            [Similarity.scaling(0.6, [0.0, 0.0]), Similarity.scaling(0.6, [0.4, 0.0])], name='overlap'
        )
        with self.assertRaises(PreconditionError):
            transversality_scan(overlapping, 10, 3)

    def test_word_budget(self):
        with self.assertRaises(BudgetExceededError) as caught:
            word_images(self.system, 12, word_budget=1000)
        self.assertEqual(caught.exception.feasible, 4)

    def test_word_images_lie_in_their_cylinders(self):
        points = word_images(self.system, 2)
        self.assertEqual(len(points), 16)
        np.testing.assert_allclose(points[1], symbol_point(self.system, (1, 2)))
        np.testing.assert_allclose(points[-1], symbol_point(self.system, (4, 4)))

    def test_direction_samples(self):
        np.testing.assert_allclose(sample_directions(2, 4), [[1, 0], [0, 1], [-1, 0], [0, -1]], atol=1e-15)
        spherical = sample_directions(3, 50, seed=3)
        np.testing.assert_allclose(np.linalg.norm(spherical, axis=1), 1.0, atol=1e-12)
        np.testing.assert_array_equal(spherical, sample_directions(3, 50, seed=3))


class ProfileTests(SimpleTestCase):
    def test_axis_projections_of_the_four_corner_set(self):
        profile = projected_dimension_profile(load_system('four_corner_cantor').system, 16, 2.0 ** -9, s=0.6)
        self.assertAlmostEqual(profile.cloud_dimension, 1.0, delta=0.1)
        for index in (0, 4, 8, 12):
            self.assertAlmostEqual(profile.dimensions[index], 0.5, delta=0.12)
            self.assertTrue(profile.exceptional[index])
        self.assertGreaterEqual(profile.exceptional_count, 4)
        self.assertGreater(profile.largest, 0.7)

    def test_rotations_are_unsupported(self):
        with self.assertRaises(UnsupportedSystemError):
            projected_dimension_profile(load_system('pinwheel_quarter_turn').system, 4, 0.01)
