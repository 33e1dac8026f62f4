import math

import numpy as np
from django.test import SimpleTestCase

from grassmannian.nets import DeltaNet, build_delta_net
from grassmannian.subspaces import Subspace, sample_uniform, sphere_to_line
from ifs_core.attractor import PointCloud, attractor_cloud, covering_cloud
from ifs_core.catalog import load_system
from ifs_core.exceptions import PreconditionError

from .conservation import almost_dc_check, delta_prime_scan, survey_fibers
from .energy import derived_eta, energy, energy_brute_force, energy_ladder
from .exceptional import exceptional_directions, flag_directions, projected_box_counts
from .fat_planes import (
    FatPlaneGrid, ball_fat_plane_cells, checkerboard_partition, checkerboard_separated,
    fat_plane_index, relate,
)

LOG2_LOG3 = math.log(2) / math.log(3)


def lines_at(*angles):
    members = [sphere_to_line([math.cos(a), math.sin(a)]) for a in angles]
    return DeltaNet(0.0, members, 2, 1)


def random_pairs(rng, n, count, scale=1.0):
    return rng.uniform(-scale, scale, size=(count, 2, n))


class FatPlaneTests(SimpleTestCase):
    def test_floor_index(self):
        grid = FatPlaneGrid(Subspace.coordinate(3, [0, 1]), 0.5)
        self.assertEqual(fat_plane_index(grid, [0.25, 0.75, 9.0]), (0, 1))
        self.assertEqual(fat_plane_index(grid, [0.5, 0.0, -2.0]), (1, 0))
        self.assertEqual(fat_plane_index(grid, [-0.25, 0.0, 0.0]), (-1, 0))

    def test_translation_along_complement(self):
        rng = np.random.default_rng(1)
        for V in sample_uniform(4, 2, 20, seed=2):
            grid = FatPlaneGrid(V, 0.1)
            W = V.complement()
            for _ in range(10):
                x = rng.uniform(-1, 1, size=4)
                shifted = x + W.frame @ rng.uniform(-1, 1, size=2)
                self.assertEqual(fat_plane_index(grid, shifted), fat_plane_index(grid, x))

    def test_indices_partition_space(self):
        rng = np.random.default_rng(3)
        for V in sample_uniform(3, 2, 5, seed=4):
            grid = FatPlaneGrid(V, 0.07)
            points = rng.uniform(-2, 2, size=(500, 3))
            lower = grid.indices(points) * 0.07
            coordinates = grid.coordinates(points)
            self.assertTrue(np.all(lower <= coordinates + 1e-12))
            self.assertTrue(np.all(coordinates < lower + 0.07 + 1e-12))

    def test_balls_meet_at_most_three_to_the_k_fat_planes(self):
        rng = np.random.default_rng(5)
        for n, k in [(2, 1), (3, 1), (3, 2), (4, 2)]:
            for V in sample_uniform(n, k, 10, seed=n + k):
                grid = FatPlaneGrid(V, 0.05)
                for x in rng.uniform(-1, 1, size=(50, n)):
                    cells = ball_fat_plane_cells(grid, x)
                    self.assertLessEqual(len(cells), 3 ** k)
                    self.assertIn(fat_plane_index(grid, x), cells)


class RelationTests(SimpleTestCase):
    def test_point_is_not_related_to_itself(self):
        V = Subspace.coordinate(2, [0])
        self.assertFalse(relate(V, [0.3, 0.3], [0.3, 0.3], 0.1, 0.2))

    def test_same_fat_plane_far_apart(self):
        V = Subspace.coordinate(2, [0])
        self.assertTrue(relate(V, [0.05, 0.0], [0.05, 1.0], 0.1, 0.2))
        self.assertFalse(relate(V, [0.05, 0.0], [0.05, 0.3], 0.1, 0.2))

    def test_three_cells_apart_is_unrelated(self):
        V = Subspace.coordinate(2, [0])
        self.assertFalse(relate(V, [0.25, 0.0], [1.75, 5.0], 0.5, 0.6))
        self.assertTrue(relate(V, [0.25, 0.0], [1.2, 5.0], 0.5, 0.6))

    def test_eta_must_exceed_delta(self):
        with self.assertRaises(PreconditionError):
            relate(Subspace.coordinate(2, [0]), [0.0, 0.0], [0.0, 1.0], 0.1, 0.1)

    def test_symmetry_and_complement_translation(self):
        rng = np.random.default_rng(6)
        for n, k in [(2, 1), (3, 1), (3, 2)]:
            V = sample_uniform(n, k, 1, seed=7)[0]
            W = V.complement()
            for x, y in random_pairs(rng, n, 300, scale=0.5):
                related = relate(V, x, y, 0.05, 0.1)
                self.assertEqual(relate(V, y, x, 0.05, 0.1), related)
                w = W.frame @ rng.uniform(-1, 1, size=n - k)
                self.assertEqual(relate(V, x + w, y + w, 0.05, 0.1), related)


class CheckerboardTests(SimpleTestCase):
    def test_box_of_side_four_eta(self):
        rng = np.random.default_rng(8)
        for n, k in [(2, 1), (3, 1)]:
            V = sample_uniform(n, k, 1, seed=n)[0]
            grid = FatPlaneGrid(V, 0.01)
            for _ in range(20):
                corner = rng.uniform(-1, 1, size=n - k)
                square = corner + rng.uniform(0, 0.4, size=(30, n - k))
                points = square @ V.complement().frame.T
                boxes = checkerboard_partition(grid, (0,) * k, 0.1, points)
                self.assertGreaterEqual(len(boxes), 1)
                self.assertLessEqual(len(boxes), 2 ** (n - k))

    def test_square_diameter(self):
        V = sample_uniform(3, 1, 1, seed=9)[0]
        boxes = checkerboard_partition(FatPlaneGrid(V, 0.01), (0,), 0.1, np.zeros((1, 3)))
        self.assertAlmostEqual(boxes[0].diameter, math.sqrt(2 * 0.4 ** 2 + 0.01 ** 2), places=12)
        self.assertLess(boxes[0].diameter, math.sqrt(3) * 0.4)

    def test_non_adjacent_squares_are_four_eta_apart(self):
        V = Subspace.coordinate(3, [0])
        grid = FatPlaneGrid(V, 0.01)
        points = np.array([[0.0, -1.0, -1.0], [0.0, 1.0, 1.0]])
        boxes = checkerboard_partition(grid, (0,), 0.1, points)
        separated = 0
        for a in boxes:
            for b in boxes:
                if checkerboard_separated(a, b):
                    separated += 1
                    gap = max(
                        max(lb - ua, la - ub)
                        for la, ua, lb, ub in zip(a.lower, a.upper, b.lower, b.upper)
                    )
                    self.assertGreaterEqual(gap, 0.4 - 1e-12)
        self.assertGreater(separated, 0)
        self.assertFalse(checkerboard_separated(boxes[0], boxes[0]))

    def test_eta_must_exceed_delta(self):
        with self.assertRaises(PreconditionError):
            checkerboard_partition(FatPlaneGrid(Subspace.coordinate(2, [0]), 0.1), (0,), 0.05, np.zeros((1, 2)))


class EnergyTests(SimpleTestCase):
    def test_single_point_and_close_pair(self):
        net = build_delta_net(2, 1, 0.25, seed=0)
        self.assertEqual(energy(PointCloud(0.05, [[0.1, 0.2]]), net).total, 0)
        close = PointCloud(0.05, [[0.1, 0.2], [0.2, 0.3]])
        self.assertEqual(energy(close, net, eta=0.1).total, 0)

    def test_bucketed_count_matches_brute_force(self):
        four_corner = load_system('four_corner_cantor').system
        for delta in (2.0 ** -4, 2.0 ** -5):
            cloud = covering_cloud(four_corner, delta)
            net = build_delta_net(2, 1, delta, seed=1, max_members=50)
            self.assertEqual(energy(cloud, net).counts, energy_brute_force(cloud, net).counts)
        dust = covering_cloud(load_system('cantor_dust_3d').system, 2.0 ** -3)
        for k in (1, 2):
            net = build_delta_net(3, k, 0.25, seed=k, max_members=20)
            self.assertEqual(energy(dust, net).counts, energy_brute_force(dust, net).counts)

    def test_counts_are_even_and_sum_to_total(self):
        cloud = covering_cloud(load_system('sierpinski_triangle').system, 2.0 ** -5)
        report = energy(cloud, build_delta_net(2, 1, 0.125, seed=2))
        self.assertTrue(all(count % 2 == 0 for count in report.counts))
        self.assertEqual(report.total, sum(report.counts))
        self.assertGreater(report.total, 0)

    def test_energy_shrinks_as_eta_grows(self):
        cloud = covering_cloud(load_system('four_corner_cantor').system, 2.0 ** -5)
        net = build_delta_net(2, 1, 0.1, seed=3)
        previous = None
        for factor in (1.5, 3.0, 6.0, 12.0):
            report = energy(cloud, net, eta=factor * cloud.resolution)
            if previous is not None:
                self.assertTrue(all(a <= b for a, b in zip(report.counts, previous.counts)))
            previous = report

    def test_preconditions(self):
        cloud = covering_cloud(load_system('four_corner_cantor').system, 2.0 ** -4)
        net = build_delta_net(2, 1, 0.5, seed=0)
        with self.assertRaises(PreconditionError):
            energy(cloud, net, delta=2.0 ** -5)
        with self.assertRaises(PreconditionError):
            energy(cloud, net, eta=cloud.resolution)

    def test_derived_eta_is_tiny(self):
        eta = derived_eta(0.1, 1.0, 0.6, 2, 1)
        self.assertGreater(eta, 0.0)
        self.assertLess(eta, 1e-4)
        with self.assertRaises(PreconditionError):
            derived_eta(0.5, 1.0, 0.6, 2, 1)

    def test_ladder_reports_bound(self):
        system = load_system('four_corner_cantor').system
        scales = [2.0 ** -j for j in (4, 5, 6)]
        clouds = [covering_cloud(system, delta) for delta in scales]
        nets = [build_delta_net(2, 1, delta, seed=j) for j, delta in enumerate(scales)]
        ladder = energy_ladder(clouds, nets, gamma=1.0)
        self.assertEqual(len(ladder.reports), 3)
        self.assertEqual(ladder.bound_exponent, 2.0)
        self.assertIsNotNone(ladder.exponent)


class ExceptionalTests(SimpleTestCase):
    def setUp(self):
        self.cloud = attractor_cloud(load_system('four_corner_cantor').system, 2.0 ** -6)

    def test_axis_directions_are_flagged(self):
        net = lines_at(0.0, math.pi / 2, 1.0)
        report = exceptional_directions(self.cloud, net, 0.6, gamma=1.0)
        self.assertEqual(report.rungs[0].flagged, (True, True, False))

    def test_flags_grow_with_threshold(self):
        net = build_delta_net(2, 1, 2.0 ** -4, seed=5)
        counts = projected_box_counts(self.cloud, net)
        previous = np.zeros(len(net), dtype=bool)
        for s in (0.2, 0.4, 0.6, 0.8, 1.0):
            flagged = flag_directions(counts, self.cloud.resolution, s)
            self.assertTrue(np.all(flagged[previous]))
            self.assertLessEqual(flagged.sum(), len(net))
            previous = flagged

    def test_threshold_above_plane_dim_flags_everything(self):
        net = build_delta_net(2, 1, 0.25, seed=6)
        coarse = attractor_cloud(load_system('sierpinski_triangle').system, 2.0 ** -3)
        report = exceptional_directions(coarse, net, 1.5, gamma=math.log(3) / math.log(2))
        self.assertTrue(report.vacuous)
        self.assertEqual(report.rungs[0].flagged_count, len(net))
        self.assertGreaterEqual(report.bound_exponent, report.grassmannian_dim)

    def test_threshold_must_be_below_cloud_dimension(self):
        net = build_delta_net(2, 1, 0.25, seed=6)
        with self.assertRaises(PreconditionError):
            exceptional_directions(self.cloud, net, 2.0, gamma=1.0)
        with self.assertRaises(PreconditionError):
            exceptional_directions(self.cloud, net, 1.0, gamma=1.0)

    def test_segment_flags_concentrate_near_its_annihilator(self):
        delta = 2.0 ** -8
        segment = PointCloud(delta, np.column_stack([np.linspace(0, 1, 2000), np.zeros(2000)]))
        net = build_delta_net(2, 1, 2.0 ** -6, seed=7)
        report = exceptional_directions(segment, net, 0.5, gamma=1.0)
        flagged = np.array(report.rungs[0].flagged)
        self.assertTrue(flagged.any())
        cosines = np.abs(net.frames[flagged][:, 0, 0])
        self.assertTrue(np.all(cosines <= 2 * delta ** 0.5))

    def test_report_exponents(self):
        net = lines_at(0.0, 1.0)
        report = exceptional_directions(self.cloud, net, 0.6, epsilon=0.05, gamma=1.0)
        self.assertAlmostEqual(report.bound_exponent, 0.6)
        self.assertAlmostEqual(report.slack_bound_exponent, 0.75)
        self.assertAlmostEqual(report.lower_bound_exponent, 1.25)
        self.assertIsNone(report.conjecture_exponent)
        probe = exceptional_directions(self.cloud, net, 0.6, gamma=1.5, probe_conjecture=True)
        self.assertAlmostEqual(probe.conjecture_exponent, 0.1)

    def test_relation_counts_of_flagged_directions(self):
        net = lines_at(0.0, math.pi / 2, 1.0)
        report = exceptional_directions(self.cloud, net, 0.6, gamma=1.0, eta=4 * self.cloud.resolution)
        self.assertEqual(len(report.rungs[0].relation_counts), 2)
        self.assertTrue(all(count > 0 for count in report.rungs[0].relation_counts))

    def test_ladder_fit(self):
        system = load_system('four_corner_cantor').system
        scales = [2.0 ** -j for j in (4, 5, 6)]
        clouds = [attractor_cloud(system, delta) for delta in scales]
        nets = [build_delta_net(2, 1, delta, seed=j) for j, delta in enumerate(scales)]
        report = exceptional_directions(clouds, nets, 0.6, gamma=1.0)
        self.assertEqual([rung.delta for rung in report.rungs], scales)
        for rung in report.rungs:
            self.assertLessEqual(rung.flagged_count, rung.net_size)


class AlmostDcTests(SimpleTestCase):
    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        system = load_system('product_cantor_thirds').system
        cls.cloud = attractor_cloud(system, math.sqrt(2) * 3.0 ** -6)
        cls.axis = Subspace.coordinate(2, [0])

    def test_product_structure_gives_a_witness(self):
        outcome = almost_dc_check(self.cloud, self.axis, LOG2_LOG3, 0.05)
        self.assertTrue(outcome.accepted)
        self.assertEqual(outcome.good_cells, 64)
        self.assertGreaterEqual(outcome.conserved_dimension, outcome.cloud_dimension - 0.1)
        self.assertTrue(all(value >= LOG2_LOG3 - 0.05 for value in outcome.fiber_dimensions))

    def test_fiber_threshold_above_dimension_is_refuted(self):
        outcome = almost_dc_check(self.cloud, self.axis, 2.0, 0.05)
        self.assertFalse(outcome.accepted)
        self.assertTrue(outcome.scale_limited)
        self.assertEqual(outcome.good_cells, 0)

    def test_fiber_threshold_above_dimension_is_refuted_in_space(self):
        flat = PointCloud(self.cloud.resolution, np.column_stack([self.cloud.points, np.zeros(len(self.cloud))]))
        vertical = Subspace.coordinate(3, [2])
        gamma = 2 * LOG2_LOG3
        survey = survey_fibers(flat, vertical, gamma=gamma)
        self.assertEqual(len(survey.cells), 1)
        outcome = almost_dc_check(flat, vertical, gamma + 0.01, 0.05, gamma=gamma)
        self.assertFalse(outcome.accepted)
        self.assertTrue(outcome.scale_limited)
        self.assertEqual(outcome.good_cells, 0)
        self.assertNotIn(gamma + 0.01, delta_prime_scan(flat, vertical, 0.05, [gamma + 0.01], gamma=gamma))

    def test_zero_threshold_compares_projected_dimension(self):
        for angle in (0.0, 0.4, 1.1):
            V = sphere_to_line([math.cos(angle), math.sin(angle)])
            survey = survey_fibers(self.cloud, V)
            outcome = almost_dc_check(self.cloud, V, 0.0, 0.05)
            self.assertEqual(outcome.y_dimension, survey.projected_dimension)
            self.assertEqual(
                outcome.accepted, survey.projected_dimension >= survey.cloud_dimension - 0.1
            )

    def test_delta_prime_scan(self):
        passing = delta_prime_scan(self.cloud, self.axis, 0.05, [0.0, 0.2, 0.63, 1.0])
        self.assertIn(0.63, passing)
        self.assertNotIn(1.0, passing)
        self.assertEqual(delta_prime_scan(self.cloud, self.axis, 0.05, []), [])

    def test_preconditions(self):
        with self.assertRaises(PreconditionError):
            almost_dc_check(self.cloud, self.axis, 0.5, 0.0)
        with self.assertRaises(PreconditionError):
            almost_dc_check(self.cloud, self.axis, -0.1, 0.05)
