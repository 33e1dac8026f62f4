import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from grassmannian.subspaces import sample_uniform, sphere_to_line
from ifs_core.attractor import PointCloud, attractor_cloud
from ifs_core.catalog import load_system
from ifs_core.exceptions import PreconditionError, ProvenanceError, UnsupportedSystemError
from ifs_core.invariants import similarity_dimension

from .boxcount import (
    BoxCountSeries, DimensionEstimate, box_count, box_count_series, dyadic_scales,
    fit_scaling_exponent, ladder_dimension, read_estimate_csv, read_series_csv,
    resolution_ladder, upper_box_dimension, write_estimate_csv, write_series_csv,
)
from .content import hausdorff_content_lower, hausdorff_content_upper
from .directions import direction_cover_series, direction_set_box_dimension

LOG2_LOG3 = math.log(2) / math.log(3)


def cantor_cloud(depth):
    return attractor_cloud(load_system('middle_thirds_cantor').system, 3.0 ** -depth)


def interval_cover_content(intervals, s):
    """Cheapest cover of disjoint sorted intervals by intervals, by dynamic programming."""
    best = [0.0]
    for i in range(len(intervals)):
        best.append(min(
            best[j] + (intervals[i][1] - intervals[j][0]) ** s for j in range(i + 1)
        ))
    return best[-1]


class BoxCountTests(SimpleTestCase):
    def test_single_point(self):
        for delta in (1.0, 0.1, 1e-6):
            self.assertEqual(box_count([[0.3, 0.7]], delta), 1)

    def test_unit_segment(self):
        segment = np.column_stack([np.linspace(0.0, 1.0, 10_001), np.full(10_001, 0.3)])
        for m in (3, 10, 64):
            self.assertIn(box_count(segment, 1.0 / m), (m, m + 1))

    def test_cantor_counts(self):
        cloud = cantor_cloud(8)
        for j in range(0, 9):
            self.assertEqual(box_count(cloud, 3.0 ** -j), 2 ** j)

    def test_four_corner_counts(self):
        system = load_system('four_corner_cantor').system
        for m in range(1, 6):
            cloud = attractor_cloud(system, 4.0 ** -m * math.sqrt(2))
            self.assertEqual(box_count(cloud, 4.0 ** -m), 4 ** m)

    def test_empty_input(self):
        with self.assertRaises(PreconditionError):
            box_count(np.zeros((0, 2)), 0.1)

    def test_inclusion_and_refinement(self):
        points = cantor_cloud(7).points
        subset = points[::3]
        scales = [2.0 ** -j for j in range(1, 10)]
        previous = 0
        for delta in scales:
            full = box_count(points, delta, jitter_count=1)
            self.assertLessEqual(box_count(subset, delta, jitter_count=1), full)
            self.assertGreaterEqual(full, previous)
            previous = full

    def test_union_bound(self):
        rng = np.random.default_rng(3)
        a, b = rng.uniform(size=(300, 2)), rng.uniform(size=(200, 2)) * 0.5
        for delta in (0.2, 0.05, 0.01):
            union = box_count(np.vstack([a, b]), delta, jitter_count=1)
            self.assertLessEqual(union, box_count(a, delta, jitter_count=1) + box_count(b, delta, jitter_count=1))

    def test_dyadic_scaling_law(self):
        system = load_system('sierpinski_triangle').system
        cloud = attractor_cloud(system, 2.0 ** -6).points
        for j in (1, 3, -2):
            scale = 2.0 ** j
            for delta in (0.1, 0.03):
                self.assertEqual(box_count(scale * cloud, scale * delta), box_count(cloud, delta))


class UpperBoxDimensionTests(SimpleTestCase):
    def test_cantor_triadic_scales(self):
        series = box_count_series(cantor_cloud(8), [3.0 ** -j for j in range(2, 8)])
        estimate = upper_box_dimension(series, ambient_dim=1)
        self.assertAlmostEqual(estimate.value, LOG2_LOG3, delta=0.02)

    def test_sierpinski(self):
        cloud = attractor_cloud(load_system('sierpinski_triangle').system, 2.0 ** -8)
        series = box_count_series(cloud, [2.0 ** -j for j in range(2, 8)])
        self.assertAlmostEqual(upper_box_dimension(series, ambient_dim=2).value, math.log2(3), delta=0.05)

    def test_matches_similarity_dimension_for_separated_systems(self):
        for name, ratio, depth in [('four_corner_cantor', 4, 5), ('product_cantor_thirds', 3, 6)]:
            system = load_system(name).system
            cloud = attractor_cloud(system, system.diameter_bound() * float(ratio) ** -depth)
            series = box_count_series(cloud, [float(ratio) ** -j for j in range(1, depth + 1)])
            estimate = upper_box_dimension(series, ambient_dim=2)
            self.assertAlmostEqual(
                estimate.value, similarity_dimension(system), delta=max(2 * estimate.stderr, 1e-9)
            )

    def test_finite_set_saturates(self):
        points = np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 1.0], [0.5, 0.5], [0.25, 0.75]])
        series = box_count_series(points, [2.0 ** -j for j in range(10, 16)])
        estimate = upper_box_dimension(series, ambient_dim=2)
        self.assertAlmostEqual(estimate.value, 0.0, delta=0.01)

    def test_too_few_scales(self):
        with self.assertRaises(PreconditionError):
            upper_box_dimension(BoxCountSeries((0.5, 0.25, 0.125), (2, 4, 8)))
        with self.assertRaises(PreconditionError):
            upper_box_dimension(BoxCountSeries((0.5, 0.45, 0.4, 0.35), (2, 3, 3, 4)))

    def test_dyadic_ladder_respects_resolution(self):
        cloud = cantor_cloud(9)
        scales = dyadic_scales(cloud)
        self.assertTrue(scales)
        self.assertTrue(all(delta >= cloud.resolution for delta in scales))
        self.assertTrue(all(box_count(cloud, delta, jitter_count=1) >= 10 for delta in scales))

    def test_resolution_ladder_dimension(self):
        cloud = cantor_cloud(8)
        scales = resolution_ladder(cloud, cloud.resolution)
        self.assertEqual(scales[-1], cloud.resolution)
        self.assertTrue(all(a == 2 * b for a, b in zip(scales, scales[1:])))
        self.assertAlmostEqual(ladder_dimension(cloud, cloud.resolution, ceiling=1), LOG2_LOG3, delta=0.06)
        self.assertEqual(ladder_dimension([[0.1], [0.1 + 1e-6]], 1e-3), 0.0)
        self.assertIsNone(ladder_dimension([[0.0], [0.003]], 1e-3))

    def test_weighted_fit_recovers_power_law(self):
        scales = [2.0 ** -j for j in range(3, 9)]
        fit = fit_scaling_exponent(scales, [5 * delta ** -1.5 for delta in scales])
        self.assertAlmostEqual(fit.exponent, 1.5, places=10)
        self.assertIsNone(fit_scaling_exponent(scales, [0, 0, 0, 0, 0, 3]))

    def test_csv_round_trip(self):
        series = BoxCountSeries((0.5, 0.25, 0.125), (2, 4, 8), 4)
        estimates = [DimensionEstimate(0.63, 0.01, (0.001, 0.1), 'box_regression')]
        with tempfile.TemporaryDirectory() as tmp:
            write_series_csv(series, Path(tmp) / 'series.csv')
            write_estimate_csv(estimates, Path(tmp) / 'estimate.csv')
            self.assertEqual(read_series_csv(Path(tmp) / 'series.csv', 4), series)
            self.assertEqual(read_estimate_csv(Path(tmp) / 'estimate.csv'), estimates)


class ContentTests(SimpleTestCase):
    def test_single_point_has_zero_content(self):
        self.assertEqual(hausdorff_content_upper([[0.2, 0.4]], 0.5), 0.0)
        blurred = hausdorff_content_upper(PointCloud(1e-4, [[0.2, 0.4]]), 0.5)
        self.assertGreater(blurred, 0.0)
        self.assertLessEqual(blurred, 1e-4 ** 0.5)

    def test_unit_segment(self):
        segment = PointCloud(1e-3, np.linspace(0.0, 1.0, 1000, endpoint=False))
        self.assertLessEqual(hausdorff_content_upper(segment, 1.0), 1.0 + 1e-9)

    def test_cantor_cover(self):
        self.assertLessEqual(hausdorff_content_upper(cantor_cloud(8), LOG2_LOG3), 1.0 + 1e-12)

    def test_monotone_in_exponent(self):
        cloud = cantor_cloud(7)
        values = [hausdorff_content_upper(cloud, s) for s in np.linspace(0.1, 1.0, 10)]
        self.assertTrue(all(a >= b - 1e-12 for a, b in zip(values, values[1:])))

    def test_subadditive_under_union(self):
        cloud = cantor_cloud(7)
        left = cloud.subset(cloud.points[:, 0] < 0.5)
        right = cloud.subset(cloud.points[:, 0] >= 0.5)
        for s in (0.3, LOG2_LOG3, 0.9):
            total = hausdorff_content_upper(cloud, s)
            parts = hausdorff_content_upper(left, s) + hausdorff_content_upper(right, s)
            self.assertLessEqual(total, parts + 1e-12)

    def test_cantor_frostman_constant(self):
        cloud = cantor_cloud(6)
        lower = hausdorff_content_lower(cloud, LOG2_LOG3)
        self.assertAlmostEqual(lower, 0.5, places=9)
        intervals = sorted((x - 3.0 ** -6 / 2, x + 3.0 ** -6 / 2) for x in cloud.points[:, 0])
        oracle = interval_cover_content(intervals, LOG2_LOG3)
        self.assertGreaterEqual(oracle, lower)
        self.assertLessEqual(oracle, 1.0 + 1e-9)

    def test_empty_slice_and_large_exponent(self):
        cloud = cantor_cloud(5)
        self.assertEqual(hausdorff_content_lower(cloud, LOG2_LOG3, mask=np.zeros(len(cloud), bool)), 0.0)
        self.assertEqual(hausdorff_content_lower(cloud, 0.8), 0.0)

    def test_preconditions(self):
        with self.assertRaises(ProvenanceError):
            hausdorff_content_lower(PointCloud(0.1, [[0.0], [1.0]]), 0.5)
        unequal = attractor_cloud(load_system('unequal_interval').system, 0.05)
        with self.assertRaises(UnsupportedSystemError):
            hausdorff_content_lower(unequal, 0.5)
        touching = attractor_cloud(load_system('sierpinski_triangle').system, 0.1)
        with self.assertRaises(PreconditionError):
            hausdorff_content_lower(touching, 1.0)


class DirectionDimensionTests(SimpleTestCase):
    def test_single_direction(self):
        estimate = direction_set_box_dimension([sphere_to_line([1.0, 2.0])])
        self.assertEqual(estimate.value, 0.0)

    def test_uniform_lines_in_the_plane(self):
        estimate = direction_set_box_dimension(sample_uniform(2, 1, 5000, seed=1))
        self.assertAlmostEqual(estimate.value, 1.0, delta=0.1)

    def test_uniform_lines_in_space(self):
        scales = [2.0 ** -j for j in range(2, 6)]
        estimate = direction_set_box_dimension(sample_uniform(3, 1, 60_000, seed=2), scales)
        self.assertAlmostEqual(estimate.value, 2.0, delta=0.15)

    def test_matches_the_box_regression_of_its_cover_series(self):
        directions = sample_uniform(3, 1, 5000, seed=3)
        scales = [2.0 ** -j for j in range(2, 6)]
        series = direction_cover_series(directions, scales)
        self.assertEqual(
            direction_set_box_dimension(directions, scales), upper_box_dimension(series, ambient_dim=2)
        )

    def test_too_few_scales(self):
        with self.assertRaises(PreconditionError):
            direction_set_box_dimension(sample_uniform(2, 1, 10, seed=0), [0.5, 0.25])
        with self.assertRaises(PreconditionError):
            direction_set_box_dimension([], [0.5, 0.25, 0.125, 0.0625])
