import math
import tempfile
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy.stats import kstest, special_ortho_group

from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .nets import (
    build_delta_net, counting_lemma_ratio, read_net_csv, small_projection_measure, write_net_csv,
)
from .subspaces import (
    Subspace, frame_distances, line_angle, metric, project, sample_uniform, sphere_to_line,
)

GRASSMANNIANS = [(2, 1), (3, 1), (3, 2), (4, 2)]


class SubspaceTests(SimpleTestCase):
    def test_axis_projection(self):
        V = Subspace.coordinate(2, [0])
        np.testing.assert_allclose(project(V, [3.0, 4.0]), [3.0])
        self.assertEqual(np.linalg.norm(project(V, [3.0, 4.0])), 3.0)

    def test_point_in_plane_keeps_its_norm(self):
        V = sample_uniform(4, 2, 1, seed=3)[0]
        x = V.frame @ np.array([0.6, -1.2])
        self.assertAlmostEqual(np.linalg.norm(V.project(x)), np.linalg.norm(x), places=12)

    def test_hyperplane_projection(self):
        V = Subspace.coordinate(3, [0, 1])
        np.testing.assert_allclose(V.projection @ np.array([1.0, 2.0, 3.0]), [1.0, 2.0, 0.0])

    def test_projection_matrix_identities(self):
        for n, k in GRASSMANNIANS:
            for V in sample_uniform(n, k, 25, seed=n * 10 + k):
                P = V.projection
                np.testing.assert_allclose(P @ P, P, atol=1e-10)
                np.testing.assert_allclose(P, P.T, atol=1e-10)
                self.assertAlmostEqual(np.trace(P), k, delta=1e-10)

    def test_projections_are_one_lipschitz(self):
        rng = np.random.default_rng(5)
        for n, k in GRASSMANNIANS:
            for V in sample_uniform(n, k, 20, seed=k):
                x = rng.standard_normal(n)
                self.assertLessEqual(np.linalg.norm(V.project(x)), np.linalg.norm(x) + 1e-12)

    def test_rejects_bad_frames(self):
        with self.assertRaises(PreconditionError):
            Subspace([[1.0, 1.0], [0.0, 1.0]])
        with self.assertRaises(DimensionMismatchError):
            Subspace.coordinate(2, [0]).project([1.0, 2.0, 3.0])

    def test_complement(self):
        V = sample_uniform(4, 1, 1, seed=8)[0]
        W = V.complement()
        self.assertEqual(W.plane_dim, 3)
        np.testing.assert_allclose(V.frame.T @ W.frame, 0.0, atol=1e-12)


class MetricTests(SimpleTestCase):
    def test_equal_and_orthogonal_lines(self):
        V = sphere_to_line([1.0, 0.0])
        self.assertEqual(metric(V, V), 0.0)
        self.assertAlmostEqual(metric(V, sphere_to_line([0.0, 1.0])), 1.0, places=12)

    def test_lines_at_angle_theta(self):
        V = sphere_to_line([1.0, 0.0])
        for theta in np.linspace(0.0, math.pi, 100):
            W = sphere_to_line([math.cos(theta), math.sin(theta)])
            self.assertAlmostEqual(metric(V, W), abs(math.sin(theta)), delta=1e-12)

    def test_antipodal_directions_give_one_line(self):
        e = np.array([0.6, 0.8])
        self.assertAlmostEqual(metric(sphere_to_line(e), sphere_to_line(-e)), 0.0, delta=1e-15)
        self.assertAlmostEqual(line_angle(sphere_to_line(-e)), line_angle(sphere_to_line(e)), delta=1e-12)

    def test_metric_axioms_on_random_triples(self):
        for n, k in GRASSMANNIANS:
            U, V, W = [sample_uniform(n, k, 30, seed=seed) for seed in (1, 2, 3)]
            for a, b, c in zip(U, V, W):
                self.assertEqual(metric(a, b), metric(b, a))
                self.assertLessEqual(metric(a, c), metric(a, b) + metric(b, c) + 1e-12)

    def test_frame_change_is_same_point(self):
        rotation = special_ortho_group.rvs(2, random_state=4)
        for n in (3, 4):
            V = sample_uniform(n, 2, 1, seed=n)[0]
            self.assertAlmostEqual(metric(V, Subspace(V.frame @ rotation)), 0.0, delta=1e-12)

    def test_distance_kernel_matches_metric(self):
        for n, k in GRASSMANNIANS + [(5, 3)]:
            members = sample_uniform(n, k, 40, seed=11)
            W = sample_uniform(n, k, 1, seed=12)[0]
            kernel = frame_distances(np.stack([V.frame for V in members]), W.frame)
            direct = [metric(V, W) for V in members]
            np.testing.assert_allclose(kernel, direct, atol=1e-9)

    def test_mismatched_grassmannians(self):
        with self.assertRaises(DimensionMismatchError):
            metric(Subspace.coordinate(3, [0]), Subspace.coordinate(3, [0, 1]))


class SamplingTests(SimpleTestCase):
    def test_mean_projection_is_isotropic(self):
        for n, k in [(3, 1), (4, 2)]:
            mean = np.mean([V.projection for V in sample_uniform(n, k, 100_000, seed=21)], axis=0)
            np.testing.assert_allclose(mean, (k / n) * np.eye(n), atol=0.01)

    def test_line_angles_are_uniform(self):
        angles = [line_angle(V) for V in sample_uniform(2, 1, 2000, seed=17)]
        self.assertGreater(kstest(np.array(angles) / math.pi, 'uniform').pvalue, 0.01)

    def test_seed_determinism(self):
        first = sample_uniform(3, 2, 10, seed=99)
        second = sample_uniform(3, 2, 10, seed=99)
        for a, b in zip(first, second):
            np.testing.assert_array_equal(a.frame, b.frame)

    def test_plane_dim_below_ambient(self):
        for n, k in [(3, 3), (2, 0), (2, 4)]:
            with self.assertRaises(DimensionMismatchError):
                sample_uniform(n, k, 1, seed=0)
        with self.assertRaises(DimensionMismatchError):
            build_delta_net(2, 2, 0.5, seed=0)


class DeltaNetTests(SimpleTestCase):
    def test_half_separated_lines(self):
        for seed in range(5):
            net = build_delta_net(2, 1, 0.5, oversample_factor=50, seed=seed)
            self.assertGreaterEqual(len(net), 3)
            self.assertLessEqual(len(net), 7)
            self.assertGreater(net.minimum_distance(), 0.5)
            self.assertTrue(net.complete)

    def test_separation_above_one_gives_single_member(self):
        self.assertEqual(len(build_delta_net(3, 1, 2.0, seed=0)), 1)

    def test_members_are_separated_under_metric(self):
        net = build_delta_net(3, 2, 0.25, seed=4)
        members = list(net)
        for i, V in enumerate(members):
            for W in members[:i]:
                self.assertGreater(metric(V, W), 0.25)

    def test_size_scales_like_grassmannian_dimension(self):
        ladders = {(2, 1): range(2, 7), (3, 1): range(2, 6), (3, 2): range(2, 6)}
        for (n, k), exponents in ladders.items():
            normalised = []
            for j in exponents:
                separation = 2.0 ** -j
                net = build_delta_net(n, k, separation, seed=j)
                normalised.append(len(net) * separation ** (k * (n - k)))
            self.assertLess(max(normalised) / min(normalised), 3.0, msg=f'Gr({n},{k}): {normalised}')

    def test_member_budget_marks_net_incomplete(self):
        net = build_delta_net(3, 1, 0.05, seed=1, max_members=50)
        self.assertEqual(len(net), 50)
        self.assertFalse(net.complete)

    def test_csv_round_trip(self):
        net = build_delta_net(4, 2, 0.5, seed=6)
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'net.csv'
            write_net_csv(net, path)
            again = read_net_csv(path)
        self.assertEqual((again.ambient_dim, again.plane_dim, again.seed), (4, 2, 6))
        self.assertEqual(again.separation, net.separation)
        np.testing.assert_array_equal(again.frames, net.frames)


class CountingLemmaTests(SimpleTestCase):
    def test_tiny_threshold_counts_nothing(self):
        net = build_delta_net(3, 1, 0.25, seed=2)
        x = np.array([0.3, -0.5, 0.8])
        smallest = min(np.linalg.norm(V.project(x)) for V in net)
        result = counting_lemma_ratio(x, smallest / 2, 0.25, net)
        self.assertEqual((result.lhs_count, result.ratio), (0, 0.0))

    def test_zero_vector_rejected(self):
        net = build_delta_net(2, 1, 0.5, seed=0)
        with self.assertRaises(PreconditionError):
            counting_lemma_ratio([0.0, 0.0], 0.1, 0.5, net)

    def test_lines_near_the_normal_direction(self):
        for j in range(3, 9):
            delta = 2.0 ** -j
            net = build_delta_net(2, 1, delta, seed=j)
            self.assertLessEqual(counting_lemma_ratio([1.0, 0.0], delta, delta, net).ratio, 3.0)

    def test_scaling_x_shrinks_the_count(self):
        net = build_delta_net(3, 1, 0.125, seed=9)
        rng = np.random.default_rng(9)
        for _ in range(20):
            x = rng.standard_normal(3)
            x *= rng.uniform(0.25, 1.0) / np.linalg.norm(x)
            base = counting_lemma_ratio(x, 0.2, 0.125, net)
            scaled = counting_lemma_ratio(2 * x, 0.2, 0.125, net)
            self.assertLessEqual(scaled.lhs_count, base.lhs_count)

    def test_small_projection_measure_on_the_circle(self):
        estimate, reference = small_projection_measure([1.0, 0.0], 0.1, 2, 1, 20_000, seed=1)
        self.assertAlmostEqual(estimate, 2 * math.asin(0.1) / math.pi, delta=0.01)
        self.assertEqual(reference, 0.1)
