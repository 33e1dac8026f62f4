import math

import numpy as np
from django.test import SimpleTestCase
from rest_framework import serializers
from scipy.spatial import cKDTree
from scipy.spatial.distance import pdist

from .attractor import (
    attractor_cloud, count_cylinders, covering_cloud, separation_bounds, separation_constant,
    symbol_point, thin_cloud,
)
from .catalog import list_builtin_systems, load_system
from .exceptions import BudgetExceededError, PathError, PreconditionError, StructureError
from .invariants import (
    _MatrixSet, graph_directed_dimension, similarity_dimension, spectral_radius, transformation_group,
)
from .maps import Edge, GraphDirectedIFS, SelfSimilarIFS, Similarity
from .serializers import SystemSpecSerializer, system_to_dict

LOG2_LOG3 = math.log(2) / math.log(3)


def rotation(angle):
    return [[math.cos(angle), -math.sin(angle)], [math.sin(angle), math.cos(angle)]]


def cantor(ratio=1 / 3):
    return SelfSimilarIFS(
        [Similarity.scaling(ratio, [0.0]), Similarity.scaling(ratio, [1 - ratio])],
        name='cantor',
    )


class SimilarityTests(SimpleTestCase):
    def test_rejects_non_orthogonal_part(self):
        with self.assertRaises(StructureError):
            Similarity(0.5, [[1.0, 0.1], [0.0, 1.0]], [0.0, 0.0])

    def test_rejects_ratio_outside_unit_interval(self):
        for ratio in (0.0, 1.0, 1.5):
            with self.assertRaises(StructureError):
                Similarity.scaling(ratio, [0.0])

    def test_compose_and_fixed_point(self):
        f = Similarity(0.5, rotation(math.pi / 2), [1.0, 0.0])
        g = Similarity.scaling(0.25, [0.0, 2.0])
        x = np.array([0.3, -0.7])
        np.testing.assert_allclose(f.compose(g)(x), f(g(x)), atol=1e-15)
        np.testing.assert_allclose(f(f.fixed_point()), f.fixed_point(), atol=1e-15)
        np.testing.assert_allclose(f.inverse_image(f(x)), x, atol=1e-15)


class SymbolPointTests(SimpleTestCase):
    def test_cantor_right_branch_tends_to_one(self):
        system = cantor()
        for depth in (1, 5, 20):
            point = symbol_point(system, (2,) * depth)
            self.assertAlmostEqual(point[0], 1 - 3.0 ** -depth, places=14)

    def test_empty_word_is_origin(self):
        system = load_system('sierpinski_triangle').system
        np.testing.assert_array_equal(symbol_point(system, ()), [0.0, 0.0])

    def test_sierpinski_two_letter_word(self):
        system = load_system('sierpinski_triangle').system
        np.testing.assert_allclose(symbol_point(system, (1, 2)), [0.25, 0.0], atol=1e-15)

    def test_non_composable_path(self):
        system = load_system('golden_graph').system
        symbol_point(system, (2, 3, 1))
        with self.assertRaises(PathError):
            symbol_point(system, (2, 2))
        with self.assertRaises(PathError):
            symbol_point(cantor(), (3,))


class AttractorCloudTests(SimpleTestCase):
    def test_cantor_cylinder_count_and_spacing(self):
        system = cantor()
        for depth in range(1, 9):
            cloud = attractor_cloud(system, 3.0 ** -depth)
            self.assertEqual(len(cloud), 2 ** depth)
            self.assertGreaterEqual(pdist(cloud.points).min(), 3.0 ** -depth - 1e-12)
            self.assertTrue(cloud.has_provenance)

    def test_sierpinski_count(self):
        system = load_system('sierpinski_triangle').system
        for depth in range(1, 7):
            self.assertEqual(len(attractor_cloud(system, 2.0 ** -depth)), 3 ** depth)

    def test_four_corner_count(self):
        system = load_system('four_corner_cantor').system
        for depth in range(1, 6):
            cloud = attractor_cloud(system, 4.0 ** -depth * math.sqrt(2))
            self.assertEqual(len(cloud), 4 ** depth)

    def test_cover_property_on_deep_words(self):
        rng = np.random.default_rng(7)
        for name, depth in [('middle_thirds_cantor', 5), ('sierpinski_triangle', 4), ('four_corner_cantor', 3)]:
            system = load_system(name).system
            delta = system.diameter_bound() * system.ratios.max() ** depth
            tree = cKDTree(attractor_cloud(system, delta).points)
            for _ in range(200):
                word = tuple(rng.integers(1, system.size + 1, size=depth + 5))
                distance, _ = tree.query(symbol_point(system, word))
                self.assertLessEqual(distance, delta * (1 + 1e-9))

    def test_unequal_ratios_count_matches_enumeration(self):
        system = load_system('unequal_interval').system
        for delta in (0.1, 0.03, 0.007):
            self.assertEqual(count_cylinders(system, delta), len(attractor_cloud(system, delta)))

    def test_graph_directed_cloud_paths_start_at_vertex(self):
        system = load_system('golden_graph').system
        cloud = attractor_cloud(system, 3.0 ** -6, vertex=2)
        for word in cloud.words:
            system.validate_word(word, vertex=2)
        self.assertTrue(np.all((cloud.points >= 1 / 3 - 1e-12) & (cloud.points <= 2 / 3 + 1e-12)))

    def test_budget_error_names_feasible_resolution(self):
        system = cantor()
        with self.assertRaises(BudgetExceededError) as raised:
            attractor_cloud(system, 3.0 ** -12, point_budget=1000)
        feasible = raised.exception.feasible
        self.assertGreater(feasible, 3.0 ** -12)
        self.assertLessEqual(count_cylinders(system, feasible), 1000)

    def test_non_positive_resolution(self):
        with self.assertRaises(PreconditionError):
            attractor_cloud(cantor(), 0.0)

    def test_thinned_cloud_still_covers(self):
        system = load_system('four_corner_cantor').system
        for delta in (2.0 ** -6, 2.0 ** -7, 2.0 ** -8):
            base = attractor_cloud(system, delta / 4)
            thinned = covering_cloud(system, delta)
            self.assertEqual(thinned.resolution, delta)
            self.assertLess(len(thinned), len(base))
            distances, _ = cKDTree(thinned.points).query(base.points)
            self.assertLessEqual(distances.max(), 0.75 * delta + 1e-12)
            self.assertTrue(thinned.has_provenance)
        with self.assertRaises(PreconditionError):
            thin_cloud(attractor_cloud(system, 2.0 ** -10), 2.0 ** -11)


class SeparationTests(SimpleTestCase):
    def test_middle_thirds_gap(self):
        c = separation_constant(cantor())
        self.assertAlmostEqual(c, 1 / 3, places=12)

    def test_four_corner_certified_at_depth_one(self):
        bounds = separation_bounds(load_system('four_corner_cantor').system, max_depth=1)
        self.assertGreaterEqual(bounds[0], 0.25)

    def test_touching_maps_fail(self):
        self.assertIsNone(separation_constant(cantor(ratio=0.5)))

    def test_bounds_are_nondecreasing(self):
        for name in ('pinwheel_quarter_turn', 'irrational_rotation', 'product_cantor_thirds'):
            bounds = separation_bounds(load_system(name).system)
            self.assertTrue(all(b <= later for b, later in zip(bounds, bounds[1:])))

    def test_graph_directed_not_supported(self):
        with self.assertRaises(PreconditionError):
            separation_bounds(load_system('golden_graph').system)


class DimensionTests(SimpleTestCase):
    def test_closed_forms(self):
        self.assertAlmostEqual(similarity_dimension(cantor()), LOG2_LOG3, delta=1e-10)
        sierpinski = load_system('sierpinski_triangle').system
        self.assertAlmostEqual(similarity_dimension(sierpinski), math.log(3) / math.log(2), delta=1e-10)
        self.assertAlmostEqual(similarity_dimension([0.5, 0.25, 0.25]), 1.0, delta=1e-10)

    def test_adding_a_map_increases_dimension(self):
        ratios = [0.3, 0.2]
        self.assertLess(similarity_dimension(ratios), similarity_dimension(ratios + [0.1]))
        self.assertEqual(similarity_dimension([0.4]), 0.0)

    def test_one_vertex_graph_matches_similarity_dimension(self):
        system = load_system('unequal_interval').system
        self.assertAlmostEqual(graph_directed_dimension(system), similarity_dimension(system), delta=1e-9)

    def test_golden_graph(self):
        system = load_system('golden_graph').system
        golden = (1 + math.sqrt(5)) / 2
        self.assertAlmostEqual(graph_directed_dimension(system), math.log(golden) / math.log(3), delta=1e-9)

    def test_periodic_adjacency(self):
        g = Similarity.scaling(1 / 3, [0.0])
        h = Similarity.scaling(1 / 3, [2 / 3])
        system = GraphDirectedIFS(2, [Edge(1, 2, g), Edge(1, 2, h), Edge(2, 1, g), Edge(2, 1, h)])
        self.assertAlmostEqual(graph_directed_dimension(system), LOG2_LOG3, delta=1e-9)
        self.assertAlmostEqual(spectral_radius([[0, 2], [2, 0]]), 2.0, places=12)

    def test_non_transitive_graph_rejected(self):
        g = Similarity.scaling(0.5, [0.0])
        with self.assertRaises(StructureError):
            GraphDirectedIFS(2, [Edge(1, 1, g), Edge(1, 2, g), Edge(2, 2, g)])
        with self.assertRaises(StructureError):
            GraphDirectedIFS(2, [Edge(1, 2, g)])


class TransformationGroupTests(SimpleTestCase):
    def test_identity_group(self):
        group = transformation_group(load_system('four_corner_cantor').system)
        self.assertTrue(group.finite)
        self.assertEqual(group.order, 1)

    def test_quarter_turn_group(self):
        group = transformation_group(load_system('pinwheel_quarter_turn').system)
        self.assertTrue(group.finite)
        self.assertEqual(group.order, 4)

    def test_irrational_rotation_exceeds_budget(self):
        group = transformation_group(load_system('irrational_rotation').system, max_elements=500)
        self.assertFalse(group.finite)
        self.assertIsNone(group.order)

    def test_graph_directed_needs_vertex(self):
        system = load_system('golden_graph').system
        with self.assertRaises(PreconditionError):
            transformation_group(system)
        self.assertEqual(transformation_group(system, vertex=2).order, 1)

    def test_nearby_matrices_across_a_rounding_boundary_are_merged(self):
        matrices = _MatrixSet(1e-9)
        self.assertTrue(matrices.add(np.diag([0.1234565 - 2e-10, 1.0])))
        self.assertFalse(matrices.add(np.diag([0.1234565 + 2e-10, 1.0])))
        self.assertTrue(matrices.add(np.diag([0.1234565 + 5e-9, 1.0])))
        self.assertEqual(len(matrices.members), 2)


class CatalogTests(SimpleTestCase):
    def test_catalog_is_valid_and_consistent(self):
        definitions = list_builtin_systems()
        self.assertGreaterEqual(len(definitions), 8)
        for definition in definitions:
            system = definition.system
            if system.kind == 'graph_directed':
                computed = graph_directed_dimension(system)
            else:
                computed = similarity_dimension(system)
            self.assertAlmostEqual(computed, definition.stated_dimension, delta=1e-9, msg=definition.name)
            if definition.ssc_claimed:
                self.assertIsNotNone(separation_constant(system), msg=definition.name)

    def test_round_trip_through_serializer(self):
        definition = load_system('pinwheel_quarter_turn')
        serializer = SystemSpecSerializer(data=system_to_dict(definition))
        self.assertTrue(serializer.is_valid(), serializer.errors)
        rebuilt = serializer.save().system
        for a, b in zip(rebuilt.maps, definition.system.maps):
            np.testing.assert_array_equal(a.orthogonal_part, b.orthogonal_part)

    def test_rejects_non_orthogonal_file(self):
        data = {
            'name': 'skewed',
            'ambient_dim': 2,
            'maps': [
                {'ratio': '1/2', 'orthogonal': [1, 0.5, 0, 1], 'translation': [0, 0]},
                {'ratio': '1/2', 'orthogonal': [1, 0, 0, 1], 'translation': [0.5, 0]},
            ],
        }
        serializer = SystemSpecSerializer(data=data)
        self.assertFalse(serializer.is_valid())
        self.assertIn('maps', serializer.errors)

    def test_rejects_bad_fraction_and_unknown_name(self):
        data = {
            'name': 'bad',
            'ambient_dim': 1,
            'maps': [
                {'ratio': 'one third', 'orthogonal': [1], 'translation': [0]},
                {'ratio': '1/3', 'orthogonal': [1], 'translation': ['2/3']},
            ],
        }
        self.assertFalse(SystemSpecSerializer(data=data).is_valid())
        with self.assertRaises(serializers.ValidationError):
            load_system('no_such_system')
