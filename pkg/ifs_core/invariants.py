"""Similarity dimensions and transformation groups."""
import itertools
import logging
from collections import deque
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.optimize import bisect

from .exceptions import PreconditionError, StructureError
from .maps import GRAPH_DIRECTED

logger = logging.getLogger(__name__)

SIMILARITY_TOLERANCE = 1e-12
GRAPH_DIRECTED_TOLERANCE = 1e-10


def _upper_bracket(function, start):
    upper = max(float(start), 1.0)
    while function(upper) > 0:
        upper *= 2.0
    return upper


def similarity_dimension(system):
    """Unique σ ≥ 0 with Σ a_i^σ = 1.

    Accepts a self-similar system or a plain sequence of ratios.
    """
    if getattr(system, 'kind', None) == GRAPH_DIRECTED:
        raise PreconditionError('use graph_directed_dimension for graph-directed systems')
    ratios = np.asarray(getattr(system, 'ratios', system), dtype=float)
    if ratios.size == 0:
        raise PreconditionError('similarity dimension needs at least one ratio')
    if np.any((ratios <= 0) | (ratios >= 1)):
        raise PreconditionError('ratios must lie in (0, 1)')

    def pressure(s):
        return float(np.sum(ratios ** s)) - 1.0

    if pressure(0.0) <= 0:
        return 0.0
    upper = _upper_bracket(pressure, getattr(system, 'ambient_dim', 0) + 1)
    return bisect(pressure, 0.0, upper, xtol=SIMILARITY_TOLERANCE)


def weight_matrix(system, s):
    """M(s) with entries Σ_{e ∈ E_{i,j}} a_e^s."""
    matrix = np.zeros((system.vertex_count, system.vertex_count))
    for edge in system.edges:
        matrix[edge.source - 1, edge.target - 1] += edge.similarity.ratio ** s
    return matrix


def spectral_radius(matrix, tolerance=1e-14, max_iterations=100_000):
    """Perron root of a nonnegative irreducible matrix.

    Iterates on M + I, which is primitive even when M is periodic, and stops
    once the Collatz-Wielandt bounds min(Av/v) <= ρ <= max(Av/v) meet.
    """
    shifted = np.asarray(matrix, dtype=float) + np.eye(len(matrix))
    vector = np.full(len(matrix), 1.0 / len(matrix))
    low, high = 0.0, np.inf
    for _ in range(max_iterations):
        image = shifted @ vector
        quotients = image / vector
        low, high = quotients.min(), quotients.max()
        if high - low <= tolerance * high:
            break
        vector = image / image.sum()
    else:
        logger.warning(f'power iteration did not settle: bounds [{low}, {high}]')
    return 0.5 * (low + high) - 1.0


def graph_directed_dimension(system):
    """σ with spectral radius of M(σ) equal to 1.

    A self-similar system is read as a one-vertex graph, which reduces to
    similarity_dimension.
    """
    if not system.is_transitive:
        raise StructureError('graph-directed dimension needs a strongly connected digraph')

    def pressure(s):
        return spectral_radius(weight_matrix(system, s)) - 1.0

    if pressure(0.0) <= 0:
        return 0.0
    upper = _upper_bracket(pressure, system.ambient_dim + 1)
    return bisect(pressure, 0.0, upper, xtol=GRAPH_DIRECTED_TOLERANCE)


def system_dimension(system):
    if system.kind == GRAPH_DIRECTED:
        return graph_directed_dimension(system)
    return similarity_dimension(system)


class _MatrixSet:
    """Orthogonal matrices deduplicated within ``tolerance`` (max-abs entry).

    Matrices are hashed on a grid over their first few entries with cells no
    smaller than the tolerance, and a lookup probes the neighbouring cells too.
    """

    key_entries = 3

    def __init__(self, tolerance):
        self.tolerance = tolerance
        self.cell_size = max(float(tolerance), 1e-12)
        self.buckets = {}
        self.members = []
        self._offsets = None

    def _key(self, matrix):
        head = np.asarray(matrix, dtype=float).ravel()[:self.key_entries]
        return tuple(int(i) for i in np.floor(head / self.cell_size))

    def add(self, matrix):
        key = self._key(matrix)
        if self._offsets is None:
            self._offsets = list(itertools.product((-1, 0, 1), repeat=len(key)))
        for offset in self._offsets:
            neighbour = tuple(i + d for i, d in zip(key, offset))
            for other in self.buckets.get(neighbour, ()):
                if np.max(np.abs(other - matrix)) <= self.tolerance:
                    return False
        self.buckets.setdefault(key, []).append(matrix)
        self.members.append(matrix)
        return True


@dataclass(frozen=True)
class TransformationGroup:
    vertex: int
    elements: tuple
    finite: bool

    @property
    def order(self):
        return len(self.elements) if self.finite else None


def transformation_group(system, vertex=None, max_elements=None, tolerance=None):
    """Close the orthogonal parts of cycles through ``vertex`` under composition.

    Explores (vertex, matrix) states breadth first. If more than
    ``max_elements`` states appear the group is reported as not finite
    (possibly infinite) with the elements found so far.
    """
    if system.kind == GRAPH_DIRECTED and vertex is None:
        raise PreconditionError('a vertex is required for graph-directed systems')
    vertex = system.check_vertex(vertex)
    budget = max_elements or getattr(settings, 'GROUP_ELEMENT_BUDGET', 10_000)
    tolerance = tolerance or getattr(settings, 'GROUP_MATRIX_TOLERANCE', 1e-9)

    seen = {v: _MatrixSet(tolerance) for v in range(1, system.vertex_count + 1)}
    identity = np.eye(system.ambient_dim)
    seen[vertex].add(identity)
    queue = deque([(vertex, identity)])
    states = 1
    while queue:
        current, matrix = queue.popleft()
        for letter in system.outgoing(current):
            edge = system.edges[letter - 1]
            product = matrix @ edge.similarity.orthogonal_part
            if not seen[edge.target].add(product):
                continue
            states += 1
            if states > budget:
                logger.warning(
                    f'{system.name or "system"}: transformation group exceeded {budget} elements'
                )
                return TransformationGroup(vertex, tuple(seen[vertex].members), False)
            queue.append((edge.target, product))
    return TransformationGroup(vertex, tuple(seen[vertex].members), True)
