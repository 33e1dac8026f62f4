"""Contracting similarities and the systems built from them.

A self-similar IFS is treated internally as a graph-directed IFS on a single
vertex whose edges are all loops, so enumeration code only has to know about
edges. Letters of a symbol word are 1-based edge indices in both cases.
"""
import logging
from collections import deque
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings
from scipy.optimize import linprog
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial.distance import pdist

from .exceptions import DimensionMismatchError, PathError, StructureError

logger = logging.getLogger(__name__)

SELF_SIMILAR = 'self_similar'
GRAPH_DIRECTED = 'graph_directed'

SYSTEM_KIND_CHOICES = [
    (SELF_SIMILAR, 'Self-similar IFS'),
    (GRAPH_DIRECTED, 'Graph-directed IFS'),
]


def orthogonality_tolerance():
    return getattr(settings, 'ORTHOGONALITY_TOLERANCE', 1e-12)


def is_orthogonal(matrix, tolerance=None):
    """True when ``matrix @ matrix.T`` is the identity entrywise within tolerance."""
    if tolerance is None:
        tolerance = orthogonality_tolerance()
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        return False
    defect = matrix @ matrix.T - np.eye(matrix.shape[0])
    return bool(np.max(np.abs(defect), initial=0.0) <= tolerance)


@dataclass(frozen=True, eq=False)
class Similarity:
    """The contraction g(x) = ratio * T(x) + translation."""

    ratio: float
    orthogonal_part: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        translation = np.array(self.translation, dtype=float).reshape(-1)
        size = translation.size
        orthogonal = np.array(self.orthogonal_part, dtype=float)
        if size == 0:
            raise DimensionMismatchError('similarity needs a nonempty translation vector')
        if orthogonal.size != size * size:
            raise DimensionMismatchError(
                f'orthogonal part has {orthogonal.size} entries, expected {size * size}'
            )
        orthogonal = orthogonal.reshape(size, size)
        ratio = float(self.ratio)
        if not 0.0 < ratio < 1.0:
            raise StructureError(f'similarity ratio must lie in (0, 1), got {ratio}')
        if not is_orthogonal(orthogonal):
            raise StructureError('orthogonal part is not orthogonal within tolerance')

        translation.setflags(write=False)
        orthogonal.setflags(write=False)
        object.__setattr__(self, 'ratio', ratio)
        object.__setattr__(self, 'orthogonal_part', orthogonal)
        object.__setattr__(self, 'translation', translation)

    @classmethod
    def scaling(cls, ratio, translation):
        """Rotation-free similarity x -> ratio * x + translation."""
        translation = np.asarray(translation, dtype=float).reshape(-1)
        return cls(ratio, np.eye(translation.size), translation)

    @property
    def ambient_dim(self):
        return self.translation.size

    @property
    def is_rotation_free(self):
        identity = np.eye(self.ambient_dim)
        return bool(np.max(np.abs(self.orthogonal_part - identity)) <= orthogonality_tolerance())

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise DimensionMismatchError(
                f'point of dimension {x.shape[-1]} fed to a map on R^{self.ambient_dim}'
            )
        return self.ratio * (x @ self.orthogonal_part.T) + self.translation

    def compose(self, other):
        """Return self ∘ other."""
        if other.ambient_dim != self.ambient_dim:
            raise DimensionMismatchError('cannot compose similarities of different dimensions')
        return Similarity(
            self.ratio * other.ratio,
            self.orthogonal_part @ other.orthogonal_part,
            self(other.translation),
        )

    def fixed_point(self):
        system = np.eye(self.ambient_dim) - self.ratio * self.orthogonal_part
        return np.linalg.solve(system, self.translation)

    def inverse_image(self, y):
        y = np.asarray(y, dtype=float)
        return ((y - self.translation) @ self.orthogonal_part) / self.ratio

    def __repr__(self):
        return f'Similarity(ratio={self.ratio:g}, dim={self.ambient_dim})'


@dataclass(frozen=True)
class Edge:
    source: int
    target: int
    similarity: Similarity


class IteratedSystem:
    """Behaviour shared by self-similar and graph-directed systems.

    Subclasses provide ``edges`` (a tuple of :class:`Edge`), ``vertex_count``
    and ``name``.
    """

    kind = None

    @property
    def ambient_dim(self):
        return self.edges[0].similarity.ambient_dim

    @property
    def size(self):
        return len(self.edges)

    @cached_property
    def ratios(self):
        ratios = np.array([edge.similarity.ratio for edge in self.edges])
        ratios.setflags(write=False)
        return ratios

    @property
    def is_rotation_free(self):
        return all(edge.similarity.is_rotation_free for edge in self.edges)

    @cached_property
    def adjacency(self):
        """Edge-count matrix, ``adjacency[i-1, j-1] = card E_{i,j}``."""
        matrix = np.zeros((self.vertex_count, self.vertex_count))
        for edge in self.edges:
            matrix[edge.source - 1, edge.target - 1] += 1
        return matrix

    @property
    def is_transitive(self):
        count, _ = connected_components(
            csr_matrix(self.adjacency), directed=True, connection='strong'
        )
        return count == 1

    @property
    def has_equal_ratios(self):
        return bool(np.ptp(self.ratios) <= 1e-12)

    def similarity(self, letter):
        if not 1 <= letter <= self.size:
            raise PathError(f'letter {letter} is outside 1..{self.size}')
        return self.edges[letter - 1].similarity

    def outgoing(self, vertex):
        """Letters of the edges leaving ``vertex``, in edge order."""
        return tuple(
            letter for letter, edge in enumerate(self.edges, start=1)
            if edge.source == vertex
        )

    def check_vertex(self, vertex):
        vertex = 1 if vertex is None else int(vertex)
        if not 1 <= vertex <= self.vertex_count:
            raise StructureError(f'vertex {vertex} is outside 1..{self.vertex_count}')
        return vertex

    def validate_word(self, word, vertex=None):
        """Return ``word`` as a tuple after checking it is a composable path.

        When ``vertex`` is given the path must also start there.
        """
        word = tuple(int(letter) for letter in word)
        previous = None if vertex is None else self.check_vertex(vertex)
        for position, letter in enumerate(word):
            if not 1 <= letter <= self.size:
                raise PathError(f'letter {letter} at position {position} is outside 1..{self.size}')
            edge = self.edges[letter - 1]
            if previous is not None and edge.source != previous:
                raise PathError(
                    f'edge {letter} at position {position} leaves vertex {edge.source}, '
                    f'but the path is at vertex {previous}'
                )
            previous = edge.target
        return word

    def end_vertex(self, word, vertex=None):
        if word:
            return self.edges[word[-1] - 1].target
        return self.check_vertex(vertex)

    def compose_word(self, word):
        """Affine data (scale, matrix, translation) of g_{w1} ∘ ... ∘ g_{wm}."""
        word = self.validate_word(word)
        n = self.ambient_dim
        scale, matrix, translation = 1.0, np.eye(n), np.zeros(n)
        for letter in word:
            g = self.edges[letter - 1].similarity
            translation = translation + scale * (matrix @ g.translation)
            matrix = matrix @ g.orthogonal_part
            scale *= g.ratio
        return scale, matrix, translation

    @cached_property
    def invariant_ball(self):
        """(centre, radius) of a closed ball every map sends into itself.

        The centre is the mean of the anchors; the radius is
        max_e |g_e(c) - c| / (1 - a_e).
        """
        centre = np.mean([self.anchor(v) for v in range(1, self.vertex_count + 1)], axis=0)
        radius = max(
            np.linalg.norm(edge.similarity(centre) - centre) / (1.0 - edge.similarity.ratio)
            for edge in self.edges
        )
        centre.setflags(write=False)
        return centre, float(radius)

    def cloud_anchor(self, vertex=None):
        """Point that cylinder images are evaluated at when building clouds."""
        return self.anchor(vertex)

    def diameter_bound(self, vertex=None):
        self.check_vertex(vertex)
        return 2.0 * self.invariant_ball[1]

    def __repr__(self):
        return f'{type(self).__name__}(name={self.name!r}, edges={self.size}, dim={self.ambient_dim})'


class SelfSimilarIFS(IteratedSystem):
    """A finite family g_1, ..., g_N of contracting similarities of R^n."""

    kind = SELF_SIMILAR
    vertex_count = 1

    def __init__(self, maps, name=''):
        maps = tuple(maps)
        if len(maps) < 2:
            raise StructureError(f'a self-similar IFS needs at least 2 maps, got {len(maps)}')
        dims = {g.ambient_dim for g in maps}
        if len(dims) != 1:
            raise StructureError(f'maps act on different dimensions: {sorted(dims)}')
        self.maps = maps
        self.name = name
        self.edges = tuple(Edge(1, 1, g) for g in maps)

    @cached_property
    def fixed_points(self):
        points = np.array([g.fixed_point() for g in self.maps])
        points.setflags(write=False)
        return points

    def anchor(self, vertex=None):
        self.check_vertex(vertex)
        return self.fixed_points.mean(axis=0)

    @cached_property
    def hull_is_invariant(self):
        """True when every map sends the convex hull of the fixed points into itself."""
        points = self.fixed_points
        count = len(points)
        equality = np.vstack([points.T, np.ones(count)])
        for g in self.maps:
            for image in g(points):
                if np.min(np.linalg.norm(points - image, axis=1)) <= 1e-12:
                    continue
                result = linprog(
                    np.zeros(count),
                    A_eq=equality,
                    b_eq=np.append(image, 1.0),
                    bounds=(0, None),
                    method='highs',
                )
                if result.status != 0:
                    return False
        return True

    @cached_property
    def _diameter(self):
        if self.hull_is_invariant:
            return float(np.max(pdist(self.fixed_points)))
        logger.debug(f'{self.name or "system"}: hull of fixed points not invariant, using ball bound')
        return 2.0 * self.invariant_ball[1]

    def diameter_bound(self, vertex=None):
        """Upper bound on diam K; exact when the fixed-point hull is invariant."""
        self.check_vertex(vertex)
        return self._diameter


class GraphDirectedIFS(IteratedSystem):
    """Similarities indexed by the edges of a strongly connected digraph."""

    kind = GRAPH_DIRECTED

    def __init__(self, vertex_count, edges, name=''):
        self.vertex_count = int(vertex_count)
        self.edges = tuple(edges)
        self.name = name
        if self.vertex_count < 1:
            raise StructureError('a graph-directed IFS needs at least one vertex')
        if not self.edges:
            raise StructureError('a graph-directed IFS needs at least one edge')
        dims = {edge.similarity.ambient_dim for edge in self.edges}
        if len(dims) != 1:
            raise StructureError(f'edge maps act on different dimensions: {sorted(dims)}')
        for letter, edge in enumerate(self.edges, start=1):
            for end in (edge.source, edge.target):
                if not 1 <= end <= self.vertex_count:
                    raise StructureError(f'edge {letter} touches unknown vertex {end}')
        missing = [v for v in range(1, self.vertex_count + 1) if not self.outgoing(v)]
        if missing:
            raise StructureError(f'vertices without outgoing edges: {missing}')
        if not self.is_transitive:
            raise StructureError('digraph is not strongly connected')

    def shortest_cycle(self, vertex):
        """Shortest edge path leaving and returning to ``vertex`` (breadth first)."""
        vertex = self.check_vertex(vertex)
        paths = {vertex: ()}
        queue = deque([vertex])
        while queue:
            current = queue.popleft()
            for letter in self.outgoing(current):
                target = self.edges[letter - 1].target
                if target == vertex:
                    return paths[current] + (letter,)
                if target not in paths:
                    paths[target] = paths[current] + (letter,)
                    queue.append(target)
        raise StructureError(f'no cycle passes through vertex {vertex}')

    def anchor(self, vertex=None):
        """Fixed point of the shortest cycle through ``vertex``; it lies in K_vertex."""
        scale, matrix, translation = self.compose_word(self.shortest_cycle(vertex))
        n = self.ambient_dim
        return np.linalg.solve(np.eye(n) - scale * matrix, translation)


@dataclass(frozen=True)
class SystemDefinition:
    """A system together with the metadata stored in its file."""

    name: str
    system: IteratedSystem
    description: str = ''
    stated_dimension: float = None
    ssc_claimed: bool = False
    path: object = None
