"""Symbol points, δ-resolution clouds and separation certificates."""
import logging
import math
from collections import defaultdict
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from scipy.spatial.distance import cdist

from .exceptions import BudgetExceededError, PreconditionError, ProvenanceError
from .maps import SELF_SIMILAR

logger = logging.getLogger(__name__)

# relative slack on the cylinder stopping rule, so δ = r^m * diam stops at depth m
STOP_SLACK = 1e-9


@dataclass(frozen=True, eq=False)
class PointCloud:
    """Finite sample A' of an attractor at resolution δ.

    ``words[i]`` is the symbol word whose cylinder produced ``points[i]``;
    clouds read from plain coordinates carry no words.
    """

    resolution: float
    points: np.ndarray
    words: tuple = ()
    system: object = None
    vertex: int = 1

    def __post_init__(self):
        points = np.array(self.points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(-1, 1)
        points.setflags(write=False)
        object.__setattr__(self, 'points', points)
        object.__setattr__(self, 'words', tuple(tuple(w) for w in self.words))
        if self.words and len(self.words) != len(points):
            raise ProvenanceError(f'{len(self.words)} words for {len(points)} points')

    @classmethod
    def from_points(cls, points, resolution):
        return cls(float(resolution), points)

    def __len__(self):
        return len(self.points)

    @property
    def ambient_dim(self):
        return self.points.shape[1]

    @property
    def has_provenance(self):
        return bool(self.words) and len(self.words) == len(self.points)

    def require_provenance(self):
        if not self.has_provenance:
            raise ProvenanceError('point cloud carries no symbolic provenance')

    def subset(self, mask):
        mask = np.asarray(mask)
        indices = np.flatnonzero(mask) if mask.dtype == bool else mask
        words = tuple(self.words[i] for i in indices) if self.has_provenance else ()
        return PointCloud(self.resolution, self.points[indices], words, self.system, self.vertex)


def symbol_point(system, word, anchor=None, vertex=None):
    """Evaluate g_{w1} ∘ ... ∘ g_{wm}(anchor); the anchor defaults to the origin."""
    word = system.validate_word(word, vertex)
    scale, matrix, translation = system.compose_word(word)
    if anchor is None:
        anchor = np.zeros(system.ambient_dim)
    return scale * (matrix @ np.asarray(anchor, dtype=float)) + translation


def truncation_error(system, word):
    """Bound on |symbol_point(w) - Π(ω)| for any infinite ω extending w."""
    scale = system.compose_word(word)[0]
    centre, radius = system.invariant_ball
    return scale * (np.linalg.norm(centre) + radius)


def _diameters(system):
    return np.array([system.diameter_bound(v) for v in range(1, system.vertex_count + 1)])


def count_cylinders(system, resolution, vertex=None, limit=None):
    """Number of points ``attractor_cloud`` would produce at ``resolution``.

    Works on (scale, end vertex) multiplicities so nothing is materialised.
    With ``limit`` set, counting stops as soon as the total is known to
    exceed it and the returned value is only a lower bound.
    """
    vertex = system.check_vertex(vertex)
    threshold = float(resolution) * (1.0 + STOP_SLACK)
    diameters = _diameters(system)
    frontier = {(0.0, vertex): 1}
    total = 0
    while frontier:
        successors = defaultdict(int)
        for (log_scale, end), multiplicity in frontier.items():
            if math.exp(log_scale) * diameters[end - 1] <= threshold:
                total += multiplicity
                continue
            for letter in system.outgoing(end):
                edge = system.edges[letter - 1]
                key = (round(log_scale + math.log(edge.similarity.ratio), 10), edge.target)
                successors[key] += multiplicity
        frontier = successors
        if limit is not None and total + sum(frontier.values()) > limit:
            return total + sum(frontier.values())
    return total


def feasible_resolution(system, resolution, budget, vertex=None):
    """Smallest δ of the form resolution * 2^j whose cloud fits in ``budget``."""
    delta = float(resolution)
    while count_cylinders(system, delta, vertex=vertex, limit=budget) > budget:
        delta *= 2.0
    return delta


def attractor_cloud(system, resolution, vertex=None, point_budget=None):
    """Enumerate the words whose cylinder diameter first drops to at most δ.

    Each word w contributes the point g_w(anchor), where the anchor lies in
    the attractor piece at the word's end vertex, so every point of the
    attractor is within δ of the cloud.
    """
    delta = float(resolution)
    if not delta > 0:
        raise PreconditionError(f'resolution must be positive, got {resolution}')
    vertex = system.check_vertex(vertex)
    budget = point_budget or getattr(settings, 'CLOUD_POINT_BUDGET', 2_000_000)

    expected = count_cylinders(system, delta, vertex=vertex, limit=budget)
    if expected > budget:
        feasible = feasible_resolution(system, delta, budget, vertex=vertex)
        raise BudgetExceededError(
            f'{system.name or "system"} needs more than {budget} points at δ={delta:g}; '
            f'the finest feasible resolution is δ={feasible:g}',
            feasible=feasible,
            budget=budget,
        )

    n = system.ambient_dim
    threshold = delta * (1.0 + STOP_SLACK)
    diameters = _diameters(system)
    anchors = np.array([system.cloud_anchor(v) for v in range(1, system.vertex_count + 1)])
    rotation_free = system.is_rotation_free

    scales = np.ones(1)
    translations = np.zeros((1, n))
    matrices = None if rotation_free else np.eye(n)[None, :, :]
    ends = np.array([vertex])
    words = [()]
    points, finished = [], []

    while len(scales):
        done = scales * diameters[ends - 1] <= threshold
        if done.any():
            local = anchors[ends[done] - 1]
            if not rotation_free:
                local = np.einsum('mij,mj->mi', matrices[done], local)
            points.append(scales[done, None] * local + translations[done])
            finished.extend(words[i] for i in np.flatnonzero(done))

        active = np.flatnonzero(~done)
        next_scales, next_translations, next_matrices, next_ends, next_words = [], [], [], [], []
        for letter, edge in enumerate(system.edges, start=1):
            rows = active[ends[active] == edge.source]
            if not len(rows):
                continue
            g = edge.similarity
            if rotation_free:
                shift = np.broadcast_to(g.translation, (len(rows), n))
            else:
                shift = np.einsum('mij,j->mi', matrices[rows], g.translation)
                next_matrices.append(matrices[rows] @ g.orthogonal_part)
            next_translations.append(translations[rows] + scales[rows, None] * shift)
            next_scales.append(scales[rows] * g.ratio)
            next_ends.append(np.full(len(rows), edge.target))
            next_words.extend(words[i] + (letter,) for i in rows)

        if not next_scales:
            break
        scales = np.concatenate(next_scales)
        translations = np.concatenate(next_translations)
        matrices = None if rotation_free else np.concatenate(next_matrices)
        ends = np.concatenate(next_ends)
        words = next_words

    points = np.concatenate(points) if points else np.zeros((0, n))
    order = sorted(range(len(finished)), key=finished.__getitem__)
    logger.info(f'{system.name or "system"}: {len(order)} cylinder points at δ={delta:g}')
    return PointCloud(
        delta,
        points[order],
        tuple(finished[i] for i in order),
        system,
        vertex,
    )


def thin_cloud(cloud, resolution):
    """Keep the first point of every grid cell, coarse enough that the kept
    points still come within ``resolution`` of the attractor.

    The result is a δ-cover A' whose size tracks N(K, δ) instead of the
    staircase of cylinder counts.
    """
    slack = float(resolution) - cloud.resolution
    if not slack > 0:
        raise PreconditionError(
            f'thinning to δ={resolution:g} needs a finer cloud, got resolution {cloud.resolution:g}'
        )
    side = slack / math.sqrt(cloud.ambient_dim)
    cells = np.floor(cloud.points / side).astype(np.int64)
    _, first = np.unique(cells, axis=0, return_index=True)
    kept = cloud.subset(np.sort(first))
    return PointCloud(float(resolution), kept.points, kept.words, cloud.system, cloud.vertex)


def covering_cloud(system, resolution, vertex=None, refinement=4, point_budget=None):
    """δ-cover of the attractor thinned from the cylinder cloud at δ / refinement."""
    base = attractor_cloud(system, resolution / refinement, vertex=vertex, point_budget=point_budget)
    return thin_cloud(base, resolution)


def _minimum_gap(centres_a, radii_a, centres_b, radii_b, chunk=1024):
    best = math.inf
    for start in range(0, len(centres_a), chunk):
        stop = start + chunk
        gaps = cdist(centres_a[start:stop], centres_b)
        gaps -= radii_a[start:stop, None]
        gaps -= radii_b[None, :]
        best = min(best, float(gaps.min()))
    return best


def separation_bounds(system, max_depth=None, word_budget=None):
    """Certified lower bounds on min_{i≠j} dist(g_i(K), g_j(K)), one per depth.

    At depth m every word gets the ball g_w(B), B the invariant ball; balls
    of words with different first letters bound the first-level gaps from
    below. Entry m-1 of the result is the bound at depth m; the list is
    nondecreasing and stops early when N^m exceeds ``word_budget``.
    """
    if system.kind != SELF_SIMILAR:
        raise PreconditionError('separation constants are defined for self-similar systems')
    max_depth = max_depth or getattr(settings, 'SEPARATION_MAX_DEPTH', 6)
    word_budget = word_budget or getattr(settings, 'SEPARATION_WORD_BUDGET', 5_000)

    N, n = system.size, system.ambient_dim
    centre, radius = system.invariant_ball
    ratios = system.ratios
    shifts = np.array([g.translation for g in system.maps])
    rotations = np.array([g.orthogonal_part for g in system.maps])

    scales = np.ones(1)
    translations = np.zeros((1, n))
    matrices = np.eye(n)[None, :, :]
    bounds = []
    for depth in range(1, max_depth + 1):
        if N ** depth > word_budget:
            logger.info(f'separation: stopping at depth {depth - 1}, {N ** depth} words exceed the budget')
            break
        # children of word i are stored at i*N + (letter-1): lexicographic order
        translations = (
            translations[:, None, :]
            + scales[:, None, None] * np.einsum('mij,lj->mli', matrices, shifts)
        ).reshape(-1, n)
        matrices = np.einsum('mij,ljk->mlik', matrices, rotations).reshape(-1, n, n)
        scales = np.outer(scales, ratios).ravel()

        centres = scales[:, None] * (matrices @ centre) + translations
        radii = scales * radius
        block = N ** (depth - 1)
        gap = math.inf
        for i in range(N):
            for j in range(i + 1, N):
                a, b = slice(i * block, (i + 1) * block), slice(j * block, (j + 1) * block)
                gap = min(gap, _minimum_gap(centres[a], radii[a], centres[b], radii[b]))
        bounds.append(max(gap, bounds[-1]) if bounds else gap)
    return bounds


def separation_constant(system, max_depth=None, word_budget=None):
    """Tightest certified first-level gap c > 0, or None when SSC is not certified."""
    bounds = separation_bounds(system, max_depth=max_depth, word_budget=word_budget)
    if bounds and bounds[-1] > 0:
        return bounds[-1]
    logger.warning(f'{system.name or "system"}: strong separation not certified')
    return None
