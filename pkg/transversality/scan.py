"""Transversality of the projected family e ↦ Π_e.

For word pairs ω, κ with ω₁ ≠ κ₁ and z = Π(ω) − Π(κ) the condition reads:
whenever ‖ρ_u(z)‖ < c/√2 the parameter Jacobian satisfies
|det D_e ρ_e(z)|_{e=u}| = |z·u|^{n−1} > c^{n−1} / 2^{(n−1)/2}.

Infinite words are truncated at ``word_depth``; every truncated difference
lies within 2·tail of the true one, and both sides of the implication are
widened by that amount before a pair is flagged.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed
from scipy.spatial import cKDTree

from ifs_core.attractor import separation_constant
from ifs_core.exceptions import (
    BudgetExceededError, ConsistencyError, DimensionMismatchError, PreconditionError,
)

from .family import LIMIT_TOLERANCE, ProjectedFamily, rho, unit_vector

logger = logging.getLogger(__name__)

PASS = 'pass'
VACUOUS = 'vacuous'
FLAG = 'flag'
INDETERMINATE = 'indeterminate'

OUTCOME_CHOICES = [
    (PASS, 'Determinant above threshold'),
    (VACUOUS, 'Antecedent false'),
    (FLAG, 'Violation'),
    (INDETERMINATE, 'Undecided within truncation slack'),
]


@dataclass(frozen=True)
class PairCheck:
    direction_index: int
    direction: tuple
    first_word: tuple
    second_word: tuple
    projected_distance: float
    determinant: float
    margin: float
    outcome: str


@dataclass(frozen=True)
class TransversalityReport:
    system_name: str
    ambient_dim: int
    separation: float
    word_depth: int
    tail: float
    direction_count: int
    pair_count: int
    exhaustive: bool
    vacuous_count: int
    rows: tuple

    @property
    def antecedent_bound(self):
        return self.separation / math.sqrt(2.0)

    @property
    def threshold(self):
        return conclusion_threshold(self.separation, self.ambient_dim)

    @property
    def violations(self):
        return tuple(row for row in self.rows if row.outcome == FLAG)

    @property
    def indeterminate_count(self):
        return sum(row.outcome == INDETERMINATE for row in self.rows)

    @property
    def pass_count(self):
        return sum(row.outcome == PASS for row in self.rows)

    @property
    def min_margin(self):
        if not self.rows:
            return None
        return min(row.margin for row in self.rows)


def conclusion_threshold(c, n):
    """c^{n−1} / 2^{(n−1)/2}."""
    return c ** (n - 1) / 2.0 ** ((n - 1) / 2.0)


def classify(projected_distances, normals, c, tail, n):
    """Outcome and margin of each (‖ρ_u z‖, z·u) against the separation constant c.

    ``tail`` bounds the truncation error of each limit point, so the true
    values lie within 2·tail of the given ones.
    """
    projected_distances = np.asarray(projected_distances, dtype=float)
    normals = np.abs(np.asarray(normals, dtype=float))
    bound = c / math.sqrt(2.0)
    threshold = conclusion_threshold(c, n)
    slack = 2.0 * tail

    lowest = np.maximum(normals - slack, 0.0) ** (n - 1)
    vacuous = projected_distances - slack >= bound
    holds = lowest > threshold
    violated = (projected_distances + slack < bound) & ((normals + slack) ** (n - 1) <= threshold)

    outcome = np.full(projected_distances.shape, INDETERMINATE, dtype=object)
    outcome[holds] = PASS
    outcome[violated] = FLAG
    outcome[vacuous] = VACUOUS
    return outcome, lowest - threshold


def check_pair(z, u, c, tail=0.0):
    """Classify one difference vector z at direction u."""
    u = unit_vector(u)
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != u.size:
        raise DimensionMismatchError(f'vector in R^{z.size} against a direction in R^{u.size}')
    outcome, margin = classify([np.linalg.norm(rho(u, z))], [z @ u], c, tail, u.size)
    return outcome[0], float(margin[0])


def sample_directions(n, count, seed=0):
    """Unit vectors on S^{n−1}: equally spaced angles in the plane, Gaussian draws otherwise."""
    if n < 2:
        raise PreconditionError(f'directions are sampled on S^(n-1) with n >= 2, got n={n}')
    if count < 1:
        raise PreconditionError(f'need at least one direction, got {count}')
    if n == 2:
        angles = 2.0 * np.pi * np.arange(count) / count
        return np.column_stack([np.cos(angles), np.sin(angles)])
    draws = np.random.default_rng(seed).standard_normal((count, n))
    return draws / np.linalg.norm(draws, axis=1, keepdims=True)


def word_images(system, depth, anchor=None, word_budget=None):
    """g_w(anchor) for all words of length ``depth`` in lexicographic order.

    The anchor defaults to the fixed point of g_1, so every image lies in
    the attractor.
    """
    if depth < 1:
        raise PreconditionError(f'word depth must be at least 1, got {depth}')
    N, n = system.size, system.ambient_dim
    word_budget = word_budget or getattr(settings, 'TRANSVERSALITY_WORD_BUDGET', 300_000)
    if N ** depth > word_budget:
        raise BudgetExceededError(
            f'{N ** depth} words at depth {depth} exceed the budget of {word_budget}',
            feasible=int(math.log(word_budget) / math.log(N)),
            budget=word_budget,
        )
    anchor = system.maps[0].fixed_point() if anchor is None else np.asarray(anchor, dtype=float)
    shifts = np.array([g.translation for g in system.maps])
    scales = np.ones(1)
    translations = np.zeros((1, n))
    for _ in range(depth):
        translations = (translations[:, None, :] + scales[:, None, None] * shifts[None, :, :]).reshape(-1, n)
        scales = np.outer(scales, system.ratios).ravel()
    return scales[:, None] * anchor + translations


def candidate_pairs(points, block, reach, pair_budget):
    """Index pairs closer than ``reach`` whose words start with different letters.

    Returns the pairs sorted by index and whether all of them were kept.
    """
    pairs = cKDTree(points).query_pairs(reach, output_type='ndarray')
    if not len(pairs):
        return np.zeros((0, 2), dtype=np.int64), True
    pairs = pairs[pairs[:, 0] // block != pairs[:, 1] // block]
    exhaustive = len(pairs) <= pair_budget
    if not exhaustive:
        distances = np.linalg.norm(points[pairs[:, 0]] - points[pairs[:, 1]], axis=1)
        logger.warning(f'{len(pairs)} candidate pairs exceed the budget of {pair_budget}; keeping the closest')
        pairs = pairs[np.argsort(distances, kind='stable')[:pair_budget]]
    order = np.lexsort((pairs[:, 1], pairs[:, 0]))
    return pairs[order], exhaustive


def _scan_direction(index, u, differences, c, tail):
    normals = differences @ u
    distances = np.linalg.norm(rho(u, differences), axis=1)
    outcome, margins = classify(distances, normals, c, tail, u.size)
    recorded = np.flatnonzero(outcome != VACUOUS)
    determinants = np.abs(normals[recorded]) ** (u.size - 1)
    return index, len(outcome) - len(recorded), recorded, distances[recorded], determinants, \
        margins[recorded], outcome[recorded]


def _check_limits(family, u, word, image, anchor):
    """ρ_u(g_w(a)) must equal f_w(ρ_u(a); u)."""
    expected = family.compose(u, word, xi=rho(u, anchor))
    error = float(np.max(np.abs(rho(u, image) - expected)))
    if error > LIMIT_TOLERANCE:
        raise ConsistencyError(f'projected word image differs from the family by {error:.3e} for {word}')


def transversality_scan(family, direction_samples, word_depth, pair_budget=None, separation=None,
                        seed=0, word_budget=None, n_jobs=1):
    """Check the transversality implication over sampled directions and word pairs.

    ``direction_samples`` is a count (see :func:`sample_directions`) or an
    array of unit vectors. ``separation`` overrides the certified constant c;
    without it the base system must pass :func:`separation_constant`.
    Vacuous pairs are only counted; every other pair and direction becomes
    a row of the report.
    """
    if not isinstance(family, ProjectedFamily):
        family = ProjectedFamily(family)
    system = family.base_system
    n = family.ambient_dim
    if n < 2:
        raise PreconditionError('transversality needs an ambient dimension of at least 2')
    c = separation_constant(system) if separation is None else float(separation)
    if c is None:
        raise PreconditionError(f'{system.name or "system"}: strong separation is not certified')
    if not c > 0:
        raise PreconditionError(f'separation constant must be positive, got {c}')
    pair_budget = pair_budget or getattr(settings, 'TRANSVERSALITY_PAIR_BUDGET', 200_000)

    if np.isscalar(direction_samples):
        directions = sample_directions(n, int(direction_samples), seed)
    else:
        directions = np.array([unit_vector(u) for u in np.atleast_2d(direction_samples)])
        if directions.shape[1] != n:
            raise DimensionMismatchError(f'directions in R^{directions.shape[1]} for a system in R^{n}')

    anchor = system.maps[0].fixed_point()
    points = word_images(system, word_depth, anchor=anchor, word_budget=word_budget)
    tail = float(np.max(system.ratios)) ** word_depth * system.diameter_bound()
    block = system.size ** (word_depth - 1)
    # farther pairs have |z·u| > c/√2 + 2·tail whenever the antecedent can hold
    reach = c + 2.0 * math.sqrt(2.0) * tail
    pairs, exhaustive = candidate_pairs(points, block, reach, pair_budget)
    differences = points[pairs[:, 0]] - points[pairs[:, 1]]
    logger.info(
        f'{system.name or "system"}: depth {word_depth}, c={c:.6g}, tail={tail:.3e}, '
        f'{len(pairs)} candidate pairs over {len(directions)} directions'
    )

    shape = (system.size,) * word_depth

    def word(index):
        return tuple(int(d) + 1 for d in np.unravel_index(index, shape))

    if len(pairs):
        for index in pairs[0]:
            _check_limits(family, directions[0], word(index), points[index], anchor)

    results = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_scan_direction)(index, u, differences, c, tail) for index, u in enumerate(directions)
    )
    rows, vacuous = [], 0
    for index, skipped, recorded, distances, determinants, margins, outcomes in results:
        vacuous += skipped
        direction = tuple(float(x) for x in directions[index])
        for position, row in enumerate(recorded):
            first, second = pairs[row]
            rows.append(PairCheck(
                index, direction, word(first), word(second),
                float(distances[position]), float(determinants[position]),
                float(margins[position]), outcomes[position],
            ))

    report = TransversalityReport(
        system_name=system.name,
        ambient_dim=n,
        separation=c,
        word_depth=word_depth,
        tail=tail,
        direction_count=len(directions),
        pair_count=len(pairs),
        exhaustive=exhaustive,
        vacuous_count=vacuous,
        rows=tuple(rows),
    )
    if report.violations:
        logger.warning(f'{len(report.violations)} transversality violations at depth {word_depth}')
    else:
        logger.info(
            f'no violations: {report.pass_count} passing, {report.indeterminate_count} indeterminate, '
            f'{vacuous} vacuous'
        )
    return report


def synthetic_violation_selftest(system, inflation=4.0, word_depth=3, direction_count=36, seed=0):
    """Scan with c inflated past the true gap; a working harness must flag pairs."""
    family = system if isinstance(system, ProjectedFamily) else ProjectedFamily(system)
    c = separation_constant(family.base_system)
    if c is None:
        raise PreconditionError(f'{family.base_system.name or "system"}: strong separation is not certified')
    report = transversality_scan(
        family, direction_count, word_depth, separation=inflation * c, seed=seed,
    )
    logger.info(f'self-test with c inflated {inflation:g}x: {len(report.violations)} pairs flagged')
    return report
