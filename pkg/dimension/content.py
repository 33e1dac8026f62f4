"""Upper and lower bounds on the Hausdorff content H^s_∞."""
import logging
import math

import numpy as np
from django.conf import settings

from ifs_core.attractor import separation_constant
from ifs_core.exceptions import PreconditionError, UnsupportedSystemError
from ifs_core.invariants import similarity_dimension
from ifs_core.maps import SELF_SIMILAR

from .boxcount import as_points

logger = logging.getLogger(__name__)


def _cell_ids(points, side):
    cells = np.floor(points / side).astype(np.int64)
    cells -= cells.min(axis=0)
    codes = np.ravel_multi_index(cells.T, cells.max(axis=0) + 1)
    _, first, inverse = np.unique(codes, return_index=True, return_inverse=True)
    return inverse.reshape(-1), first


def hausdorff_content_upper(points, s, cover_budget=None, resolution=None):
    """Best cover of the points by dyadic cubes, Σ |Q|^s minimised over the tree.

    Cubes run from the smallest dyadic side covering the extent down to the
    first side whose diameter is at most ``resolution`` (taken from a
    PointCloud when not given), or to the last level with at most
    ``cover_budget`` occupied cubes. Every cover counted is a real cover, so
    the result bounds H^s_∞ from above. A plain point list without a
    resolution is a finite set, whose content is 0 for s > 0.
    """
    if s < 0:
        raise PreconditionError(f'content exponent must be nonnegative, got {s}')
    if resolution is None:
        resolution = getattr(points, 'resolution', None)
    points = as_points(points)
    if s == 0:
        return 1.0
    if not resolution or resolution <= 0:
        return 0.0

    cover_budget = cover_budget or getattr(settings, 'CONTENT_COVER_BUDGET', 50_000)
    root = math.sqrt(points.shape[1])
    extent = float(np.ptp(points, axis=0).max())
    top = math.ceil(math.log2(max(extent, resolution)))
    sides, parents, counts = [], [], []
    previous = None
    level = 0
    while True:
        side = 2.0 ** (top - level)
        inverse, first = _cell_ids(points, side)
        if level and len(first) > cover_budget:
            logger.info(f'content cover stopped at side {2 * side:g}: budget {cover_budget} reached')
            break
        sides.append(side)
        counts.append(len(first))
        parents.append(None if previous is None else previous[first])
        previous = inverse
        if side * root <= resolution or level >= 60:
            break
        level += 1

    best = np.full(counts[-1], (sides[-1] * root) ** s)
    for index in range(len(sides) - 2, -1, -1):
        children = np.bincount(parents[index + 1], weights=best, minlength=counts[index])
        best = np.minimum((sides[index] * root) ** s, children)
    return float(best.sum())


def hausdorff_content_lower(cloud, s, mask=None, separation=None):
    """Mass-distribution lower bound for the content of a union of cylinders.

    The selected cloud points stand for their cylinders K_w. Under strong
    separation with gap c and equal ratios the natural measure satisfies
    μ(U) <= (|U| / c)^s for every s up to the similarity dimension, hence
    H^s_∞(E) >= c^s μ(E). Returns 0 above the similarity dimension.
    """
    cloud.require_provenance()
    system = cloud.system
    if system is None or system.kind != SELF_SIMILAR:
        raise UnsupportedSystemError('content lower bounds need a self-similar system')
    if not system.has_equal_ratios:
        raise UnsupportedSystemError('content lower bounds need equal contraction ratios')
    if s < 0:
        raise PreconditionError(f'content exponent must be nonnegative, got {s}')
    gap = separation if separation is not None else separation_constant(system)
    if gap is None or gap <= 0:
        raise PreconditionError('strong separation is not certified for this system')

    words = cloud.words
    if mask is not None:
        words = [word for word, keep in zip(words, np.asarray(mask, dtype=bool)) if keep]
    if not words:
        return 0.0
    depths = {len(word) for word in words}
    if len(depths) != 1:
        raise UnsupportedSystemError('cylinders of mixed depth in an equal-ratio cloud')
    mass = len(words) * float(system.size) ** -depths.pop()

    sigma = similarity_dimension(system)
    if s > sigma + 1e-9:
        return 0.0
    return gap ** s * mass
