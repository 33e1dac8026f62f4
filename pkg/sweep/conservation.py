"""Discrete almost-dimension-conservation check for one projection.

For a direction V the cloud is cut into δ-fat planes. Inside each occupied
fat plane the points are measured in V^⊥ coordinates, which gives a fiber
dimension per cell. A fiber threshold Δ is accepted when the cells whose
fiber dimension reaches Δ − ε project onto a y-set of dimension at least
dim A − Δ − tolerance.
"""
import logging
from dataclasses import dataclass

import numpy as np
from django.conf import settings

from dimension.boxcount import ladder_dimension
from dimension.content import hausdorff_content_upper
from ifs_core.attractor import PointCloud
from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .exceptional import cloud_dimension
from .fat_planes import FatPlaneGrid

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class FiberSurvey:
    """Fat-plane cells of one direction and the fiber dimension of each.

    ``fiber_dimensions[c]`` is NaN when cell ``c`` has too few points or too
    few scales to regress.
    """

    direction: object
    resolution: float
    cells: np.ndarray
    labels: np.ndarray
    projected: np.ndarray
    fiber_dimensions: np.ndarray
    cloud_dimension: float

    @property
    def projected_dimension(self):
        return ladder_dimension(self.projected, self.resolution, ceiling=self.direction.plane_dim) or 0.0


@dataclass(frozen=True)
class AlmostDcOutcome:
    direction: object
    fiber_dim: float
    epsilon: float
    good_cells: int
    good_y_content: float
    y_dimension: float
    cloud_dimension: float
    fiber_dimensions: tuple
    tolerance: float

    accepted = False
    scale_limited = False

    @property
    def conserved_dimension(self):
        """Δ + dim of the y-set, compared against dim A."""
        return self.fiber_dim + self.y_dimension


@dataclass(frozen=True)
class AlmostDcWitness(AlmostDcOutcome):
    """Δ + dim{y : fiber dimension >= Δ − ε} reaches dim A within tolerance."""

    accepted = True


@dataclass(frozen=True)
class ScaleLimitedRefutation(AlmostDcOutcome):
    """No witness at this scale; not evidence that the direction fails."""

    scale_limited = True


def survey_fibers(cloud, V, min_fiber_points=None, gamma=None):
    if cloud.ambient_dim != V.ambient_dim:
        raise DimensionMismatchError(f'cloud in R^{cloud.ambient_dim} against a plane in R^{V.ambient_dim}')
    if not len(cloud):
        raise PreconditionError('no occupied fat planes: the cloud is empty')
    min_fiber_points = min_fiber_points or getattr(settings, 'MIN_FIBER_POINTS', 8)
    delta = cloud.resolution
    grid = FatPlaneGrid(V, delta)
    cells, labels = np.unique(grid.indices(cloud.points), axis=0, return_inverse=True)
    labels = labels.reshape(-1)
    fiber_coordinates = grid.complement_coordinates(cloud.points)
    codim = fiber_coordinates.shape[1]

    dimensions = np.full(len(cells), np.nan)
    sizes = np.bincount(labels, minlength=len(cells))
    for index in np.flatnonzero(sizes >= min_fiber_points):
        if codim == 0:
            dimensions[index] = 0.0
            continue
        value = ladder_dimension(fiber_coordinates[labels == index], delta, ceiling=codim)
        if value is not None:
            dimensions[index] = value
    logger.debug(
        f'{len(cells)} fat planes at δ={delta:g}, {np.count_nonzero(~np.isnan(dimensions))} with a fiber estimate'
    )
    return FiberSurvey(
        direction=V,
        resolution=delta,
        cells=cells,
        labels=labels,
        projected=grid.coordinates(cloud.points),
        fiber_dimensions=dimensions,
        cloud_dimension=cloud_dimension(cloud) if gamma is None else float(gamma),
    )


def evaluate_survey(survey, fiber_dim, epsilon, tolerance=None):
    if fiber_dim < 0:
        raise PreconditionError(f'Δ must be nonnegative, got {fiber_dim}')
    if not epsilon > 0:
        raise PreconditionError(f'ε must be positive, got {epsilon}')
    tolerance = getattr(settings, 'ALMOST_DC_TOLERANCE', 0.1) if tolerance is None else tolerance
    floor = fiber_dim - epsilon
    estimated = ~np.isnan(survey.fiber_dimensions)
    gamma = survey.cloud_dimension
    if fiber_dim > gamma:
        # no fiber can be larger than the whole set
        good = np.zeros(len(survey.cells), dtype=bool)
    elif floor <= 0:
        # every nonempty fiber has dimension at least 0
        good = np.ones(len(survey.cells), dtype=bool)
    else:
        good = estimated & (np.nan_to_num(survey.fiber_dimensions, nan=-1.0) >= floor)

    if good.any():
        y_points = survey.projected[good[survey.labels]]
        y_dimension = ladder_dimension(y_points, survey.resolution, ceiling=survey.direction.plane_dim) or 0.0
        content = hausdorff_content_upper(
            PointCloud(survey.resolution, y_points), max(gamma - fiber_dim - epsilon, 0.0)
        )
    else:
        y_dimension, content = 0.0, 0.0

    if good.any() and fiber_dim + y_dimension >= gamma - tolerance:
        outcome = AlmostDcWitness
    else:
        outcome = ScaleLimitedRefutation
    return outcome(
        direction=survey.direction,
        fiber_dim=float(fiber_dim),
        epsilon=float(epsilon),
        good_cells=int(np.count_nonzero(good)),
        good_y_content=float(content),
        y_dimension=float(y_dimension),
        cloud_dimension=float(gamma),
        fiber_dimensions=tuple(float(d) for d in survey.fiber_dimensions[good & estimated]),
        tolerance=float(tolerance),
    )


def almost_dc_check(cloud, V, fiber_dim, epsilon, tolerance=None, min_fiber_points=None, gamma=None):
    """Witness for Δ + dim{y : dim(A ∩ π_V^{-1}(y)) >= Δ − ε} >= dim A at scale δ.

    Returns an :class:`AlmostDcWitness` or a :class:`ScaleLimitedRefutation`.
    For Δ <= ε every occupied fat plane counts, so the check compares the
    projected dimension with dim A.
    """
    survey = survey_fibers(cloud, V, min_fiber_points=min_fiber_points, gamma=gamma)
    outcome = evaluate_survey(survey, fiber_dim, epsilon, tolerance)
    logger.info(
        f'almost-DC Δ={fiber_dim:g}, ε={epsilon:g}: {type(outcome).__name__} '
        f'({outcome.conserved_dimension:.3f} against {outcome.cloud_dimension:.3f})'
    )
    return outcome


def delta_prime_scan(cloud, V, epsilon, grid, tolerance=None, min_fiber_points=None, gamma=None):
    """The values of a finite Δ-grid that pass :func:`almost_dc_check`, in grid order."""
    grid = list(grid)
    if not grid:
        return []
    if not epsilon > 0:
        raise PreconditionError(f'ε must be positive, got {epsilon}')
    survey = survey_fibers(cloud, V, min_fiber_points=min_fiber_points, gamma=gamma)
    return [value for value in grid if evaluate_survey(survey, value, epsilon, tolerance).accepted]
