"""Empirical σ(e) = dim ρ_e(K) over a sample of directions."""
import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from dimension.boxcount import ladder_dimension
from dimension.directions import direction_set_box_dimension
from grassmannian.subspaces import sphere_to_line
from ifs_core.attractor import attractor_cloud
from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .family import ProjectedFamily, hyperplane_coordinates, unit_vector
from .scan import sample_directions

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ProjectionProfile:
    """σ(e) per sampled direction and the directions where σ(e) <= s.

    ``dimensions`` holds NaN where the projected cloud spans too few scales.
    ``exceptional_dimension`` is the box dimension of the exceptional
    directions seen as lines, or None when they are too few to regress.
    """

    resolution: float
    directions: np.ndarray
    dimensions: np.ndarray
    cloud_dimension: float
    threshold: float
    exceptional: np.ndarray
    exceptional_dimension: object = None

    @property
    def exceptional_count(self):
        return int(np.count_nonzero(self.exceptional))

    @property
    def largest(self):
        """Largest sampled σ(e); an observation, not an estimate of the supremum."""
        finite = self.dimensions[~np.isnan(self.dimensions)]
        return float(finite.max()) if len(finite) else None


def _projected_dimension(points, e, resolution):
    value = ladder_dimension(hyperplane_coordinates(e, points), resolution, ceiling=e.size - 1)
    return np.nan if value is None else value


def projected_dimension_profile(system, directions, resolution, s=None, seed=0, n_jobs=1):
    """Box dimension of ρ_e(K) for each direction e, read off one cloud of K.

    ``directions`` is a count or an array of unit vectors. With ``s`` unset
    the threshold defaults to the cloud's own dimension minus 0.1.
    """
    family = system if isinstance(system, ProjectedFamily) else ProjectedFamily(system)
    n = family.ambient_dim
    if np.isscalar(directions):
        directions = sample_directions(n, int(directions), seed)
    else:
        directions = np.array([unit_vector(e) for e in np.atleast_2d(directions)])
        if directions.shape[1] != n:
            raise DimensionMismatchError(f'directions in R^{directions.shape[1]} for a system in R^{n}')

    cloud = attractor_cloud(family.base_system, resolution)
    gamma = ladder_dimension(cloud.points, cloud.resolution, ceiling=n)
    if gamma is None:
        raise PreconditionError(f'cloud at δ={cloud.resolution:g} spans too few scales for a dimension estimate')
    threshold = gamma - 0.1 if s is None else float(s)

    dimensions = np.array(Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(_projected_dimension)(cloud.points, e, cloud.resolution) for e in directions
    ))
    exceptional = ~np.isnan(dimensions) & (dimensions <= threshold)

    estimate = None
    if exceptional.any():
        try:
            estimate = direction_set_box_dimension([sphere_to_line(e) for e in directions[exceptional]])
        except PreconditionError as exc:
            logger.info(f'exceptional directions not regressed: {exc}')
    logger.info(
        f'{family.base_system.name or "system"}: {int(exceptional.sum())} of {len(directions)} directions '
        f'with σ(e) <= {threshold:.3f}'
    )
    return ProjectionProfile(
        resolution=cloud.resolution,
        directions=directions,
        dimensions=dimensions,
        cloud_dimension=float(gamma),
        threshold=threshold,
        exceptional=exceptional,
        exceptional_dimension=estimate,
    )
