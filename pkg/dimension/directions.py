"""Upper box dimension of finite sets of directions in Gr(n, k)."""
import logging

import numpy as np

from grassmannian.subspaces import frame_distances
from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .boxcount import BoxCountSeries, upper_box_dimension

logger = logging.getLogger(__name__)

DEFAULT_DIRECTION_SCALES = tuple(2.0 ** -j for j in range(2, 7))


def greedy_cover_count(frames, delta):
    """Centres of a greedy δ-cover in d(V, W): each direction farther than δ
    from every centre so far becomes a centre."""
    centres = np.empty_like(frames)
    count = 0
    for frame in frames:
        if count and frame_distances(centres[:count], frame).min() <= delta:
            continue
        centres[count] = frame
        count += 1
    return count


def direction_cover_series(directions, scales=DEFAULT_DIRECTION_SCALES):
    directions = list(directions)
    if not directions:
        raise PreconditionError('direction set is empty')
    shapes = {(V.ambient_dim, V.plane_dim) for V in directions}
    if len(shapes) != 1:
        raise DimensionMismatchError(f'directions from different Grassmannians: {sorted(shapes)}')
    frames = np.stack([V.frame for V in directions])
    scales = sorted((float(s) for s in scales), reverse=True)
    counts = [greedy_cover_count(frames, delta) for delta in scales]
    return BoxCountSeries(tuple(scales), tuple(counts))


def direction_set_box_dimension(directions, scales=DEFAULT_DIRECTION_SCALES):
    """Upper box dimension of a direction sample in the metric d.

    Serves as the packing-dimension proxy for sets of exceptional
    directions: dim_P <= upper box dimension. Clamped to [0, k(n-k)].
    """
    directions = list(directions)
    series = direction_cover_series(directions, scales)
    V = directions[0]
    estimate = upper_box_dimension(series, ambient_dim=V.plane_dim * (V.ambient_dim - V.plane_dim))
    logger.debug(f'direction set of {len(series.counts)} scales: slope {estimate.value:.3f}')
    return estimate
