"""Grid box counting and upper box dimension regression."""
import csv
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed
from scipy.stats import linregress

from ifs_core.exceptions import PreconditionError

logger = logging.getLogger(__name__)

BOX_REGRESSION = 'box_regression'
CONTENT = 'content'
CLOSED_FORM = 'closed_form'

METHOD_CHOICES = [
    (BOX_REGRESSION, 'Box-count regression'),
    (CONTENT, 'Hausdorff content'),
    (CLOSED_FORM, 'Closed form'),
]

SERIES_HEADER = ['delta', 'count']
ESTIMATE_HEADER = ['value', 'stderr', 'delta_min', 'delta_max', 'method']


@dataclass(frozen=True)
class BoxCountSeries:
    """N(A, δ) over a decreasing list of scales."""

    scales: tuple
    counts: tuple
    grid_offsets_averaged: int = 1

    def __post_init__(self):
        scales = tuple(float(s) for s in self.scales)
        counts = tuple(int(c) for c in self.counts)
        if len(scales) != len(counts):
            raise PreconditionError(f'{len(scales)} scales but {len(counts)} counts')
        if any(a <= b for a, b in zip(scales, scales[1:])):
            raise PreconditionError('scales must be strictly decreasing')
        object.__setattr__(self, 'scales', scales)
        object.__setattr__(self, 'counts', counts)

    def __len__(self):
        return len(self.scales)

    @property
    def octaves(self):
        if not self.scales:
            return 0.0
        return math.log2(self.scales[0] / self.scales[-1])


@dataclass(frozen=True)
class DimensionEstimate:
    value: float
    stderr: float
    scale_range: tuple
    method: str = BOX_REGRESSION

    def __str__(self):
        return f'{self.value:.4f} ± {self.stderr:.4f} ({self.method})'


class ScalingFit(NamedTuple):
    exponent: float
    intercept: float
    stderr: float


def as_points(points):
    """Coordinates of a PointCloud or of a plain point list, as an (m, n) array."""
    points = np.asarray(getattr(points, 'points', points), dtype=float)
    if points.ndim == 1:
        points = points.reshape(-1, 1)
    if not len(points):
        raise PreconditionError('box counting needs a nonempty point set')
    return points


def grid_offsets(dim, jitter_count, seed=0):
    """Unit-cell offsets: the aligned grid first, then seeded random shifts."""
    rng = np.random.default_rng(seed)
    return np.vstack([np.zeros((1, dim)), rng.uniform(0.0, 1.0, size=(max(jitter_count, 1) - 1, dim))])


def occupied_cells(points, delta, offset=None):
    """Number of distinct cells floor((x - offset*δ)/δ) hit by the points."""
    shift = 0.0 if offset is None else np.asarray(offset) * delta
    cells = np.floor((points - shift) / delta).astype(np.int64)
    cells -= cells.min(axis=0)
    extent = cells.max(axis=0) + 1
    if np.prod(extent.astype(float)) < 2.0 ** 62:
        return len(np.unique(np.ravel_multi_index(cells.T, extent)))
    return len(np.unique(cells, axis=0))


def box_count(points, delta, jitter_count=None, seed=0):
    """N(A, δ) estimated by the fewest occupied δ-cells over jittered grids."""
    if not delta > 0:
        raise PreconditionError(f'box size must be positive, got {delta}')
    points = as_points(points)
    jitter_count = jitter_count or getattr(settings, 'BOX_COUNT_JITTERS', 4)
    offsets = grid_offsets(points.shape[1], jitter_count, seed)
    return min(occupied_cells(points, delta, offset) for offset in offsets)


def box_count_series(points, scales, jitter_count=None, seed=0, n_jobs=1):
    points = as_points(points)
    scales = sorted((float(s) for s in scales), reverse=True)
    jitter_count = jitter_count or getattr(settings, 'BOX_COUNT_JITTERS', 4)
    counts = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(box_count)(points, delta, jitter_count, seed) for delta in scales
    )
    return BoxCountSeries(tuple(scales), tuple(counts), jitter_count)


def dyadic_scales(points, resolution=None, min_cells=None, max_scales=40):
    """Scales 2^-j with at least ``min_cells`` occupied cells, not finer than the cloud.

    Without a resolution the ladder stops once most points sit in their own cell.
    """
    if resolution is None:
        resolution = getattr(points, 'resolution', None)
    points = as_points(points)
    min_cells = min_cells or getattr(settings, 'BOX_COUNT_MIN_CELLS', 10)
    extent = float(np.ptp(points, axis=0).max())
    if extent == 0:
        return ()
    j = math.floor(-math.log2(extent))
    scales = []
    while len(scales) < max_scales:
        delta = 2.0 ** -j
        if resolution is not None and delta < resolution:
            break
        count = occupied_cells(points, delta)
        if resolution is None and count >= len(points) / 2:
            break
        if count >= min_cells:
            scales.append(delta)
        j += 1
    return tuple(scales)


def resolution_ladder(points, resolution):
    """Scales resolution * 2^j, from the resolution up to the extent of the points."""
    points = as_points(points)
    extent = float(np.ptp(points, axis=0).max())
    scales = []
    delta = float(resolution)
    while delta <= extent:
        scales.append(delta)
        delta *= 2.0
    return tuple(reversed(scales))


def ladder_dimension(points, resolution, ceiling=None, jitter_count=None, seed=0, min_scales=3):
    """Weighted box-count exponent of a point set seen at ``resolution``.

    A set inside a single box of that size has dimension 0 at this scale;
    with fewer than ``min_scales`` rungs between the resolution and the
    extent there is nothing to regress and None is returned.
    """
    scales = resolution_ladder(points, resolution)
    if not scales:
        return 0.0
    if len(scales) < min_scales:
        return None
    counts = [box_count(points, delta, jitter_count, seed) for delta in scales]
    fit = fit_scaling_exponent(scales, counts)
    if fit is None:
        return None
    upper = math.inf if ceiling is None else float(ceiling)
    return min(max(fit.exponent, 0.0), upper)


def upper_box_dimension(series, ambient_dim=None):
    """Least-squares slope of log N against log(1/δ), clamped to [0, n]."""
    if len(series) < 4 or series.octaves < 2.0 - 1e-12:
        raise PreconditionError(
            f'need at least 4 scales over 2 octaves, got {len(series)} over {series.octaves:.2f}'
        )
    x = -np.log(series.scales)
    y = np.log(series.counts)
    if np.ptp(y) == 0:
        slope, stderr = 0.0, 0.0
    else:
        fit = linregress(x, y)
        slope, stderr = float(fit.slope), float(fit.stderr)
    upper = math.inf if ambient_dim is None else float(ambient_dim)
    value = min(max(slope, 0.0), upper)
    return DimensionEstimate(value, stderr, (series.scales[-1], series.scales[0]), BOX_REGRESSION)


def fit_scaling_exponent(scales, counts):
    """Weighted least-squares slope of log count vs log(1/δ), weights ∝ count.

    Scales with a zero count are dropped; returns None when fewer than two
    remain.
    """
    scales = np.asarray(scales, dtype=float)
    counts = np.asarray(counts, dtype=float)
    keep = counts > 0
    if np.count_nonzero(keep) < 2:
        return None
    x = -np.log(scales[keep])
    y = np.log(counts[keep])
    weights = counts[keep] / counts[keep].sum()
    design = np.column_stack([x, np.ones_like(x)])
    normal = design.T @ (weights[:, None] * design)
    coefficients = np.linalg.solve(normal, design.T @ (weights * y))
    residuals = y - design @ coefficients
    dof = len(x) - 2
    if dof > 0:
        variance = float(np.sum(weights * residuals ** 2)) / dof
        stderr = math.sqrt(max(variance * np.linalg.inv(normal)[0, 0], 0.0))
    else:
        stderr = math.inf
    return ScalingFit(float(coefficients[0]), float(coefficients[1]), stderr)


def write_series_csv(series, path):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(SERIES_HEADER)
        for delta, count in zip(series.scales, series.counts):
            writer.writerow([repr(delta), count])


def read_series_csv(path, grid_offsets_averaged=1):
    with open(path, newline='') as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != SERIES_HEADER:
        raise ValueError(f'{path} is not a box-count series file')
    return BoxCountSeries(
        tuple(float(row[0]) for row in rows[1:]),
        tuple(int(row[1]) for row in rows[1:]),
        grid_offsets_averaged,
    )


def write_estimate_csv(estimates, path):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(ESTIMATE_HEADER)
        for estimate in estimates:
            writer.writerow([
                repr(estimate.value), repr(estimate.stderr),
                repr(estimate.scale_range[0]), repr(estimate.scale_range[1]), estimate.method,
            ])


def read_estimate_csv(path):
    with open(path, newline='') as handle:
        rows = list(csv.reader(handle))
    if not rows or rows[0] != ESTIMATE_HEADER:
        raise ValueError(f'{path} is not a dimension estimate file')
    return [
        DimensionEstimate(float(row[0]), float(row[1]), (float(row[2]), float(row[3])), row[4])
        for row in rows[1:]
    ]
