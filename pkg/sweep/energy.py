"""The energy ℰ = Σ_V card{(x, y) : x ∼_V y} over a direction net."""
import logging
import math
from dataclasses import dataclass

import numpy as np
from django.conf import settings
from joblib import Parallel, delayed

from dimension.boxcount import fit_scaling_exponent
from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .fat_planes import cell_gap_squared, neighbour_offsets

logger = logging.getLogger(__name__)

FIXED = 'fixed'
DERIVED = 'derived'

ETA_MODE_CHOICES = [
    (FIXED, 'η = ETA_FACTOR · δ'),
    (DERIVED, 'η from ε, γ and s'),
]


@dataclass(frozen=True)
class EnergyReport:
    """Ordered-pair relation counts of one cloud against one net."""

    delta: float
    separation: float
    eta: float
    counts: tuple

    def __post_init__(self):
        object.__setattr__(self, 'counts', tuple(int(c) for c in self.counts))

    @property
    def total(self):
        return sum(self.counts)

    @property
    def net_size(self):
        return len(self.counts)


@dataclass(frozen=True)
class EnergyLadder:
    reports: tuple
    fit: object
    bound_exponent: float

    @property
    def exponent(self):
        return None if self.fit is None else self.fit.exponent


def fixed_eta(delta, factor=None):
    factor = factor or getattr(settings, 'ETA_FACTOR', 4.0)
    return factor * delta


def derived_eta(epsilon, gamma, s, n, k):
    """η = ε^d / (n^{1/2} 2^{d+2} (2^{n-k} + 1)^d) with d = 1 / (γ − s − ε)."""
    if not 0 < epsilon < gamma - s:
        raise PreconditionError(f'need 0 < ε < γ − s, got ε={epsilon}, γ={gamma}, s={s}')
    d = 1.0 / (gamma - s - epsilon)
    log_eta = d * math.log(epsilon) - 0.5 * math.log(n) - (d + 2) * math.log(2) - d * math.log(2 ** (n - k) + 1)
    return math.exp(log_eta)


def _check_inputs(cloud, net, eta, delta):
    if delta is not None and not math.isclose(delta, cloud.resolution, rel_tol=1e-12):
        raise PreconditionError(
            f'fat planes of width {delta:g} need a cloud at that resolution, got {cloud.resolution:g}'
        )
    if cloud.ambient_dim != net.ambient_dim:
        raise DimensionMismatchError(f'cloud in R^{cloud.ambient_dim} against a net on Gr({net.ambient_dim},{net.plane_dim})')
    delta = cloud.resolution
    eta = fixed_eta(delta) if eta is None else float(eta)
    if not eta > delta:
        raise PreconditionError(f'the relation needs η > δ, got η={eta:g}, δ={delta:g}')
    return delta, eta


def projected_cells(points, frame, delta):
    coordinates = points @ frame
    return coordinates, np.floor(coordinates / delta).astype(np.int64)


def _shares_fat_plane(coordinates, cells, i, j, delta):
    """For each pair (i[p], j[p]), whether both δ-balls meet a common fat plane."""
    shared = np.zeros(len(i), dtype=bool)
    limit = delta ** 2
    for offset in neighbour_offsets(cells.shape[1]):
        target = cells[i] + offset
        shared |= (cell_gap_squared(coordinates[i], target, delta) < limit) & (
            cell_gap_squared(coordinates[j], target, delta) < limit
        )
    return shared


def relation_count(points, frame, delta, eta):
    """card{(x, y) : x ∼_V y}, by bucketing points on their fat-plane index.

    Two δ-balls can only meet a common fat plane when the home cells of their
    centres differ by at most 2 in every index, so each point is paired with
    the buckets at those offsets and the pairs are then tested exactly.
    """
    coordinates, cells = projected_cells(points, frame, delta)
    shifted = cells - (cells.min(axis=0) - 2)
    extent = shifted.max(axis=0) + 3
    codes = np.ravel_multi_index(shifted.T, extent)
    order = np.argsort(codes, kind='stable')
    sorted_codes = codes[order]
    far_limit = 4.0 * eta ** 2

    total = 0
    for offset in neighbour_offsets(cells.shape[1], reach=2):
        targets = np.ravel_multi_index((shifted + offset).T, extent)
        start = np.searchsorted(sorted_codes, targets, side='left')
        sizes = np.searchsorted(sorted_codes, targets, side='right') - start
        if not sizes.any():
            continue
        i = np.repeat(np.arange(len(points)), sizes)
        steps = np.arange(sizes.sum()) - np.repeat(np.cumsum(sizes) - sizes, sizes)
        j = order[np.repeat(start, sizes) + steps]
        far = np.sum((points[i] - points[j]) ** 2, axis=1) > far_limit
        i, j = i[far], j[far]
        total += int(np.count_nonzero(_shares_fat_plane(coordinates, cells, i, j, delta)))
    return total


def brute_force_relation_count(points, frame, delta, eta):
    """The same count by testing every ordered pair."""
    coordinates, cells = projected_cells(points, frame, delta)
    limit = delta ** 2
    far_limit = 4.0 * eta ** 2
    total = 0
    for index in range(len(points)):
        far = np.sum((points - points[index]) ** 2, axis=1) > far_limit
        met = np.zeros(len(points), dtype=bool)
        for offset in neighbour_offsets(cells.shape[1]):
            target = cells[index] + offset
            if cell_gap_squared(coordinates[index:index + 1], target[None, :], delta)[0] >= limit:
                continue
            met |= cell_gap_squared(coordinates, np.broadcast_to(target, cells.shape), delta) < limit
        total += int(np.count_nonzero(far & met))
    return total


def energy(cloud, net, eta=None, delta=None, n_jobs=1):
    """Per-direction relation counts of ``cloud`` for every member of ``net``.

    The fat planes have width equal to the cloud resolution; η defaults to
    ETA_FACTOR times that width.
    """
    delta, eta = _check_inputs(cloud, net, eta, delta)
    points = cloud.points
    counts = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(relation_count)(points, frame, delta, eta) for frame in net.frames
    )
    report = EnergyReport(delta, net.separation, eta, counts)
    logger.info(f'energy at δ={delta:g}, η={eta:g}: {report.total} over {report.net_size} directions')
    return report


def energy_brute_force(cloud, net, eta=None, delta=None):
    delta, eta = _check_inputs(cloud, net, eta, delta)
    counts = [brute_force_relation_count(cloud.points, frame, delta, eta) for frame in net.frames]
    return EnergyReport(delta, net.separation, eta, counts)


def energy_bound_exponent(n, k, gamma):
    """k(n−k) − k + 2γ, the growth rate ℰ ≲ δ^{-k(n-k)+k-2γ} allows."""
    return k * (n - k) - k + 2.0 * gamma


def energy_ladder(clouds, nets, gamma, eta=None, eta_factor=None, n_jobs=1):
    """Energy on matched (cloud, net) rungs and the fitted exponent of ℰ against 1/δ.

    A given ``eta`` is used on every rung; otherwise each rung gets
    ``eta_factor`` times its own resolution.
    """
    clouds, nets = list(clouds), list(nets)
    if len(clouds) != len(nets):
        raise PreconditionError(f'{len(clouds)} clouds but {len(nets)} nets')
    if not clouds:
        raise PreconditionError('the energy ladder needs at least one rung')
    reports = tuple(
        energy(
            cloud, net, eta=fixed_eta(cloud.resolution, eta_factor) if eta is None else eta, n_jobs=n_jobs
        )
        for cloud, net in zip(clouds, nets)
    )
    fit = fit_scaling_exponent([r.delta for r in reports], [r.total for r in reports])
    n, k = nets[0].ambient_dim, nets[0].plane_dim
    return EnergyLadder(reports, fit, energy_bound_exponent(n, k, gamma))
