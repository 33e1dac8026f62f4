"""Directions whose projection looks at most s-dimensional at scale δ."""
import logging
from dataclasses import dataclass

import numpy as np
from joblib import Parallel, delayed

from dimension.boxcount import box_count, fit_scaling_exponent, ladder_dimension
from ifs_core.attractor import PointCloud
from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .energy import relation_count

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ExceptionalRung:
    """Flags of one net at one scale.

    ``relation_counts`` holds card{(x, y) : x ∼_V y} for the flagged
    directions, in net order, when an η was supplied.
    """

    delta: float
    net_size: int
    box_counts: tuple
    flagged: tuple
    net_complete: bool = True
    relation_counts: tuple = ()

    @property
    def flagged_count(self):
        return sum(self.flagged)


@dataclass(frozen=True)
class ExceptionalSetReport:
    threshold: float
    epsilon: float
    cloud_dimension: float
    ambient_dim: int
    plane_dim: int
    rungs: tuple
    fit: object = None
    conjecture_exponent: float = None

    @property
    def grassmannian_dim(self):
        k = self.plane_dim
        return k * (self.ambient_dim - k)

    @property
    def bound_exponent(self):
        """k(n−k) − (k − s)."""
        return self.grassmannian_dim - (self.plane_dim - self.threshold)

    @property
    def slack_bound_exponent(self):
        """k(n−k) − (k − s) + 3ε, the bound card E' ≲ δ^{-k(n-k)+(k-s)-3ε} gives."""
        return self.bound_exponent + 3.0 * self.epsilon

    @property
    def lower_bound_exponent(self):
        """2γ − s − 3ε: a flagged direction should carry ≳ δ^{-(2γ-s-3ε)} relations."""
        return 2.0 * self.cloud_dimension - self.threshold - 3.0 * self.epsilon

    @property
    def vacuous(self):
        """For s >= k the bound is at least k(n−k) and says nothing."""
        return self.threshold >= self.plane_dim

    @property
    def exponent(self):
        return None if self.fit is None else self.fit.exponent

    @property
    def finest(self):
        return min(self.rungs, key=lambda rung: rung.delta)


def projected_box_counts(cloud, net, delta=None, jitter_count=None, seed=0, n_jobs=1):
    """N(π_V A', δ) for every member of the net; direction i uses seed + i."""
    if cloud.ambient_dim != net.ambient_dim:
        raise DimensionMismatchError(
            f'cloud in R^{cloud.ambient_dim} against a net on Gr({net.ambient_dim},{net.plane_dim})'
        )
    delta = cloud.resolution if delta is None else float(delta)
    counts = Parallel(n_jobs=n_jobs, prefer='threads')(
        delayed(box_count)(cloud.points @ frame, delta, jitter_count, seed + index)
        for index, frame in enumerate(net.frames)
    )
    return np.array(counts, dtype=np.int64)


def flag_directions(counts, delta, s):
    """The discrete reading of dim A_V <= s: N(π_V A, δ) <= δ^{-s}."""
    return np.asarray(counts) <= delta ** -s * (1.0 + 1e-12)


def cloud_dimension(cloud):
    value = ladder_dimension(cloud, cloud.resolution, ceiling=cloud.ambient_dim)
    if value is None:
        raise PreconditionError(f'cloud at δ={cloud.resolution:g} spans too few scales for a dimension estimate')
    return value


def exceptional_directions(clouds, nets, s, epsilon=0.0, gamma=None, eta=None,
                           probe_conjecture=False, jitter_count=None, seed=0, n_jobs=1):
    """Flag exceptional directions on every (cloud, net) rung and fit the flagged counts.

    A single cloud and net are accepted as a one-rung ladder. ``gamma`` is
    the dimension of A; it is estimated from the finest cloud when omitted.
    """
    if isinstance(clouds, PointCloud):
        clouds, nets = [clouds], [nets]
    clouds, nets = list(clouds), list(nets)
    if len(clouds) != len(nets) or not clouds:
        raise PreconditionError(f'{len(clouds)} clouds against {len(nets)} nets')
    if s < 0:
        raise PreconditionError(f'the threshold s must be nonnegative, got {s}')
    if epsilon < 0:
        raise PreconditionError(f'ε must be nonnegative, got {epsilon}')
    if gamma is None:
        gamma = cloud_dimension(min(clouds, key=lambda cloud: cloud.resolution))
    if s >= gamma:
        raise PreconditionError(f'the threshold s={s} must be below the cloud dimension {gamma:.3f}')

    rungs = []
    for cloud, net in zip(clouds, nets):
        delta = cloud.resolution
        counts = projected_box_counts(cloud, net, jitter_count=jitter_count, seed=seed, n_jobs=n_jobs)
        flagged = flag_directions(counts, delta, s)
        relations = ()
        if eta is not None and flagged.any():
            relations = tuple(Parallel(n_jobs=n_jobs, prefer='threads')(
                delayed(relation_count)(cloud.points, frame, delta, eta)
                for frame in net.frames[flagged]
            ))
        rung = ExceptionalRung(
            delta, len(net), tuple(int(c) for c in counts), tuple(bool(f) for f in flagged),
            net.complete, relations,
        )
        logger.info(f'δ={delta:g}: {rung.flagged_count} of {rung.net_size} directions flagged at s={s}')
        rungs.append(rung)

    rungs.sort(key=lambda rung: rung.delta, reverse=True)
    fit = fit_scaling_exponent([r.delta for r in rungs], [r.flagged_count for r in rungs])
    n, k = nets[0].ambient_dim, nets[0].plane_dim
    conjecture = None
    if probe_conjecture:
        if gamma > k:
            conjecture = k * (n - k) - (gamma - s)
        else:
            logger.info(f'conjecture probe skipped: dim A={gamma:.3f} does not exceed k={k}')
    return ExceptionalSetReport(
        threshold=float(s),
        epsilon=float(epsilon),
        cloud_dimension=float(gamma),
        ambient_dim=n,
        plane_dim=k,
        rungs=tuple(rungs),
        fit=fit,
        conjecture_exponent=conjecture,
    )
