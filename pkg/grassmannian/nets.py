"""Greedy δ-separated nets on Gr(n, k) and the small-projection counting bound."""
import csv
import logging
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np
from django.conf import settings

from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .subspaces import Subspace, frame_distances, sample_frames

logger = logging.getLogger(__name__)

NET_HEADER = ['n', 'k', 'separation', 'seed']


@dataclass(frozen=True, eq=False)
class DeltaNet:
    """Subspaces with pairwise distance greater than ``separation``.

    ``complete`` is False when the member budget stopped the greedy packing
    before it saturated; such a net is still separated but may not cover.
    """

    separation: float
    members: tuple
    ambient_dim: int
    plane_dim: int
    seed: int = None
    complete: bool = True

    def __post_init__(self):
        object.__setattr__(self, 'members', tuple(self.members))

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __getitem__(self, index):
        return self.members[index]

    @property
    def frames(self):
        if not self.members:
            return np.zeros((0, self.ambient_dim, self.plane_dim))
        return np.stack([V.frame for V in self.members])

    def minimum_distance(self):
        """Smallest pairwise distance between members (inf for fewer than 2)."""
        frames = self.frames
        best = math.inf
        for index in range(1, len(frames)):
            best = min(best, float(frame_distances(frames[:index], frames[index]).min()))
        return best


def net_patience(n, k, separation, oversample_factor):
    return math.ceil(oversample_factor * separation ** -(k * (n - k)))


def build_delta_net(n, k, separation, oversample_factor=None, seed=0, max_members=None, batch_size=512):
    """Greedy packing of γ_{n,k}-samples.

    A sample is kept when it is farther than ``separation`` from every kept
    member. Packing stops after oversample_factor * separation^(-k(n-k))
    consecutive rejections, or when ``max_members`` members are kept.
    """
    if not separation > 0:
        raise PreconditionError(f'net separation must be positive, got {separation}')
    oversample_factor = oversample_factor or getattr(settings, 'NET_OVERSAMPLE_FACTOR', 4.0)
    max_members = max_members or getattr(settings, 'NET_MEMBER_BUDGET', 20_000)
    patience = net_patience(n, k, separation, oversample_factor)
    rng = np.random.default_rng(seed)

    kept = np.empty((min(max_members, 1024), n, k))
    count = 0
    rejections = 0
    complete = True
    while rejections < patience and complete:
        for frame in sample_frames(n, k, batch_size, rng):
            if count and frame_distances(kept[:count], frame).min() <= separation:
                rejections += 1
                if rejections >= patience:
                    break
                continue
            if count == len(kept):
                kept = np.concatenate([kept, np.empty_like(kept)])
            kept[count] = frame
            count += 1
            rejections = 0
            if count >= max_members:
                complete = False
                logger.warning(
                    f'Gr({n},{k}) net at δ₂={separation:g} hit the member budget of {max_members}'
                )
                break

    logger.info(f'Gr({n},{k}) net at δ₂={separation:g}: {count} members')
    return DeltaNet(
        separation=float(separation),
        members=[Subspace(frame) for frame in kept[:count]],
        ambient_dim=n,
        plane_dim=k,
        seed=seed,
        complete=complete,
    )


class CountingRatio(NamedTuple):
    lhs_count: int
    rhs_bound: float
    ratio: float


def projection_norms(net, x):
    """‖π_V(x)‖ for every member V of the net."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != net.ambient_dim:
        raise DimensionMismatchError(f'point in R^{x.size} against a net on Gr({net.ambient_dim},{net.plane_dim})')
    return np.linalg.norm(np.einsum('mnk,n->mk', net.frames, x), axis=1)


def counting_lemma_ratio(x, small, separation, net):
    """Compare card{V ∈ E : ‖π_V x‖ <= δ₁} with δ₁^k δ₂^(-k(n-k)) ‖x‖^(-k).

    ``small`` is δ₁ and ``separation`` is δ₂; ``ratio`` is the empirical
    implicit constant.
    """
    x = np.asarray(x, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(x))
    if norm == 0:
        raise PreconditionError('the counting bound needs x != 0')
    for label, value in (('δ₁', small), ('δ₂', separation)):
        if not 0 < value <= 1:
            raise PreconditionError(f'{label} must lie in (0, 1], got {value}')
    n, k = net.ambient_dim, net.plane_dim
    lhs = int(np.count_nonzero(projection_norms(net, x) <= small))
    rhs = small ** k * separation ** -(k * (n - k)) * norm ** -k
    return CountingRatio(lhs, rhs, lhs / rhs)


def small_projection_measure(x, small, n, k, samples, seed):
    """Monte-Carlo γ_{n,k}{V : ‖π_V x‖ <= δ₁} next to the reference δ₁^k ‖x‖^(-k)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    norm = float(np.linalg.norm(x))
    if norm == 0:
        raise PreconditionError('the small-projection measure needs x != 0')
    rng = np.random.default_rng(seed)
    frames = sample_frames(n, k, samples, rng)
    norms = np.linalg.norm(np.einsum('mnk,n->mk', frames, x), axis=1)
    estimate = float(np.mean(norms <= small))
    return estimate, small ** k * norm ** -k


def write_net_csv(net, path):
    with open(path, 'w', newline='') as handle:
        writer = csv.writer(handle)
        writer.writerow(NET_HEADER)
        writer.writerow([net.ambient_dim, net.plane_dim, repr(net.separation), '' if net.seed is None else net.seed])
        n, k = net.ambient_dim, net.plane_dim
        writer.writerow([f'f{i}_{j}' for i in range(n) for j in range(k)])
        for V in net:
            writer.writerow([repr(float(value)) for value in V.frame.ravel()])


def read_net_csv(path):
    with open(path, newline='') as handle:
        rows = list(csv.reader(handle))
    if len(rows) < 3 or rows[0] != NET_HEADER:
        raise ValueError(f'{path} is not a net file')
    n, k = int(rows[1][0]), int(rows[1][1])
    seed = int(rows[1][3]) if rows[1][3] else None
    members = [Subspace(np.array(row, dtype=float).reshape(n, k)) for row in rows[3:]]
    return DeltaNet(float(rows[1][2]), members, n, k, seed=seed)
