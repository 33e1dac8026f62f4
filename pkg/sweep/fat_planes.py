"""δ-fat planes of a direction V, the relation ∼_V and checkerboard squares."""
import itertools
import logging
import math
from dataclasses import dataclass

import numpy as np

from ifs_core.exceptions import DimensionMismatchError, PreconditionError

logger = logging.getLogger(__name__)


def _check_eta(delta, eta):
    if not eta > delta:
        raise PreconditionError(f'the relation needs η > δ, got η={eta:g}, δ={delta:g}')


def neighbour_offsets(k, reach=1):
    """All integer k-tuples with entries in [-reach, reach], as an array."""
    return np.array(list(itertools.product(range(-reach, reach + 1), repeat=k)), dtype=np.int64)


@dataclass(frozen=True, eq=False)
class FatPlaneGrid:
    """The partition of R^n into π_V^{-1}(∏ [j_i δ, (j_i + 1) δ))."""

    direction: object
    cell_size: float

    def __post_init__(self):
        if not self.cell_size > 0:
            raise PreconditionError(f'fat planes need a positive width, got {self.cell_size}')
        object.__setattr__(self, 'cell_size', float(self.cell_size))

    @property
    def ambient_dim(self):
        return self.direction.ambient_dim

    @property
    def plane_dim(self):
        return self.direction.plane_dim

    def coordinates(self, points):
        """π_V coordinates of one point or of an (m, n) array."""
        return self.direction.project(points)

    def indices(self, points):
        """Cell index of each row of an (m, n) array, as an (m, k) integer array."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        return np.floor(self.coordinates(points) / self.cell_size).astype(np.int64)

    def complement_coordinates(self, points):
        """Coordinates in V^⊥; an empty column block when V is all of R^n."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        W = self.direction.complement()
        if W is None:
            return np.zeros((len(points), 0))
        return W.project(points)


def fat_plane_index(grid, x):
    """(j_1, ..., j_k) with j_i = floor(<x, v_i> / δ)."""
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.size != grid.ambient_dim:
        raise DimensionMismatchError(f'point in R^{x.size} against fat planes in R^{grid.ambient_dim}')
    return tuple(int(j) for j in grid.indices(x)[0])


def cell_gap_squared(coordinates, cells, delta):
    """Squared distance from projected points to the closed boxes of their paired cells.

    ``coordinates`` and ``cells`` are row-aligned (m, k) arrays.
    """
    lower = cells * delta
    below = np.maximum(lower - coordinates, 0.0)
    above = np.maximum(coordinates - (lower + delta), 0.0)
    return np.sum(below ** 2 + above ** 2, axis=-1)


def ball_fat_plane_cells(grid, x):
    """Fat planes met by the open ball B(x, δ); never more than 3^k of them."""
    x = np.asarray(x, dtype=float).reshape(-1)
    delta = grid.cell_size
    coordinates = grid.coordinates(x)
    home = np.floor(coordinates / delta).astype(np.int64)
    candidates = home + neighbour_offsets(grid.plane_dim)
    gaps = cell_gap_squared(np.broadcast_to(coordinates, candidates.shape), candidates, delta)
    return [tuple(int(j) for j in cell) for cell in candidates[gaps < delta ** 2]]


def relate(V, x, y, delta, eta):
    """x ∼_V y: ‖x − y‖ > 2η and the δ-balls of x and y meet a common fat plane."""
    _check_eta(delta, eta)
    x = np.asarray(x, dtype=float).reshape(-1)
    y = np.asarray(y, dtype=float).reshape(-1)
    if np.sum((x - y) ** 2) <= 4.0 * eta ** 2:
        return False
    grid = FatPlaneGrid(V, delta)
    return bool(set(ball_fat_plane_cells(grid, x)) & set(ball_fat_plane_cells(grid, y)))


@dataclass(frozen=True)
class CheckerboardBox:
    """R = T ∩ π_{V^⊥}^{-1}(∏ [4 i_l η, 4 (i_l + 1) η))."""

    fat_plane: tuple
    square: tuple
    lower: tuple
    upper: tuple
    diameter: float


def checkerboard_partition(grid, cell, eta, points):
    """Checkerboard squares of side 4η inside the fat plane ``cell``.

    Only the squares meeting the bounding box of ``points`` (measured in V^⊥
    coordinates) are listed, in lexicographic order of their index.
    """
    delta = grid.cell_size
    _check_eta(delta, eta)
    cell = tuple(int(j) for j in cell)
    if len(cell) != grid.plane_dim:
        raise DimensionMismatchError(f'fat plane index {cell} for a {grid.plane_dim}-plane')
    coordinates = grid.complement_coordinates(points)
    codim = coordinates.shape[1]
    side = 4.0 * eta
    diameter = math.sqrt(codim * side ** 2 + grid.plane_dim * delta ** 2)
    if codim == 0:
        return [CheckerboardBox(cell, (), (), (), diameter)]
    if not len(coordinates):
        return []
    first = np.floor(coordinates.min(axis=0) / side).astype(np.int64)
    last = np.floor(coordinates.max(axis=0) / side).astype(np.int64)
    boxes = []
    for square in itertools.product(*(range(a, b + 1) for a, b in zip(first, last))):
        lower = tuple(float(i * side) for i in square)
        upper = tuple(float((i + 1) * side) for i in square)
        boxes.append(CheckerboardBox(cell, tuple(int(i) for i in square), lower, upper, diameter))
    return boxes


def checkerboard_separated(box_a, box_b):
    """True for squares of one fat plane that are not adjacent, even diagonally.

    Such squares are 4η apart in V^⊥ coordinates, so points whose δ-balls
    meet them are more than 4η − 2δ > 2η apart.
    """
    if box_a.fat_plane != box_b.fat_plane:
        raise PreconditionError('checkerboard squares belong to different fat planes')
    if not box_a.square:
        return False
    return max(abs(a - b) for a, b in zip(box_a.square, box_b.square)) >= 2
