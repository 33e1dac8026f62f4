"""k-planes of R^n as orthonormal frames."""
import logging
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from django.conf import settings
from scipy.linalg import null_space

from ifs_core.exceptions import DimensionMismatchError, PreconditionError

logger = logging.getLogger(__name__)


def _tolerance():
    return getattr(settings, 'ORTHOGONALITY_TOLERANCE', 1e-12)


@dataclass(frozen=True, eq=False)
class Subspace:
    """An element of Gr(n, k) stored as an n x k matrix with orthonormal columns."""

    frame: np.ndarray

    def __post_init__(self):
        frame = np.array(self.frame, dtype=float)
        if frame.ndim == 1:
            frame = frame.reshape(-1, 1)
        n, k = frame.shape
        if not 1 <= k <= n:
            raise DimensionMismatchError(f'a frame needs 1 <= k <= n, got {n}x{k}')
        defect = np.max(np.abs(frame.T @ frame - np.eye(k)))
        if defect > _tolerance():
            raise PreconditionError(f'frame columns are not orthonormal (defect {defect:.2e})')
        frame.setflags(write=False)
        object.__setattr__(self, 'frame', frame)

    @classmethod
    def from_basis(cls, vectors):
        """Orthonormalise the columns of ``vectors`` (n x k) and wrap them."""
        basis = np.array(vectors, dtype=float)
        if basis.ndim == 1:
            basis = basis.reshape(-1, 1)
        q, r = np.linalg.qr(basis)
        if np.min(np.abs(np.diag(r))) <= 1e-12:
            raise PreconditionError('basis vectors are linearly dependent')
        return cls(q)

    @classmethod
    def line(cls, direction):
        direction = np.asarray(direction, dtype=float).reshape(-1)
        norm = np.linalg.norm(direction)
        if norm == 0:
            raise PreconditionError('a line needs a nonzero direction')
        return cls(direction / norm)

    @classmethod
    def coordinate(cls, n, axes):
        """Span of the standard basis vectors with the given 0-based indices."""
        return cls(np.eye(n)[:, list(axes)])

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def plane_dim(self):
        return self.frame.shape[1]

    @property
    def grassmannian_dim(self):
        k = self.plane_dim
        return k * (self.ambient_dim - k)

    @cached_property
    def projection(self):
        return self.frame @ self.frame.T

    def project(self, x):
        """Coordinates of π_V(x) in the frame; accepts one point or an (m, n) array."""
        x = np.asarray(x, dtype=float)
        if x.shape[-1] != self.ambient_dim:
            raise DimensionMismatchError(
                f'point of dimension {x.shape[-1]} projected onto a plane in R^{self.ambient_dim}'
            )
        return x @ self.frame

    def complement(self):
        """Orthonormal frame of V^⊥, or None when V is the whole space."""
        if self.plane_dim == self.ambient_dim:
            return None
        return Subspace(null_space(self.frame.T))

    def __repr__(self):
        return f'Subspace(n={self.ambient_dim}, k={self.plane_dim})'


def project(V, x):
    return V.project(x)


def metric(V, W):
    """d(V, W) = ‖π_V − π_W‖, the largest singular value of P_V − P_W."""
    if V.ambient_dim != W.ambient_dim or V.plane_dim != W.plane_dim:
        raise DimensionMismatchError('subspaces live in different Grassmannians')
    return float(np.linalg.norm(V.projection - W.projection, 2))


def frame_distances(frames, frame):
    """d(V_i, W) for a stack of frames (m, n, k) against one frame (n, k).

    For planes of equal dimension the operator norm equals
    sqrt(1 − σ_min(F_Vᵀ F_W)²), the sine of the largest principal angle.
    """
    frames = np.asarray(frames, dtype=float)
    if not len(frames):
        return np.zeros(0)
    cross = np.einsum('mnk,nj->mkj', frames, frame)
    k = cross.shape[1]
    if k == 1:
        sigma = np.abs(cross[:, 0, 0])
    elif k == 2:
        frobenius = np.einsum('mkj,mkj->m', cross, cross)
        det = cross[:, 0, 0] * cross[:, 1, 1] - cross[:, 0, 1] * cross[:, 1, 0]
        discriminant = np.sqrt(np.maximum(frobenius ** 2 - 4 * det ** 2, 0.0))
        sigma = np.sqrt(np.maximum(0.5 * (frobenius - discriminant), 0.0))
    else:
        sigma = np.linalg.svd(cross, compute_uv=False)[:, -1]
    return np.sqrt(np.clip(1.0 - sigma ** 2, 0.0, 1.0))


def sample_frames(n, k, count, rng):
    """``count`` frames distributed by γ_{n,k}: QR of Gaussian n x k matrices."""
    if not 1 <= k < n:
        raise DimensionMismatchError(f'sampling needs 1 <= k < n, got Gr({n}, {k})')
    gaussian = rng.standard_normal((count, n, k))
    q, _ = np.linalg.qr(gaussian)
    return q


def sample_uniform(n, k, count, seed):
    """``count`` independent γ_{n,k}-distributed subspaces, reproducible per seed."""
    rng = np.random.default_rng(seed)
    return [Subspace(frame) for frame in sample_frames(n, k, count, rng)]


def sphere_to_line(e):
    """The quotient S^{n-1} -> Gr(n, 1); e and -e give the same line."""
    return Subspace.line(e)


def line_angle(V):
    """Angle in [0, π) of a line in R^2."""
    if V.ambient_dim != 2 or V.plane_dim != 1:
        raise DimensionMismatchError('line_angle is defined on Gr(2, 1)')
    x, y = V.frame[:, 0]
    return float(np.arctan2(y, x) % np.pi)
