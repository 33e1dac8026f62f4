"""Parameter derivative of e ↦ ρ_e(z) on the sphere."""
from typing import NamedTuple

import numpy as np

from ifs_core.exceptions import DimensionMismatchError, PreconditionError

from .family import rho, tangent_frame, unit_vector


class Jacobian(NamedTuple):
    determinant: float
    matrix: np.ndarray


def _vector(z, u):
    z = np.asarray(z, dtype=float).reshape(-1)
    if z.size != u.size:
        raise DimensionMismatchError(f'vector in R^{z.size} against a direction in R^{u.size}')
    return z


def jacobian_analytic(z, u):
    """D_e ρ_e(z) at e = u in a tangent frame: −(z·u) I_{n−1}, determinant (−z·u)^{n−1}."""
    u = unit_vector(u)
    z = _vector(z, u)
    if not np.any(z):
        raise PreconditionError('the Jacobian needs z != 0')
    normal = float(z @ u)
    size = u.size - 1
    return Jacobian((-normal) ** size, -normal * np.eye(size))


def ambient_jacobian(z, e):
    """n x n derivative −e zᵀ − (z·e) I of e ↦ ρ_e(z), before restricting to the tangent space."""
    e = unit_vector(e)
    z = _vector(z, e)
    return -np.outer(e, z) - float(z @ e) * np.eye(e.size)


def jacobian_fd(z, u, h=1e-4):
    """Central differences of e ↦ ρ_e(z) along the great circles through u.

    Column j differentiates along (u ± h t_j) / |u ± h t_j| for the tangent
    frame t_1, ..., t_{n−1} and is read back in that frame.
    """
    if not 0 < h <= 1e-3:
        raise PreconditionError(f'step must lie in (0, 1e-3], got {h}')
    u = unit_vector(u)
    z = _vector(z, u)
    frame = tangent_frame(u)
    columns = []
    for t in frame.T:
        forward = u + h * t
        backward = u - h * t
        forward /= np.linalg.norm(forward)
        backward /= np.linalg.norm(backward)
        columns.append(frame.T @ (rho(forward, z) - rho(backward, z)) / (2 * h))
    return np.column_stack(columns)
