"""Rotation-free IFS projected along a direction e onto the hyperplane e^⊥."""
import logging

import numpy as np
from scipy.linalg import null_space

from ifs_core.attractor import symbol_point
from ifs_core.exceptions import (
    ConsistencyError, DimensionMismatchError, PreconditionError, UnsupportedSystemError,
)
from ifs_core.maps import SELF_SIMILAR

logger = logging.getLogger(__name__)

UNIT_TOLERANCE = 1e-12
LIMIT_TOLERANCE = 1e-10


def unit_vector(e):
    e = np.asarray(e, dtype=float).reshape(-1)
    if abs(np.linalg.norm(e) - 1.0) > UNIT_TOLERANCE:
        raise PreconditionError(f'direction must be a unit vector, got norm {np.linalg.norm(e):.15g}')
    return e


def rho(e, x):
    """ρ_e(x) = x − (x·e)e for one point or an (m, n) array."""
    e = unit_vector(e)
    x = np.asarray(x, dtype=float)
    if x.shape[-1] != e.size:
        raise DimensionMismatchError(f'point in R^{x.shape[-1]} against a direction in R^{e.size}')
    return x - (x @ e)[..., None] * e


def tangent_frame(u):
    """Orthonormal basis of u^⊥ as the columns of an n x (n−1) matrix.

    In the plane the basis is the quarter turn of u, so the coordinate on
    the line u^⊥ has a fixed orientation.
    """
    u = unit_vector(u)
    if u.size == 2:
        return np.array([[-u[1]], [u[0]]])
    return null_space(u[None, :])


def hyperplane_coordinates(e, x):
    """Coordinates of ρ_e(x) in :func:`tangent_frame` of e."""
    return rho(e, x) @ tangent_frame(e)


class ProjectedFamily:
    """f_i(ξ; e) = a_i ξ + ρ_e(b_i) for a self-similar system g_i(x) = a_i x + b_i."""

    def __init__(self, system):
        if system.kind != SELF_SIMILAR:
            raise UnsupportedSystemError('projected families are built from self-similar systems')
        if not system.is_rotation_free:
            raise UnsupportedSystemError(
                f'{system.name or "system"} has rotations or reflections; projected families need g(x) = ax + b'
            )
        self.base_system = system

    @property
    def ambient_dim(self):
        return self.base_system.ambient_dim

    @property
    def ratios(self):
        return self.base_system.ratios

    @property
    def size(self):
        return self.base_system.size

    def translations(self, e):
        """ρ_e(b_i) for every map, one row per letter."""
        return rho(e, np.array([g.translation for g in self.base_system.maps]))

    def induced(self, e, letter, xi):
        g = self.base_system.similarity(letter)
        return g.ratio * np.asarray(xi, dtype=float) + rho(e, g.translation)

    def compose(self, e, word, xi=None):
        """f_{w1}(f_{w2}(... f_{wm}(ξ; e) ...; e); e)."""
        word = self.base_system.validate_word(word)
        value = np.zeros(self.ambient_dim) if xi is None else np.asarray(xi, dtype=float)
        for letter in reversed(word):
            value = self.induced(e, letter, value)
        return value

    def __repr__(self):
        return f'ProjectedFamily({self.base_system!r})'


def family_limit(family, e, word):
    """Π_e(w) = f_w(0; e), checked against ρ_e of the unprojected symbol point."""
    value = family.compose(e, word)
    expected = rho(e, symbol_point(family.base_system, word))
    error = float(np.max(np.abs(value - expected), initial=0.0))
    if error > LIMIT_TOLERANCE:
        raise ConsistencyError(f'projected limit differs from ρ_e(Π(w)) by {error:.3e} for word {word}')
    return value
