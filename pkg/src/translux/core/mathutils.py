"""Vector and spherical-coordinate primitives.

Directions are plain numpy float64 arrays of shape (3,) (or (..., 3) for
the vectorized helpers) and are kept unit length to within 1e-6.  All
local frames use z as the zenith axis.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

UNIT_TOL = 1e-6


def normalize(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    n = np.linalg.norm(v, axis=-1, keepdims=True)
    if np.any(n == 0.0):
        raise ValueError("cannot normalize zero vector")
    return v / n


def is_unit(v: np.ndarray, tol: float = UNIT_TOL) -> bool:
    return bool(np.all(np.abs(np.linalg.norm(np.asarray(v), axis=-1) - 1.0) <= tol))


def spherical_to_dir(theta: float | np.ndarray, phi: float | np.ndarray) -> np.ndarray:
    """(theta, phi) -> unit direction, theta measured from +z, phi from +x."""
    st = np.sin(theta)
    return np.stack(
        [st * np.cos(phi), st * np.sin(phi), np.cos(theta) * np.ones_like(st)],
        axis=-1,
    )


def dir_to_spherical(d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Unit direction -> (theta in [0,pi], phi in [0,2pi))."""
    d = np.asarray(d, dtype=np.float64)
    theta = np.arccos(np.clip(d[..., 2], -1.0, 1.0))
    phi = np.arctan2(d[..., 1], d[..., 0])
    phi = np.where(phi < 0.0, phi + 2.0 * np.pi, phi)
    # atan2(0, 0) at the poles yields phi = 0 by convention
    return theta, phi


@dataclass(frozen=True)
class Frame:
    """Right-handed orthonormal frame; `normal` plays the role of +z."""

    tangent: np.ndarray
    bitangent: np.ndarray
    normal: np.ndarray

    def to_world(self, v_local: np.ndarray) -> np.ndarray:
        v = np.asarray(v_local, dtype=np.float64)
        return (
            v[..., :1] * self.tangent
            + v[..., 1:2] * self.bitangent
            + v[..., 2:3] * self.normal
        )

    def to_local(self, v_world: np.ndarray) -> np.ndarray:
        v = np.asarray(v_world, dtype=np.float64)
        return np.stack(
            [v @ self.tangent, v @ self.bitangent, v @ self.normal], axis=-1
        )


def make_frame(normal: np.ndarray) -> Frame:
    """Branchless orthonormal basis around `normal` (Duff et al. style).

    The copysign construction is continuous except at n=(0,0,-1) where the
    convention below applies; n=(0,0,1) maps tangent to (1,0,0).
    """
    n = normalize(normal)
    t, b = _onb_components(float(n[0]), float(n[1]), float(n[2]))
    return Frame(tangent=np.array(t), bitangent=np.array(b), normal=n)


@njit(cache=True, inline="always")
def _onb_components(nx, ny, nz):
    s = 1.0 if nz >= 0.0 else -1.0
    a = -1.0 / (s + nz)
    b = nx * ny * a
    t = (1.0 + s * nx * nx * a, s * b, -s * nx)
    bt = (b, s + ny * ny * a, -ny)
    return t, bt


def reflect(d: np.ndarray, n: np.ndarray) -> np.ndarray:
    """Mirror `d` about normal `n`; both unit, d pointing toward the surface."""
    d = np.asarray(d, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    return d - 2.0 * np.sum(d * n, axis=-1, keepdims=True) * n


def refract(d: np.ndarray, n: np.ndarray, eta_rel: float) -> np.ndarray | None:
    """Refract `d` crossing into a medium with relative index `eta_rel`.

    `d` points toward the surface, `n` away from the medium being entered
    (so cos(d, n) < 0).  Returns None on total internal reflection.
    """
    d = np.asarray(d, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    cos_i = -float(np.dot(d, n))
    sin2_t = (1.0 - cos_i * cos_i) / (eta_rel * eta_rel)
    if sin2_t >= 1.0:
        return None
    cos_t = np.sqrt(1.0 - sin2_t)
    return d / eta_rel + (cos_i / eta_rel - cos_t) * n


def uniform_sphere_dir(u1: float | np.ndarray, u2: float | np.ndarray) -> np.ndarray:
    """Map two uniforms to a uniformly distributed direction on the sphere."""
    z = 1.0 - 2.0 * np.asarray(u1, dtype=np.float64)
    r = np.sqrt(np.maximum(0.0, 1.0 - z * z))
    phi = 2.0 * np.pi * np.asarray(u2, dtype=np.float64)
    return np.stack([r * np.cos(phi), r * np.sin(phi), z], axis=-1)
