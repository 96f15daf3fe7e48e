"""Real spherical harmonics up to degree 2 (9 basis functions).

Orthonormal convention: integral of Y_i * Y_j over the sphere equals
delta_ij.  Coefficient order is fixed as
(0,0), (1,-1), (1,0), (1,1), (2,-2), (2,-1), (2,0), (2,1), (2,2).
"""

from __future__ import annotations

import numpy as np

N_SH = 9

_C00 = 0.5 * np.sqrt(1.0 / np.pi)
_C1 = np.sqrt(3.0 / (4.0 * np.pi))
_C2A = 0.5 * np.sqrt(15.0 / np.pi)
_C20 = 0.25 * np.sqrt(5.0 / np.pi)
_C22 = 0.25 * np.sqrt(15.0 / np.pi)


def sh_basis(d: np.ndarray) -> np.ndarray:
    """Evaluate the 9 basis functions for unit directions (..., 3) -> (..., 9)."""
    d = np.asarray(d, dtype=np.float64)
    x, y, z = d[..., 0], d[..., 1], d[..., 2]
    out = np.empty(d.shape[:-1] + (N_SH,), dtype=np.float64)
    out[..., 0] = _C00
    out[..., 1] = _C1 * y
    out[..., 2] = _C1 * z
    out[..., 3] = _C1 * x
    out[..., 4] = _C2A * x * y
    out[..., 5] = _C2A * y * z
    out[..., 6] = _C20 * (3.0 * z * z - 1.0)
    out[..., 7] = _C2A * x * z
    out[..., 8] = _C22 * (x * x - y * y)
    return out


def project_env(env) -> np.ndarray:
    """Light coefficients b_l^m: (9, 3) array, one column per color channel.

    Computed by texel quadrature: sum over texels of L * Y * solid angle.
    """
    dirs = env.texel_directions()  # (h, w, 3)
    omega = env.texel_solid_angles()  # (h, w)
    basis = sh_basis(dirs)  # (h, w, 9)
    weighted = env.pixels * omega[..., None]  # (h, w, 3)
    return np.einsum("hwk,hwc->kc", basis, weighted)


def sh_reconstruct(coeffs: np.ndarray, d: np.ndarray) -> np.ndarray:
    """Evaluate a (9, C) coefficient set at unit directions (..., 3) -> (..., C)."""
    return sh_basis(d) @ np.asarray(coeffs, dtype=np.float64)


def sh_env(coeffs: np.ndarray, width: int = 64, height: int = 32):
    """Paint a band-limited (l <= 2) function into an equirectangular map.

    The coefficient array is (9, 3).  Raises if the reconstruction is
    negative anywhere (environment radiance must be nonnegative).
    """
    from ..scene.envmap import EnvironmentMap, EnvmapError

    coeffs = np.asarray(coeffs, dtype=np.float64)
    if coeffs.shape != (N_SH, 3):
        raise EnvmapError(f"envmap.coeffs: expected (9, 3), got {coeffs.shape}")
    probe = EnvironmentMap(np.ones((height, width, 3)))
    pix = sh_reconstruct(coeffs, probe.texel_directions())
    if np.any(pix < 0):
        raise EnvmapError("envmap.coeffs: reconstruction is negative somewhere")
    return EnvironmentMap(pix)
