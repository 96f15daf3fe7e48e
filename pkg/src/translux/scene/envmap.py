"""Equirectangular environment maps with luminance importance sampling.

Mapping convention: theta is the zenith angle from +z, phi is measured
from +x; texel (row j, column i) covers theta in [j, j+1] * pi/h and phi
in [i, i+1] * 2pi/w.  Lookups are bilinear; the sampling distribution is
piecewise constant per texel (uniform in cos(theta) and phi inside a
texel), which makes the returned pdf exactly equal to `pdf()`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from ..core import spherical_to_dir
from ..imaging.metrics import LUMA_WEIGHTS


class EnvmapError(ValueError):
    pass


@njit(cache=True, inline="always")
def env_eval(pix, dx, dy, dz, c):
    """Bilinear lookup of channel c in direction d (unit)."""
    h, w = pix.shape[0], pix.shape[1]
    theta = np.arccos(min(1.0, max(-1.0, dz)))
    phi = np.arctan2(dy, dx)
    if phi < 0.0:
        phi += 2.0 * np.pi
    v = theta / np.pi * h - 0.5
    u = phi / (2.0 * np.pi) * w - 0.5
    if v < 0.0:
        v = 0.0
    if v > h - 1.0:
        v = h - 1.0
    j0 = int(np.floor(v))
    if j0 > h - 2:
        j0 = h - 2
    if h == 1:
        j0 = 0
    fv = v - j0
    i0f = np.floor(u)
    fu = u - i0f
    i0 = int(i0f) % w
    i1 = (i0 + 1) % w
    j1 = min(j0 + 1, h - 1)
    a = pix[j0, i0, c] * (1.0 - fu) + pix[j0, i1, c] * fu
    b = pix[j1, i0, c] * (1.0 - fu) + pix[j1, i1, c] * fu
    return a * (1.0 - fv) + b * fv


@njit(cache=True, inline="always")
def _search_cdf(cdf, u):
    lo = 0
    hi = cdf.shape[0] - 1
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if cdf[mid] <= u:
            lo = mid
        else:
            hi = mid
    return lo


@njit(cache=True)
def env_sample(pix, row_cdf, col_cdf, u1, u2, u3, u4):
    """Importance sample a direction; returns (dx, dy, dz, pdf)."""
    h, w = pix.shape[0], pix.shape[1]
    total = row_cdf[h]
    if total <= 0.0:
        # black map: uniform sphere fallback
        z = 1.0 - 2.0 * u1
        r = np.sqrt(max(0.0, 1.0 - z * z))
        phi = 2.0 * np.pi * u2
        return r * np.cos(phi), r * np.sin(phi), z, 1.0 / (4.0 * np.pi)
    j = _search_cdf(row_cdf, u1 * total)
    row_mass = row_cdf[j + 1] - row_cdf[j]
    ct = col_cdf[j, w]
    i = _search_cdf(col_cdf[j], u2 * ct)
    col_mass = col_cdf[j, i + 1] - col_cdf[j, i]
    p_texel = (row_mass / total) * (col_mass / ct)

    cz_hi = np.cos(j * np.pi / h)  # cos at smaller theta edge (larger value)
    cz_lo = np.cos((j + 1) * np.pi / h)
    cz = cz_lo + (cz_hi - cz_lo) * u3
    phi = 2.0 * np.pi * (i + u4) / w
    st = np.sqrt(max(0.0, 1.0 - cz * cz))
    solid = (2.0 * np.pi / w) * (cz_hi - cz_lo)
    pdf = p_texel / solid
    return st * np.cos(phi), st * np.sin(phi), cz, pdf


@njit(cache=True)
def env_pdf(pix, row_cdf, col_cdf, dx, dy, dz):
    """Density (per steradian) with which env_sample returns direction d."""
    h, w = pix.shape[0], pix.shape[1]
    total = row_cdf[h]
    if total <= 0.0:
        return 1.0 / (4.0 * np.pi)
    theta = np.arccos(min(1.0, max(-1.0, dz)))
    phi = np.arctan2(dy, dx)
    if phi < 0.0:
        phi += 2.0 * np.pi
    j = min(int(theta / np.pi * h), h - 1)
    i = min(int(phi / (2.0 * np.pi) * w), w - 1)
    ct = col_cdf[j, w]
    if ct <= 0.0:
        return 0.0
    row_mass = row_cdf[j + 1] - row_cdf[j]
    col_mass = col_cdf[j, i + 1] - col_cdf[j, i]
    p_texel = (row_mass / total) * (col_mass / ct)
    cz_hi = np.cos(j * np.pi / h)
    cz_lo = np.cos((j + 1) * np.pi / h)
    solid = (2.0 * np.pi / w) * (cz_hi - cz_lo)
    return p_texel / solid


class EnvironmentMap:
    """HDR raster plus precomputed marginal/conditional sampling tables."""

    def __init__(self, pixels: np.ndarray):
        pixels = np.ascontiguousarray(pixels, dtype=np.float64)
        if pixels.ndim != 3 or pixels.shape[2] != 3:
            raise EnvmapError(f"envmap: expected (h, w, 3) raster, got {pixels.shape}")
        if not np.all(np.isfinite(pixels)):
            raise EnvmapError("envmap: non-finite texels")
        if np.any(pixels < 0):
            raise EnvmapError("envmap: negative texels")
        self.pixels = pixels
        h, w = pixels.shape[:2]
        lum = pixels @ LUMA_WEIGHTS
        j = np.arange(h)
        band = np.cos(j * np.pi / h) - np.cos((j + 1) * np.pi / h)  # (h,)
        weights = lum * band[:, None]  # (h, w)

        self.col_cdf = np.zeros((h, w + 1), dtype=np.float64)
        np.cumsum(weights, axis=1, out=self.col_cdf[:, 1:])
        row_w = weights.sum(axis=1)
        self.row_cdf = np.zeros(h + 1, dtype=np.float64)
        np.cumsum(row_w, out=self.row_cdf[1:])
        self.total = float(self.row_cdf[-1])

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def eval(self, d: np.ndarray) -> np.ndarray:
        d = np.asarray(d, dtype=np.float64)
        return np.array(
            [env_eval(self.pixels, d[0], d[1], d[2], c) for c in range(3)]
        )

    def sample(self, u: np.ndarray) -> tuple[np.ndarray, float]:
        dx, dy, dz, pdf = env_sample(
            self.pixels, self.row_cdf, self.col_cdf, u[0], u[1], u[2], u[3]
        )
        return np.array([dx, dy, dz]), pdf

    def pdf(self, d: np.ndarray) -> float:
        d = np.asarray(d, dtype=np.float64)
        return env_pdf(self.pixels, self.row_cdf, self.col_cdf, d[0], d[1], d[2])

    def texel_directions(self) -> np.ndarray:
        """(h, w, 3) directions at texel centers."""
        h, w = self.height, self.width
        theta = (np.arange(h) + 0.5) * np.pi / h
        phi = (np.arange(w) + 0.5) * 2 * np.pi / w
        tt, pp = np.meshgrid(theta, phi, indexing="ij")
        return spherical_to_dir(tt, pp)

    def texel_solid_angles(self) -> np.ndarray:
        """(h, w) exact solid angle per texel."""
        h, w = self.height, self.width
        j = np.arange(h)
        band = np.cos(j * np.pi / h) - np.cos((j + 1) * np.pi / h)
        return np.repeat(band[:, None], w, axis=1) * (2 * np.pi / w)


def constant_env(value, width: int = 16, height: int = 8) -> EnvironmentMap:
    value = np.broadcast_to(np.asarray(value, dtype=np.float64), (3,))
    return EnvironmentMap(np.tile(value, (height, width, 1)))


def gradient_env(
    zenith,
    horizon,
    nadir=None,
    width: int = 64,
    height: int = 32,
    axis=(0.0, 0.0, 1.0),
) -> EnvironmentMap:
    """Smooth sky: interpolates nadir->horizon->zenith along `axis`."""
    zenith = np.asarray(zenith, dtype=np.float64)
    horizon = np.asarray(horizon, dtype=np.float64)
    nadir = horizon * 0.3 if nadir is None else np.asarray(nadir, dtype=np.float64)
    axis = np.asarray(axis, dtype=np.float64)
    axis = axis / np.linalg.norm(axis)
    tmp = EnvironmentMap(np.ones((height, width, 3)))
    dirs = tmp.texel_directions()
    t = dirs @ axis  # in [-1, 1]
    up = np.clip(t, 0, 1)[..., None]
    down = np.clip(-t, 0, 1)[..., None]
    pix = (1 - up - down) * horizon + up * zenith + down * nadir
    return EnvironmentMap(pix)


def single_texel_env(
    row: int, col: int, value, width: int = 16, height: int = 8
) -> EnvironmentMap:
    pix = np.zeros((height, width, 3))
    pix[row, col] = np.asarray(value, dtype=np.float64)
    return EnvironmentMap(pix)
