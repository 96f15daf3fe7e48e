"""Heterogeneous participating media defined by procedural solid textures.

A medium evaluates extinction sigma_t(p) and single-scattering albedo(p)
per RGB channel at object-space positions.  Three field kinds are
provided: constant, seeded value noise (fractional Brownian motion over a
hashed lattice), and a marble stripe pattern (sine warped by noise).
Fields are packed into a flat parameter vector so the numba render
kernels can evaluate them without Python objects.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from numba import njit

from ..core.rng import mix64, U64

KIND_CONSTANT = 0
KIND_VALUE_NOISE = 1
KIND_MARBLE = 2

# layout of the packed parameter vector
_P_KIND = 0
_P_G = 1
_P_ETA = 2
_P_SEED = 3
_P_FREQ = 4
_P_OCTAVES = 5
_P_STRIPE = 6
_P_TURB = 7
_P_SBASE = 8
_P_SAMP = 11
_P_ABASE = 14
_P_AAMP = 17
_P_SMAJ = 20
MEDIUM_PARAM_LEN = 23


class MediumError(ValueError):
    pass


@njit(cache=True, inline="always")
def _lattice_value(ix, iy, iz, seed):
    h = (
        U64(ix) * U64(0x9E3779B97F4A7C15)
        + U64(iy) * U64(0xC2B2AE3D27D4EB4F)
        + U64(iz) * U64(0x165667B19E3779F9)
        + U64(seed) * U64(0x27D4EB2F165667C5)
    )
    return float(mix64(h) >> U64(11)) * (1.0 / 9007199254740992.0)


@njit(cache=True, inline="always")
def _value_noise(x, y, z, seed):
    """Trilinear value noise in [0, 1], C0-continuous."""
    ix = np.int64(np.floor(x))
    iy = np.int64(np.floor(y))
    iz = np.int64(np.floor(z))
    fx = x - ix
    fy = y - iy
    fz = z - iz
    # smoothstep fade for C1 continuity
    fx = fx * fx * (3.0 - 2.0 * fx)
    fy = fy * fy * (3.0 - 2.0 * fy)
    fz = fz * fz * (3.0 - 2.0 * fz)
    acc = 0.0
    for dx in range(2):
        wx = fx if dx == 1 else 1.0 - fx
        for dy in range(2):
            wy = fy if dy == 1 else 1.0 - fy
            for dz in range(2):
                wz = fz if dz == 1 else 1.0 - fz
                acc += wx * wy * wz * _lattice_value(ix + dx, iy + dy, iz + dz, seed)
    return acc


@njit(cache=True, inline="always")
def _fbm(x, y, z, seed, octaves):
    total = 0.0
    norm = 0.0
    amp = 1.0
    freq = 1.0
    for o in range(octaves):
        total += amp * _value_noise(x * freq, y * freq, z * freq, seed + o)
        norm += amp
        amp *= 0.5
        freq *= 2.0
    return total / norm


@njit(cache=True, inline="always")
def medium_modulation(med, px, py, pz):
    """Scalar field m(p) in [0, 1] shared by sigma_t and albedo variation."""
    kind = int(med[_P_KIND])
    if kind == KIND_CONSTANT:
        return 0.0
    seed = np.int64(med[_P_SEED])
    freq = med[_P_FREQ]
    octaves = int(med[_P_OCTAVES])
    if kind == KIND_VALUE_NOISE:
        return _fbm(px * freq, py * freq, pz * freq, seed, octaves)
    # marble: sine stripes warped by noise
    n = _fbm(px * freq, py * freq, pz * freq, seed, octaves)
    return 0.5 + 0.5 * np.sin(med[_P_STRIPE] * px + med[_P_TURB] * n)


@njit(cache=True, inline="always")
def medium_sigma_albedo(med, px, py, pz, c):
    """(sigma_t, albedo) for channel c at object-space position p."""
    m = medium_modulation(med, px, py, pz)
    sigma = med[_P_SBASE + c] + med[_P_SAMP + c] * m
    albedo = med[_P_ABASE + c] + med[_P_AAMP + c] * m
    return sigma, albedo


@njit(cache=True)
def medium_eval_rgb(med, px, py, pz):
    m = medium_modulation(med, px, py, pz)
    out = np.empty(6, dtype=np.float64)
    for c in range(3):
        out[c] = med[_P_SBASE + c] + med[_P_SAMP + c] * m
        out[3 + c] = med[_P_ABASE + c] + med[_P_AAMP + c] * m
    return out


@njit(cache=True)
def medium_sigma_max_over(med, points):
    """Per-channel max of sigma_t over an (N, 3) point array."""
    out = np.full(3, -1e30)
    for i in range(points.shape[0]):
        m = medium_modulation(med, points[i, 0], points[i, 1], points[i, 2])
        for c in range(3):
            s = med[_P_SBASE + c] + med[_P_SAMP + c] * m
            if s > out[c]:
                out[c] = s
    return out


@dataclass
class MediumField:
    """Procedural extinction/albedo field plus interface parameters."""

    kind: str = "constant"
    sigma_t: np.ndarray = field(default_factory=lambda: np.array([1.0, 1.0, 1.0]))
    sigma_amp: np.ndarray = field(default_factory=lambda: np.zeros(3))
    albedo: np.ndarray = field(default_factory=lambda: np.array([0.9, 0.9, 0.9]))
    albedo_amp: np.ndarray = field(default_factory=lambda: np.zeros(3))
    g: float = 0.0
    eta: float = 1.3
    frequency: float = 1.0
    octaves: int = 1
    stripe_frequency: float = 6.0
    turbulence: float = 2.0
    noise_seed: int = 0
    sigma_t_max_explicit: np.ndarray | None = None

    _KINDS = {"constant": KIND_CONSTANT, "value_noise": KIND_VALUE_NOISE, "marble": KIND_MARBLE}

    def __post_init__(self):
        self.sigma_t = np.asarray(self.sigma_t, dtype=np.float64)
        self.sigma_amp = np.asarray(self.sigma_amp, dtype=np.float64)
        self.albedo = np.asarray(self.albedo, dtype=np.float64)
        self.albedo_amp = np.asarray(self.albedo_amp, dtype=np.float64)
        if self.kind not in self._KINDS:
            raise MediumError(f"medium.type: unknown kind {self.kind!r}")
        if np.any(self.sigma_t < 0) or np.any(self.sigma_amp < 0):
            raise MediumError("medium.sigma_t: extinction must be nonnegative")
        amax = self.albedo + np.maximum(self.albedo_amp, 0.0)
        amin = self.albedo + np.minimum(self.albedo_amp, 0.0)
        if np.any(amax > 1.0) or np.any(amin < 0.0):
            raise MediumError("medium.albedo: albedo out of [0,1]")
        if not (-1.0 < self.g < 1.0):
            raise MediumError("medium.g: asymmetry must lie in (-1, 1)")
        if self.eta <= 0:
            raise MediumError("medium.eta: index of refraction must be > 0")
        if self.octaves < 1:
            raise MediumError("medium.octaves: must be >= 1")
        if self.sigma_t_max_explicit is not None:
            self.sigma_t_max_explicit = np.asarray(self.sigma_t_max_explicit, dtype=np.float64)
            if np.any(self.sigma_t_max_explicit <= 0):
                raise MediumError("medium.sigma_t_max: majorant must be positive")

    @property
    def sigma_t_max(self) -> np.ndarray:
        if self.sigma_t_max_explicit is not None:
            return self.sigma_t_max_explicit
        return self.sigma_t + np.maximum(self.sigma_amp, 0.0)

    @property
    def is_chromatic(self) -> bool:
        """True when any optical property differs between color channels."""
        return not all(
            np.all(arr == arr[0])
            for arr in (self.sigma_t, self.sigma_amp, self.albedo, self.albedo_amp)
        )

    def params(self) -> np.ndarray:
        p = np.zeros(MEDIUM_PARAM_LEN, dtype=np.float64)
        p[_P_KIND] = self._KINDS[self.kind]
        p[_P_G] = self.g
        p[_P_ETA] = self.eta
        p[_P_SEED] = float(self.noise_seed)
        p[_P_FREQ] = self.frequency
        p[_P_OCTAVES] = float(self.octaves)
        p[_P_STRIPE] = self.stripe_frequency
        p[_P_TURB] = self.turbulence
        p[_P_SBASE : _P_SBASE + 3] = self.sigma_t
        p[_P_SAMP : _P_SAMP + 3] = self.sigma_amp
        p[_P_ABASE : _P_ABASE + 3] = self.albedo
        p[_P_AAMP : _P_AAMP + 3] = self.albedo_amp
        p[_P_SMAJ : _P_SMAJ + 3] = self.sigma_t_max
        return p

    def eval(self, p_obj: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """(sigma_t, albedo) RGB at one object-space position."""
        out = medium_eval_rgb(self.params(), float(p_obj[0]), float(p_obj[1]), float(p_obj[2]))
        return out[:3].copy(), out[3:].copy()

    def stratified_points(self, lo: np.ndarray, hi: np.ndarray, n_per_axis: int = 12, seed: int = 1) -> np.ndarray:
        """Jittered grid of n_per_axis^3 points covering [lo, hi]."""
        rng = np.random.default_rng(seed)
        n = n_per_axis
        cell = np.stack(
            np.meshgrid(np.arange(n), np.arange(n), np.arange(n), indexing="ij"), axis=-1
        ).reshape(-1, 3)
        u = rng.random(cell.shape)
        frac = (cell + u) / n
        return np.asarray(lo) + frac * (np.asarray(hi) - np.asarray(lo))

    def validate_majorant(self, lo: np.ndarray, hi: np.ndarray, n_per_axis: int = 12, seed: int = 1) -> None:
        """Stratified sampling check that sigma_t <= sigma_t_max in [lo, hi]."""
        pts = self.stratified_points(lo, hi, n_per_axis, seed)
        observed = medium_sigma_max_over(self.params(), pts)
        if np.any(observed > self.sigma_t_max + 1e-9):
            raise MediumError(
                f"medium.sigma_t_max: majorant {self.sigma_t_max} exceeded "
                f"(observed {observed})"
            )
