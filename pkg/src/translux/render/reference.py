"""Reference renderer: Python-facing API over the numba kernels."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from numba import njit

from ..core import RngStream, normalize
from ..core.rng import make_state
from ..scene import DirectionalLight, Scene
from ..scene.media import MediumField
from .config import PathConfig
from .kernels import (
    MODE_DIRECTIONAL,
    MODE_ENV,
    free_flight_kernel,
    render_kernel,
    transmittance_kernel,
)

_IDENTITY_ROT = np.eye(3)
_ZERO_OFF = np.zeros(3)


@dataclass
class RenderResult:
    """Layered frame: `subsurface` excludes the first-interface mirror
    reflection, which is accumulated in `specular`."""

    subsurface: np.ndarray  # (h, w, 3)
    specular: np.ndarray  # (h, w, 3)
    hit: np.ndarray  # (h, w) bool, center-ray hit
    x_object: np.ndarray  # (h, w, 3) object-space center-ray hit position
    normal_object: np.ndarray  # (h, w, 3) object-space shading normal
    distance: np.ndarray  # (h, w) center-ray hit distance (-1 on miss)

    @property
    def combined(self) -> np.ndarray:
        return self.subsurface + self.specular


def render_reference(
    scene: Scene,
    light: DirectionalLight | str = "env",
    cfg: PathConfig | None = None,
    seed: int = 0,
    camera=None,
) -> RenderResult:
    """Path-trace the scene under one light mode.

    `light` is either the string "env" (environment illumination from the
    scene's map) or a DirectionalLight.  Deterministic for a given seed.
    """
    if cfg is None:
        cfg = PathConfig.from_render_section(scene.render)
    cam_obj = camera if camera is not None else scene.camera
    if isinstance(light, str):
        if light != "env":
            raise ValueError(f"unknown light mode {light!r}")
        if scene.envmap is None:
            raise ValueError("environment light mode requires an envmap section")
        mode = MODE_ENV
        light_dir = np.array([0.0, 0.0, -1.0])
        light_rad = np.zeros(3)
    else:
        mode = MODE_DIRECTIONAL
        light_dir = light.direction
        light_rad = light.radiance

    w, h = cam_obj.width, cam_obj.height
    out_sub = np.zeros((h, w, 3), dtype=np.float64)
    out_spec = np.zeros((h, w, 3), dtype=np.float64)
    out_hit = np.zeros((h, w), dtype=np.bool_)
    out_xo = np.zeros((h, w, 3), dtype=np.float64)
    out_no = np.zeros((h, w, 3), dtype=np.float64)
    out_t = np.zeros((h, w), dtype=np.float64)

    render_kernel(
        scene.flat(), cam_obj.basis(), w, h,
        mode, light_dir, light_rad, scene.medium.is_chromatic,
        cfg.spp, cfg.max_depth, cfg.rr_start, cfg.roughness, cfg.jitter, seed,
        out_sub, out_spec, out_hit, out_xo, out_no, out_t,
    )
    return RenderResult(out_sub, out_spec, out_hit, out_xo, out_no, out_t)


@njit(cache=True)
def _free_flight_batch(med, ox, oy, oz, dx, dy, dz, tmax, c, seed, n):
    out = np.empty(n, dtype=np.float64)
    for i in range(n):
        state = make_state(seed, i, 0)
        out[i] = free_flight_kernel(
            med, _IDENTITY_ROT, _ZERO_OFF, ox, oy, oz, dx, dy, dz, tmax, c, state
        )
    return out


def free_flight_distances(
    medium: MediumField,
    origin: np.ndarray,
    direction: np.ndarray,
    n: int,
    seed: int = 0,
    tmax: float = np.inf,
    channel: int = 0,
) -> np.ndarray:
    """n independent free-flight samples; -1 entries passed tmax unscattered."""
    o = np.asarray(origin, dtype=np.float64)
    d = normalize(direction)
    return _free_flight_batch(
        medium.params(), o[0], o[1], o[2], d[0], d[1], d[2], tmax, channel, seed, n
    )


def free_flight(
    medium: MediumField,
    origin: np.ndarray,
    direction: np.ndarray,
    rng: RngStream,
    tmax: float = np.inf,
    channel: int = 0,
) -> float | None:
    """Sample a scattering distance in a bare medium field (object space).

    Returns the distance, or None if the ray passes tmax without a real
    collision.  Distances follow sigma_t(p(t)) * exp(-integral of sigma_t).
    """
    o = np.asarray(origin, dtype=np.float64)
    d = normalize(direction)
    t = free_flight_kernel(
        medium.params(), _IDENTITY_ROT, _ZERO_OFF,
        o[0], o[1], o[2], d[0], d[1], d[2], tmax, channel, rng.state,
    )
    return None if t < 0 else float(t)


def transmittance(
    medium: MediumField,
    origin: np.ndarray,
    direction: np.ndarray,
    distance: float,
    rng: RngStream,
    channel: int = 0,
) -> float:
    """Unbiased ratio-tracking transmittance estimate over [0, distance)."""
    o = np.asarray(origin, dtype=np.float64)
    d = normalize(direction)
    return float(
        transmittance_kernel(
            medium.params(), _IDENTITY_ROT, _ZERO_OFF,
            o[0], o[1], o[2], d[0], d[1], d[2], distance, channel, rng.state,
        )
    )
