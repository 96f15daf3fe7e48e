"""Pinhole camera."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from ..core import normalize


class CameraError(ValueError):
    pass


@dataclass
class Camera:
    position: np.ndarray
    look_at: np.ndarray
    up: np.ndarray
    fov: float  # vertical field of view, radians
    width: int
    height: int

    def __post_init__(self):
        self.position = np.asarray(self.position, dtype=np.float64)
        self.look_at = np.asarray(self.look_at, dtype=np.float64)
        self.up = np.asarray(self.up, dtype=np.float64)
        if not (0.0 < self.fov < np.pi):
            raise CameraError("camera.fov: must lie in (0, pi)")
        if self.width < 1 or self.height < 1:
            raise CameraError("camera.resolution: must be >= 1")
        if np.allclose(self.position, self.look_at):
            raise CameraError("camera.look_at: coincides with position")

    def basis(self) -> np.ndarray:
        """Packed kernel parameters: pos, right, up, forward, tan(fov/2), aspect."""
        forward = normalize(self.look_at - self.position)
        up_hint = self.up
        if abs(np.dot(normalize(up_hint), forward)) > 0.999:
            up_hint = np.array([1.0, 0.0, 0.0])
            if abs(np.dot(up_hint, forward)) > 0.999:
                up_hint = np.array([0.0, 1.0, 0.0])
        right = normalize(np.cross(forward, up_hint))
        up = np.cross(right, forward)
        out = np.empty(14, dtype=np.float64)
        out[0:3] = self.position
        out[3:6] = right
        out[6:9] = up
        out[9:12] = forward
        out[12] = np.tan(0.5 * self.fov)
        out[13] = self.width / self.height
        return out

    def ray(self, x: float, y: float) -> tuple[np.ndarray, np.ndarray]:
        """Ray through continuous pixel coordinates (x, y); (0,0) is the
        top-left corner, pixel centers at half-integers."""
        cb = self.basis()
        ox, oy, oz, dx, dy, dz = camera_ray(cb, self.width, self.height, x, y)
        return np.array([ox, oy, oz]), np.array([dx, dy, dz])


@njit(cache=True, inline="always")
def camera_ray(cb, width, height, px, py):
    ndc_x = (px / width * 2.0 - 1.0) * cb[12] * cb[13]
    ndc_y = (1.0 - py / height * 2.0) * cb[12]
    dx = cb[9] + ndc_x * cb[3] + ndc_y * cb[6]
    dy = cb[10] + ndc_x * cb[4] + ndc_y * cb[7]
    dz = cb[11] + ndc_x * cb[5] + ndc_y * cb[8]
    inv = 1.0 / np.sqrt(dx * dx + dy * dy + dz * dz)
    return cb[0], cb[1], cb[2], dx * inv, dy * inv, dz * inv
