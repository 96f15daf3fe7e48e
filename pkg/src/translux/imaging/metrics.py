"""Full-image quality metrics: MSE (linear HDR) and mean SSIM.

SSIM follows Wang et al.: 11x11 Gaussian window with sigma 1.5,
K1=0.01, K2=0.03 on unit-range data, averaged over the region where the
window fits entirely inside the image.  Both metrics operate on the
luminance of sRGB-tonemapped images unless noted.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .tonemap import tonemap_unit

LUMA_WEIGHTS = np.array([0.2126, 0.7152, 0.0722])

_SSIM_SIGMA = 1.5
_SSIM_RADIUS = 5  # 11x11 window
_K1, _K2, _L = 0.01, 0.03, 1.0


def _check_dims(a: np.ndarray, b: np.ndarray) -> None:
    if a.shape != b.shape:
        raise ValueError(f"image dimensions differ: {a.shape} vs {b.shape}")


def luminance(rgb: np.ndarray) -> np.ndarray:
    return np.asarray(rgb, dtype=np.float64) @ LUMA_WEIGHTS


def mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared difference over pixels and channels, linear domain."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    _check_dims(a, b)
    return float(np.mean((a - b) ** 2))


def _gaussian_window() -> np.ndarray:
    x = np.arange(-_SSIM_RADIUS, _SSIM_RADIUS + 1, dtype=np.float64)
    g = np.exp(-(x**2) / (2 * _SSIM_SIGMA**2))
    w = np.outer(g, g)
    return w / w.sum()


def ssim(a: np.ndarray, b: np.ndarray, exposure: float = 1.0) -> float:
    """Mean SSIM on tonemapped luminance of two HDR images."""
    _check_dims(np.asarray(a), np.asarray(b))
    x = luminance(tonemap_unit(a, exposure))
    y = luminance(tonemap_unit(b, exposure))
    if min(x.shape) < 2 * _SSIM_RADIUS + 1:
        raise ValueError("image smaller than the 11x11 SSIM window")

    w = _gaussian_window()
    conv = lambda img: ndimage.convolve(img, w, mode="reflect")
    mu_x, mu_y = conv(x), conv(y)
    var_x = conv(x * x) - mu_x**2
    var_y = conv(y * y) - mu_y**2
    cov = conv(x * y) - mu_x * mu_y

    c1, c2 = (_K1 * _L) ** 2, (_K2 * _L) ** 2
    s = ((2 * mu_x * mu_y + c1) * (2 * cov + c2)) / (
        (mu_x**2 + mu_y**2 + c1) * (var_x + var_y + c2)
    )
    r = _SSIM_RADIUS
    return float(s[r:-r, r:-r].mean())
