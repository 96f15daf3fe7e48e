"""Linear HDR -> display-referred sRGB conversion."""

from __future__ import annotations

import numpy as np


def srgb_encode(linear: np.ndarray) -> np.ndarray:
    """Standard sRGB transfer curve on values in [0, 1]."""
    linear = np.clip(linear, 0.0, 1.0)
    low = linear * 12.92
    high = 1.055 * np.power(linear, 1.0 / 2.4, where=linear > 0, out=np.zeros_like(linear)) - 0.055
    return np.where(linear <= 0.0031308, low, high)


def srgb_decode(encoded: np.ndarray) -> np.ndarray:
    encoded = np.clip(encoded, 0.0, 1.0)
    low = encoded / 12.92
    high = np.power((encoded + 0.055) / 1.055, 2.4)
    return np.where(encoded <= 0.04045, low, high)


def tonemap_srgb(image: np.ndarray, exposure: float = 1.0) -> np.ndarray:
    """Exposure-scaled clamp through the sRGB curve, quantized to uint8."""
    if exposure <= 0:
        raise ValueError("exposure must be > 0")
    encoded = srgb_encode(np.asarray(image, dtype=np.float64) * exposure)
    return (encoded * 255.0 + 0.5).astype(np.uint8)


def tonemap_unit(image: np.ndarray, exposure: float = 1.0) -> np.ndarray:
    """Same pipeline but kept in [0, 1] floats (metric inputs)."""
    if exposure <= 0:
        raise ValueError("exposure must be > 0")
    return srgb_encode(np.asarray(image, dtype=np.float64) * exposure)


def write_png(path, image_u8: np.ndarray) -> None:
    from PIL import Image

    Image.fromarray(image_u8, mode="RGB").save(path)
