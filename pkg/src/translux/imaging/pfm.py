"""Portable float map I/O (little-endian, 3-channel).

Scanlines are stored bottom-to-top per the PFM convention; in memory the
image is row-major top-to-bottom float32 of shape (height, width, 3).
"""

from __future__ import annotations

import numpy as np


class PfmError(ValueError):
    pass


def write_pfm(path, image: np.ndarray) -> None:
    image = np.asarray(image, dtype=np.float32)
    if image.ndim != 3 or image.shape[2] != 3:
        raise PfmError(f"expected (h, w, 3) image, got shape {image.shape}")
    h, w = image.shape[:2]
    with open(path, "wb") as f:
        f.write(b"PF\n")
        f.write(f"{w} {h}\n".encode("ascii"))
        f.write(b"-1.0\n")  # negative scale marks little-endian
        f.write(image[::-1].astype("<f4").tobytes())


def read_pfm(path) -> np.ndarray:
    with open(path, "rb") as f:
        magic = f.readline().strip()
        if magic != b"PF":
            raise PfmError(f"{path}: not a 3-channel PFM (magic {magic!r})")
        dims = f.readline().split()
        if len(dims) != 2:
            raise PfmError(f"{path}: malformed dimension line")
        w, h = int(dims[0]), int(dims[1])
        scale = float(f.readline().strip())
        if scale >= 0:
            raise PfmError(f"{path}: big-endian PFM not supported (scale {scale})")
        data = f.read(w * h * 3 * 4)
        if len(data) != w * h * 3 * 4:
            raise PfmError(f"{path}: truncated payload")
    img = np.frombuffer(data, dtype="<f4").reshape(h, w, 3)
    return img[::-1].copy()
