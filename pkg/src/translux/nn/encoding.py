"""Input normalization for the networks.

A sample is (x_o, omega_o[, omega_i]) in object space.  Positions map to
[-1, 1]^3 through the object bounding box; each direction contributes
(theta / pi, phi / 2pi).  The appearance network sees the full 7-vector,
the sampling-lobe network the 5-vector without omega_i.
"""

from __future__ import annotations

import numpy as np

APPEARANCE_INPUT_DIM = 7
IMPORTANCE_INPUT_DIM = 5


def encode_input(
    positions: np.ndarray,
    omega_o: np.ndarray,
    omega_i: np.ndarray | None,
    bounds: tuple[np.ndarray, np.ndarray],
) -> np.ndarray:
    """Encode a batch.  positions (B,3); omega_o/omega_i (B,2) as
    (theta, phi) in object space; bounds = (lo, hi) of the object box."""
    lo, hi = bounds
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    positions = np.atleast_2d(np.asarray(positions, dtype=np.float64))
    omega_o = np.atleast_2d(np.asarray(omega_o, dtype=np.float64))
    ext = np.where(hi > lo, hi - lo, 1.0)
    pos = 2.0 * (positions - lo) / ext - 1.0
    cols = [pos, omega_o / [np.pi, 2.0 * np.pi]]
    if omega_i is not None:
        omega_i = np.atleast_2d(np.asarray(omega_i, dtype=np.float64))
        cols.append(omega_i / [np.pi, 2.0 * np.pi])
    return np.concatenate(cols, axis=-1)


def decode_direction_slot(encoded: np.ndarray) -> np.ndarray:
    """Inverse of a direction slot: (theta/pi, phi/2pi) -> (theta, phi)."""
    return np.asarray(encoded, dtype=np.float64) * [np.pi, 2.0 * np.pi]
