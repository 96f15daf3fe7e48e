"""Fixed random Fourier feature encoding.

Inputs are lifted to 512 features through a frozen random matrix so the
small MLPs can represent high-frequency appearance variation.  The
matrix is sampled once at construction and never trained.
"""

from __future__ import annotations

import numpy as np

N_FREQUENCIES = 256
FEATURE_DIM = 2 * N_FREQUENCIES


class FourierFeatureMap:
    """f(x) = [cos(2 pi G x), sin(2 pi G x)] with G of shape (256, n)."""

    def __init__(self, matrix: np.ndarray):
        matrix = np.asarray(matrix)
        if matrix.ndim != 2 or matrix.shape[0] != N_FREQUENCIES:
            raise ValueError(f"G must be (256, n), got {matrix.shape}")
        self.matrix = matrix

    @classmethod
    def create(cls, input_dim: int, seed: int, mean: float = 18.0, std: float = 1.0,
               dtype=np.float32) -> "FourierFeatureMap":
        rng = np.random.default_rng(seed)
        g = rng.normal(mean, std, size=(N_FREQUENCIES, input_dim))
        return cls(g.astype(dtype))

    @property
    def input_dim(self) -> int:
        return self.matrix.shape[1]

    def astype(self, dtype) -> "FourierFeatureMap":
        return FourierFeatureMap(self.matrix.astype(dtype))

    def __call__(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=self.matrix.dtype)
        if x.shape[-1] != self.input_dim:
            raise ValueError(
                f"input dim {x.shape[-1]} does not match G columns {self.input_dim}"
            )
        phase = (2.0 * np.pi) * (x @ self.matrix.T)
        return np.concatenate([np.cos(phase), np.sin(phase)], axis=-1)
