"""Tiny fully-connected networks with additive skip connections.

Forward, exact backpropagation, and the two production architectures:

* appearance network: Fourier(7) -> 5 layers of 128 -> 3 raw outputs,
  additive skips from layer 1 to 3 and layer 2 to 4;
* sampling-width network: Fourier(5) -> 512/128/32 hidden -> 1 output
  through softplus + 1e-3 so the predicted lobe width stays positive.

A skip (src, dst) adds the post-activation output of layer `src` to the
pre-activation of layer `dst`; source and target widths must match.
Weights are float32 by default; `astype(np.float64)` yields a double
precision copy for finite-difference checks.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .encoding import APPEARANCE_INPUT_DIM, IMPORTANCE_INPUT_DIM
from .fourier import FEATURE_DIM, FourierFeatureMap

KIND_APPEARANCE = 1
KIND_IMPORTANCE = 2

SIGMA_FLOOR = 1e-3


def softplus(x: np.ndarray) -> np.ndarray:
    # overflow-safe: softplus(x) = max(x, 0) + log1p(exp(-|x|))
    return np.maximum(x, 0) + np.log1p(np.exp(-np.abs(x)))


def softplus_grad(x: np.ndarray) -> np.ndarray:
    return 1.0 / (1.0 + np.exp(-x))


@dataclass
class MlpModel:
    fourier: FourierFeatureMap
    weights: list  # [(d_in, d_out) arrays], applied as h @ W + b
    biases: list
    skips: list  # [(src, dst)] 1-indexed layers, additive
    kind: int = KIND_APPEARANCE

    def __post_init__(self):
        dims = self.layer_dims
        for src, dst in self.skips:
            if not (1 <= src < dst <= len(self.weights)):
                raise ValueError(f"skip ({src},{dst}) out of range")
            if dims[src] != dims[dst]:
                raise ValueError(
                    f"skip ({src},{dst}) joins mismatched widths {dims[src]} vs {dims[dst]}"
                )

    @property
    def layer_dims(self) -> list:
        """[input_dim, width_1, ..., width_L]."""
        return [self.weights[0].shape[0]] + [w.shape[1] for w in self.weights]

    @property
    def n_layers(self) -> int:
        return len(self.weights)

    @property
    def dtype(self):
        return self.weights[0].dtype

    @property
    def input_dim(self) -> int:
        return self.fourier.input_dim

    @property
    def output_dim(self) -> int:
        return self.weights[-1].shape[1]

    def parameter_count(self) -> int:
        return int(sum(w.size for w in self.weights) + sum(b.size for b in self.biases))

    def astype(self, dtype) -> "MlpModel":
        return MlpModel(
            fourier=self.fourier.astype(dtype),
            weights=[w.astype(dtype) for w in self.weights],
            biases=[b.astype(dtype) for b in self.biases],
            skips=list(self.skips),
            kind=self.kind,
        )

    def copy(self) -> "MlpModel":
        return MlpModel(
            fourier=FourierFeatureMap(self.fourier.matrix.copy()),
            weights=[w.copy() for w in self.weights],
            biases=[b.copy() for b in self.biases],
            skips=list(self.skips),
            kind=self.kind,
        )

    # ------------------------------------------------------------- forward

    def forward_cached(self, x_encoded: np.ndarray):
        """Forward pass keeping pre- and post-activation caches."""
        h = self.fourier(x_encoded)
        hs = [h]  # post-activation per layer, hs[0] = features
        zs = []
        n = self.n_layers
        for l in range(1, n + 1):
            z = hs[l - 1] @ self.weights[l - 1] + self.biases[l - 1]
            for src, dst in self.skips:
                if dst == l:
                    z = z + hs[src]
            zs.append(z)
            hs.append(np.maximum(z, 0) if l < n else z)
        return hs, zs

    def forward(self, x_encoded: np.ndarray) -> np.ndarray:
        """Batched outputs; the importance head applies softplus + floor."""
        hs, _ = self.forward_cached(np.atleast_2d(x_encoded))
        out = hs[-1]
        if self.kind == KIND_IMPORTANCE:
            out = softplus(out) + SIGMA_FLOOR
        return out

    # ------------------------------------------------------------ backward

    def backward(self, x_encoded: np.ndarray, d_out: np.ndarray):
        """Exact gradients of sum(outputs * d_out-weights) -- i.e. the caller
        supplies dLoss/d(raw head output) and receives per-parameter grads."""
        x_encoded = np.atleast_2d(x_encoded)
        hs, zs = self.forward_cached(x_encoded)
        n = self.n_layers
        grad_w = [None] * n
        grad_b = [None] * n
        # dL/dh for each cached post-activation, accumulated lazily
        dh = [None] * (n + 1)
        dz = np.asarray(d_out, dtype=hs[-1].dtype)
        for l in range(n, 0, -1):
            grad_w[l - 1] = hs[l - 1].T @ dz
            grad_b[l - 1] = dz.sum(axis=0)
            back = dz @ self.weights[l - 1].T
            if dh[l - 1] is None:
                dh[l - 1] = back
            else:
                dh[l - 1] = dh[l - 1] + back
            for src, dst in self.skips:
                if dst == l:
                    if dh[src] is None:
                        dh[src] = dz.copy()
                    else:
                        dh[src] = dh[src] + dz
            if l > 1:
                dz = dh[l - 1] * (zs[l - 2] > 0)
        return grad_w, grad_b

    def head_chain(self, raw_out: np.ndarray) -> np.ndarray:
        """d(head output)/d(raw output) for this model's head."""
        if self.kind == KIND_IMPORTANCE:
            return softplus_grad(raw_out)
        return np.ones_like(raw_out)

    def raw_head(self, x_encoded: np.ndarray) -> np.ndarray:
        hs, _ = self.forward_cached(np.atleast_2d(x_encoded))
        return hs[-1]


def make_appearance_model(seed: int = 0, fourier_mean: float = 18.0,
                          fourier_std: float = 1.0, dtype=np.float32) -> MlpModel:
    widths = [FEATURE_DIM, 128, 128, 128, 128, 3]
    return _init_model(
        widths, [(1, 3), (2, 4)], APPEARANCE_INPUT_DIM, KIND_APPEARANCE,
        seed, fourier_mean, fourier_std, dtype,
    )


def make_importance_model(seed: int = 0, fourier_mean: float = 18.0,
                          fourier_std: float = 1.0, dtype=np.float32) -> MlpModel:
    widths = [FEATURE_DIM, 512, 128, 32, 1]
    return _init_model(
        widths, [], IMPORTANCE_INPUT_DIM, KIND_IMPORTANCE,
        seed, fourier_mean, fourier_std, dtype,
    )


def _init_model(widths, skips, input_dim, kind, seed, f_mean, f_std, dtype) -> MlpModel:
    rng = np.random.default_rng(seed)
    fourier = FourierFeatureMap.create(input_dim, seed=seed ^ 0x5EED, mean=f_mean,
                                       std=f_std, dtype=dtype)
    weights, biases = [], []
    n_layers = len(widths) - 1
    for i, (d_in, d_out) in enumerate(zip(widths[:-1], widths[1:])):
        if i == n_layers - 1:
            # zero head: the net starts as the zero function, which avoids a
            # large random-output transient on small radiance targets
            w = np.zeros((d_in, d_out))
        else:
            # He initialization for the ReLU stack
            w = rng.normal(0.0, np.sqrt(2.0 / d_in), size=(d_in, d_out))
        weights.append(w.astype(dtype))
        biases.append(np.zeros(d_out, dtype=dtype))
    return MlpModel(fourier=fourier, weights=weights, biases=biases, skips=skips, kind=kind)
