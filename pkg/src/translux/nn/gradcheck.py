"""Central finite-difference gradients for the full parameter set.

Perturbations are batched per layer: a chunk of K single-parameter
perturbations is propagated as one (K, B, width) tensor, so checking
every parameter of the production networks costs a handful of large
matmuls instead of 2 * P scalar forward passes.

FD across a ReLU kink does not estimate a derivative, so perturbations
that flip any activation sign between the +h and -h evaluations are
reported separately (`kink_mask`) and excluded from strict comparison.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .losses import l2_loss
from .mlp import SIGMA_FLOOR, KIND_IMPORTANCE, MlpModel, softplus


@dataclass
class FiniteDiffResult:
    grads_w: list  # per-layer FD gradients, same shapes as model.weights
    grads_b: list
    kink_w: list  # bool masks: FD interval crossed a ReLU kink
    kink_b: list


def _loss_from_raw(model: MlpModel, raw: np.ndarray, y: np.ndarray, axis=None) -> np.ndarray:
    """L2 loss as used in training; softplus head applied for importance nets.

    raw may be (B, D) or (K, B, D); returns scalar or (K,) respectively.
    """
    out = raw
    if model.kind == KIND_IMPORTANCE:
        out = softplus(raw) + SIGMA_FLOOR
    d = (out - y) ** 2
    if raw.ndim == 2:
        return np.sum(d) / raw.shape[0]
    return np.sum(d, axis=(1, 2)) / raw.shape[1]


def analytic_gradients(model: MlpModel, x: np.ndarray, y: np.ndarray):
    raw = model.raw_head(x)
    if model.kind == KIND_IMPORTANCE:
        out = softplus(raw) + SIGMA_FLOOR
        d_raw = (2.0 / raw.shape[0]) * (out - y) * model.head_chain(raw)
    else:
        d_raw = (2.0 / raw.shape[0]) * (raw - y)
    return model.backward(x, d_raw.astype(model.dtype))


def finite_diff_gradients(
    model: MlpModel, x: np.ndarray, y: np.ndarray, h: float = 1e-4, chunk: int = 4096
) -> FiniteDiffResult:
    if model.dtype != np.float64:
        raise ValueError("finite differences require a float64 model (use astype)")
    hs, zs = model.forward_cached(x)
    n = model.n_layers
    masks = [z > 0 for z in zs[:-1]]

    def propagate(layer: int, z_pert: np.ndarray):
        """Propagate perturbed pre-activations of `layer` to (losses, kinks)."""
        kink = np.zeros(z_pert.shape[0], dtype=bool)
        h_pert = {}  # post-activations for layers >= layer, shape (K, B, w)
        cur = z_pert
        for m in range(layer, n + 1):
            if m > layer:
                cur = h_pert[m - 1] @ model.weights[m - 1] + model.biases[m - 1]
                for src, dst in model.skips:
                    if dst == m:
                        cur = cur + (h_pert[src] if src >= layer else hs[src])
            if m < n:
                kink |= np.any((cur > 0) != masks[m - 1], axis=(1, 2))
                h_pert[m] = np.maximum(cur, 0)
            else:
                losses = _loss_from_raw(model, cur, y)
        return losses, kink

    grads_w, grads_b, kinks_w, kinks_b = [], [], [], []
    for l in range(1, n + 1):
        w = model.weights[l - 1]
        b = model.biases[l - 1]
        z_base = zs[l - 1]
        h_in = hs[l - 1]  # (B, d_in)

        fd_w = np.empty(w.size)
        kk_w = np.zeros(w.size, dtype=bool)
        for start in range(0, w.size, chunk):
            idx = np.arange(start, min(start + chunk, w.size))
            rows, cols = np.unravel_index(idx, w.shape)
            zp = np.repeat(z_base[None], idx.size, axis=0)
            zm = zp.copy()
            bump = h * h_in[:, rows].T  # (K, B)
            k_ar = np.arange(idx.size)
            zp[k_ar, :, cols[k_ar]] += bump
            zm[k_ar, :, cols[k_ar]] -= bump
            lp, kp = propagate(l, zp)
            lm, km = propagate(l, zm)
            fd_w[idx] = (lp - lm) / (2.0 * h)
            kk_w[idx] = kp | km
        grads_w.append(fd_w.reshape(w.shape))
        kinks_w.append(kk_w.reshape(w.shape))

        fd_b = np.empty(b.size)
        kk_b = np.zeros(b.size, dtype=bool)
        for start in range(0, b.size, chunk):
            idx = np.arange(start, min(start + chunk, b.size))
            zp = np.repeat(z_base[None], idx.size, axis=0)
            zm = zp.copy()
            k_ar = np.arange(idx.size)
            zp[k_ar, :, idx] += h
            zm[k_ar, :, idx] -= h
            lp, kp = propagate(l, zp)
            lm, km = propagate(l, zm)
            fd_b[idx] = (lp - lm) / (2.0 * h)
            kk_b[idx] = kp | km
        grads_b.append(fd_b)
        kinks_b.append(kk_b)
    return FiniteDiffResult(grads_w, grads_b, kinks_w, kinks_b)


def max_relative_error(
    analytic: list, fd: list, kinks: list, floor_frac: float = 1e-3
) -> tuple[float, float]:
    """(max relative error outside kinks, kink fraction).

    The denominator is floored at floor_frac times the largest gradient
    magnitude so that noise on near-zero components is not amplified.
    """
    scale = max(float(np.max(np.abs(f))) for f in fd)
    worst = 0.0
    n_kink = 0
    n_all = 0
    for a, f, k in zip(analytic, fd, kinks):
        denom = np.maximum(np.maximum(np.abs(a), np.abs(f)), floor_frac * scale)
        rel = np.abs(np.asarray(a, dtype=np.float64) - f) / denom
        ok = ~k
        if np.any(ok):
            worst = max(worst, float(rel[ok].max()))
        n_kink += int(k.sum())
        n_all += k.size
    return worst, n_kink / n_all
