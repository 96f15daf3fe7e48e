"""Training losses.

L2: mean over the batch of the summed squared error across output
channels (so the output-bias gradient is 2(pred - target)/batch).

KLD: discrete Kullback-Leibler divergence between two histograms,
sum p * log(p / q), used to fit the sampling lobe width.
"""

from __future__ import annotations

import numpy as np


def l2_loss(pred: np.ndarray, target: np.ndarray) -> float:
    pred = np.asarray(pred, dtype=np.float64)
    target = np.asarray(target, dtype=np.float64)
    return float(np.sum((pred - target) ** 2) / pred.shape[0])


def l2_loss_grad(pred: np.ndarray, target: np.ndarray):
    """(loss, dloss/dpred)."""
    diff = pred.astype(np.float64) - target.astype(np.float64)
    loss = float(np.sum(diff**2) / pred.shape[0])
    return loss, (2.0 / pred.shape[0]) * diff


def kld(p: np.ndarray, q: np.ndarray, eps: float = 1e-12) -> float:
    """KL divergence of histogram p from q; zero-mass p bins contribute 0."""
    p = np.asarray(p, dtype=np.float64)
    q = np.asarray(q, dtype=np.float64)
    mask = p > 0
    return float(np.sum(p[mask] * np.log(p[mask] / np.maximum(q[mask], eps))))
