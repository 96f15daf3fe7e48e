"""Adam optimizer with bias correction and cosine learning-rate decay."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .mlp import MlpModel


@dataclass
class TrainConfig:
    learning_rate: float = 1e-3
    lr_min: float = 1e-4  # cosine decay floor
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    weight_decay: float = 0.0  # decoupled, applied to weights only
    warmup_frac: float = 0.03  # fraction of steps spent ramping the lr up
    batch_size: int = 4096
    epochs: int = 30
    seed: int = 0
    loss: str = "l2"

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be > 0")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.loss not in ("l2", "kld"):
            raise ValueError(f"unknown loss kind {self.loss!r}")

    def lr_at(self, t: int, t_total: int) -> float:
        """Linear warmup then cosine decay from learning_rate to lr_min."""
        warm = max(1, int(self.warmup_frac * t_total))
        if t <= warm:
            return self.learning_rate * t / warm
        if t_total <= warm + 1:
            return self.learning_rate
        frac = min(max((t - warm) / (t_total - warm), 0.0), 1.0)
        return self.lr_min + 0.5 * (self.learning_rate - self.lr_min) * (
            1.0 + np.cos(np.pi * frac)
        )


@dataclass
class AdamState:
    m_w: list = field(default_factory=list)
    v_w: list = field(default_factory=list)
    m_b: list = field(default_factory=list)
    v_b: list = field(default_factory=list)

    @classmethod
    def for_model(cls, model: MlpModel) -> "AdamState":
        return cls(
            m_w=[np.zeros_like(w, dtype=np.float64) for w in model.weights],
            v_w=[np.zeros_like(w, dtype=np.float64) for w in model.weights],
            m_b=[np.zeros_like(b, dtype=np.float64) for b in model.biases],
            v_b=[np.zeros_like(b, dtype=np.float64) for b in model.biases],
        )


def adam_step(
    model: MlpModel,
    grads_w: list,
    grads_b: list,
    state: AdamState,
    t: int,
    cfg: TrainConfig,
    lr: float | None = None,
) -> MlpModel:
    """One in-place Adam update at step index t (1-based)."""
    if t < 1:
        raise ValueError("step index t must be >= 1")
    lr = cfg.learning_rate if lr is None else lr
    b1, b2, eps = cfg.beta1, cfg.beta2, cfg.eps
    c1 = 1.0 - b1**t
    c2 = 1.0 - b2**t
    for i in range(model.n_layers):
        for grad, m, v, param, decay in (
            (grads_w[i], state.m_w[i], state.v_w[i], model.weights[i], cfg.weight_decay),
            (grads_b[i], state.m_b[i], state.v_b[i], model.biases[i], 0.0),
        ):
            g = np.asarray(grad, dtype=np.float64)
            m *= b1
            m += (1.0 - b1) * g
            v *= b2
            v += (1.0 - b2) * g * g
            update = lr * (m / c1) / (np.sqrt(v / c2) + eps)
            if decay > 0.0:
                update = update + (lr * decay) * param
            param -= update.astype(param.dtype)
    return model
