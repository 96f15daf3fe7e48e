"""Appearance network training on NBSD datasets."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..render.dataset import SPLIT_TRAIN, SPLIT_VAL, Dataset
from .adam import AdamState, TrainConfig, adam_step
from .encoding import encode_input
from .losses import l2_loss, l2_loss_grad
from .mlp import MlpModel


class TrainingError(RuntimeError):
    pass


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_loss: float
    learning_rate: float


def encode_dataset(dataset: Dataset, bounds) -> tuple[np.ndarray, np.ndarray]:
    """(encoded inputs, targets) for every record."""
    x = encode_input(dataset.positions, dataset.omega_o, dataset.omega_i, bounds)
    return x.astype(np.float32), dataset.radiance.astype(np.float32)


def train_appearance(
    dataset: Dataset,
    model: MlpModel,
    cfg: TrainConfig,
    bounds,
    log=None,
) -> tuple[MlpModel, list[EpochStats]]:
    """Minimize L2 between predictions and recorded radiance.

    Uses the dataset's deterministic train/validation splits, fixes the
    shuffle seed from cfg.seed, and returns the checkpoint with the best
    validation loss along with the per-epoch loss curve.
    """
    if dataset.records.shape[0] == 0:
        raise TrainingError("empty dataset")
    labels = dataset.split_labels()
    x_all, y_all = encode_dataset(dataset, bounds)
    x_train = x_all[labels == SPLIT_TRAIN]
    y_train = y_all[labels == SPLIT_TRAIN]
    x_val = x_all[labels == SPLIT_VAL]
    y_val = y_all[labels == SPLIT_VAL]
    if x_train.shape[0] == 0:
        raise TrainingError("no training records after the split")
    if x_val.shape[0] == 0:  # tiny datasets: validate on train
        x_val, y_val = x_train, y_train

    n = x_train.shape[0]
    steps_per_epoch = max(1, n // cfg.batch_size)
    t_total = steps_per_epoch * cfg.epochs
    state = AdamState.for_model(model)
    shuffle_rng = np.random.default_rng(cfg.seed)

    best_val = np.inf
    best_params = None
    history: list[EpochStats] = []
    t = 0
    for epoch in range(1, cfg.epochs + 1):
        order = shuffle_rng.permutation(n)
        train_loss_acc = 0.0
        for step in range(steps_per_epoch):
            idx = order[step * cfg.batch_size : (step + 1) * cfg.batch_size]
            xb, yb = x_train[idx], y_train[idx]
            raw = model.raw_head(xb)
            loss, d_raw = l2_loss_grad(raw, yb)
            if not np.isfinite(loss):
                raise TrainingError(
                    f"non-finite loss {loss} at epoch {epoch} step {step + 1}"
                )
            gw, gb = model.backward(xb, d_raw.astype(model.dtype))
            t += 1
            adam_step(model, gw, gb, state, t, cfg, lr=cfg.lr_at(t, t_total))
            train_loss_acc += loss
        val_loss = evaluate_l2(model, x_val, y_val, cfg.batch_size)
        stats = EpochStats(
            epoch=epoch,
            train_loss=train_loss_acc / steps_per_epoch,
            val_loss=val_loss,
            learning_rate=cfg.lr_at(t, t_total),
        )
        history.append(stats)
        if log is not None:
            log(stats)
        if val_loss < best_val:
            best_val = val_loss
            best_params = (
                [w.copy() for w in model.weights],
                [b.copy() for b in model.biases],
            )
    if best_params is not None:
        model.weights = best_params[0]
        model.biases = best_params[1]
    return model, history


def evaluate_l2(model: MlpModel, x: np.ndarray, y: np.ndarray, batch: int = 8192) -> float:
    total = 0.0
    n = x.shape[0]
    for i in range(0, n, batch):
        raw = model.raw_head(x[i : i + batch])
        total += l2_loss(raw, y[i : i + batch]) * raw.shape[0]
    return total / n
