from .adam import AdamState, TrainConfig, adam_step
from .encoding import (
    APPEARANCE_INPUT_DIM,
    IMPORTANCE_INPUT_DIM,
    encode_input,
)
from .fourier import FEATURE_DIM, FourierFeatureMap
from .gradcheck import analytic_gradients, finite_diff_gradients, max_relative_error
from .losses import kld, l2_loss, l2_loss_grad
from .mlp import (
    KIND_APPEARANCE,
    KIND_IMPORTANCE,
    SIGMA_FLOOR,
    MlpModel,
    make_appearance_model,
    make_importance_model,
)
from .train import EpochStats, TrainingError, encode_dataset, evaluate_l2, train_appearance
from .weights_io import WeightsError, expected_file_size, load_weights, save_weights

__all__ = [
    "APPEARANCE_INPUT_DIM",
    "AdamState",
    "EpochStats",
    "FEATURE_DIM",
    "FourierFeatureMap",
    "IMPORTANCE_INPUT_DIM",
    "KIND_APPEARANCE",
    "KIND_IMPORTANCE",
    "MlpModel",
    "SIGMA_FLOOR",
    "TrainConfig",
    "TrainingError",
    "WeightsError",
    "adam_step",
    "analytic_gradients",
    "encode_dataset",
    "encode_input",
    "evaluate_l2",
    "expected_file_size",
    "finite_diff_gradients",
    "kld",
    "l2_loss",
    "l2_loss_grad",
    "load_weights",
    "make_appearance_model",
    "make_importance_model",
    "max_relative_error",
    "save_weights",
    "train_appearance",
]
