from .losses import (
    LAMBDA_EPS,
    ArrayBatch,
    LossBreakdown,
    NonFiniteLossError,
    compute_losses,
    compute_losses_and_grads,
)
from .model import ApprenticeNet, NetConfig, NetworkOutput
from .optim import Adam, clip_gradient_norm, gradient_norm

__all__ = [
    "Adam",
    "ApprenticeNet",
    "ArrayBatch",
    "LAMBDA_EPS",
    "LossBreakdown",
    "NetConfig",
    "NetworkOutput",
    "NonFiniteLossError",
    "clip_gradient_norm",
    "compute_losses",
    "compute_losses_and_grads",
    "gradient_norm",
]
