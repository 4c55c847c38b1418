from .gradcheck import gradient_check
from .io import load_network, save_network
from .models import ResidualNet, SkillClassifier, vdsr_forward
from .ops import broadcast_rows, conv2d_backward, conv2d_forward, cross_entropy_loss, mse_loss, residual_compose
from .optim import AdamState, TrainOptions, adam_step
from .train import train_classifier, train_vdsr

__all__ = [
    "AdamState",
    "ResidualNet",
    "SkillClassifier",
    "TrainOptions",
    "adam_step",
    "broadcast_rows",
    "conv2d_backward",
    "conv2d_forward",
    "cross_entropy_loss",
    "gradient_check",
    "load_network",
    "mse_loss",
    "residual_compose",
    "save_network",
    "train_classifier",
    "train_vdsr",
    "vdsr_forward",
]
