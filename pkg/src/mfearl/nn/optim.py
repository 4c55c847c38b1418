from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ..exceptions import DimensionMismatchError


@dataclass
class TrainOptions:
    """Mini-batch Adam settings shared by both training loops.

    ``max_time_steps`` is carried for configuration parity and is not read by
    either loop.
    """

    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    batch_size: int = 20
    epochs: int = 5
    patience: int = 5
    val_fraction: float = 0.2
    max_time_steps: int = 1000

    def __post_init__(self):
        if not (0.0 < self.beta1 < 1.0 and 0.0 < self.beta2 < 1.0):
            raise ValueError("Adam betas must lie in (0, 1)")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.patience < 1:
            raise ValueError("patience must be >= 1")
        if not 0.0 <= self.val_fraction < 1.0:
            raise ValueError("val_fraction must lie in [0, 1)")

    @classmethod
    def vdsr(cls, **overrides) -> "TrainOptions":
        return cls(**{"learning_rate": 1e-3, "beta2": 0.999, "batch_size": 20, "epochs": 5, **overrides})

    @classmethod
    def resnet(cls, **overrides) -> "TrainOptions":
        return cls(**{"learning_rate": 1e-3, "beta2": 0.9999, "batch_size": 32, "epochs": 50, **overrides})


@dataclass
class AdamState:
    m: dict
    v: dict
    t: int = 0

    @classmethod
    def zeros_like(cls, params: dict) -> "AdamState":
        return cls({k: np.zeros_like(p) for k, p in params.items()}, {k: np.zeros_like(p) for k, p in params.items()})


def adam_step(params: dict, grads: dict, state: AdamState, opts: TrainOptions):
    """One bias-corrected Adam update, applied to ``params`` in place."""
    state.t += 1
    b1, b2 = opts.beta1, opts.beta2
    c1 = 1.0 - b1**state.t
    c2 = 1.0 - b2**state.t
    for k, g in grads.items():
        p = params[k]
        if g.shape != p.shape:
            raise DimensionMismatchError(f"gradient for {k} has shape {g.shape}, parameter has {p.shape}")
        m = state.m[k]
        v = state.v[k]
        m *= b1
        m += (1.0 - b1) * g
        v *= b2
        v += (1.0 - b2) * g * g
        p -= opts.learning_rate * (m / c1) / (np.sqrt(v / c2) + opts.eps)
    return params, state
