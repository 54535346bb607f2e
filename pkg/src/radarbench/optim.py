"""Adam with bias correction and a triangular cyclical learning rate."""

from dataclasses import dataclass

import numpy as np


@dataclass
class TrainConfig:
    batch_size: int = 256
    epochs: int = 300
    lr_min: float = 1e-7
    lr_max: float = 1e-3
    cycle_epochs: int = 8
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    seed: int = 0

    def __post_init__(self):
        if not (0 < self.lr_min < self.lr_max):
            raise ValueError("need 0 < lr_min < lr_max")
        if min(self.batch_size, self.epochs, self.cycle_epochs) < 1:
            raise ValueError("batch_size, epochs and cycle_epochs must be positive")


def cyclical_lr(global_step: int, config: TrainConfig, steps_per_epoch: int = 1) -> float:
    """Triangular wave between lr_min and lr_max.

    Period is cycle_epochs * steps_per_epoch; the wave starts at lr_min,
    peaks at the half period and returns to lr_min.
    """
    if global_step < 0:
        raise ValueError("step must be non-negative")
    period = config.cycle_epochs * steps_per_epoch
    pos = (global_step % period) / period
    tri = 1.0 - abs(2.0 * pos - 1.0)
    return config.lr_min + (config.lr_max - config.lr_min) * tri


class AdamState:
    """First/second moment accumulators for a fixed list of parameters."""

    def __init__(self, params: list):
        self.m = [np.zeros_like(p) for p in params]
        self.v = [np.zeros_like(p) for p in params]
        self.t = 0


def adam_step(
    params: list,
    grads: list,
    state: AdamState,
    lr: float,
    beta1: float = 0.9,
    beta2: float = 0.999,
    eps: float = 1e-8,
):
    """One in-place Adam update over aligned parameter/gradient lists."""
    state.t += 1
    bc1 = 1.0 - beta1**state.t
    bc2 = 1.0 - beta2**state.t
    for p, g, m, v in zip(params, grads, state.m, state.v):
        m *= beta1
        m += (1.0 - beta1) * g
        v *= beta2
        v += (1.0 - beta2) * (g * g)
        p -= lr * (m / bc1) / (np.sqrt(v / bc2) + eps)
    return params, state
