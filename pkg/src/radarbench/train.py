"""Training loop: seeded shuffling, cyclical-LR Adam, best-val checkpoint."""

import math
from dataclasses import dataclass

import numpy as np

from . import rng as rngmod
from .lstm import Model, model_backward, model_forward_batch
from .optim import AdamState, TrainConfig, adam_step, cyclical_lr
from .signal import autocorrelation


@dataclass
class EpochStats:
    epoch: int
    train_loss: float
    val_accuracy: float
    lr: float


def signals_to_features(signals: np.ndarray, input_domain: str = "time") -> np.ndarray:
    """Complex (N, T) signals to float32 (N, T, 2) model features.

    The autocorrelation domain applies the unit-power aperiodic
    autocorrelation before splitting into I/Q channels.
    """
    signals = np.asarray(signals)
    if input_domain == "autocorrelation":
        signals = autocorrelation(signals.astype(np.complex128))
    elif input_domain != "time":
        raise ValueError(f"unknown input domain {input_domain!r}")
    return np.stack([signals.real, signals.imag], axis=-1).astype(np.float32)


def predict_classes(model: Model, signals: np.ndarray, batch_size: int = 256) -> np.ndarray:
    """Argmax class per complex signal, evaluated in batches.

    Ties resolve to the lowest class index (argmax convention).
    """
    preds = np.empty(len(signals), dtype=np.int64)
    for start in range(0, len(signals), batch_size):
        chunk = signals[start : start + batch_size]
        probs = model_forward_batch(model, signals_to_features(chunk, model.input_domain))
        preds[start : start + len(chunk)] = probs.argmax(axis=1)
    return preds


def split_accuracy(model: Model, split, batch_size: int = 256) -> float:
    preds = predict_classes(model, split.signals, batch_size)
    return float(np.mean(preds == split.class_index))


def train(
    model: Model,
    train_split,
    val_split,
    config: TrainConfig,
    batch_callback=None,
) -> tuple:
    """Train in place; returns (best_val_model, history).

    Mini-batches are drawn from a seeded per-epoch shuffle; the history
    has exactly config.epochs entries, each with the epoch's mean batch
    loss, validation accuracy and final learning rate. The returned model
    is a copy taken at the best validation accuracy (earliest on ties).
    """
    if len(train_split) == 0 or len(val_split) == 0:
        raise ValueError("train and validation splits must be non-empty")
    n = len(train_split)
    steps_per_epoch = math.ceil(n / config.batch_size)
    params = model.parameters()
    state = AdamState(params)
    history = []
    best_acc = -1.0
    best_model = model.copy()
    step = 0
    labels_all = train_split.class_index.astype(np.int64)

    for epoch in range(config.epochs):
        order = rngmod.stream(config.seed, rngmod.DOMAIN_SHUFFLE, epoch).permutation(n)
        loss_sum = 0.0
        lr = config.lr_min
        for start in range(0, n, config.batch_size):
            idx = order[start : start + config.batch_size]
            feats = signals_to_features(train_split.signals[idx], model.input_domain)
            lr = cyclical_lr(step, config, steps_per_epoch)
            loss, grads = model_backward(model, feats, labels_all[idx])
            adam_step(
                params, grads, state, lr,
                config.adam_beta1, config.adam_beta2, config.adam_eps,
            )
            loss_sum += loss * len(idx)
            step += 1
            if batch_callback is not None:
                batch_callback(epoch, step, loss, lr)
        val_acc = split_accuracy(model, val_split, config.batch_size)
        history.append(EpochStats(epoch, loss_sum / n, val_acc, lr))
        if val_acc > best_acc:
            best_acc = val_acc
            best_model = model.copy()
    return best_model, history


def history_csv(history) -> str:
    lines = ["epoch,train_loss,val_accuracy,lr"]
    for h in history:
        lines.append(f"{h.epoch},{h.train_loss:.8f},{h.val_accuracy:.6f},{h.lr:.10g}")
    return "\n".join(lines) + "\n"
