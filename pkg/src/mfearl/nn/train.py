"""Training loops: residual regression (MSE) and skill classification
(cross-entropy with validation-based early stopping)."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import DegenerateLabelsError, DimensionMismatchError, EmptyInputError
from .models import ResidualNet, SkillClassifier
from .optim import AdamState, TrainOptions, adam_step


@dataclass
class VdsrTrainResult:
    net: ResidualNet
    losses: list = field(default_factory=list)


@dataclass
class ClassifierTrainResult:
    net: SkillClassifier
    val_accuracy: list = field(default_factory=list)
    train_loss: list = field(default_factory=list)
    best_epoch: int = 0
    epochs_run: int = 0

    @property
    def best_accuracy(self) -> float:
        return self.val_accuracy[self.best_epoch - 1] if self.val_accuracy else float("nan")


def _batches(n: int, batch_size: int, rng: np.random.Generator):
    order = rng.permutation(n)
    for start in range(0, n, batch_size):
        yield order[start : start + batch_size]


def train_vdsr(net: ResidualNet, inputs, targets, opts: TrainOptions | None = None, rng=None) -> VdsrTrainResult:
    """Fit ``broadcast(x) + R(x)`` to the target matrices.

    Returns the sample-weighted mean training loss of every epoch.
    """
    opts = opts or TrainOptions.vdsr()
    rng = np.random.default_rng(rng)
    inputs = np.asarray(inputs, dtype=float)
    targets = np.asarray(targets, dtype=float)
    if inputs.ndim == 1:
        inputs = inputs[None]
    n = inputs.shape[0]
    if n == 0:
        raise EmptyInputError("empty training set")
    d = inputs.shape[1]
    if targets.shape != (n, d, d):
        raise DimensionMismatchError(f"targets must have shape {(n, d, d)}, got {targets.shape}")
    state = AdamState.zeros_like(net.params)
    losses = []
    for _ in range(opts.epochs):
        total = 0.0
        for idx in _batches(n, opts.batch_size, rng):
            loss, grads = net.loss_and_grads(inputs[idx], targets[idx])
            adam_step(net.params, grads, state, opts)
            total += loss * idx.size
        losses.append(total / n)
    return VdsrTrainResult(net, losses)


def stratified_split(labels: np.ndarray, val_fraction: float, rng: np.random.Generator):
    """Per-class shuffled split; every class with >= 2 members keeps at least
    one sample on each side."""
    labels = np.asarray(labels, dtype=int)
    train, val = [], []
    for c in np.unique(labels):
        idx = rng.permutation(np.flatnonzero(labels == c))
        n_val = int(round(val_fraction * idx.size))
        if val_fraction > 0 and idx.size >= 2:
            n_val = min(max(n_val, 1), idx.size - 1)
        val.extend(idx[:n_val])
        train.extend(idx[n_val:])
    return np.sort(np.array(train, dtype=int)), np.sort(np.array(val, dtype=int))


def accuracy(net: SkillClassifier, images, labels, chunk: int = 256) -> float:
    labels = np.asarray(labels, dtype=int)
    if labels.size == 0:
        return float("nan")
    hits = 0
    for s in range(0, labels.size, chunk):
        hits += int(np.sum(net.predict(images[s : s + chunk]) == labels[s : s + chunk]))
    return hits / labels.size


def train_classifier(net: SkillClassifier, images, labels, opts: TrainOptions | None = None, rng=None) -> ClassifierTrainResult:
    """Cross-entropy training with early stopping on validation accuracy.

    Training stops once validation accuracy has failed to exceed its running
    maximum for ``opts.patience`` consecutive epochs; the parameters of the
    best epoch are restored before returning.
    """
    opts = opts or TrainOptions.resnet()
    rng = np.random.default_rng(rng)
    images = np.asarray(images, dtype=float)
    labels = np.asarray(labels, dtype=int)
    if images.shape[0] != labels.size:
        raise DimensionMismatchError("images and labels differ in length")
    if labels.size == 0:
        raise EmptyInputError("empty training set")
    tr, va = stratified_split(labels, opts.val_fraction, rng)
    if np.unique(labels[tr]).size < 2:
        raise DegenerateLabelsError("training split contains a single class")
    if va.size == 0:
        va = tr
    x_tr, y_tr, x_va, y_va = images[tr], labels[tr], images[va], labels[va]

    state = AdamState.zeros_like(net.params)
    result = ClassifierTrainResult(net)
    best_acc, best_params, stale = -np.inf, net.copy_params(), 0
    for epoch in range(1, opts.epochs + 1):
        total = 0.0
        for idx in _batches(y_tr.size, opts.batch_size, rng):
            loss, grads = net.loss_and_grads(x_tr[idx], y_tr[idx])
            adam_step(net.params, grads, state, opts)
            total += loss * idx.size
        result.train_loss.append(total / y_tr.size)
        acc = accuracy(net, x_va, y_va)
        result.val_accuracy.append(acc)
        result.epochs_run = epoch
        if acc > best_acc:
            best_acc, best_params, stale = acc, net.copy_params(), 0
            result.best_epoch = epoch
        else:
            stale += 1
            if stale >= opts.patience:
                break
    net.set_params(best_params)
    return result
