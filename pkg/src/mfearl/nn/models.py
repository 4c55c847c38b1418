"""The two networks used by the residual crossover: a VDSR-style residual
generator and a small ResNet-style skill-factor classifier."""

from __future__ import annotations

import numpy as np

from ..exceptions import DimensionMismatchError, NumericError
from .ops import (
    broadcast_rows,
    conv2d_backward,
    conv2d_forward,
    cross_entropy_loss,
    mse_loss,
    relu,
    residual_compose,
)


def _he_kernel(rng, cin, cout, gain=2.0):
    return rng.standard_normal((3, 3, cin, cout)) * np.sqrt(gain / (9 * cin))


class Network:
    """Parameter container shared by both models; ``params`` maps name -> array."""

    params: dict

    def copy_params(self) -> dict:
        return {k: v.copy() for k, v in self.params.items()}

    def set_params(self, params: dict):
        for k, v in params.items():
            if self.params[k].shape != v.shape:
                raise DimensionMismatchError(f"parameter {k}: shape {v.shape} != {self.params[k].shape}")
            self.params[k] = np.array(v, dtype=float)

    @property
    def n_parameters(self) -> int:
        return sum(v.size for v in self.params.values())

    def check_finite(self):
        for k, v in self.params.items():
            if not np.all(np.isfinite(v)):
                raise NumericError(f"non-finite values in parameter {k}")


class ResidualNet(Network):
    """Stack of same-padded 3x3 convolutions producing a D x D residual.

    The first layer maps 1 -> ``hidden_channels``, the middle layers keep the
    width and the last maps back to one channel; ReLU follows every layer but
    the last. ``depth=1`` is a single linear 1 -> 1 convolution.
    """

    kind = "residual"

    def __init__(self, dim: int, depth: int = 8, hidden_channels: int = 64, seed=None, zero_head: bool = False):
        if depth < 1:
            raise ValueError("depth must be at least 1")
        self.dim = int(dim)
        self.depth = int(depth)
        self.hidden_channels = int(hidden_channels)
        rng = np.random.default_rng(seed)
        widths = [1] + [self.hidden_channels] * (self.depth - 1) + [1]
        self.params = {}
        for layer, (cin, cout) in enumerate(zip(widths[:-1], widths[1:])):
            head = layer == self.depth - 1
            self.params[f"conv{layer}.weight"] = _he_kernel(rng, cin, cout, gain=1.0 if head else 2.0)
            self.params[f"conv{layer}.bias"] = np.zeros(cout)
        if zero_head:
            self.zero_head()

    def config(self) -> dict:
        return {"kind": self.kind, "dim": self.dim, "depth": self.depth, "hidden_channels": self.hidden_channels}

    def zero_head(self):
        last = self.depth - 1
        self.params[f"conv{last}.weight"][...] = 0.0
        self.params[f"conv{last}.bias"][...] = 0.0

    def _check_input(self, x):
        x = np.asarray(x, dtype=float)
        if x.ndim == 1:
            x = x[None]
        if x.shape[-1] != self.dim:
            raise DimensionMismatchError(f"network expects vectors of length {self.dim}, got {x.shape[-1]}")
        return x

    def forward(self, x, keep_cache: bool = False):
        """Residuals ``(B, D, D)`` for a batch of genomes ``(B, D)``."""
        x = self._check_input(x)
        h = broadcast_rows(x)[..., None]
        cache = []
        for layer in range(self.depth):
            w, b = self.params[f"conv{layer}.weight"], self.params[f"conv{layer}.bias"]
            z = conv2d_forward(h, w, b)
            if keep_cache:
                cache.append(h)
            h = relu(z) if layer < self.depth - 1 else z
        out = h[..., 0]
        if not np.all(np.isfinite(out)):
            raise NumericError("non-finite residual; parameters contain NaN or overflowed")
        return (out, cache) if keep_cache else out

    def backward(self, d_out: np.ndarray, cache) -> dict:
        grads = {}
        g = d_out[..., None]
        for layer in reversed(range(self.depth)):
            h_in = cache[layer]
            w = self.params[f"conv{layer}.weight"]
            dx, dw, db = conv2d_backward(g, h_in, w, need_dx=layer > 0)
            grads[f"conv{layer}.weight"], grads[f"conv{layer}.bias"] = dw, db
            if layer > 0:
                # h_in is the ReLU output of the previous layer.
                g = dx * (h_in > 0)
        return grads

    def compose(self, x) -> np.ndarray:
        """``broadcast(x) + F(x)``, the composed D x D representation."""
        x = self._check_input(x)
        return residual_compose(x, self.forward(x))

    def loss_and_grads(self, x, target):
        """Summed-squared-error loss of ``broadcast(x) + R`` against ``target``."""
        x = self._check_input(x)
        r, cache = self.forward(x, keep_cache=True)
        loss, d_pred = mse_loss(residual_compose(x, r), np.asarray(target, dtype=float))
        return loss, self.backward(d_pred, cache)

    def loss(self, x, target) -> float:
        x = self._check_input(x)
        return mse_loss(residual_compose(x, self.forward(x)), np.asarray(target, dtype=float))[0]


class SkillClassifier(Network):
    """Stem convolution, ``n_blocks`` identity-skip residual blocks, global
    average pooling and a linear layer giving one logit per task."""

    kind = "classifier"

    def __init__(self, dim: int, n_tasks: int, n_blocks: int = 3, channels: int = 16, seed=None):
        if n_tasks < 2:
            raise ValueError("classifier needs at least two tasks")
        self.dim = int(dim)
        self.n_tasks = int(n_tasks)
        self.n_blocks = int(n_blocks)
        self.channels = int(channels)
        rng = np.random.default_rng(seed)
        c = self.channels
        self.params = {"stem.weight": _he_kernel(rng, 1, c), "stem.bias": np.zeros(c)}
        for k in range(self.n_blocks):
            self.params[f"block{k}.conv1.weight"] = _he_kernel(rng, c, c)
            self.params[f"block{k}.conv1.bias"] = np.zeros(c)
            # Down-scaled second conv keeps the residual branch small at init.
            self.params[f"block{k}.conv2.weight"] = _he_kernel(rng, c, c) * 0.5
            self.params[f"block{k}.conv2.bias"] = np.zeros(c)
        self.params["fc.weight"] = rng.standard_normal((c, self.n_tasks)) * np.sqrt(1.0 / c)
        self.params["fc.bias"] = np.zeros(self.n_tasks)

    def config(self) -> dict:
        return {
            "kind": self.kind,
            "dim": self.dim,
            "n_tasks": self.n_tasks,
            "n_blocks": self.n_blocks,
            "channels": self.channels,
        }

    def _check_input(self, images):
        images = np.asarray(images, dtype=float)
        if images.ndim == 2:
            images = images[None]
        if images.shape[-2:] != (self.dim, self.dim):
            raise DimensionMismatchError(f"classifier expects {self.dim}x{self.dim} inputs, got {images.shape}")
        return images

    def forward(self, images, keep_cache: bool = False):
        """Logits ``(B, T)`` for a batch of ``(B, D, D)`` images."""
        x = self._check_input(images)[..., None]
        p = self.params
        cache = {"x": x}
        h = relu(conv2d_forward(x, p["stem.weight"], p["stem.bias"]))
        cache["stem"] = h
        for k in range(self.n_blocks):
            a = relu(conv2d_forward(h, p[f"block{k}.conv1.weight"], p[f"block{k}.conv1.bias"]))
            z = conv2d_forward(a, p[f"block{k}.conv2.weight"], p[f"block{k}.conv2.bias"]) + h
            cache[f"block{k}"] = (h, a, z)
            h = relu(z)
        pooled = h.mean(axis=(1, 2))
        cache["pooled"], cache["last"] = pooled, h
        logits = pooled @ p["fc.weight"] + p["fc.bias"]
        if not np.all(np.isfinite(logits)):
            raise NumericError("non-finite logits")
        return (logits, cache) if keep_cache else logits

    def backward(self, d_logits: np.ndarray, cache) -> dict:
        p = self.params
        grads = {"fc.weight": cache["pooled"].T @ d_logits, "fc.bias": d_logits.sum(axis=0)}
        last = cache["last"]
        hw = last.shape[1] * last.shape[2]
        g = np.broadcast_to((d_logits @ p["fc.weight"].T)[:, None, None, :] / hw, last.shape).copy()
        for k in reversed(range(self.n_blocks)):
            h, a, z = cache[f"block{k}"]
            dz = g * (z > 0)
            da, dw2, db2 = conv2d_backward(dz, a, p[f"block{k}.conv2.weight"])
            da *= a > 0
            dh, dw1, db1 = conv2d_backward(da, h, p[f"block{k}.conv1.weight"])
            grads[f"block{k}.conv2.weight"], grads[f"block{k}.conv2.bias"] = dw2, db2
            grads[f"block{k}.conv1.weight"], grads[f"block{k}.conv1.bias"] = dw1, db1
            g = dh + dz
        g = g * (cache["stem"] > 0)
        _, dw, db = conv2d_backward(g, cache["x"], p["stem.weight"], need_dx=False)
        grads["stem.weight"], grads["stem.bias"] = dw, db
        return grads

    def loss_and_grads(self, images, labels):
        logits, cache = self.forward(images, keep_cache=True)
        loss, d_logits = cross_entropy_loss(logits, labels)
        return loss, self.backward(d_logits, cache)

    def loss(self, images, labels) -> float:
        return cross_entropy_loss(self.forward(images), labels)[0]

    def predict(self, images) -> np.ndarray:
        """Argmax task per image; ``np.argmax`` resolves ties to the lower id."""
        return np.argmax(self.forward(images), axis=1)


def vdsr_forward(net: ResidualNet, x) -> np.ndarray:
    """Residual for one genome ``(D,) -> (D, D)``, or a batch ``(B, D) -> (B, D, D)``."""
    x = np.asarray(x, dtype=float)
    r = net.forward(x)
    return r[0] if x.ndim == 1 else r
