"""Dense array primitives with hand-written gradients.

Images are channels-last: ``(batch, height, width, channels)``. Kernels are
``(3, 3, in_channels, out_channels)``. Everything runs in float64.
"""

from __future__ import annotations

import numpy as np
from scipy.linalg.blas import dgemm

from ..exceptions import DimensionMismatchError

# Images per block; keeps the working buffers cache-resident.
CHUNK = 4


class _PaddedBlock:
    """A chunk of images zero-padded and flattened to ``(rows, C)``.

    Pixel ``(r, s)`` of image ``m`` sits at row ``m*(H+2)*(W+2) + r*(W+2) + s``
    of the padded grid, so the 3x3 tap ``(i, j)`` of every output pixel is the
    contiguous slice starting at ``i*(W+2) + j``.
    """

    def __init__(self, chunk: int, h: int, w: int, c: int):
        self.hp, self.wp = h + 2, w + 2
        self.n = chunk * self.hp * self.wp
        self.buf = np.zeros((self.n + 2 * self.wp + 2, c))

    def load(self, x: np.ndarray) -> int:
        m = x.shape[0]
        self.buf[: self.n].reshape(-1, self.hp, self.wp, self.buf.shape[1])[:m, 1:-1, 1:-1, :] = x
        return m * self.hp * self.wp

    def taps(self, rows: int):
        """``((i, j), slice)`` for the nine taps over the first ``rows`` grid rows."""
        return [((i, j), self.buf[i * self.wp + j : i * self.wp + j + rows]) for i in range(3) for j in range(3)]


def _check_conv_args(x, kernel):
    if x.ndim != 4:
        raise DimensionMismatchError(f"expected a (B, H, W, C) array, got shape {x.shape}")
    if kernel.ndim != 4 or kernel.shape[:2] != (3, 3):
        raise DimensionMismatchError(f"expected a (3, 3, Cin, Cout) kernel, got shape {kernel.shape}")
    if kernel.shape[2] != x.shape[3]:
        raise DimensionMismatchError(f"kernel expects {kernel.shape[2]} input channels, input has {x.shape[3]}")


def conv2d_forward(x: np.ndarray, kernel: np.ndarray, bias: np.ndarray | float = 0.0) -> np.ndarray:
    """Same-padded 3x3 cross-correlation (zero padding, stride 1).

    ``x`` may be a single image ``(H, W, C)`` or a batch ``(B, H, W, C)``.
    Output pixels are computed on the padded grid (the border results are
    discarded), which turns each tap into one contiguous matrix product.
    """
    single = x.ndim == 3
    if single:
        x = x[None]
    _check_conv_args(x, kernel)
    b, h, w, cin = x.shape
    cout = kernel.shape[3]
    kernel = np.ascontiguousarray(kernel, dtype=np.float64)
    out = np.empty((b, h, w, cout))
    block = _PaddedBlock(min(b, CHUNK), h, w, cin)
    acc = np.empty((block.n, cout))
    for s in range(0, b, CHUNK):
        rows = block.load(x[s : s + CHUNK])
        a = acc[:rows]
        a[...] = bias
        for (i, j), src in block.taps(rows):
            # a += src @ k, accumulated in place: a.T is Fortran-ordered, so BLAS writes straight into it.
            dgemm(1.0, kernel[i, j].T, src.T, 1.0, a.T, overwrite_c=1)
        out[s : s + CHUNK] = a.reshape(-1, block.hp, block.wp, cout)[:, :h, :w]
    return out[0] if single else out


def conv2d_backward(dout: np.ndarray, x: np.ndarray, kernel: np.ndarray, need_dx: bool = True):
    """Gradients of :func:`conv2d_forward` w.r.t. input, kernel and bias."""
    _check_conv_args(x, kernel)
    b, h, w, cin = x.shape
    cout = kernel.shape[3]
    block = _PaddedBlock(min(b, CHUNK), h, w, cin)
    # Output gradient laid out on the same padded grid (top-left aligned, zeros elsewhere).
    grad = np.zeros((block.n, cout))
    grad_img = grad.reshape(-1, block.hp, block.wp, cout)
    dk = np.zeros(kernel.shape)
    for s in range(0, b, CHUNK):
        rows = block.load(x[s : s + CHUNK])
        m = rows // (block.hp * block.wp)
        grad_img[:m, :h, :w] = dout[s : s + CHUNK]
        g = grad[:rows]
        for (i, j), src in block.taps(rows):
            # dk[i, j] += src.T @ g, in place via its Fortran-ordered transpose.
            dgemm(1.0, g.T, src.T, 1.0, dk[i, j].T, trans_b=1, overwrite_c=1)
    db = dout.reshape(-1, cout).sum(axis=0)
    dx = None
    if need_dx:
        # Input gradient is a same-padded correlation with the flipped, channel-swapped kernel.
        dx = conv2d_forward(dout, kernel[::-1, ::-1].transpose(0, 1, 3, 2))
    return dx, dk, db


def relu(x: np.ndarray) -> np.ndarray:
    return np.maximum(x, 0.0)


def broadcast_rows(x: np.ndarray) -> np.ndarray:
    """Replicate each 1 x D row vector D times: ``(B, D) -> (B, D, D)``."""
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    return np.broadcast_to(x[..., None, :], x.shape[:-1] + (d, d)).copy()


def residual_compose(x: np.ndarray, residual: np.ndarray) -> np.ndarray:
    """``X_new[i, j] = x[j] + R[i, j]``; works on single items or batches."""
    x = np.asarray(x, dtype=float)
    residual = np.asarray(residual, dtype=float)
    d = x.shape[-1]
    if residual.shape[-2:] != (d, d) or residual.shape[:-2] != x.shape[:-1]:
        raise DimensionMismatchError(f"cannot compose vector of shape {x.shape} with residual of shape {residual.shape}")
    return x[..., None, :] + residual


def mse_loss(pred: np.ndarray, target: np.ndarray):
    """Per-sample summed squared error averaged over the batch, and its gradient."""
    if pred.shape != target.shape:
        raise DimensionMismatchError(f"prediction {pred.shape} and target {target.shape} differ")
    diff = pred - target
    n = pred.shape[0]
    return float(np.sum(diff * diff) / n), 2.0 * diff / n


def softmax(logits: np.ndarray) -> np.ndarray:
    z = logits - logits.max(axis=-1, keepdims=True)
    e = np.exp(z)
    return e / e.sum(axis=-1, keepdims=True)


def cross_entropy_loss(logits: np.ndarray, labels: np.ndarray):
    """Mean softmax cross-entropy and its gradient w.r.t. the logits."""
    labels = np.asarray(labels, dtype=int)
    n = logits.shape[0]
    z = logits - logits.max(axis=1, keepdims=True)
    logp = z - np.log(np.exp(z).sum(axis=1, keepdims=True))
    loss = -float(logp[np.arange(n), labels].mean())
    grad = np.exp(logp)
    grad[np.arange(n), labels] -= 1.0
    return loss, grad / n
