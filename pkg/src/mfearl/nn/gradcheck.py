from __future__ import annotations

import numpy as np


def gradient_check(net, inputs, targets, n_samples: int | None = 200, h: float = 1e-5, rng=None, floor: float = 1e-6):
    """Max relative error between backprop and central finite differences.

    ``n_samples`` parameter entries are drawn uniformly across all tensors
    (``None`` checks every entry). The error of one entry is
    ``|a - n| / max(|a|, |n|, floor)``, so entries whose true gradient is
    essentially zero are compared on an absolute scale.
    """
    rng = np.random.default_rng(rng)
    _, grads = net.loss_and_grads(inputs, targets)
    names = list(net.params)
    sizes = np.array([net.params[k].size for k in names])
    total = int(sizes.sum())
    if n_samples is None or n_samples >= total:
        flat_ids = np.arange(total)
    else:
        flat_ids = np.sort(rng.choice(total, size=n_samples, replace=False))
    offsets = np.concatenate([[0], np.cumsum(sizes)])
    worst = 0.0
    for fid in flat_ids:
        t = int(np.searchsorted(offsets, fid, side="right") - 1)
        name, local = names[t], int(fid - offsets[t])
        p = net.params[name].reshape(-1)
        old = p[local]
        p[local] = old + h
        up = net.loss(inputs, targets)
        p[local] = old - h
        down = net.loss(inputs, targets)
        p[local] = old
        numeric = (up - down) / (2 * h)
        analytic = grads[name].reshape(-1)[local]
        err = abs(analytic - numeric) / max(abs(analytic), abs(numeric), floor)
        worst = max(worst, err)
    return worst
