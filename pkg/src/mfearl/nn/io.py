"""Binary parameter files.

Layout (all integers little-endian)::

    magic    8 bytes   b"MFRLNET\\0"
    version  uint32    currently 1
    cfg_len  uint32    length of the UTF-8 JSON model config that follows
    config   cfg_len bytes
    count    uint32    number of parameter tensors
    count x { name_len uint16, name bytes, ndim uint8, ndim x uint32 dims }
    data     raw float64 ('<f8') values of every tensor, in table order
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .models import ResidualNet, SkillClassifier

MAGIC = b"MFRLNET\0"
VERSION = 1


def save_network(net, path) -> None:
    cfg = json.dumps(net.config(), sort_keys=True).encode()
    parts = [MAGIC, struct.pack("<II", VERSION, len(cfg)), cfg, struct.pack("<I", len(net.params))]
    for name, arr in net.params.items():
        raw = name.encode()
        parts.append(struct.pack("<H", len(raw)) + raw + struct.pack("<B", arr.ndim))
        parts.append(struct.pack(f"<{arr.ndim}I", *arr.shape))
    for arr in net.params.values():
        parts.append(np.ascontiguousarray(arr, dtype="<f8").tobytes())
    Path(path).write_bytes(b"".join(parts))


def load_network(path):
    buf = Path(path).read_bytes()
    if buf[:8] != MAGIC:
        raise ValueError(f"{path}: not a network parameter file")
    version, cfg_len = struct.unpack_from("<II", buf, 8)
    if version != VERSION:
        raise ValueError(f"{path}: unsupported format version {version}")
    pos = 16
    cfg = json.loads(buf[pos : pos + cfg_len])
    pos += cfg_len
    (count,) = struct.unpack_from("<I", buf, pos)
    pos += 4
    table = []
    for _ in range(count):
        (nlen,) = struct.unpack_from("<H", buf, pos)
        pos += 2
        name = buf[pos : pos + nlen].decode()
        pos += nlen
        (ndim,) = struct.unpack_from("<B", buf, pos)
        pos += 1
        shape = struct.unpack_from(f"<{ndim}I", buf, pos)
        pos += 4 * ndim
        table.append((name, shape))
    params = {}
    for name, shape in table:
        n = int(np.prod(shape))
        params[name] = np.frombuffer(buf, dtype="<f8", count=n, offset=pos).reshape(shape).astype(float)
        pos += 8 * n

    kind = cfg.pop("kind")
    net = ResidualNet(**cfg) if kind == ResidualNet.kind else SkillClassifier(**cfg)
    net.set_params(params)
    return net
