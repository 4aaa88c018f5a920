"""Flat binary weight checkpoints.

Layout (all integers little-endian)::

    magic       8 bytes   b"TCCNETW1"
    version     u32       1
    config_len  u32       length of the config block
    config      bytes     UTF-8 JSON of TccNetConfig.to_dict(), sorted keys
    count       u32       number of tensors
    per tensor, sorted by name:
        name_len  u16
        name      bytes   UTF-8
        ndim      u8
        dims      ndim x u32
        data      prod(dims) x float32, row-major

A plain-text manifest (``<checkpoint>.manifest.txt``) lists
``name<TAB>shape<TAB>byte offset<TAB>element count`` per tensor.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from ..errors import CheckpointError
from .model import TccNetConfig, check_params

MAGIC = b"TCCNETW1"
VERSION = 1


def encode(config: TccNetConfig, params: dict[str, np.ndarray]) -> tuple[bytes, str]:
    """Checkpoint bytes and the manifest text."""
    cfg = json.dumps(config.to_dict(), sort_keys=True).encode("utf-8")
    parts = [MAGIC, struct.pack("<II", VERSION, len(cfg)), cfg, struct.pack("<I", len(params))]
    offset = sum(len(p) for p in parts)
    lines = []
    for name in sorted(params):
        arr = np.asarray(params[name])
        raw = name.encode("utf-8")
        head = struct.pack("<H", len(raw)) + raw + struct.pack("<B", arr.ndim)
        head += struct.pack(f"<{arr.ndim}I", *arr.shape)
        data = np.ascontiguousarray(arr, dtype="<f4").tobytes()
        parts += [head, data]
        offset += len(head)
        lines.append(f"{name}\t{'x'.join(map(str, arr.shape))}\t{offset}\t{arr.size}")
        offset += len(data)
    return b"".join(parts), "\n".join(lines) + "\n"


def decode(blob: bytes) -> tuple[TccNetConfig, dict[str, np.ndarray]]:
    view = memoryview(blob)
    pos = 0

    def take(n: int) -> memoryview:
        nonlocal pos
        if pos + n > len(view):
            raise CheckpointError("truncated checkpoint")
        out = view[pos:pos + n]
        pos += n
        return out

    if bytes(take(8)) != MAGIC:
        raise CheckpointError("not a TCC-Net checkpoint (bad magic)")
    version, cfg_len = struct.unpack("<II", take(8))
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    try:
        config = TccNetConfig.from_dict(json.loads(bytes(take(cfg_len)).decode("utf-8")))
    except (KeyError, TypeError, ValueError) as exc:
        raise CheckpointError(f"bad config block: {exc}") from exc
    (count,) = struct.unpack("<I", take(4))
    params = {}
    for _ in range(count):
        (name_len,) = struct.unpack("<H", take(2))
        name = bytes(take(name_len)).decode("utf-8")
        (ndim,) = struct.unpack("<B", take(1))
        dims = struct.unpack(f"<{ndim}I", take(4 * ndim))
        n = int(np.prod(dims, dtype=np.int64))
        params[name] = np.frombuffer(take(4 * n), dtype="<f4").reshape(dims).astype(np.float32)
    if pos != len(view):
        raise CheckpointError(f"{len(view) - pos} trailing bytes after last tensor")
    check_params(config, params)
    return config, params


def save_checkpoint(path, config: TccNetConfig, params: dict[str, np.ndarray]) -> Path:
    path = Path(path)
    blob, manifest = encode(config, params)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_bytes(blob)
    manifest_path = path.with_name(path.name + ".manifest.txt")
    manifest_path.write_text(manifest, encoding="utf-8")
    return manifest_path


def load_checkpoint(path, dtype=np.float64) -> tuple[TccNetConfig, dict[str, np.ndarray]]:
    """Read a checkpoint; tensors are cast to `dtype` (None keeps float32)."""
    try:
        blob = Path(path).read_bytes()
    except OSError as exc:
        raise CheckpointError(f"cannot read checkpoint {path}: {exc}") from exc
    config, params = decode(blob)
    if dtype is not None:
        params = {k: v.astype(dtype) for k, v in params.items()}
    return config, params
