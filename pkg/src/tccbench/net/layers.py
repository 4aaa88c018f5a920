"""Forward/backward primitives on single (C, H, W) feature maps (batch size 1)."""

from __future__ import annotations

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def sigmoid(x: np.ndarray) -> np.ndarray:
    # split by sign so neither branch overflows
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    ex = np.exp(x[~pos])
    out[~pos] = ex / (1.0 + ex)
    return out


def conv2d(x: np.ndarray, w: np.ndarray, b: np.ndarray | None, stride: int = 1, pad: int = 0):
    """Cross-correlation of x (C, H, W) with w (O, C, k, k). Returns (out, cache)."""
    c, h, wd = x.shape
    o, c2, k, k2 = w.shape
    assert c == c2 and k == k2, (x.shape, w.shape)
    xp = np.pad(x, ((0, 0), (pad, pad), (pad, pad))) if pad else x
    win = sliding_window_view(xp, (k, k), axis=(1, 2))[:, ::stride, ::stride]
    ho, wo = win.shape[1], win.shape[2]
    # (C, Ho, Wo, k, k) -> (C*k*k, Ho*Wo)
    cols = win.transpose(0, 3, 4, 1, 2).reshape(c * k * k, ho * wo)
    out = (w.reshape(o, -1) @ cols).reshape(o, ho, wo)
    if b is not None:
        out += b[:, None, None]
    return out, (cols, x.shape, stride, pad, k)


def conv2d_backward(dout: np.ndarray, cache, w: np.ndarray, need_dx: bool = True):
    """Gradients (dx, dw, db) of conv2d given dL/dout."""
    cols, xshape, stride, pad, k = cache
    o = w.shape[0]
    d2 = dout.reshape(o, -1)
    dw = (d2 @ cols.T).reshape(w.shape)
    db = d2.sum(axis=1)
    if not need_dx:
        return None, dw, db
    c, h, wd = xshape
    ho, wo = dout.shape[1], dout.shape[2]
    dcols = (w.reshape(o, -1).T @ d2).reshape(c, k, k, ho, wo)
    dxp = np.zeros((c, h + 2 * pad, wd + 2 * pad))
    for i in range(k):
        for j in range(k):
            dxp[:, i:i + stride * ho:stride, j:j + stride * wo:stride] += dcols[:, i, j]
    dx = dxp[:, pad:pad + h, pad:pad + wd] if pad else dxp
    return dx, dw, db


def maxpool2(x: np.ndarray):
    """2x2 max pool, stride 2; odd trailing rows/columns are dropped."""
    c, h, w = x.shape
    h2, w2 = h // 2, w // 2
    if h2 == 0 or w2 == 0:
        raise ValueError(f"cannot 2x2-pool a {h}x{w} map")
    blocks = x[:, :2 * h2, :2 * w2].reshape(c, h2, 2, w2, 2).transpose(0, 1, 3, 2, 4)
    blocks = blocks.reshape(c, h2, w2, 4)
    arg = blocks.argmax(axis=-1)
    out = np.take_along_axis(blocks, arg[..., None], axis=-1)[..., 0]
    return out, (arg, x.shape)


def maxpool2_backward(dout: np.ndarray, cache) -> np.ndarray:
    arg, shape = cache
    c, h, w = shape
    h2, w2 = dout.shape[1], dout.shape[2]
    blocks = np.zeros((c, h2, w2, 4))
    np.put_along_axis(blocks, arg[..., None], dout[..., None], axis=-1)
    dx = np.zeros(shape)
    dx[:, :2 * h2, :2 * w2] = (
        blocks.reshape(c, h2, w2, 2, 2).transpose(0, 1, 3, 2, 4).reshape(c, 2 * h2, 2 * w2)
    )
    return dx
