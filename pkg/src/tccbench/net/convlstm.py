"""Convolutional LSTM cell with peephole connections.

One step computes, with * a same-padded convolution and o an elementwise
product::

    i = sigm(W_xi * X + W_hi * H_prev + W_ci o C_prev + b_i)
    f = sigm(W_xf * X + W_hf * H_prev + W_cf o C_prev + b_f)
    C = f o C_prev + i o tanh(W_xc * X + W_hc * H_prev + b_c)
    o = sigm(W_xo * X + W_ho * H_prev + W_co o C + b_o)
    H = o o tanh(C)

The output-gate peephole reads the new cell C, the other two read C_prev.
Peephole weights are per-channel and broadcast over space.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, fields

import numpy as np

from ..errors import ShapeError
from .layers import conv2d, conv2d_backward, sigmoid

GATES = ("i", "f", "c", "o")


@dataclass
class ConvLstmParams:
    W_xi: np.ndarray
    W_hi: np.ndarray
    W_xf: np.ndarray
    W_hf: np.ndarray
    W_xc: np.ndarray
    W_hc: np.ndarray
    W_xo: np.ndarray
    W_ho: np.ndarray
    W_ci: np.ndarray
    W_cf: np.ndarray
    W_co: np.ndarray
    b_i: np.ndarray
    b_f: np.ndarray
    b_c: np.ndarray
    b_o: np.ndarray

    def __post_init__(self):
        hdim, cin, k, k2 = self.W_xi.shape
        if k != k2 or k % 2 == 0:
            raise ShapeError(f"kernel must be square and odd, got {k}x{k2}")
        for g in GATES:
            if getattr(self, f"W_x{g}").shape != (hdim, cin, k, k):
                raise ShapeError(f"W_x{g} shape mismatch")
            if getattr(self, f"W_h{g}").shape != (hdim, hdim, k, k):
                raise ShapeError(f"W_h{g} shape mismatch")
            if getattr(self, f"b_{g}").shape != (hdim,):
                raise ShapeError(f"b_{g} shape mismatch")
        for g in ("i", "f", "o"):
            if getattr(self, f"W_c{g}").shape != (hdim,):
                raise ShapeError(f"W_c{g} shape mismatch")

    @property
    def hidden_channels(self) -> int:
        return self.W_xi.shape[0]

    @property
    def input_channels(self) -> int:
        return self.W_xi.shape[1]

    @property
    def kernel_size(self) -> int:
        return self.W_xi.shape[2]

    @classmethod
    def names(cls) -> tuple[str, ...]:
        return tuple(f.name for f in fields(cls))

    def as_dict(self) -> dict[str, np.ndarray]:
        return {n: getattr(self, n) for n in self.names()}

    @classmethod
    def from_dict(cls, d, prefix: str = "") -> "ConvLstmParams":
        return cls(**{n: d[prefix + n] for n in cls.names()})

    @classmethod
    def zeros(cls, input_channels: int, hidden: int, kernel_size: int) -> "ConvLstmParams":
        d = {}
        for g in GATES:
            d[f"W_x{g}"] = np.zeros((hidden, input_channels, kernel_size, kernel_size))
            d[f"W_h{g}"] = np.zeros((hidden, hidden, kernel_size, kernel_size))
            d[f"b_{g}"] = np.zeros(hidden)
        for g in ("i", "f", "o"):
            d[f"W_c{g}"] = np.zeros(hidden)
        return cls(**d)

    @classmethod
    def init(
        cls, input_channels: int, hidden: int, kernel_size: int, rng: np.random.Generator,
        forget_bias: float = 1.0,
    ) -> "ConvLstmParams":
        """Uniform +-1/sqrt(fan_in) weights, forget-gate bias `forget_bias`."""
        p = cls.zeros(input_channels, hidden, kernel_size)
        fan_in = (input_channels + hidden) * kernel_size * kernel_size
        bound = 1.0 / math.sqrt(fan_in)
        for name, arr in p.as_dict().items():
            arr[...] = rng.uniform(-bound, bound, size=arr.shape)
        p.b_f[...] = forget_bias
        return p

    def stacked(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        wx = np.concatenate([getattr(self, f"W_x{g}") for g in GATES])
        wh = np.concatenate([getattr(self, f"W_h{g}") for g in GATES])
        b = np.concatenate([getattr(self, f"b_{g}") for g in GATES])
        return wx, wh, b


@dataclass
class ConvLstmState:
    hidden: np.ndarray
    cell: np.ndarray

    @classmethod
    def zeros(cls, channels: int, height: int, width: int) -> "ConvLstmState":
        return cls(np.zeros((channels, height, width)), np.zeros((channels, height, width)))


def conv_lstm_step(x: np.ndarray, state: ConvLstmState, params: ConvLstmParams,
                   return_cache: bool = False):
    """Advance the cell by one frame. Returns the new state (and a backward cache)."""
    hd = params.hidden_channels
    if x.ndim != 3 or x.shape[0] != params.input_channels:
        raise ShapeError(f"input has shape {x.shape}, expected {params.input_channels} channels")
    if state.hidden.shape != (hd,) + x.shape[1:] or state.cell.shape != state.hidden.shape:
        raise ShapeError(f"state shape {state.hidden.shape} does not match input {x.shape}")
    pad = params.kernel_size // 2
    wx, wh, b = params.stacked()
    zx, cache_x = conv2d(x, wx, None, 1, pad)
    zh, cache_h = conv2d(state.hidden, wh, None, 1, pad)
    z = zx + zh + b[:, None, None]
    c_prev = state.cell
    pc = lambda w: w[:, None, None]  # noqa: E731
    i = sigmoid(z[:hd] + pc(params.W_ci) * c_prev)
    f = sigmoid(z[hd:2 * hd] + pc(params.W_cf) * c_prev)
    g = np.tanh(z[2 * hd:3 * hd])
    c = f * c_prev + i * g
    o = sigmoid(z[3 * hd:] + pc(params.W_co) * c)
    tc = np.tanh(c)
    h = o * tc
    new = ConvLstmState(h, c)
    if not return_cache:
        return new
    cache = dict(x_cache=cache_x, h_cache=cache_h, c_prev=c_prev, i=i, f=f, g=g, o=o, c=c, tc=tc,
                 wx=wx, wh=wh)
    return new, cache


def conv_lstm_step_backward(dh: np.ndarray, dc_next: np.ndarray, cache, params: ConvLstmParams,
                            need_dx: bool = True):
    """Backprop one step. Returns (dx, dh_prev, dc_prev, grads by tensor name)."""
    i, f, g, o, c, tc, c_prev = (cache[k] for k in ("i", "f", "g", "o", "c", "tc", "c_prev"))
    hd = params.hidden_channels
    pc = lambda w: w[:, None, None]  # noqa: E731

    da_o = dh * tc * o * (1.0 - o)
    dc = dc_next + dh * o * (1.0 - tc * tc) + da_o * pc(params.W_co)
    da_i = dc * g * i * (1.0 - i)
    da_f = dc * c_prev * f * (1.0 - f)
    da_g = dc * i * (1.0 - g * g)
    dc_prev = dc * f + da_i * pc(params.W_ci) + da_f * pc(params.W_cf)

    dz = np.concatenate([da_i, da_f, da_g, da_o])
    dx, dwx, db = conv2d_backward(dz, cache["x_cache"], cache["wx"], need_dx=need_dx)
    dh_prev, dwh, _ = conv2d_backward(dz, cache["h_cache"], cache["wh"])

    grads = {}
    for n, gname in enumerate(GATES):
        sl = slice(n * hd, (n + 1) * hd)
        grads[f"W_x{gname}"] = dwx[sl]
        grads[f"W_h{gname}"] = dwh[sl]
        grads[f"b_{gname}"] = db[sl]
    grads["W_ci"] = (da_i * c_prev).sum(axis=(1, 2))
    grads["W_cf"] = (da_f * c_prev).sum(axis=(1, 2))
    grads["W_co"] = (da_o * c).sum(axis=(1, 2))
    return dx, dh_prev, dc_prev, grads
