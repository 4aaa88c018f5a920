"""Central finite-difference verification of the network gradients."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .model import TccNetConfig, forward, init_params, loss_and_gradients, angular_loss, tiny


@dataclass(frozen=True)
class TensorCheck:
    name: str
    size: int
    relative_error: float  # ||analytic - numeric|| / max(||analytic||, ||numeric||)
    max_abs_error: float


def numeric_gradient(loss_fn, arr: np.ndarray, step: float = 1e-4) -> np.ndarray:
    """Central differences of loss_fn() w.r.t. every entry of `arr` (mutated in place)."""
    grad = np.zeros_like(arr)
    flat = arr.reshape(-1)
    gflat = grad.reshape(-1)
    for i in range(flat.size):
        orig = flat[i]
        flat[i] = orig + step
        up = loss_fn()
        flat[i] = orig - step
        down = loss_fn()
        flat[i] = orig
        gflat[i] = (up - down) / (2.0 * step)
    return grad


def check_gradients(sequence, config: TccNetConfig, params, truth, step: float = 1e-4) -> list[TensorCheck]:
    _, analytic = loss_and_gradients(sequence, config, params, truth)

    def loss_fn():
        return angular_loss(forward(sequence, config, params).estimate, truth)[0]

    out = []
    for name in sorted(params):
        num = numeric_gradient(loss_fn, params[name], step)
        diff = float(np.linalg.norm(analytic[name] - num))
        scale = max(float(np.linalg.norm(analytic[name])), float(np.linalg.norm(num)), 1e-12)
        out.append(TensorCheck(name, num.size, diff / scale, float(np.abs(analytic[name] - num).max())))
    return out


def random_problem(config: TccNetConfig | None = None, length: int = 3, seed: int = 0):
    """Random frames, weights and truth for a self-contained check."""
    config = config or tiny()
    rng = np.random.default_rng(seed)
    s = config.input_size
    frames = [rng.uniform(0.05, 0.95, size=(s, s, 3)) for _ in range(length)]
    params = init_params(config, seed)
    truth = rng.uniform(0.2, 1.0, size=3)
    return frames, config, params, truth
