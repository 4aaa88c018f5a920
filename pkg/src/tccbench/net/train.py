"""RMSprop training loop with rotation / crop / flip augmentation."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field
from typing import Optional, Sequence

import numpy as np

from ..color import Illuminant, angular_error
from ..errors import EmptyInputError
from .model import TccNetConfig, backward, forward, init_params
from .zoom import Augmentation

log = logging.getLogger(__name__)

REFERENCE_LEARNING_RATE = 3e-5


@dataclass(frozen=True)
class TrainConfig:
    learning_rate: float = REFERENCE_LEARNING_RATE
    decay: float = 0.99
    eps: float = 1e-8
    epochs: int = 2000
    augment: bool = True
    max_angle: float = 30.0
    crop_range: tuple[float, float] = (0.8, 1.0)
    flip_prob: float = 0.5
    shuffle: bool = True
    seed: int = 0
    init_seed: int = 0
    # stop after the first epoch whose un-augmented training error (deg) is below this
    target_error: Optional[float] = None

    def to_dict(self) -> dict:
        return asdict(self)


class RMSprop:
    """v <- decay*v + (1-decay)*g^2;  p <- p - lr*g / (sqrt(v) + eps)."""

    def __init__(self, params: dict[str, np.ndarray], lr: float, decay: float = 0.99, eps: float = 1e-8):
        self.params = params
        self.lr = lr
        self.decay = decay
        self.eps = eps
        self.square_avg = {k: np.zeros_like(v) for k, v in params.items()}

    def step(self, grads: dict[str, np.ndarray]) -> None:
        for k, p in self.params.items():
            g = grads[k]
            v = self.square_avg[k]
            v *= self.decay
            v += (1.0 - self.decay) * g * g
            p -= self.lr * g / (np.sqrt(v) + self.eps)


@dataclass
class TrainResult:
    params: dict[str, np.ndarray]
    epoch_loss: list[float] = field(default_factory=list)  # mean training loss per epoch, degrees
    step_loss: list[float] = field(default_factory=list)  # per-sample loss, degrees
    steps_seen: list[int] = field(default_factory=list)  # LSTM steps of the temporal branch per sample
    train_error: list[float] = field(default_factory=list)  # clean mean error per epoch, if tracked
    stopped_early: bool = False


def train(
    dataset: Sequence[tuple[Sequence[np.ndarray], Illuminant]],
    config: TccNetConfig,
    hyper: TrainConfig = TrainConfig(),
    params: Optional[dict[str, np.ndarray]] = None,
    progress_every: int = 0,
) -> TrainResult:
    """Batch size 1; each sample gets one augmentation draw shared by all its frames."""
    if len(dataset) == 0:
        raise EmptyInputError("empty training set")
    params = init_params(config, hyper.init_seed) if params is None else params
    opt = RMSprop(params, hyper.learning_rate, hyper.decay, hyper.eps)
    rng = np.random.default_rng(hyper.seed)
    result = TrainResult(params)
    for epoch in range(hyper.epochs):
        order = rng.permutation(len(dataset)) if hyper.shuffle else np.arange(len(dataset))
        losses = []
        for idx in order:
            frames, truth = dataset[idx]
            if hyper.augment:
                aug = Augmentation.sample(rng, hyper.max_angle, hyper.crop_range, hyper.flip_prob)
                frames = [aug.apply(f) for f in frames]
            fwd = forward(frames, config, params)
            loss, grads = backward(fwd, config, params, truth)
            opt.step(grads)
            losses.append(math.degrees(loss))
            result.steps_seen.append(fwd.steps["temporal"])
        result.step_loss.extend(losses)
        result.epoch_loss.append(float(np.mean(losses)))
        if progress_every and (epoch + 1) % progress_every == 0:
            log.info("epoch %d  loss %.4f deg", epoch + 1, result.epoch_loss[-1])
        if hyper.target_error is not None:
            result.train_error.append(float(np.mean(evaluate(dataset, config, params))))
            if result.train_error[-1] < hyper.target_error:
                result.stopped_early = True
                break
    return result


def evaluate(dataset, config: TccNetConfig, params) -> list[float]:
    """Angular error in degrees per sample, without augmentation."""
    return [angular_error(forward(frames, config, params).estimate, truth) for frames, truth in dataset]


def smooth(curve: Sequence[float], window: int = 50) -> np.ndarray:
    """Trailing moving average (valid part only)."""
    c = np.asarray(curve, dtype=np.float64)
    if c.size < window:
        return c.copy()
    k = np.ones(window) / window
    return np.convolve(c, k, mode="valid")
