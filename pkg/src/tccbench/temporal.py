"""Turning per-frame evidence into one estimate for the shot frame."""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from . import static
from .color import Illuminant, check_image, normalize
from .errors import (
    DegenerateImageError,
    DegenerateSequenceError,
    EmptyInputError,
    InvalidBeliefError,
    ShapeError,
    TccError,
)

log = logging.getLogger(__name__)

TRANSITION_NOISE = 1e-4
OBSERVATION_VARIANCE = 1e-3


@dataclass(frozen=True)
class SequenceEstimate:
    illuminant: Illuminant
    per_frame: list[tuple[int, Illuminant]] = field(default_factory=list)
    confidence: Optional[float] = None

    def __post_init__(self):
        idx = [i for i, _ in self.per_frame]
        if any(b <= a for a, b in zip(idx, idx[1:])):
            raise ValueError("per_frame indices must be strictly increasing")


def moving_average_combine(
    estimates: Sequence[Illuminant], window: int = 3, decay: Optional[float] = None
) -> Illuminant:
    """Average of the last `window` unit-normalized estimates.

    With `decay` in (0, 1] the k-th most recent estimate is weighted decay**k
    instead of uniformly.
    """
    if not estimates:
        raise EmptyInputError("no estimates to combine")
    if window < 1:
        raise ValueError("window must be >= 1")
    recent = [normalize(e).as_array() for e in estimates[-window:]]
    if len(recent) == 1:
        return Illuminant.from_array(recent[0])
    if decay is None:
        weights = np.ones(len(recent))
    else:
        if not 0.0 < decay <= 1.0:
            raise ValueError("decay must be in (0, 1]")
        weights = decay ** np.arange(len(recent) - 1, -1, -1, dtype=np.float64)
    mean = np.average(np.stack(recent), axis=0, weights=weights)
    return normalize(Illuminant.from_array(mean))


def _check_frames(sequence) -> list[np.ndarray]:
    frames = [check_image(f, f"frame {i}") for i, f in enumerate(sequence)]
    if not frames:
        raise EmptyInputError("sequence has no frames")
    shape = frames[0].shape
    for i, f in enumerate(frames):
        if f.shape != shape:
            raise ShapeError(f"frame {i} has shape {f.shape}, expected {shape}")
    return frames


def temporal_grayness_estimate(
    sequence, top_fraction: float = static.DEFAULT_TOP_FRACTION
) -> SequenceEstimate:
    """Pool the grayness maps of all frames and pick the globally grayest pixels.

    The pooled selection takes len(sequence) times the per-frame selection
    size, so n identical frames select exactly n copies of the single-frame
    pixel set. Scores are pooled raw, without per-frame normalization. Pixel
    values are brought to the shot frame's exposure before averaging so that
    frames with different exposures carry equal weight.
    """
    frames = _check_frames(sequence)
    n_frame_pixels = frames[0].shape[0] * frames[0].shape[1]
    k_frame = static.selection_size(top_fraction, n_frame_pixels)

    shot_level = float(frames[-1].mean())
    scores, rgb, per_frame = [], [], []
    for i, f in enumerate(frames):
        gmap = static.grayness_map(f)
        scores.append(gmap.scores.reshape(-1))
        level = float(f.mean())
        gain = shot_level / level if level > 0.0 and shot_level > 0.0 else 1.0
        rgb.append(f.reshape(-1, 3) * gain)
        try:
            per_frame.append((i, static.grayness_index_estimate(f, top_fraction)))
        except DegenerateImageError:
            pass
    scores = np.concatenate(scores)
    rgb = np.concatenate(rgb)
    n_valid = int(np.isfinite(scores).sum())
    if n_valid < static.MIN_GRAY_PIXELS:
        raise DegenerateSequenceError(f"only {n_valid} selectable pixels in the whole sequence")
    k = min(k_frame * len(frames), n_valid)
    pixel = np.tile(np.arange(n_frame_pixels), len(frames))
    frame = np.repeat(np.arange(len(frames)), n_frame_pixels)
    # ties resolve by pixel position, then frame, matching the single-frame order
    order = np.lexsort((frame, pixel, scores))[:k]
    est = static._estimate_from_pixels(rgb[order], scores[order])
    return SequenceEstimate(est.illuminant, per_frame, confidence=-est.score_floor)


@dataclass(frozen=True)
class GaussianBelief:
    """Isotropic Gaussian over (r, g) chromaticity."""

    mean: tuple[float, float]
    variance: float

    def __post_init__(self):
        if not (self.variance > 0.0) or not math.isfinite(self.variance):
            raise InvalidBeliefError(f"variance must be positive and finite, got {self.variance}")
        r, g = self.mean
        if not (0.0 < r < 1.0 and 0.0 < g < 1.0 and r + g < 1.0):
            raise InvalidBeliefError(f"mean {self.mean} is not a valid chromaticity")

    @classmethod
    def from_illuminant(cls, illuminant: Illuminant, variance: float) -> "GaussianBelief":
        return cls(illuminant.chromaticity(), variance)

    def to_illuminant(self) -> Illuminant:
        return Illuminant.from_chromaticity(*self.mean)


def kalman_smooth(
    previous: GaussianBelief, observation: GaussianBelief, transition_noise: float = TRANSITION_NOISE
) -> GaussianBelief:
    """Fuse two isotropic Gaussians, then add the identity-transition noise."""
    vp, vo = previous.variance, observation.variance
    if vp <= 0 or vo <= 0:
        raise InvalidBeliefError("variances must be positive")
    total = vp + vo
    mean = tuple(
        (vo * mp + vp * mo) / total for mp, mo in zip(previous.mean, observation.mean)
    )
    return GaussianBelief(mean, vp * vo / total + transition_noise)


NoiseModel = Callable[[int, np.ndarray, Illuminant], float]


def constant_noise(variance: float = OBSERVATION_VARIANCE) -> NoiseModel:
    return lambda index, frame, estimate: variance


def smoothed_sequence_estimate(
    sequence,
    base: Callable[[np.ndarray], Illuminant] = static.gray_world,
    noise_model: Optional[NoiseModel] = None,
    transition_noise: float = TRANSITION_NOISE,
) -> SequenceEstimate:
    """Run `base` per frame and fold the chromaticity beliefs left to right.

    Frames on which `base` fails are skipped with a warning.
    """
    frames = _check_frames(sequence)
    noise_model = noise_model or constant_noise()
    belief = None
    per_frame = []
    for i, f in enumerate(frames):
        try:
            est = base(f)
        except TccError as exc:
            log.warning("frame %d skipped: %s", i, exc)
            continue
        per_frame.append((i, est))
        obs = GaussianBelief.from_illuminant(est, noise_model(i, f, est))
        belief = obs if belief is None else kalman_smooth(belief, obs, transition_noise)
    if belief is None:
        raise DegenerateSequenceError("base estimator failed on every frame")
    return SequenceEstimate(belief.to_illuminant(), per_frame, confidence=1.0 / belief.variance)
