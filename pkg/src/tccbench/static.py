"""Single-frame illuminant estimators: the Grey-Edge/Minkowski family and a
Lambertian grayness index."""

from __future__ import annotations

import math
from fractions import Fraction
from dataclasses import dataclass

import numpy as np

from . import filters
from .color import Illuminant, check_image
from .errors import DegenerateImageError, ImageTooSmallError, ValidationError

SATURATION_LEVEL = 0.98
DARK_LEVEL = 0.02
LOG_FLOOR = 1e-4
CONTRAST_FLOOR = 1e-5
MIN_GRAY_PIXELS = 10
LOW_CONFIDENCE_SCORE = 1e-3
DEFAULT_TOP_FRACTION = 0.001


@dataclass(frozen=True)
class GrayEdgeParams:
    """Derivative order, Minkowski norm and pre-smoothing scale."""

    order: int = 0
    p: float = 1.0
    sigma: float = 0.0

    def __post_init__(self):
        if self.order not in (0, 1, 2):
            raise ValidationError(f"derivative order must be 0, 1 or 2, got {self.order}")
        if not (self.p >= 1.0):
            raise ValidationError(f"Minkowski p must be >= 1 or inf, got {self.p}")
        if not (self.sigma >= 0.0) or math.isinf(self.sigma):
            raise ValidationError(f"sigma must be finite and >= 0, got {self.sigma}")


WHITE_PATCH = GrayEdgeParams(0, math.inf, 0.0)
GRAY_WORLD = GrayEdgeParams(0, 1.0, 0.0)
SHADES_OF_GRAY = GrayEdgeParams(0, 4.0, 0.0)
GENERAL_GRAY_WORLD = GrayEdgeParams(0, 1.0, 9.0)
GREY_EDGE_1 = GrayEdgeParams(1, 1.0, 9.0)
GREY_EDGE_2 = GrayEdgeParams(2, 1.0, 9.0)


def unsaturated_mask(image: np.ndarray, level: float | None = SATURATION_LEVEL) -> np.ndarray:
    if level is None:
        return np.ones(image.shape[:2], dtype=bool)
    return np.all(image < level, axis=-1)


def minkowski_norm(values: np.ndarray, p: float) -> float:
    """(sum |v|^p)^(1/p), evaluated relative to the max to avoid under/overflow."""
    v = np.abs(values)
    if v.size == 0:
        return 0.0
    m = float(v.max())
    if m == 0.0 or math.isinf(p):
        return m
    return m * float(np.sum((v / m) ** p)) ** (1.0 / p)


def gray_edge_family(
    image, params: GrayEdgeParams = GRAY_WORLD, saturation_level: float | None = SATURATION_LEVEL
) -> Illuminant:
    """Per-channel Minkowski norm of the smoothed n-th order derivative.

    order 0 is the image itself, order 1 the Sobel gradient magnitude, order 2
    the absolute 4-neighbour Laplacian. Pixels with any channel at or above
    `saturation_level` do not contribute (None keeps every pixel).
    """
    img = check_image(image)
    mask = unsaturated_mask(img, saturation_level)
    e = np.empty(3)
    for c in range(3):
        ch = filters.gaussian_smooth(img[..., c], params.sigma)
        if params.order == 1:
            ch = filters.sobel_magnitude(ch)
        elif params.order == 2:
            ch = np.abs(filters.laplacian(ch))
        e[c] = minkowski_norm(ch[mask], params.p)
    norm = float(np.linalg.norm(e))
    if norm == 0.0 or not math.isfinite(norm):
        raise DegenerateImageError("estimate has zero norm (black or fully saturated image)")
    return Illuminant.from_array(e / norm)


def white_patch(image) -> Illuminant:
    return gray_edge_family(image, WHITE_PATCH)


def gray_world(image) -> Illuminant:
    return gray_edge_family(image, GRAY_WORLD)


def shades_of_gray(image, p: float = 4.0) -> Illuminant:
    return gray_edge_family(image, GrayEdgeParams(0, p, 0.0))


@dataclass(frozen=True)
class GraynessMap:
    """Per-pixel grayness score; lower is grayer, +inf marks excluded pixels."""

    scores: np.ndarray

    @property
    def height(self) -> int:
        return self.scores.shape[0]

    @property
    def width(self) -> int:
        return self.scores.shape[1]

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.scores)


def grayness_map(image) -> GraynessMap:
    """Coefficient of variation of |Laplacian(log I_c)| across the channels.

    Under a Lambertian model the illuminant is a per-channel multiplicative
    constant, which the log turns into an offset the Laplacian removes, so
    achromatic surfaces give identical local contrast in every channel.
    """
    img = check_image(image)
    h, w, _ = img.shape
    if h < 3 or w < 3:
        raise ImageTooSmallError(f"grayness map needs at least 3x3 pixels, got {h}x{w}")
    logs = np.log(np.maximum(img, LOG_FLOOR))
    d = np.stack([np.abs(filters.laplacian(logs[..., c])) for c in range(3)], axis=-1)
    # sorting the channels makes the score exactly permutation invariant
    d = np.sort(d, axis=-1)
    mean = d.sum(axis=-1) / 3.0
    with np.errstate(divide="ignore", invalid="ignore"):
        score = np.sqrt(((d - mean[..., None]) ** 2).sum(axis=-1) / 3.0) / mean
    excluded = (
        (mean < CONTRAST_FLOOR)
        | (img.mean(axis=-1) < DARK_LEVEL)
        | ~unsaturated_mask(img)
    )
    score = np.where(excluded, np.inf, score)
    return GraynessMap(score)


@dataclass(frozen=True)
class GraynessEstimate:
    illuminant: Illuminant
    n_selected: int
    score_floor: float  # largest score admitted into the selection

    @property
    def low_confidence(self) -> bool:
        return self.score_floor > LOW_CONFIDENCE_SCORE


def selection_size(top_fraction: float, n_pixels: int) -> int:
    """Number of pixels a top_fraction selection takes from an n_pixels frame."""
    if not 0.0 < top_fraction <= 1.0:
        raise ValidationError(f"top_fraction must be in (0, 1], got {top_fraction}")
    return max(math.ceil(top_fraction * n_pixels), MIN_GRAY_PIXELS)


def grayness_index_detail(image, top_fraction: float = DEFAULT_TOP_FRACTION) -> GraynessEstimate:
    img = check_image(image)
    gmap = grayness_map(img)
    scores = gmap.scores.reshape(-1)
    n_valid = int(np.isfinite(scores).sum())
    k = selection_size(top_fraction, scores.size)
    if n_valid < MIN_GRAY_PIXELS:
        raise DegenerateImageError(
            f"only {n_valid} selectable pixels, need {MIN_GRAY_PIXELS}"
        )
    k = min(k, n_valid)
    order = np.argsort(scores, kind="stable")[:k]
    rgb = img.reshape(-1, 3)[order]
    return _estimate_from_pixels(rgb, scores[order])


_EXP_FLOOR = -1080  # below the frexp exponent of the smallest subnormal


def _exact_sum(values: np.ndarray) -> int:
    """Exact sum of non-negative floats, as an integer multiple of 2**(_EXP_FLOOR - 53)."""
    mant, exp = np.frexp(values)
    ints = (mant * 2.0**53).astype(np.int64)
    # 26-bit halves keep int64 group sums exact for up to 2**36 terms
    shift = exp - exp.min() if exp.size else exp
    hi = np.zeros(int(shift.max()) + 1 if exp.size else 0, dtype=np.int64)
    lo = np.zeros_like(hi)
    np.add.at(hi, shift, ints >> 26)
    np.add.at(lo, shift, ints & ((1 << 26) - 1))
    total = sum(((int(h) << 26) + int(lo_)) << j for j, (h, lo_) in enumerate(zip(hi, lo)))
    return total << int(exp.min() - _EXP_FLOOR) if exp.size else 0


def _mean_direction(rgb: np.ndarray) -> np.ndarray:
    """Direction of the mean pixel, computed from exact channel sums.

    Channel ratios are exact rationals rounded once, so repeating the pixel
    set any number of times yields bit-identical output.
    """
    sums = [_exact_sum(rgb[:, c]) for c in range(3)]
    top = max(sums)
    if top == 0:
        raise DegenerateImageError("selected gray pixels are black")
    ratios = np.array([float(Fraction(s, top)) for s in sums])
    return ratios / np.linalg.norm(ratios)


def _estimate_from_pixels(rgb: np.ndarray, scores: np.ndarray) -> GraynessEstimate:
    return GraynessEstimate(
        illuminant=Illuminant.from_array(_mean_direction(rgb)),
        n_selected=int(rgb.shape[0]),
        score_floor=float(scores.max()),
    )


def grayness_index_estimate(image, top_fraction: float = DEFAULT_TOP_FRACTION) -> Illuminant:
    """Normalized mean RGB of the grayest `top_fraction` of pixels.

    At least MIN_GRAY_PIXELS are always taken so small frames still work.
    """
    return grayness_index_detail(image, top_fraction).illuminant
