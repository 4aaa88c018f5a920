"""Illuminant type, the angular-error metric and Table-1 style error statistics."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .errors import EmptyInputError, InvalidIlluminantError, InvalidImageError

LinearImage = np.ndarray
"""H x W x 3 float array of linear RGB in [0, 1], black level already removed."""


def check_image(image, name: str = "image") -> np.ndarray:
    """Validate a linear RGB frame and return it as a float64 array."""
    arr = np.asarray(image, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise InvalidImageError(f"{name} must be H x W x 3, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise InvalidImageError(f"{name} is empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidImageError(f"{name} contains non-finite values")
    if arr.min() < 0.0 or arr.max() > 1.0:
        raise InvalidImageError(f"{name} values must lie in [0, 1]")
    return arr


@dataclass(frozen=True)
class Illuminant:
    """RGB illuminant direction. Scaled copies describe the same light."""

    r: float
    g: float
    b: float

    def __post_init__(self):
        comps = (self.r, self.g, self.b)
        if not all(math.isfinite(c) for c in comps):
            raise InvalidIlluminantError(f"non-finite illuminant {comps}")
        if min(comps) < 0.0:
            raise InvalidIlluminantError(f"negative illuminant component in {comps}")
        if max(comps) == 0.0:
            raise InvalidIlluminantError("illuminant is the zero vector")

    @classmethod
    def from_array(cls, values) -> "Illuminant":
        v = np.asarray(values, dtype=np.float64).reshape(-1)
        if v.shape != (3,):
            raise InvalidIlluminantError(f"expected 3 components, got {v.shape}")
        return cls(float(v[0]), float(v[1]), float(v[2]))

    def as_array(self) -> np.ndarray:
        return np.array([self.r, self.g, self.b], dtype=np.float64)

    def normalized(self) -> "Illuminant":
        return normalize(self)

    def chromaticity(self) -> tuple[float, float]:
        """Projective (r, g) chromaticity."""
        s = self.r + self.g + self.b
        return self.r / s, self.g / s

    @classmethod
    def from_chromaticity(cls, r: float, g: float) -> "Illuminant":
        return normalize(cls(r, g, 1.0 - r - g))


def _as_vector(x) -> np.ndarray:
    if isinstance(x, Illuminant):
        return x.as_array()
    v = np.asarray(x, dtype=np.float64).reshape(-1)
    if v.shape != (3,) or not np.all(np.isfinite(v)):
        raise InvalidIlluminantError(f"not a finite RGB triple: {x!r}")
    return v


def normalize(illuminant: Illuminant) -> Illuminant:
    """Unit-norm copy of `illuminant`."""
    v = _as_vector(illuminant)
    n = float(np.linalg.norm(v))
    if n == 0.0:
        raise InvalidIlluminantError("cannot normalize the zero vector")
    return Illuminant.from_array(v / n)


def angular_error(estimate, truth) -> float:
    """Angle in degrees between two RGB vectors (Illuminant or array-like).

    Evaluated as atan2(|a x b|, a . b): the same angle as arccos of the
    normalized dot product, but exact for parallel inputs and well conditioned
    near 0 and 180 degrees, where arccos loses half the significant digits.
    """
    a = _as_vector(estimate)
    b = _as_vector(truth)
    if not np.any(a) or not np.any(b):
        raise InvalidIlluminantError("angular error of a zero-norm vector is undefined")
    # scale both to max 1 first so huge or tiny inputs cannot overflow
    a = a / np.max(np.abs(a))
    b = b / np.max(np.abs(b))
    return math.degrees(math.atan2(float(np.linalg.norm(np.cross(a, b))), float(np.dot(a, b))))


@dataclass(frozen=True)
class ErrorStats:
    """Summary of an angular-error distribution, all in degrees."""

    mean: float
    median: float
    trimean: float
    best25_mean: float
    worst25_mean: float
    worst5_mean: float
    count: int = 0

    FIELDS = ("mean", "median", "trimean", "best25_mean", "worst25_mean", "worst5_mean")

    def as_tuple(self) -> tuple[float, ...]:
        return tuple(getattr(self, f) for f in self.FIELDS)


def summarize(errors: Iterable[float]) -> ErrorStats:
    """Mean / median / trimean / best 25% / worst 25% / worst 5%.

    Quartiles use linear interpolation between order statistics (numpy's
    default percentile rule). Tail sizes are ceil(n/4) and ceil(n/20), so
    every tail holds at least one error.
    """
    e = np.sort(np.asarray(list(errors), dtype=np.float64))
    n = e.size
    if n == 0:
        raise EmptyInputError("summarize needs at least one error")
    q1, q2, q3 = np.percentile(e, [25.0, 50.0, 75.0])
    quarter = math.ceil(n / 4)
    twentieth = math.ceil(n / 20)
    return ErrorStats(
        mean=_mean(e),
        median=float(q2),
        trimean=float((q1 + 2.0 * q2 + q3) / 4.0),
        best25_mean=_mean(e[:quarter]),
        worst25_mean=_mean(e[n - quarter:]),
        worst5_mean=_mean(e[n - twentieth:]),
        count=n,
    )


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)
