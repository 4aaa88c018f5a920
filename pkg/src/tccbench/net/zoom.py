"""Frame resampling, pseudo zoom-out sequences and training augmentation."""

from __future__ import annotations

from dataclasses import dataclass

import cv2
import numpy as np

from ..errors import ValidationError


def resize_frame(image: np.ndarray, size: int | tuple[int, int]) -> np.ndarray:
    """Resample an H x W x 3 frame to `size` (int for square, or (h, w))."""
    h, w = (size, size) if isinstance(size, int) else size
    img = np.asarray(image, dtype=np.float64)
    if img.shape[:2] == (h, w):
        return img.copy()
    shrinking = h <= img.shape[0] and w <= img.shape[1]
    interp = cv2.INTER_AREA if shrinking else cv2.INTER_LINEAR
    out = cv2.resize(img, (w, h), interpolation=interp)
    return np.clip(out, 0.0, 1.0)


def zoom_fractions(length: int) -> np.ndarray:
    """Crop-side fractions from 0.5 up to 1.0 (the full frame comes last)."""
    if length < 1:
        raise ValidationError("pseudo sequence length must be >= 1")
    if length == 1:
        return np.array([1.0])
    return np.linspace(0.5, 1.0, length)


def center_crop(image: np.ndarray, fraction: float) -> np.ndarray:
    h, w = image.shape[:2]
    ch = max(1, int(round(h * fraction)))
    cw = max(1, int(round(w * fraction)))
    top = (h - ch) // 2
    left = (w - cw) // 2
    return image[top:top + ch, left:left + cw]


def pseudo_zoom_sequence(shot: np.ndarray, length: int, size=None) -> list[np.ndarray]:
    """Center crops of the shot frame, zooming out to the full frame.

    Every crop is resampled to `size` (defaults to the shot frame's size).
    """
    shot = np.asarray(shot, dtype=np.float64)
    target = shot.shape[:2] if size is None else size
    return [resize_frame(center_crop(shot, fr), target) for fr in zoom_fractions(length)]


@dataclass(frozen=True)
class Augmentation:
    """One random draw of the training augmentation, applied to all frames alike."""

    angle: float
    crop_fraction: float
    crop_top: float
    crop_left: float
    flip: bool

    @classmethod
    def sample(cls, rng: np.random.Generator, max_angle: float = 30.0,
               crop_range: tuple[float, float] = (0.8, 1.0), flip_prob: float = 0.5):
        return cls(
            angle=float(rng.uniform(-max_angle, max_angle)),
            crop_fraction=float(rng.uniform(*crop_range)),
            crop_top=float(rng.uniform()),
            crop_left=float(rng.uniform()),
            flip=bool(rng.uniform() < flip_prob),
        )

    def apply(self, image: np.ndarray) -> np.ndarray:
        img = np.asarray(image, dtype=np.float64)
        h, w = img.shape[:2]
        if self.angle:
            m = cv2.getRotationMatrix2D(((w - 1) / 2.0, (h - 1) / 2.0), self.angle, 1.0)
            img = cv2.warpAffine(img, m, (w, h), flags=cv2.INTER_LINEAR,
                                 borderMode=cv2.BORDER_REFLECT_101)
        side = max(1, int(round(self.crop_fraction * min(h, w))))
        top = int(round(self.crop_top * (h - side)))
        left = int(round(self.crop_left * (w - side)))
        img = img[top:top + side, left:left + side]
        if self.flip:
            img = img[:, ::-1]
        return np.clip(img, 0.0, 1.0)
