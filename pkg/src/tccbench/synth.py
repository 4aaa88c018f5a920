"""Synthetic sequences with exactly known illuminants.

Scenes are grids of Lambertian patches: pixel = reflectance * illuminant
(channelwise), plus optional Gaussian sensor noise. Viewfinder frames show the
same reflectance map under a small random translation. The constructions below
are the ground-truth oracles for the estimator tests:

* ``balanced`` scenes have exactly equal channel means of reflectance, so
  Gray-World returns the illuminant;
* ``white_patch`` scenes contain one untextured white patch and every other
  reflectance is below it, so the per-channel max is the illuminant;
* achromatic patches carry the same texture in every channel, which is what
  the grayness index detects.
"""

from __future__ import annotations

import colorsys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .color import Illuminant, normalize
from .dataset import DatasetManifest, SequenceRecord, save_frame
from .errors import ValidationError

DRIFTS = ("constant", "walk", "abrupt")


@dataclass(frozen=True)
class SceneSpec:
    height: int = 64
    width: int = 64
    grid: int = 4
    achromatic_fraction: float = 0.25
    # frame indices that show the achromatic patches; None means every frame
    gray_frames: Optional[tuple[int, ...]] = None
    balanced: bool = False
    white_patch: bool = False
    texture: float = 0.15
    noise: float = 0.0
    saturation: tuple[float, float] = (0.4, 0.9)
    # colored patch hues are drawn within +-hue_spread of a random base hue
    hue_spread: float = 0.5
    # max illuminant channel after scaling; keeps pixels below saturation
    brightness: float = 0.85
    drift: str = "constant"
    drift_amount: float = 0.0
    max_shift: int = 3

    def __post_init__(self):
        problems = []
        if self.height < 4 or self.width < 4:
            problems.append("frames must be at least 4x4")
        if self.grid < 1 or self.grid > min(self.height, self.width):
            problems.append("grid must be in [1, min(height, width)]")
        if not 0.0 <= self.achromatic_fraction <= 1.0:
            problems.append("achromatic_fraction must be in [0, 1]")
        if not 0.0 <= self.texture < 1.0:
            problems.append("texture must be in [0, 1)")
        if self.noise < 0:
            problems.append("noise must be >= 0")
        lo, hi = self.saturation
        if not 0.0 <= lo <= hi <= 1.0:
            problems.append("saturation range must satisfy 0 <= lo <= hi <= 1")
        if not 0.0 <= self.hue_spread <= 0.5:
            problems.append("hue_spread must be in [0, 0.5]")
        if not 0.0 < self.brightness < 0.98:
            problems.append("brightness must be in (0, 0.98)")
        if self.drift not in DRIFTS:
            problems.append(f"drift must be one of {DRIFTS}")
        if self.drift_amount < 0:
            problems.append("drift_amount must be >= 0")
        if self.max_shift < 0:
            problems.append("max_shift must be >= 0")
        if self.balanced and self.white_patch:
            problems.append("balanced and white_patch scenes are mutually exclusive")
        if problems:
            raise ValidationError("; ".join(problems))


# approximate fit to the TCC white-point cluster in (r, g) chromaticity
ILLUMINANT_CHROMA_MEAN = (0.30, 0.35)
ILLUMINANT_CHROMA_STD = (0.06, 0.05)


def sample_illuminant(rng: np.random.Generator) -> Illuminant:
    """Draw a plausible daylight/indoor white point (approximate TCC cluster)."""
    while True:
        r, g = rng.normal(ILLUMINANT_CHROMA_MEAN, ILLUMINANT_CHROMA_STD)
        if r > 0.05 and g > 0.05 and r + g < 0.95:
            return Illuminant.from_chromaticity(float(r), float(g))


def _patch_layout(spec: SceneSpec, rng: np.random.Generator):
    """Return (patch label image, number of patches)."""
    rows = np.minimum(np.arange(spec.height) * spec.grid // spec.height, spec.grid - 1)
    cols = np.minimum(np.arange(spec.width) * spec.grid // spec.width, spec.grid - 1)
    labels = rows[:, None] * spec.grid + cols[None, :]
    return labels, spec.grid * spec.grid


def _colored_reflectance(spec: SceneSpec, rng: np.random.Generator, base_hue: float) -> np.ndarray:
    hue = (base_hue + rng.uniform(-spec.hue_spread, spec.hue_spread)) % 1.0
    sat = rng.uniform(*spec.saturation)
    val = rng.uniform(0.5, 0.9)
    return np.array(colorsys.hsv_to_rgb(hue, sat, val))


def _reflectance_maps(spec: SceneSpec, length: int, rng: np.random.Generator) -> list[np.ndarray]:
    labels, n = _patch_layout(spec, rng)
    base_hue = rng.uniform()
    n_gray = int(round(spec.achromatic_fraction * n))
    order = rng.permutation(n)
    gray_ids = set(order[:n_gray].tolist())
    white_id = int(order[n_gray]) if spec.white_patch and n_gray < n else None
    if spec.white_patch and white_id is None:
        white_id = int(order[0])
        gray_ids.discard(white_id)

    colored = {k: _colored_reflectance(spec, rng, base_hue) for k in range(n)}
    gray_level = {k: rng.uniform(0.3, 0.8) for k in range(n)}
    h, w = spec.height, spec.width
    tex_shared = 1.0 + spec.texture * rng.uniform(-1.0, 1.0, size=(h, w))
    tex_channel = 1.0 + spec.texture * rng.uniform(-1.0, 1.0, size=(h, w, 3))

    def render(show_gray: bool) -> np.ndarray:
        refl = np.empty((h, w, 3))
        for k in range(n):
            m = labels == k
            if k == white_id:
                refl[m] = 1.0
            elif k in gray_ids and show_gray:
                refl[m] = gray_level[k] * tex_shared[m][:, None]
            else:
                refl[m] = colored[k] * tex_channel[m]
        if spec.white_patch:
            others = labels != white_id
            refl[others] = np.minimum(refl[others], 0.95)
        if spec.balanced:
            means = refl.reshape(-1, 3).mean(axis=0)
            refl = refl * (means.mean() / means)
            refl = refl / max(1.0, refl.max())
        return refl

    with_gray = render(True)
    without_gray = render(False) if spec.gray_frames is not None else with_gray
    gray_frames = set(range(length)) if spec.gray_frames is None else set(spec.gray_frames)

    maps = []
    for t in range(length):
        base = with_gray if t in gray_frames else without_gray
        if t == length - 1 or spec.max_shift == 0:
            maps.append(base)
        else:
            dy, dx = rng.integers(-spec.max_shift, spec.max_shift + 1, size=2)
            maps.append(np.roll(base, (int(dy), int(dx)), axis=(0, 1)))
    return maps


def _chroma_shift(illuminant: Illuminant, delta: np.ndarray) -> Illuminant:
    r, g = np.array(illuminant.chromaticity()) + delta
    r = float(np.clip(r, 0.05, 0.85))
    g = float(np.clip(g, 0.05, 0.9 - r))
    return Illuminant.from_chromaticity(r, g)


def illuminant_schedule(
    spec: SceneSpec, shot: Illuminant, length: int, rng: np.random.Generator
) -> list[Illuminant]:
    """Per-frame illuminants ending in `shot`."""
    if spec.drift == "constant" or spec.drift_amount == 0:
        return [shot] * length
    if spec.drift == "abrupt":
        angle = rng.uniform(0, 2 * np.pi)
        prior = _chroma_shift(shot, spec.drift_amount * np.array([np.cos(angle), np.sin(angle)]))
        return [prior] * (length - 1) + [shot]
    out = [shot]
    for _ in range(length - 1):
        out.append(_chroma_shift(out[-1], rng.normal(0.0, spec.drift_amount, size=2)))
    return out[::-1]


def _scaled(illuminant: Illuminant, brightness: float) -> np.ndarray:
    v = illuminant.as_array()
    return v * (brightness / v.max())


def generate_synthetic_sequence(
    spec: SceneSpec,
    illuminant: Illuminant,
    length: int,
    seed: int,
    sequence_id: str = "synthetic",
) -> tuple[SequenceRecord, list[np.ndarray]]:
    """Render `length` frames; ground truth is the shot-frame illuminant.

    The record's frame paths are the relative names `write_sequence` uses.
    """
    if length < 1:
        raise ValidationError("length must be >= 1")
    rng = np.random.default_rng(seed)
    maps = _reflectance_maps(spec, length, rng)
    lights = illuminant_schedule(spec, illuminant, length, rng)
    frames = []
    for refl, light in zip(maps, lights):
        img = refl * _scaled(light, spec.brightness)
        if spec.noise > 0:
            img = img + rng.normal(0.0, spec.noise, size=img.shape)
        frames.append(np.clip(img, 0.0, 1.0))
    record = SequenceRecord(
        id=sequence_id,
        frame_paths=tuple(f"{sequence_id}/{t:02d}.png" for t in range(length)),
        ground_truth=normalize(illuminant),
        meta={"seed": str(seed), "drift": spec.drift},
    )
    return record, frames


def write_sequence(root, record: SequenceRecord, frames: Sequence[np.ndarray]) -> None:
    root = Path(root)
    for rel, frame in zip(record.frame_paths, frames, strict=True):
        save_frame(root / rel, frame)


def generate_dataset(
    root,
    lengths: Sequence[int],
    spec: SceneSpec = SceneSpec(),
    seed: int = 0,
    write: bool = True,
) -> tuple[DatasetManifest, dict[str, list[np.ndarray]]]:
    """One sequence per entry of `lengths`, illuminants from `sample_illuminant`."""
    rng = np.random.default_rng(seed)
    records, frames = [], {}
    for i, length in enumerate(lengths):
        sid = f"seq_{i:04d}"
        gt = sample_illuminant(rng)
        rec, fr = generate_synthetic_sequence(spec, gt, int(length), int(rng.integers(2**31)), sid)
        records.append(rec)
        frames[sid] = fr
        if write:
            write_sequence(root, rec, fr)
    return DatasetManifest(records, {}, Path(root if root is not None else ".")), frames
