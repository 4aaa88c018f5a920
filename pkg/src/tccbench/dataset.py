"""Frame I/O, the JSON-lines manifest, splits and dataset statistics.

Manifest schema (one JSON object per line, UTF-8)::

    {"id": "seq_0001", "frames": ["seq_0001/00.png", ...],
     "ground_truth": [r, g, b], "split": "train" | "test" | null,
     "meta": {"key": "value", ...}}

Frame paths are relative to the manifest's directory; the last frame is the
shot frame. Ground truth is written as a unit-norm triple.
"""

from __future__ import annotations

import csv
import json
import math
import statistics
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

import cv2
import numpy as np

from .color import Illuminant, check_image, normalize
from .errors import EmptyInputError, FormatError, FrameIOError, ValidationError

BLACK_LEVEL = 256
SATURATION_LEVEL = 4095
TCC_MIN_FRAMES = 3
TCC_MAX_FRAMES = 17
SPLITS = ("train", "test")


def load_frame(path) -> np.ndarray:
    """Read an 8- or 16-bit RGB PNG as linear float64 in [0, 1]."""
    path = Path(path)
    if not path.is_file():
        raise FrameIOError(f"no such frame: {path}")
    raw = cv2.imread(str(path), cv2.IMREAD_UNCHANGED)
    if raw is None:
        raise FrameIOError(f"cannot decode {path}")
    if raw.ndim != 3 or raw.shape[2] != 3:
        channels = 1 if raw.ndim == 2 else raw.shape[2]
        raise FormatError(f"{path}: expected RGB, found {channels} channel(s)")
    if raw.dtype == np.uint8:
        scale = 255.0
    elif raw.dtype == np.uint16:
        scale = 65535.0
    else:
        raise FormatError(f"{path}: unsupported sample type {raw.dtype}")
    return raw[..., ::-1].astype(np.float64) / scale


def save_frame(path, image, bit_depth: int = 16) -> None:
    img = check_image(image)
    if bit_depth == 16:
        codes = np.rint(img * 65535.0).astype(np.uint16)
    elif bit_depth == 8:
        codes = np.rint(img * 255.0).astype(np.uint8)
    else:
        raise ValueError("bit_depth must be 8 or 16")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    if not cv2.imwrite(str(path), np.ascontiguousarray(codes[..., ::-1])):
        raise FrameIOError(f"cannot write {path}")


def normalize_raw(value, black: int = BLACK_LEVEL, saturation: int = SATURATION_LEVEL):
    """Map sensor codes to [0, 1]: (v - black) / (saturation - black), clamped."""
    v = (np.asarray(value, dtype=np.float64) - black) / float(saturation - black)
    out = np.clip(v, 0.0, 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class SequenceRecord:
    id: str
    frame_paths: tuple[str, ...]
    ground_truth: Illuminant
    meta: dict = field(default_factory=dict, compare=True)

    def __post_init__(self):
        if not self.id:
            raise ValidationError("record id must be non-empty")
        if not self.frame_paths:
            raise ValidationError(f"{self.id}: no frames")
        object.__setattr__(self, "frame_paths", tuple(str(p) for p in self.frame_paths))
        # store unit-norm truth; leave already-normalized values bit-identical
        if abs(np.linalg.norm(self.ground_truth.as_array()) - 1.0) > 1e-9:
            object.__setattr__(self, "ground_truth", normalize(self.ground_truth))

    @property
    def length(self) -> int:
        return len(self.frame_paths)

    def check_tcc(self) -> None:
        if not TCC_MIN_FRAMES <= self.length <= TCC_MAX_FRAMES:
            raise ValidationError(
                f"{self.id}: {self.length} frames, TCC sequences have "
                f"{TCC_MIN_FRAMES}-{TCC_MAX_FRAMES}"
            )


@dataclass
class DatasetManifest:
    records: list[SequenceRecord]
    split: dict[str, Optional[str]] = field(default_factory=dict)
    root: Path = Path(".")

    def __post_init__(self):
        ids = [r.id for r in self.records]
        if len(set(ids)) != len(ids):
            dup = [i for i, c in Counter(ids).items() if c > 1]
            raise ValidationError(f"duplicate record ids: {dup[:5]}")
        for rid in ids:
            self.split.setdefault(rid, None)
        for rid, label in self.split.items():
            if label is not None and label not in SPLITS:
                raise ValidationError(f"{rid}: unknown split label {label!r}")

    def __len__(self) -> int:
        return len(self.records)

    def fold(self, name: str) -> list[SequenceRecord]:
        if name == "all":
            return list(self.records)
        if name not in SPLITS:
            raise ValidationError(f"unknown fold {name!r}")
        return [r for r in self.records if self.split.get(r.id) == name]

    def frame_path(self, record: SequenceRecord, i: int) -> Path:
        return self.root / record.frame_paths[i]

    def load_frames(self, record: SequenceRecord) -> list[np.ndarray]:
        return [load_frame(self.root / p) for p in record.frame_paths]


def _record_to_json(record: SequenceRecord, split: Optional[str]) -> str:
    gt = record.ground_truth.as_array()
    obj = {
        "id": record.id,
        "frames": list(record.frame_paths),
        "ground_truth": [float(x) for x in gt],
        "split": split,
        "meta": record.meta,
    }
    return json.dumps(obj, sort_keys=False, ensure_ascii=False)


def dumps_manifest(manifest: DatasetManifest) -> str:
    return "".join(
        _record_to_json(r, manifest.split.get(r.id)) + "\n" for r in manifest.records
    )


def loads_manifest(text: str, root=".", tcc: bool = False) -> DatasetManifest:
    records, split = [], {}
    for lineno, line in enumerate(text.splitlines(), 1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
            rec = SequenceRecord(
                id=str(obj["id"]),
                frame_paths=tuple(obj["frames"]),
                ground_truth=Illuminant.from_array(obj["ground_truth"]),
                meta=dict(obj.get("meta") or {}),
            )
        except (KeyError, TypeError, ValueError) as exc:
            raise FormatError(f"manifest line {lineno}: {exc}") from exc
        if tcc:
            rec.check_tcc()
        records.append(rec)
        split[rec.id] = obj.get("split")
    return DatasetManifest(records, split, Path(root))


def read_manifest(path, tcc: bool = False) -> DatasetManifest:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise FrameIOError(f"cannot read manifest {path}: {exc}") from exc
    return loads_manifest(text, root=path.parent, tcc=tcc)


def write_manifest(path, manifest: DatasetManifest) -> None:
    Path(path).write_text(dumps_manifest(manifest), encoding="utf-8")


def fixed_split(manifest: DatasetManifest, ratio: float = 0.5, seed: int = 0) -> DatasetManifest:
    """Seeded shuffle; the first floor(ratio * n) records become train."""
    n = len(manifest)
    if n < 2:
        raise ValidationError("a split needs at least two records")
    if not 0.0 < ratio < 1.0:
        raise ValidationError(f"ratio must be in (0, 1), got {ratio}")
    perm = np.random.default_rng(seed).permutation(n)
    n_train = math.floor(ratio * n)
    split = {}
    for rank, idx in enumerate(perm):
        split[manifest.records[idx].id] = "train" if rank < n_train else "test"
    return DatasetManifest(list(manifest.records), split, manifest.root)


def read_split_file(path) -> dict[str, str]:
    """`id,label` lines (header optional), e.g. an officially published split."""
    out = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0].startswith("#") or row == ["id", "split"]:
                continue
            if len(row) != 2 or row[1] not in SPLITS:
                raise FormatError(f"bad split row {row!r}")
            out[row[0]] = row[1]
    return out


def apply_split(manifest: DatasetManifest, labels: dict[str, str]) -> DatasetManifest:
    missing = [r.id for r in manifest.records if r.id not in labels]
    if missing:
        raise ValidationError(f"split file lacks {len(missing)} ids, e.g. {missing[:3]}")
    split = {r.id: labels[r.id] for r in manifest.records}
    return DatasetManifest(list(manifest.records), split, manifest.root)


def single_image_manifest(
    root, image_paths: Iterable[str], illuminants: Iterable[Illuminant]
) -> DatasetManifest:
    """Wrap a single-image dataset (Gehler-Shi, NUS style) as length-1 sequences."""
    records = []
    for p, gt in zip(image_paths, illuminants, strict=True):
        records.append(SequenceRecord(Path(p).stem, (str(p),), gt, {"source": "single-image"}))
    return DatasetManifest(records, {}, Path(root))


def read_single_image_csv(path) -> DatasetManifest:
    """CSV of `image,r,g,b` rows next to the images -> length-1 sequence manifest."""
    path = Path(path)
    images, gts = [], []
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] in ("image", "file", "filename"):
                continue
            if len(row) != 4:
                raise FormatError(f"expected image,r,g,b; got {row!r}")
            images.append(row[0])
            gts.append(Illuminant.from_array([float(x) for x in row[1:]]))
    return single_image_manifest(path.parent, images, gts)


@dataclass(frozen=True)
class ChromaPoint:
    r: float
    g: float

    def __post_init__(self):
        if not (self.r > 0 and self.g > 0 and self.r + self.g < 1):
            raise ValidationError(f"invalid chromaticity ({self.r}, {self.g})")


@dataclass
class DatasetStats:
    chroma_points: list[ChromaPoint]
    length_histogram: dict[int, int]
    mean_length: float
    median_length: float
    # Pearson r between length and each chromaticity coordinate (r, g, b)
    length_chroma_correlation: dict[str, float]
    # "ok", "constant" (zero variance, reported as 0) or "undefined" (n < 2, NaN)
    correlation_flags: dict[str, str]


def pearson(x, y) -> tuple[float, str]:
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.size < 2:
        return math.nan, "undefined"
    # test constancy directly; a mean of equal values can carry rounding
    if np.ptp(x) == 0.0 or np.ptp(y) == 0.0:
        return 0.0, "constant"
    dx, dy = x - x.mean(), y - y.mean()
    sx, sy = math.sqrt(float(dx @ dx)), math.sqrt(float(dy @ dy))
    return float(dx @ dy) / (sx * sy), "ok"


def dataset_statistics(manifest: DatasetManifest) -> DatasetStats:
    if len(manifest) == 0:
        raise EmptyInputError("empty manifest")
    lengths = [r.length for r in manifest.records]
    chroma = np.array([r.ground_truth.chromaticity() for r in manifest.records])
    coords = {"r": chroma[:, 0], "g": chroma[:, 1], "b": 1.0 - chroma.sum(axis=1)}
    corr, flags = {}, {}
    for name, values in coords.items():
        corr[name], flags[name] = pearson(lengths, values)
    return DatasetStats(
        chroma_points=[ChromaPoint(float(r), float(g)) for r, g in chroma],
        length_histogram=dict(sorted(Counter(lengths).items())),
        mean_length=statistics.fmean(lengths),
        median_length=float(statistics.median(lengths)),
        length_chroma_correlation=corr,
        correlation_flags=flags,
    )

