"""Deterministic synthetic hand-gesture images.

A gesture is a palm disc plus up to five finger rectangles radiating from the
palm centre. Every class shape comes from a seeded candidate stream and is
only accepted when its mask differs from every earlier class by at least
``MIN_CLASS_SEPARATION`` of the frame. Samples are rendered as a bright hand
on a dark background with optional rotation, translation, Gaussian noise and
salt specks, each sample drawing from its own PCG64 substream keyed by
(seed, class_id, index).
"""
from __future__ import annotations

import functools
import json
import math
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np

from .morphology import DEFAULT_SE, denoise
from .raster import BinaryImage, GrayImage, read_pgm, write_pgm

FRAME = 256
MARGIN = 8
MIN_CLASS_SEPARATION = 0.05
FINGER_GAP = 24.0
# static ASL letters (J and Z need motion)
STATIC_LETTERS = "ABCDEFGHIKLMNOPQRSTUVWXY"

_CANDIDATE_STREAM = 0x5EED_C1A55
_MAX_CANDIDATES = 20000


class GenerationError(ValueError):
    pass


@dataclass(frozen=True)
class Finger:
    angle: float  # degrees, image coordinates (-90 points up)
    length: float  # beyond the palm rim
    width: float


@dataclass(frozen=True)
class GestureSpec:
    class_id: int
    palm_center: tuple[float, float]  # (x, y)
    palm_radius: float
    fingers: tuple[Finger, ...] = ()

    def reach(self) -> float:
        """Largest distance of any shape point from the palm centre."""
        r = self.palm_radius
        return max([r] + [math.hypot(r + f.length, f.width / 2) for f in self.fingers])


@dataclass(frozen=True)
class RenderParams:
    fg_level: int = 200
    bg_level: int = 30
    noise_sigma: float = 0.0
    speck_prob: float = 0.0
    rotation: float = 0.0
    translation: tuple[float, float] = (0.0, 0.0)
    seed: int = 0

    def __post_init__(self):
        if self.fg_level - self.bg_level < 64:
            raise ValueError("fg_level must exceed bg_level by at least 64")
        if not 0 <= self.bg_level <= 255 or not 0 <= self.fg_level <= 255:
            raise ValueError("levels must lie in [0, 255]")
        if not 0.0 <= self.speck_prob <= 0.01:
            raise ValueError("speck_prob must lie in [0, 0.01]")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be non-negative")


@dataclass(frozen=True)
class PerturbationRanges:
    rotation: float = 6.0
    translation: float = 4.0
    noise_sigma: float = 8.0
    speck_prob: float = 0.002


def rasterize(spec: GestureSpec, frame: int = FRAME, rotation: float = 0.0,
              translation: tuple[float, float] = (0.0, 0.0)) -> np.ndarray:
    """Boolean mask of pixels whose centre falls inside the transformed shape.

    The shape rotates about the palm centre and is then translated.
    """
    cx, cy = spec.palm_center
    tx, ty = translation
    ys, xs = np.mgrid[0:frame, 0:frame].astype(np.float64)
    theta = math.radians(rotation)
    c, s = math.cos(theta), math.sin(theta)
    # inverse transform into shape coordinates, relative to the palm centre
    dx, dy = xs - cx - tx, ys - cy - ty
    u = c * dx + s * dy
    v = -s * dx + c * dy
    r = spec.palm_radius
    mask = u * u + v * v <= r * r
    for f in spec.fingers:
        a = math.radians(f.angle)
        along = u * math.cos(a) + v * math.sin(a)
        across = -u * math.sin(a) + v * math.cos(a)
        mask |= (along >= 0) & (along <= r + f.length) & (np.abs(across) <= f.width / 2)
    return mask


def ground_truth_mask(spec: GestureSpec, frame: int = FRAME, rotation: float = 0.0,
                      translation: tuple[float, float] = (0.0, 0.0)) -> BinaryImage:
    """Rasterized shape smoothed by the default cleanup, so it is a fixed point of it."""
    mask = BinaryImage(rasterize(spec, frame, rotation, translation))
    mask = denoise(mask, DEFAULT_SE)
    if not _respects_margin(mask.pixels):
        raise GenerationError(f"class {spec.class_id}: shape leaves the {MARGIN}-pixel frame margin")
    return mask


def _respects_margin(mask: np.ndarray) -> bool:
    rows, cols = np.nonzero(mask)
    if rows.size == 0:
        return False
    h, w = mask.shape
    return (rows.min() >= MARGIN and cols.min() >= MARGIN
            and rows.max() < h - MARGIN and cols.max() < w - MARGIN)


def _candidate(rng: np.random.Generator, frame: int, max_reach: float) -> GestureSpec:
    center = (frame / 2, frame / 2)
    radius = float(rng.uniform(0.10, 0.19)) * frame
    n = int(rng.integers(0, 6))
    # n sorted angles in [-170, -10] at least FINGER_GAP apart
    spread = 160.0 - (n - 1) * FINGER_GAP
    angles = np.sort(rng.uniform(0.0, spread, size=n)) - 170.0 + np.arange(n) * FINGER_GAP
    fingers = []
    for a in angles:
        width = float(rng.uniform(0.05, 0.095)) * frame
        longest = math.sqrt(max_reach ** 2 - (width / 2) ** 2) - radius
        length = float(rng.uniform(0.35, 1.0)) * longest
        fingers.append(Finger(round(float(a), 3), round(length, 3), round(width, 3)))
    return GestureSpec(-1, center, round(radius, 3), tuple(fingers))


class _ClassPool:
    """Greedy, lazily extended list of mutually separated class shapes for one seed.

    Rotation about the palm centre preserves distances, so bounding the reach
    and adding worst-case translation keeps every perturbed render inside the
    frame margin.
    """

    def __init__(self, seed: int, frame: int, separation: float):
        slack = PerturbationRanges().translation * math.sqrt(2) + 1.5
        self.max_reach = frame / 2 - MARGIN - slack
        self.frame = frame
        self.min_diff = separation * frame * frame
        self.rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, _CANDIDATE_STREAM])))
        self.tried = 0
        self.specs: list[GestureSpec] = []
        self.masks: list[np.ndarray] = []

    def get(self, class_id: int) -> GestureSpec:
        while len(self.specs) <= class_id:
            if self.tried >= _MAX_CANDIDATES:
                raise GenerationError(f"could only find {len(self.specs)} separable classes")
            self.tried += 1
            cand = _candidate(self.rng, self.frame, self.max_reach)
            mask = ground_truth_mask(cand, self.frame).pixels.astype(bool)
            if all(np.count_nonzero(mask ^ m) >= self.min_diff for m in self.masks):
                self.specs.append(GestureSpec(len(self.specs), cand.palm_center, cand.palm_radius, cand.fingers))
                self.masks.append(mask)
        return self.specs[class_id]


@functools.lru_cache(maxsize=16)
def _class_pool(seed: int, frame: int, separation: float) -> _ClassPool:
    return _ClassPool(seed, frame, separation)


def class_spec(class_id: int, classes: int, seed: int, frame: int = FRAME) -> GestureSpec:
    """Shape of ``class_id``; depends only on (class_id, seed), not on ``classes``."""
    if not 0 <= class_id < classes:
        raise ValueError(f"class_id {class_id} outside [0, {classes})")
    # greedy acceptance is prefix-stable, so asking for more classes never changes earlier ones
    return _class_pool(seed, frame, MIN_CLASS_SEPARATION).get(class_id)


def render(spec: GestureSpec, params: RenderParams = RenderParams(),
           frame: int = FRAME) -> tuple[GrayImage, BinaryImage]:
    truth = ground_truth_mask(spec, frame, params.rotation, params.translation)
    rng = np.random.Generator(np.random.PCG64(params.seed))
    gray = np.where(truth.pixels == 1, params.fg_level, params.bg_level).astype(np.float64)
    if params.noise_sigma > 0:
        gray += rng.normal(0.0, params.noise_sigma, gray.shape)
    gray = np.clip(np.rint(gray), 0, 255)
    if params.speck_prob > 0:
        gray[rng.random(gray.shape) < params.speck_prob] = 255
    return GrayImage(gray.astype(np.uint8)), truth


def class_labels(classes: int) -> list[str]:
    if classes <= len(STATIC_LETTERS):
        return list(STATIC_LETTERS[:classes])
    return [f"C{i:02d}" for i in range(classes)]


def sample_params(seed: int, class_id: int, index: int,
                  ranges: PerturbationRanges = PerturbationRanges()) -> RenderParams:
    """Perturbation for one sample; index 0 is the clean enrollment render."""
    rng = np.random.Generator(np.random.PCG64(np.random.SeedSequence([seed, class_id, index])))
    noise_seed = int(rng.integers(0, 2 ** 63))
    if index == 0:
        return RenderParams(seed=noise_seed)
    rotation = float(rng.uniform(-ranges.rotation, ranges.rotation))
    tx, ty = rng.uniform(-ranges.translation, ranges.translation, size=2)
    return RenderParams(
        noise_sigma=ranges.noise_sigma,
        speck_prob=ranges.speck_prob,
        rotation=round(rotation, 6),
        translation=(round(float(tx), 6), round(float(ty), 6)),
        seed=noise_seed,
    )


@dataclass
class Sample:
    label: str
    class_id: int
    index: int
    image: GrayImage
    params: RenderParams | None = None
    ground_truth: BinaryImage | None = None


@dataclass
class Dataset:
    seed: int
    classes: int
    per_class: int
    labels: list[str]
    samples: list[Sample]
    ranges: PerturbationRanges = field(default_factory=PerturbationRanges)
    frame: int = FRAME

    def __len__(self):
        return len(self.samples)

    def enrollment(self) -> list[Sample]:
        """The clean first sample of every class, in label order."""
        return [s for s in self.samples if s.index == 0]


def generate_sample(seed: int, class_id: int, index: int, classes: int,
                    ranges: PerturbationRanges = PerturbationRanges(), frame: int = FRAME) -> Sample:
    spec = class_spec(class_id, classes, seed, frame)
    params = sample_params(seed, class_id, index, ranges)
    image, truth = render(spec, params, frame)
    return Sample(class_labels(classes)[class_id], class_id, index, image, params, truth)


def generate_dataset(classes: int, per_class: int, seed: int,
                     ranges: PerturbationRanges = PerturbationRanges(), frame: int = FRAME) -> Dataset:
    if classes < 2 or per_class < 1:
        raise ValueError("need at least 2 classes and 1 sample per class")
    samples = [generate_sample(seed, c, k, classes, ranges, frame)
               for c in range(classes) for k in range(per_class)]
    return Dataset(seed, classes, per_class, class_labels(classes), samples, ranges, frame)


DATASET_MANIFEST = "manifest.json"


def _sample_path(label: str, index: int) -> str:
    return f"{label}/{index:03d}.pgm"


def save_dataset(dataset: Dataset, out_dir) -> None:
    root = Path(out_dir)
    root.mkdir(parents=True, exist_ok=True)
    records = []
    for s in dataset.samples:
        rel = _sample_path(s.label, s.index)
        (root / s.label).mkdir(exist_ok=True)
        write_pgm(root / rel, s.image)
        records.append({
            "label": s.label,
            "class_id": s.class_id,
            "index": s.index,
            "file": rel,
            "enrollment": s.index == 0,
            "params": asdict(s.params) if s.params else None,
        })
    manifest = {
        "seed": dataset.seed,
        "classes": dataset.classes,
        "per_class": dataset.per_class,
        "frame": dataset.frame,
        "labels": dataset.labels,
        "perturbation_ranges": asdict(dataset.ranges),
        "samples": records,
    }
    (root / DATASET_MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")


def load_dataset(path) -> Dataset:
    """Read a dataset directory written by :func:`save_dataset` (no ground truth)."""
    root = Path(path)
    manifest = json.loads((root / DATASET_MANIFEST).read_text())
    samples = []
    for rec in manifest["samples"]:
        params = rec.get("params")
        if params is not None:
            params = dict(params, translation=tuple(params["translation"]))
            params = RenderParams(**params)
        samples.append(Sample(rec["label"], rec["class_id"], rec["index"],
                              read_pgm(root / rec["file"]), params))
    return Dataset(manifest["seed"], manifest["classes"], manifest["per_class"],
                   list(manifest["labels"]), samples,
                   PerturbationRanges(**manifest["perturbation_ranges"]), manifest.get("frame", FRAME))
