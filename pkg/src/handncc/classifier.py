"""Template enrollment and minimum-MSE recognition.

Each class keeps one canonical S x S silhouette, the NCC kernel cut from its
centre and the auto-correlation map of the silhouette against that kernel.
A query is canonicalised the same way, correlated against every class kernel,
and assigned to the class whose auto-correlation map it reproduces with the
smallest mean squared error.
"""
from __future__ import annotations

import json
import zlib
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .correlation import CorrelationMap, Kernel, central_kernel, ncc_maps_fast
from .morphology import DEFAULT_SE, StructuringElement, denoise
from .raster import BinaryImage, GrayImage, PgmError, binary_to_gray, decode_pgm, encode_pgm, resize_nearest
from .segmentation import otsu_binarize

DEFAULT_CANONICAL_SIZE = 128
DEFAULT_KERNEL_FRACTION = 0.5
MANIFEST = "registry.json"


class EmptyForegroundError(ValueError):
    """Segmentation and cleanup left no hand pixels."""


class RegistryConflictError(ValueError):
    pass


class RegistryLoadError(ValueError):
    pass


def preprocess(img: GrayImage, se: StructuringElement = DEFAULT_SE,
               size: int = DEFAULT_CANONICAL_SIZE) -> BinaryImage:
    """Otsu mask -> open/close/largest blob -> nearest resize to size x size."""
    mask = denoise(otsu_binarize(img), se)
    if mask.count() == 0:
        raise EmptyForegroundError("no foreground left after segmentation and denoising")
    canonical = resize_nearest(mask, size, size)
    if canonical.count() == 0:
        raise EmptyForegroundError("foreground vanished when resizing to the canonical frame")
    return canonical


@dataclass(frozen=True, eq=False)
class GestureTemplate:
    label: str
    canonical: BinaryImage
    kernel: Kernel
    auto_map: CorrelationMap

    @classmethod
    def from_canonical(cls, label: str, canonical: BinaryImage, kernel_fraction: float) -> "GestureTemplate":
        kernel = central_kernel(canonical, kernel_fraction)
        # same fast path as query scoring, so a template scores exactly 0 against itself
        (auto,) = ncc_maps_fast(canonical, [kernel])
        return cls(label, canonical, kernel, auto)


@dataclass(frozen=True)
class RecognitionResult:
    label: str
    mse: float
    per_class_scores: dict[str, float] = field(default_factory=dict)


def mse(a: CorrelationMap, b: CorrelationMap) -> float:
    if a.data.shape != b.data.shape:
        raise ValueError(f"map shapes differ: {a.data.shape} vs {b.data.shape}")
    diff = a.data - b.data
    return float(np.mean(diff * diff))


def _best(scores: dict[str, float]) -> str:
    # lowest MSE, then lexicographically smallest label
    return min(scores, key=lambda label: (scores[label], label))


class TemplateRegistry:
    """Ordered, label-unique collection of gesture templates."""

    def __init__(self, canonical_size: int = DEFAULT_CANONICAL_SIZE,
                 kernel_fraction: float = DEFAULT_KERNEL_FRACTION):
        central_kernel(np.zeros((canonical_size, canonical_size)), kernel_fraction)
        self.canonical_size = canonical_size
        self.kernel_fraction = kernel_fraction
        self._entries: dict[str, GestureTemplate] = {}

    def __len__(self):
        return len(self._entries)

    def __iter__(self):
        return iter(self._entries.values())

    def __contains__(self, label):
        return label in self._entries

    def __getitem__(self, label) -> GestureTemplate:
        return self._entries[label]

    @property
    def labels(self) -> list[str]:
        return list(self._entries)

    def __eq__(self, other):
        if not isinstance(other, TemplateRegistry):
            return NotImplemented
        if (self.canonical_size, self.kernel_fraction, self.labels) != (
                other.canonical_size, other.kernel_fraction, other.labels):
            return False
        return all(
            a.canonical == b.canonical and np.array_equal(a.auto_map.data, b.auto_map.data)
            for a, b in zip(self, other)
        )

    __hash__ = None

    def add(self, template: GestureTemplate) -> None:
        if template.label in self._entries:
            raise RegistryConflictError(f"label {template.label!r} is already enrolled")
        if template.canonical.pixels.shape != (self.canonical_size, self.canonical_size):
            raise ValueError(f"template {template.label!r} is not {self.canonical_size}x{self.canonical_size}")
        self._entries[template.label] = template


def enroll(label: str, img: GrayImage, registry: TemplateRegistry,
           se: StructuringElement = DEFAULT_SE) -> TemplateRegistry:
    if label in registry:
        raise RegistryConflictError(f"label {label!r} is already enrolled")
    canonical = preprocess(img, se, registry.canonical_size)
    registry.add(GestureTemplate.from_canonical(label, canonical, registry.kernel_fraction))
    return registry


def _cross_maps(query: BinaryImage, templates: list[GestureTemplate], size: int) -> list[CorrelationMap]:
    if query.pixels.shape != (size, size):
        raise ValueError(f"query is {query.width}x{query.height}, expected {size}x{size}")
    return ncc_maps_fast(query, [t.kernel for t in templates])


def score(query: BinaryImage, template: GestureTemplate) -> float:
    """MSE between the template's auto map and the query-vs-template-kernel map."""
    size = template.canonical.width
    (cross,) = _cross_maps(query, [template], size)
    return mse(template.auto_map, cross)


def score_all(query: BinaryImage, registry: TemplateRegistry) -> dict[str, float]:
    templates = list(registry)
    crosses = _cross_maps(query, templates, registry.canonical_size)
    return {t.label: mse(t.auto_map, c) for t, c in zip(templates, crosses)}


def recognize_canonical(query: BinaryImage, registry: TemplateRegistry) -> RecognitionResult:
    if len(registry) == 0:
        raise RuntimeError("cannot recognize against an empty registry")
    scores = score_all(query, registry)
    label = _best(scores)
    return RecognitionResult(label, scores[label], scores)


def recognize(img: GrayImage, registry: TemplateRegistry,
              se: StructuringElement = DEFAULT_SE) -> RecognitionResult:
    if len(registry) == 0:
        raise RuntimeError("cannot recognize against an empty registry")
    return recognize_canonical(preprocess(img, se, registry.canonical_size), registry)


def crc32_hex(data: bytes) -> str:
    return f"{zlib.crc32(data) & 0xFFFFFFFF:08x}"


def _entry_filename(index: int, label: str) -> str:
    safe = "".join(ch if ch.isalnum() or ch in "-_" else "_" for ch in label)
    return f"{index:03d}_{safe}.pgm"


def save_registry(registry: TemplateRegistry, path) -> None:
    root = Path(path)
    root.mkdir(parents=True, exist_ok=True)
    entries = []
    for i, template in enumerate(registry):
        data = encode_pgm(binary_to_gray(template.canonical, 255, 0))
        name = _entry_filename(i, template.label)
        (root / name).write_bytes(data)
        entries.append({"label": template.label, "file": name, "checksum": crc32_hex(data)})
    manifest = {
        "canonical_size": registry.canonical_size,
        "kernel_fraction": registry.kernel_fraction,
        "entries": entries,
    }
    (root / MANIFEST).write_text(json.dumps(manifest, indent=2) + "\n")


def load_registry(path) -> TemplateRegistry:
    """Load a saved registry, verifying checksums and recomputing auto maps."""
    root = Path(path)
    manifest_path = root / MANIFEST
    if not manifest_path.is_file():
        raise RegistryLoadError(f"no {MANIFEST} in {root}")
    try:
        manifest = json.loads(manifest_path.read_text())
        size = int(manifest["canonical_size"])
        fraction = float(manifest["kernel_fraction"])
        entries = list(manifest["entries"])
    except (ValueError, KeyError, TypeError) as exc:
        raise RegistryLoadError(f"corrupt manifest {manifest_path}: {exc}") from exc

    registry = TemplateRegistry(size, fraction)
    for entry in entries:
        try:
            label, name, checksum = entry["label"], entry["file"], entry["checksum"]
        except (KeyError, TypeError) as exc:
            raise RegistryLoadError(f"corrupt manifest entry {entry!r}") from exc
        file = root / name
        if not file.is_file():
            raise RegistryLoadError(f"entry {label!r}: missing file {name}")
        data = file.read_bytes()
        if crc32_hex(data) != checksum:
            raise RegistryLoadError(f"entry {label!r}: checksum mismatch for {name}")
        try:
            gray = decode_pgm(data)
        except PgmError as exc:
            raise RegistryLoadError(f"entry {label!r}: {exc}") from exc
        if (gray.width, gray.height) != (size, size):
            raise RegistryLoadError(
                f"entry {label!r}: silhouette is {gray.width}x{gray.height}, registry size is {size}")
        if not np.all((gray.pixels == 0) | (gray.pixels == 255)):
            raise RegistryLoadError(f"entry {label!r}: silhouette is not two-valued 0/255")
        canonical = BinaryImage(gray.pixels == 255)
        try:
            registry.add(GestureTemplate.from_canonical(label, canonical, fraction))
        except RegistryConflictError as exc:
            raise RegistryLoadError(f"entry {label!r}: duplicate label") from exc
    return registry
