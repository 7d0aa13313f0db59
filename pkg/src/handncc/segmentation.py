"""Otsu global thresholding of 8-bit gray images into hand/background masks."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .raster import BinaryImage, GrayImage

LEVELS = 256


@dataclass(frozen=True, eq=False)
class Histogram:
    counts: np.ndarray
    total: int

    def __post_init__(self):
        counts = np.asarray(self.counts, dtype=np.int64)
        if counts.shape != (LEVELS,):
            raise ValueError(f"histogram needs {LEVELS} bins, got shape {counts.shape}")
        if np.any(counts < 0):
            raise ValueError("histogram counts must be non-negative")
        if int(counts.sum()) != self.total or self.total < 1:
            raise ValueError("histogram total must equal sum(counts) and be >= 1")
        counts = counts.copy()
        counts.setflags(write=False)
        object.__setattr__(self, "counts", counts)

    @classmethod
    def from_counts(cls, counts) -> "Histogram":
        counts = np.asarray(counts, dtype=np.int64)
        return cls(counts, int(counts.sum()))


@dataclass(frozen=True)
class ThresholdResult:
    level: int
    between_class_variance: float


def histogram(img: GrayImage) -> Histogram:
    counts = np.bincount(img.pixels.ravel(), minlength=LEVELS).astype(np.int64)
    return Histogram(counts, img.width * img.height)


def between_class_variance(h: Histogram) -> np.ndarray:
    """sigma_B^2(k) for every split k (class 0 = levels <= k), in double precision."""
    n0 = np.cumsum(h.counts).astype(np.float64)
    s0 = np.cumsum(h.counts * np.arange(LEVELS)).astype(np.float64)
    n, s = float(h.total), s0[-1]
    n1 = n - n0
    with np.errstate(divide="ignore", invalid="ignore"):
        sigma = (s0 * n - s * n0) ** 2 / (n * n * n0 * n1)
    sigma[(n0 == 0) | (n1 == 0)] = 0.0
    return sigma


def otsu_threshold(h: Histogram) -> ThresholdResult:
    """Split level maximising between-class variance; smallest k on ties.

    sigma_B^2(k) = (S0*N - S*n0)^2 / (N^2 * n0 * n1), with n0/S0 the count and
    level sum of class 0. Candidates are compared as exact integer fractions so
    the tie rule never depends on rounding. A single-level histogram has
    sigma_B^2 = 0 everywhere and returns that level (empty mask downstream).
    """
    counts = [int(c) for c in h.counts]
    occupied = [v for v, c in enumerate(counts) if c]
    if len(occupied) == 1:
        return ThresholdResult(occupied[0], 0.0)
    n = h.total
    s = sum(v * c for v, c in enumerate(counts))
    best_k, best_num, best_den = 0, 0, 1
    n0 = s0 = 0
    for k, c in enumerate(counts):
        n0 += c
        s0 += k * c
        n1 = n - n0
        if n0 == 0 or n1 == 0:
            continue
        num = (s0 * n - s * n0) ** 2
        den = n0 * n1
        if num * best_den > best_num * den:
            best_k, best_num, best_den = k, num, den
    return ThresholdResult(best_k, best_num / (best_den * n * n))


def binarize(img: GrayImage, level: int) -> BinaryImage:
    """Pixels strictly brighter than ``level`` become hand (1)."""
    return BinaryImage((img.pixels > level).astype(np.uint8))


def otsu_binarize(img: GrayImage) -> BinaryImage:
    return binarize(img, otsu_threshold(histogram(img)).level)
