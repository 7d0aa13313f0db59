"""Binary morphology used to clean up segmented hand masks.

Pixels outside the frame are background for every operator.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from .raster import BinaryImage


@dataclass(frozen=True, eq=False)
class StructuringElement:
    mask: np.ndarray

    def __post_init__(self):
        mask = np.asarray(self.mask)
        if mask.ndim != 2 or mask.shape[0] % 2 == 0 or mask.shape[1] % 2 == 0:
            raise ValueError(f"structuring element sides must be odd, got shape {mask.shape}")
        if not np.all((mask == 0) | (mask == 1)) or not mask.any():
            raise ValueError("structuring element must be a {0,1} grid with at least one 1")
        mask = mask.astype(np.uint8)
        mask.setflags(write=False)
        object.__setattr__(self, "mask", mask)

    @classmethod
    def square(cls, side: int = 3) -> "StructuringElement":
        return cls(np.ones((side, side), dtype=np.uint8))

    @property
    def width(self) -> int:
        return self.mask.shape[1]

    @property
    def height(self) -> int:
        return self.mask.shape[0]

    @property
    def origin(self) -> tuple[int, int]:
        """(column, row) of the centre cell."""
        return self.width // 2, self.height // 2

    def offsets(self):
        """(dy, dx) of every active cell relative to the origin."""
        ox, oy = self.origin
        for r, c in zip(*np.nonzero(self.mask)):
            yield int(r) - oy, int(c) - ox


DEFAULT_SE = StructuringElement.square(3)


def _shifted(padded: np.ndarray, dy: int, dx: int, ry: int, rx: int, h: int, w: int) -> np.ndarray:
    # view of the source at (y + dy, x + dx) for every output (y, x)
    return padded[ry + dy:ry + dy + h, rx + dx:rx + dx + w]


def erode(img: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    h, w = img.pixels.shape
    ry, rx = se.height // 2, se.width // 2
    padded = np.pad(img.pixels.astype(bool), ((ry, ry), (rx, rx)))
    out = np.ones((h, w), dtype=bool)
    for dy, dx in se.offsets():
        out &= _shifted(padded, dy, dx, ry, rx, h, w)
    return BinaryImage(out)


def dilate(img: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    h, w = img.pixels.shape
    ry, rx = se.height // 2, se.width // 2
    padded = np.pad(img.pixels.astype(bool), ((ry, ry), (rx, rx)))
    out = np.zeros((h, w), dtype=bool)
    # reflected element
    for dy, dx in se.offsets():
        out |= _shifted(padded, -dy, -dx, ry, rx, h, w)
    return BinaryImage(out)


def opening(img: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    return dilate(erode(img, se), se)


def closing(img: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    return erode(dilate(img, se), se)


_EIGHT = np.ones((3, 3), dtype=int)


def largest_component(img: BinaryImage) -> BinaryImage:
    """Keep the largest 8-connected blob.

    Labels are assigned in raster order of each blob's first pixel, so on a
    size tie the lowest label is the blob whose first pixel comes first.
    """
    labels, n = ndimage.label(img.pixels, structure=_EIGHT)
    if n == 0:
        return img
    sizes = np.bincount(labels.ravel())[1:]
    keep = int(np.argmax(sizes)) + 1
    return BinaryImage(labels == keep)


def denoise(img: BinaryImage, se: StructuringElement = DEFAULT_SE) -> BinaryImage:
    """Opening (drops specks), closing (fills pinholes), then the largest blob."""
    return largest_component(closing(opening(img, se), se))
