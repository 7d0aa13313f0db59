"""Image containers and PGM (Netpbm P2/P5) I/O.

Images are stored as read-only numpy arrays of shape ``(height, width)``,
row-major, so ``img.pixels[y, x]`` is the pixel at column x, row y.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np


class PgmError(ValueError):
    """Malformed PGM input; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (at byte offset {offset})")
        self.offset = offset


def _frozen(arr: np.ndarray, dtype) -> np.ndarray:
    out = np.array(arr, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale image."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"GrayImage needs a non-empty 2-D grid, got shape {arr.shape}")
        if arr.dtype != np.uint8:
            if np.any(arr < 0) or np.any(arr > 255) or np.any(arr != np.round(arr)):
                raise ValueError("GrayImage intensities must be integers in [0, 255]")
        object.__setattr__(self, "pixels", _frozen(arr, np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """Hand/background mask; 1 is hand, 0 is background."""

    pixels: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.pixels)
        if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
            raise ValueError(f"BinaryImage needs a non-empty 2-D grid, got shape {arr.shape}")
        if arr.dtype != bool and not np.all((arr == 0) | (arr == 1)):
            raise ValueError("BinaryImage entries must be exactly 0 or 1")
        object.__setattr__(self, "pixels", _frozen(arr, np.uint8))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    def count(self) -> int:
        return int(self.pixels.sum())

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return self.pixels.shape == other.pixels.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None


_WHITESPACE = b" \t\n\r\x0b\x0c"


class _HeaderReader:
    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def _skip_space_and_comments(self):
        data = self.data
        while self.pos < len(data):
            c = data[self.pos:self.pos + 1]
            if c in _WHITESPACE:
                self.pos += 1
            elif c == b"#":
                nl = data.find(b"\n", self.pos)
                self.pos = len(data) if nl < 0 else nl + 1
            else:
                break

    def token(self, what: str) -> tuple[bytes, int]:
        self._skip_space_and_comments()
        start = self.pos
        data = self.data
        while self.pos < len(data) and data[self.pos:self.pos + 1] not in _WHITESPACE + b"#":
            self.pos += 1
        if self.pos == start:
            raise PgmError(f"unexpected end of data: expected {what}", start)
        return data[start:self.pos], start

    def integer(self, what: str) -> tuple[int, int]:
        """Next token as an int, with the offset where it starts."""
        tok, start = self.token(what)
        if not tok.isdigit():
            raise PgmError(f"invalid {what} {tok!r}", start)
        return int(tok), start


def decode_pgm(data: bytes) -> GrayImage:
    """Parse a P2 (ASCII) or P5 (binary) PGM with maxval <= 255."""
    if data[:2] not in (b"P2", b"P5"):
        raise PgmError(f"bad magic number {data[:2]!r}, expected P2 or P5", 0)
    magic = data[:2]
    reader = _HeaderReader(data)
    reader.pos = 2
    if reader.pos < len(data) and data[2:3] not in _WHITESPACE + b"#":
        raise PgmError("bad magic number: missing whitespace after magic", 2)
    width, width_pos = reader.integer("width")
    height, height_pos = reader.integer("height")
    if width <= 0 or height <= 0:
        raise PgmError(f"dimensions must be positive, got {width}x{height}",
                       width_pos if width <= 0 else height_pos)
    maxval, maxval_pos = reader.integer("maxval")
    if maxval < 1 or maxval > 255:
        raise PgmError(f"maxval {maxval} outside [1, 255]", maxval_pos)
    count = width * height

    if magic == b"P5":
        if reader.pos >= len(data) or data[reader.pos:reader.pos + 1] not in _WHITESPACE:
            raise PgmError("missing whitespace byte after maxval", reader.pos)
        start = reader.pos + 1
        payload = data[start:start + count]
        if len(payload) < count:
            raise PgmError(f"truncated payload: expected {count} bytes, got {len(payload)}", start + len(payload))
        values = np.frombuffer(payload, dtype=np.uint8)
        if values.max() > maxval:
            bad = int(np.argmax(values > maxval))
            raise PgmError(f"sample {values[bad]} exceeds maxval {maxval}", start + bad)
    else:
        values = np.empty(count, dtype=np.uint8)
        for i in range(count):
            v, pos = reader.integer(f"pixel {i}")
            if v > maxval:
                raise PgmError(f"sample {v} exceeds maxval {maxval}", pos)
            values[i] = v
    return GrayImage(values.reshape(height, width))


def encode_pgm(img: GrayImage) -> bytes:
    """Canonical P5 encoding with maxval 255."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode("ascii")
    return header + img.pixels.tobytes()


def read_pgm(path) -> GrayImage:
    with open(path, "rb") as fh:
        return decode_pgm(fh.read())


def write_pgm(path, img: GrayImage) -> None:
    with open(path, "wb") as fh:
        fh.write(encode_pgm(img))


def binary_to_gray(img: BinaryImage, fg: int = 255, bg: int = 0) -> GrayImage:
    if fg == bg:
        raise ValueError("foreground and background intensities must differ")
    return GrayImage(np.where(img.pixels == 1, fg, bg).astype(np.uint8))


def resize_nearest(img: BinaryImage, out_w: int, out_h: int) -> BinaryImage:
    """Nearest-neighbour resample: source index = floor(dst * src_dim / dst_dim)."""
    if out_w < 1 or out_h < 1:
        raise ValueError(f"target size must be positive, got {out_w}x{out_h}")
    rows = (np.arange(out_h) * img.height) // out_h
    cols = (np.arange(out_w) * img.width) // out_w
    return BinaryImage(img.pixels[np.ix_(rows, cols)])
