"""Zero-mean normalized cross-correlation (NCC) maps.

For a p x q kernel T and an m x n image I, the map entry at window offset
(x, y) is

    gamma(x, y) = sum(dI * dT) / sqrt(sum(dI**2) * sum(dT**2))

with dI = I(x+s, y+t) - mean of that window and dT = T(s, t) - mean(T).
A flat window or a flat kernel gives gamma = 0.

Arrays are indexed ``[row, column]``; x is the column offset and y the row
offset, so a map has shape ``(n - q + 1, m - p + 1)``.

Two kernels compute the same map:

* :func:`ncc_map_reference` evaluates every window directly.
* :func:`ncc_map_fast` gets window sums and sums of squares from summed-area
  tables, so only the numerator costs O(pq) per window.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy import ndimage


def _readonly(arr: np.ndarray) -> np.ndarray:
    arr.setflags(write=False)
    return arr


def _as_grid(values) -> np.ndarray:
    if hasattr(values, "pixels"):
        values = values.pixels
    arr = np.array(values, dtype=np.float64)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D grid, got shape {arr.shape}")
    return arr


@dataclass(frozen=True, eq=False)
class Kernel:
    data: np.ndarray
    mean: float
    centered: np.ndarray
    centered_norm: float
    # pq * sum(T^2) - sum(T)^2, i.e. pq * sum(dT^2); exact for integer kernels
    scaled_energy: float = 0.0

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def flat(self) -> bool:
        return self.centered_norm == 0.0


def make_kernel(values) -> Kernel:
    data = _as_grid(values)
    mean = float(data.mean())
    if np.ptp(data) == 0:
        return Kernel(_readonly(data), mean, _readonly(np.zeros_like(data)), 0.0, 0.0)
    centered = data - mean
    norm = math.sqrt(float(np.sum(centered * centered)))
    scaled = float(data.size * np.sum(data * data) - np.sum(data) ** 2)
    return Kernel(_readonly(data), mean, _readonly(centered), norm, scaled)


@dataclass(frozen=True, eq=False)
class CorrelationMap:
    data: np.ndarray

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def height(self) -> int:
        return self.data.shape[0]


@dataclass(frozen=True)
class MatchPoint:
    x: int
    y: int
    gamma: float


def _check_fits(image: np.ndarray, kernel: Kernel):
    if kernel.height > image.shape[0] or kernel.width > image.shape[1]:
        raise ValueError(
            f"kernel {kernel.width}x{kernel.height} larger than image "
            f"{image.shape[1]}x{image.shape[0]}"
        )


def _is_integral(arr: np.ndarray) -> bool:
    return bool(np.all(arr == np.round(arr))) and float(np.max(np.abs(arr))) < 2 ** 31


def ncc_map_reference(image, kernel: Kernel) -> CorrelationMap:
    """Direct per-window evaluation.

    Integer-valued inputs are scored from exact integer window moments, using
    n * sum(dI * dT) = n * sum(I * T) - sum(I) * sum(T), so a window equal to the
    kernel (or to its negative image) gives exactly +1 (or -1).
    """
    img = _as_grid(image)
    _check_fits(img, kernel)
    q, p = kernel.height, kernel.width
    out = np.zeros((img.shape[0] - q + 1, img.shape[1] - p + 1))
    if kernel.flat:
        return CorrelationMap(_readonly(out))
    if _is_integral(img) and _is_integral(kernel.data):
        return CorrelationMap(_readonly(_reference_integer(img.astype(np.int64), kernel, out)))
    dT = kernel.centered
    for y in range(out.shape[0]):
        for x in range(out.shape[1]):
            window = img[y:y + q, x:x + p]
            if np.ptp(window) == 0:
                continue
            dI = window - window.mean()
            out[y, x] = np.sum(dI * dT) / math.sqrt(np.sum(dI * dI) * kernel.centered_norm ** 2)
    return CorrelationMap(_readonly(out))


def _reference_integer(img: np.ndarray, kernel: Kernel, out: np.ndarray) -> np.ndarray:
    q, p = kernel.height, kernel.width
    n = p * q
    t = kernel.data.astype(np.int64)
    t_sum = int(t.sum())
    t_energy = n * int(np.sum(t * t)) - t_sum * t_sum
    for y in range(out.shape[0]):
        for x in range(out.shape[1]):
            window = img[y:y + q, x:x + p]
            if np.ptp(window) == 0:
                continue
            w_sum = int(window.sum())
            num = n * int(np.sum(window * t)) - w_sum * t_sum
            w_energy = n * int(np.sum(window * window)) - w_sum * w_sum
            out[y, x] = float(num) / math.sqrt(float(w_energy) * float(t_energy))
    return out


def summed_area_table(values: np.ndarray) -> np.ndarray:
    """Zero-padded inclusive prefix sums: sat[r, c] = values[:r, :c].sum()."""
    sat = np.zeros((values.shape[0] + 1, values.shape[1] + 1))
    np.cumsum(np.cumsum(values, axis=0), axis=1, out=sat[1:, 1:])
    return sat


def window_sums(sat: np.ndarray, q: int, p: int) -> np.ndarray:
    """Sum over every q x p window from a padded summed-area table."""
    return sat[q:, p:] - sat[:-q, p:] - sat[q:, :-p] + sat[:-q, :-p]


def flat_windows(img: np.ndarray, q: int, p: int) -> np.ndarray:
    """True where a q x p window holds a single value (zero variance).

    Decided from exact window extrema rather than from the summed-area
    variance, so the reference and fast kernels agree on degenerate windows.
    """
    h, w = img.shape[0] - q + 1, img.shape[1] - p + 1
    hi = ndimage.maximum_filter1d(ndimage.maximum_filter1d(img, q, axis=0), p, axis=1)
    lo = ndimage.minimum_filter1d(ndimage.minimum_filter1d(img, q, axis=0), p, axis=1)
    # centred filters: the window anchored at (y, x) is reported at (y + q//2, x + p//2)
    return (hi == lo)[q // 2:q // 2 + h, p // 2:p // 2 + w]


def _cross_sums(img: np.ndarray, kernels: np.ndarray) -> np.ndarray:
    """sum(I * T) for every window and every kernel in ``kernels`` (k, q, p).

    Work is split by kernel row so each step is one matrix product over
    contiguous row segments. Integer-valued inputs stay exact while the sums
    remain below 2**53.
    """
    k, q, p = kernels.shape
    n = img.shape[0]
    h, w = n - q + 1, img.shape[1] - p + 1
    # rows[r * w + x] is the p-long run of image row r starting at column x
    rows = np.ascontiguousarray(sliding_window_view(img, p, axis=1)).reshape(n * w, p)
    by_row = np.ascontiguousarray(kernels.transpose(1, 2, 0))  # (q, p, k)
    out = np.zeros((h * w, k))
    for s in range(q):
        out += rows[s * w:(s + h) * w] @ by_row[s]
    return out.reshape(h, w, k)


def ncc_maps_fast(image, kernels: Sequence[Kernel]) -> list[CorrelationMap]:
    """Fast NCC of one image against several kernels sharing one shape.

    With n = pq, every map entry is
        (n * sum(I*T) - sum(I) * sum(T)) / sqrt(scaled_var(I) * scaled_energy(T))
    where the window sums and sums of squares come from summed-area tables.
    For integer images every term is an exact integer in float64.
    """
    img = _as_grid(image)
    if not kernels:
        return []
    q, p = kernels[0].height, kernels[0].width
    for kern in kernels:
        if (kern.height, kern.width) != (q, p):
            raise ValueError("all kernels must share one shape")
        _check_fits(img, kern)
    h, w = img.shape[0] - q + 1, img.shape[1] - p + 1
    n = p * q

    sums = window_sums(summed_area_table(img), q, p)
    sumsq = window_sums(summed_area_table(img * img), q, p)
    scaled_var = np.maximum(n * sumsq - sums * sums, 0.0)
    flat = flat_windows(img, q, p)

    live = [i for i, kern in enumerate(kernels) if not kern.flat]
    maps = [np.zeros((h, w)) for _ in kernels]
    if live:
        stacked = np.stack([kernels[i].data for i in live])
        cross = _cross_sums(img, stacked)
        safe_var = np.where(flat, 1.0, scaled_var)
        for j, i in enumerate(live):
            kern = kernels[i]
            num = n * cross[:, :, j] - sums * float(kern.data.sum())
            gamma = num / np.sqrt(safe_var * kern.scaled_energy)
            gamma[flat] = 0.0
            maps[i] = gamma
    return [CorrelationMap(_readonly(m)) for m in maps]


def ncc_map_fast(image, kernel: Kernel) -> CorrelationMap:
    return ncc_maps_fast(image, [kernel])[0]


def match_point(cmap: CorrelationMap) -> MatchPoint:
    """Maximum entry; the first in row-major order wins ties."""
    idx = int(np.argmax(cmap.data))
    y, x = divmod(idx, cmap.width)
    return MatchPoint(x, y, float(cmap.data[y, x]))


def central_crop_box(width: int, height: int, kernel_fraction: float) -> tuple[int, int, int, int]:
    """(x0, y0, p, q) of the centred kernel crop covering ``kernel_fraction`` of each side."""
    if not 0.0 < kernel_fraction <= 1.0:
        raise ValueError(f"kernel_fraction must lie in (0, 1], got {kernel_fraction}")
    p = int(width * kernel_fraction)
    q = int(height * kernel_fraction)
    if p < 1 or q < 1:
        raise ValueError(f"kernel crop of a {width}x{height} image at fraction {kernel_fraction} is empty")
    return (width - p) // 2, (height - q) // 2, p, q


def central_kernel(template, kernel_fraction: float) -> Kernel:
    grid = _as_grid(template)
    x0, y0, p, q = central_crop_box(grid.shape[1], grid.shape[0], kernel_fraction)
    return make_kernel(grid[y0:y0 + q, x0:x0 + p])


def autocorrelation_map(template, kernel_fraction: float) -> CorrelationMap:
    """NCC of a template against its own central crop."""
    return ncc_map_reference(template, central_kernel(template, kernel_fraction))
