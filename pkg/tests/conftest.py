import sys
from pathlib import Path

import numpy as np
import pytest
from hypothesis import strategies as st

sys.path.insert(0, str(Path(__file__).parent))

from handncc.classifier import TemplateRegistry, enroll  # noqa: E402
from handncc.segmentation import Histogram  # noqa: E402
from handncc.synthgest import generate_dataset  # noqa: E402


@st.composite
def margin_masks(draw, size=16, margin=1, density=None):
    """Random binary masks whose foreground stays ``margin`` pixels off the frame."""
    seed = draw(st.integers(0, 2**32 - 1))
    p = density if density is not None else draw(st.floats(0.2, 0.8))
    rng = np.random.default_rng(seed)
    mask = np.zeros((size, size), dtype=np.uint8)
    inner = size - 2 * margin
    mask[margin:margin + inner, margin:margin + inner] = rng.random((inner, inner)) < p
    return mask


def random_margin_mask(rng, size=16, margin=1, p=None):
    p = rng.uniform(0.2, 0.8) if p is None else p
    mask = np.zeros((size, size), dtype=np.uint8)
    inner = size - 2 * margin
    mask[margin:margin + inner, margin:margin + inner] = rng.random((inner, inner)) < p
    return mask


def random_histogram(rng):
    counts = np.zeros(256, dtype=np.int64)
    kind = rng.integers(0, 3)
    if kind == 0:
        counts[:] = rng.integers(0, 50, size=256)
    elif kind == 1:
        levels = rng.choice(256, size=rng.integers(2, 6), replace=False)
        counts[levels] = rng.integers(1, 500, size=levels.size)
    else:
        centers = rng.integers(0, 256, size=2)
        samples = np.concatenate([rng.normal(c, rng.uniform(2, 30), size=rng.integers(10, 400)) for c in centers])
        counts = np.bincount(np.clip(np.rint(samples), 0, 255).astype(int), minlength=256)
    if counts.sum() == 0:
        counts[rng.integers(0, 256)] = 1
    return Histogram.from_counts(counts)


@pytest.fixture(scope="session")
def small_dataset():
    return generate_dataset(4, 3, seed=7)


@pytest.fixture(scope="session")
def registry24():
    dataset = generate_dataset(24, 1, seed=42)
    registry = TemplateRegistry()
    for sample in dataset.enrollment():
        enroll(sample.label, sample.image, registry)
    return registry, dataset
