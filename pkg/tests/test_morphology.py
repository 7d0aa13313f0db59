import numpy as np
import pytest
from hypothesis import given, settings

from conftest import margin_masks, random_margin_mask
from handncc.morphology import (
    DEFAULT_SE,
    StructuringElement,
    closing,
    denoise,
    dilate,
    erode,
    largest_component,
    opening,
)
from handncc.raster import BinaryImage
from oracles import dilate_oracle, erode_oracle, largest_component_oracle

OPS = [erode, dilate, opening, closing]


def B(a):
    return BinaryImage(np.asarray(a))


def subset(a, b):
    return bool(np.all(a.pixels <= b.pixels))


def test_structuring_element_validation():
    with pytest.raises(ValueError):
        StructuringElement(np.ones((2, 3)))
    with pytest.raises(ValueError):
        StructuringElement(np.zeros((3, 3)))
    se = StructuringElement.square(5)
    assert se.origin == (2, 2)
    assert len(list(se.offsets())) == 25


def test_erode_border_shrinks():
    out = erode(B(np.ones((5, 5))))
    expected = np.zeros((5, 5), dtype=int)
    expected[1:4, 1:4] = 1
    assert out.pixels.tolist() == expected.tolist()


def test_erode_single_pixel_vanishes():
    mask = np.zeros((5, 5))
    mask[2, 2] = 1
    assert erode(B(mask)).count() == 0


def test_dilate_single_pixel_to_block():
    mask = np.zeros((5, 5))
    mask[2, 2] = 1
    expected = np.zeros((5, 5), dtype=int)
    expected[1:4, 1:4] = 1
    assert dilate(B(mask)).pixels.tolist() == expected.tolist()


def test_dilate_empty():
    assert dilate(B(np.zeros((4, 6)))).count() == 0


def test_asymmetric_element_matches_oracle():
    se = StructuringElement(np.array([[0, 1, 1], [0, 1, 0], [0, 0, 0]]))
    rng = np.random.default_rng(0)
    for _ in range(20):
        mask = (rng.random((9, 11)) < 0.4).astype(np.uint8)
        assert np.array_equal(erode(B(mask), se).pixels, erode_oracle(mask, se.mask))
        assert np.array_equal(dilate(B(mask), se).pixels, dilate_oracle(mask, se.mask))


def test_erode_dilate_match_oracle_on_random_masks():
    rng = np.random.default_rng(1)
    for side in (1, 3, 5):
        se = StructuringElement.square(side)
        for _ in range(10):
            mask = (rng.random((16, 16)) < rng.uniform(0.2, 0.9)).astype(np.uint8)
            assert np.array_equal(erode(B(mask), se).pixels, erode_oracle(mask, se.mask))
            assert np.array_equal(dilate(B(mask), se).pixels, dilate_oracle(mask, se.mask))


def blob_with_speck_and_hole():
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[5:15, 5:15] = 1
    mask[9, 9] = 0  # pinhole
    mask[2, 17] = 1  # speck
    return mask


def test_open_removes_speck():
    out = opening(B(blob_with_speck_and_hole()))
    assert out.pixels[2, 17] == 0
    assert out.pixels[5:15, 5:15].sum() >= 99 - 1


def test_close_fills_hole():
    mask = np.zeros((20, 20), dtype=np.uint8)
    mask[5:15, 5:15] = 1
    mask[9, 9] = 0
    assert closing(B(mask)).pixels[9, 9] == 1


def test_denoise_removes_speck_and_fills_hole():
    out = denoise(B(blob_with_speck_and_hole()))
    expected = np.zeros((20, 20), dtype=np.uint8)
    expected[5:15, 5:15] = 1
    assert np.array_equal(out.pixels, expected)


def test_denoise_empty():
    assert denoise(B(np.zeros((8, 8)))).count() == 0


def test_denoise_is_composition():
    rng = np.random.default_rng(4)
    for _ in range(20):
        m = B(random_margin_mask(rng, 24, 2))
        assert denoise(m) == largest_component(closing(opening(m, DEFAULT_SE), DEFAULT_SE))


def test_largest_component_keeps_bigger_blob():
    mask = np.zeros((6, 10), dtype=np.uint8)
    mask[1, 1:6] = 1  # 5 pixels
    mask[4, 7:10] = 1  # 3 pixels
    out = largest_component(B(mask))
    assert out.count() == 5 and out.pixels[1, 1:6].all()


def test_largest_component_diagonal_is_connected():
    mask = np.eye(5, dtype=np.uint8)
    mask[0, 4] = 1
    assert largest_component(B(mask)).count() == 5


def test_largest_component_tie_goes_to_first_in_raster_order():
    mask = np.zeros((5, 5), dtype=np.uint8)
    mask[3, 0:2] = 1
    mask[0, 3:5] = 1
    out = largest_component(B(mask))
    assert out.pixels[0, 3] == 1 and out.pixels[3, 0] == 0


def test_largest_component_empty():
    assert largest_component(B(np.zeros((3, 3)))).count() == 0


def test_largest_component_matches_flood_fill_oracle():
    rng = np.random.default_rng(9)
    for _ in range(40):
        mask = (rng.random((18, 18)) < rng.uniform(0.1, 0.45)).astype(np.uint8)
        assert np.array_equal(largest_component(B(mask)).pixels, largest_component_oracle(mask))


# properties on masks whose foreground keeps a 1-pixel margin (the 3x3 radius)

@settings(max_examples=60)
@given(margin_masks())
def test_ordering(mask):
    x = B(mask)
    assert subset(erode(x), x) and subset(x, dilate(x))
    assert subset(opening(x), x) and subset(x, closing(x))


@settings(max_examples=60)
@given(margin_masks())
def test_idempotence(mask):
    x = B(mask)
    assert opening(opening(x)) == opening(x)
    assert closing(closing(x)) == closing(x)


@settings(max_examples=60)
@given(margin_masks())
def test_interior_duality(mask):
    x = B(mask)
    lhs = erode(B(1 - mask)).pixels
    rhs = 1 - dilate(x).pixels
    assert np.array_equal(lhs[1:-1, 1:-1], rhs[1:-1, 1:-1])


@settings(max_examples=60)
@given(margin_masks(), margin_masks())
def test_monotonicity(a, b):
    small = B(a & b)
    large = B(a)
    for op in OPS:
        assert subset(op(small), op(large))
