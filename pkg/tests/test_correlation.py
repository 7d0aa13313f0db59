import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from handncc.correlation import (
    CorrelationMap,
    autocorrelation_map,
    central_crop_box,
    central_kernel,
    make_kernel,
    match_point,
    ncc_map_fast,
    ncc_map_reference,
    ncc_maps_fast,
)
from oracles import ncc_oracle

I4 = np.array([[12, 200, 37, 90], [55, 3, 148, 77], [240, 61, 19, 133], [8, 172, 99, 41]])
T2 = np.array([[10, 80], [45, 7]])
# evaluated independently at 40 significant digits, rounded to double
I4_T2_MAP = np.array([
    [0.96183957070257745, -0.80293838824535496, 0.48079841047845865],
    [-0.068276887689241041, 0.97921239778167152, -0.65442999305065009],
    [-0.76085980042772376, -0.28364645902533507, 0.96627808461053152],
])

BOTH = [ncc_map_reference, ncc_map_fast]


def test_make_kernel_checkerboard():
    k = make_kernel([[0, 1], [1, 0]])
    assert k.mean == 0.5
    assert k.centered_norm == 1.0
    assert k.centered.tolist() == [[-0.5, 0.5], [0.5, -0.5]]


def test_make_kernel_constant_is_flat():
    k = make_kernel(np.full((3, 3), 7))
    assert k.flat and k.centered_norm == 0.0 and k.mean == 7.0


@pytest.mark.parametrize("fn", BOTH)
def test_frozen_small_map(fn):
    out = fn(I4, make_kernel(T2)).data
    assert out.shape == (3, 3)
    np.testing.assert_allclose(out, I4_T2_MAP, rtol=0, atol=1e-12)


def test_oracle_agrees_with_frozen_map():
    np.testing.assert_allclose(ncc_oracle(I4, T2), I4_T2_MAP, rtol=0, atol=1e-14)


@pytest.mark.parametrize("fn", BOTH)
def test_self_and_inverse_match(fn):
    rng = np.random.default_rng(0)
    img = rng.integers(0, 256, size=(20, 24)).astype(float)
    crop = img[5:13, 7:17]
    cm = fn(img, make_kernel(crop))
    assert cm.data[5, 7] == 1.0
    anti = fn(img, make_kernel(255 - crop))
    assert anti.data[5, 7] == -1.0
    assert match_point(cm) == type(match_point(cm))(7, 5, cm.data[5, 7])


@pytest.mark.parametrize("fn", BOTH)
def test_constant_image_gives_zero_map(fn):
    cm = fn(np.full((10, 9), 42), make_kernel(T2))
    assert cm.data.shape == (9, 8)
    assert not cm.data.any()


@pytest.mark.parametrize("fn", BOTH)
def test_flat_kernel_gives_zero_map(fn):
    rng = np.random.default_rng(1)
    assert not fn(rng.integers(0, 256, size=(8, 8)), make_kernel(np.ones((3, 3)))).data.any()


@pytest.mark.parametrize("fn", BOTH)
def test_kernel_larger_than_image(fn):
    with pytest.raises(ValueError):
        fn(np.ones((3, 3)), make_kernel(np.arange(16).reshape(4, 4)))


@pytest.mark.parametrize("fn", BOTH)
def test_kernel_equal_to_image(fn):
    rng = np.random.default_rng(2)
    img = rng.integers(0, 256, size=(6, 5))
    cm = fn(img, make_kernel(img))
    assert cm.data.shape == (1, 1)
    assert cm.data[0, 0] == pytest.approx(1.0, abs=1e-12)


def test_reference_matches_oracle_on_random_pairs():
    rng = np.random.default_rng(7)
    for _ in range(30):
        n, m = rng.integers(3, 12, size=2)
        q, p = rng.integers(1, n + 1), rng.integers(1, m + 1)
        img = rng.integers(0, 256, size=(n, m))
        ker = rng.integers(0, 256, size=(q, p))
        expected = ncc_oracle(img, ker)
        k = make_kernel(ker)
        np.testing.assert_allclose(ncc_map_reference(img, k).data, expected, rtol=0, atol=1e-12)
        np.testing.assert_allclose(ncc_map_fast(img, k).data, expected, rtol=0, atol=1e-9)


def test_non_integer_inputs_match_oracle():
    rng = np.random.default_rng(10)
    for _ in range(10):
        img = rng.random((9, 10)) * 3.7
        ker = rng.random((3, 4)) - 0.5
        expected = ncc_oracle(img, ker)
        k = make_kernel(ker)
        np.testing.assert_allclose(ncc_map_reference(img, k).data, expected, rtol=0, atol=1e-12)
        np.testing.assert_allclose(ncc_map_fast(img, k).data, expected, rtol=0, atol=1e-9)


def test_fast_matches_reference_with_flat_regions():
    rng = np.random.default_rng(3)
    for _ in range(10):
        img = np.zeros((30, 30))
        img[rng.integers(0, 20):, rng.integers(0, 20):] = 255
        img[rng.integers(0, 30, 5), rng.integers(0, 30, 5)] = 128
        ker = rng.integers(0, 2, size=(6, 7)) * 255
        k = make_kernel(ker)
        np.testing.assert_allclose(ncc_map_fast(img, k).data, ncc_map_reference(img, k).data, rtol=0, atol=1e-9)


def test_fast_matches_reference_at_canonical_size():
    rng = np.random.default_rng(4)
    img = (rng.random((128, 128)) < 0.5).astype(float) * 255
    k = central_kernel(img, 0.5)
    fast = ncc_map_fast(img, k).data
    ref = ncc_map_reference(img, k).data
    assert fast.shape == ref.shape == (65, 65)
    assert np.max(np.abs(fast - ref)) <= 1e-9


def test_batched_equals_single():
    rng = np.random.default_rng(5)
    img = rng.integers(0, 256, size=(25, 25))
    kernels = [make_kernel(rng.integers(0, 256, size=(5, 6))) for _ in range(3)]
    kernels.append(make_kernel(np.zeros((5, 6))))
    maps = ncc_maps_fast(img, kernels)
    for k, cm in zip(kernels, maps):
        np.testing.assert_allclose(cm.data, ncc_map_fast(img, k).data, rtol=0, atol=1e-12)
    assert ncc_maps_fast(img, []) == []
    with pytest.raises(ValueError):
        ncc_maps_fast(img, [kernels[0], make_kernel(np.ones((2, 2)))])


grids = st.integers(0, 2**32 - 1).map(lambda s: np.random.default_rng(s))


@settings(max_examples=40, deadline=None)
@given(grids)
def test_bounds(rng):
    img = rng.integers(0, 256, size=(12, 12))
    ker = rng.integers(0, 256, size=(4, 3))
    for fn in BOTH:
        data = fn(img, make_kernel(ker)).data
        assert np.all(np.abs(data) <= 1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(grids, st.floats(0.1, 10), st.floats(-100, 100))
def test_affine_invariance(rng, a, b):
    img = rng.integers(0, 256, size=(10, 11)).astype(float)
    k = make_kernel(rng.integers(0, 256, size=(3, 4)))
    base = ncc_map_reference(img, k).data
    np.testing.assert_allclose(ncc_map_reference(a * img + b, k).data, base, atol=1e-9)
    np.testing.assert_allclose(ncc_map_reference(-a * img + b, k).data, -base, atol=1e-9)


def test_swap_symmetry_when_sizes_match():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = rng.integers(0, 256, size=(5, 4))
        b = rng.integers(0, 256, size=(5, 4))
        ab = ncc_map_reference(a, make_kernel(b)).data[0, 0]
        ba = ncc_map_reference(b, make_kernel(a)).data[0, 0]
        assert ab == pytest.approx(ba, abs=1e-12)


def test_match_point_tie_goes_to_first_row_major():
    data = np.zeros((3, 4))
    data[2, 0] = data[1, 3] = 0.9
    mp = match_point(CorrelationMap(data))
    assert (mp.x, mp.y, mp.gamma) == (3, 1, 0.9)


def test_match_point_against_linear_scan():
    rng = np.random.default_rng(8)
    for _ in range(20):
        data = rng.integers(-3, 4, size=(6, 7)) / 3
        best = None
        for y in range(6):
            for x in range(7):
                if best is None or data[y, x] > best[2]:
                    best = (x, y, data[y, x])
        mp = match_point(CorrelationMap(data))
        assert (mp.x, mp.y, mp.gamma) == best


def test_central_crop_box():
    assert central_crop_box(128, 128, 0.5) == (32, 32, 64, 64)
    assert central_crop_box(7, 5, 0.5) == (2, 1, 3, 2)
    assert central_crop_box(4, 4, 1.0) == (0, 0, 4, 4)
    for bad in (0.0, -0.5, 1.5):
        with pytest.raises(ValueError):
            central_crop_box(10, 10, bad)
    with pytest.raises(ValueError):
        central_crop_box(1, 1, 0.5)


def test_autocorrelation_peak_at_crop_origin():
    rng = np.random.default_rng(9)
    for _ in range(5):
        tmpl = (rng.random((32, 32)) < 0.5).astype(float)
        auto = autocorrelation_map(tmpl, 0.5)
        assert auto.data.shape == (17, 17)
        assert auto.data[8, 8] == pytest.approx(1.0, abs=1e-12)
        k = central_kernel(tmpl, 0.5)
        assert np.array_equal(auto.data, ncc_map_reference(tmpl, k).data)


def test_autocorrelation_of_constant_template_is_zero():
    assert not autocorrelation_map(np.ones((16, 16)), 0.5).data.any()
