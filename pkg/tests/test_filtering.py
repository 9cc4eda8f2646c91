"""Denoising filter tests: median, gaussian, bilateral, and the dispatcher."""

import numpy as np
import pytest

from ringsight.filtering import (
    DEFAULT_BILATERAL_SIGMA_COLOR,
    FilterSpec,
    apply_filter,
    bilateral_filter,
    gaussian_filter,
    median_filter,
)

from _oracles import brute_force_median, dense_gaussian


def random_image(rng, h, w):
    return rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8)


# --- FilterSpec ---


def test_filter_spec_defaults():
    spec = FilterSpec()
    assert spec.kind == "median"
    assert spec.window == 15
    assert spec.sigma_space is None
    assert spec.sigma_color is None


def test_filter_spec_fills_gaussian_sigma():
    spec = FilterSpec(kind="gaussian", window=9)
    assert spec.sigma_space == pytest.approx(9 / 6)
    assert spec.sigma_color is None


def test_filter_spec_fills_bilateral_sigmas():
    spec = FilterSpec(kind="bilateral", window=5)
    assert spec.sigma_space == pytest.approx(5 / 6)
    assert spec.sigma_color == DEFAULT_BILATERAL_SIGMA_COLOR


def test_filter_spec_validation():
    with pytest.raises(ValueError):
        FilterSpec(kind="box")
    with pytest.raises(ValueError):
        FilterSpec(window=4)
    with pytest.raises(ValueError):
        FilterSpec(window=-3)
    with pytest.raises(ValueError):
        FilterSpec(kind="median", sigma_space=1.0)
    with pytest.raises(ValueError):
        FilterSpec(kind="gaussian", sigma_color=5.0)
    with pytest.raises(ValueError):
        FilterSpec(kind="gaussian", sigma_space=-1.0)


# --- median ---


def test_median_window_one_is_copy():
    rng = np.random.default_rng(31)
    img = random_image(rng, 6, 7)
    out = median_filter(img, 1)
    assert np.array_equal(out, img)
    assert out is not img


def test_median_constant_image_unchanged():
    img = np.full((10, 12, 3), 87, dtype=np.uint8)
    for window in (3, 5, 7):
        assert np.array_equal(median_filter(img, window), img)


def test_median_removes_isolated_impulse():
    img = np.full((9, 9, 3), 50, dtype=np.uint8)
    img[4, 4] = (255, 0, 255)
    out = median_filter(img, 3)
    assert np.array_equal(out, np.full((9, 9, 3), 50, dtype=np.uint8))


def test_median_matches_brute_force_small():
    rng = np.random.default_rng(32)
    for trial in range(10):
        img = random_image(rng, 9, 9)
        for window in (3, 5):
            got = median_filter(img, window)
            ref = brute_force_median(img, window)
            assert np.array_equal(got, ref), (trial, window)


def test_median_matches_brute_force_wide_window():
    # window larger than half the image exercises heavy border clamping
    rng = np.random.default_rng(33)
    img = random_image(rng, 8, 11)
    assert np.array_equal(median_filter(img, 7), brute_force_median(img, 7))


def test_median_rejects_even_window():
    img = np.zeros((5, 5, 3), dtype=np.uint8)
    with pytest.raises(ValueError):
        median_filter(img, 4)


# --- gaussian ---


def test_gaussian_window_one_is_identity():
    rng = np.random.default_rng(34)
    img = random_image(rng, 5, 6)
    assert np.array_equal(gaussian_filter(img, 1, 0.5), img)


def test_gaussian_matches_dense_reference():
    rng = np.random.default_rng(35)
    for trial in range(8):
        img = random_image(rng, 9, 9)
        for window, sigma in ((3, 0.8), (5, 1.3), (7, 7 / 6)):
            got = gaussian_filter(img, window, sigma)
            ref = dense_gaussian(img, window, sigma)
            diff = np.abs(got.astype(int) - ref.astype(int))
            assert diff.max() <= 1, (trial, window, sigma, diff.max())


def test_gaussian_impulse_response_symmetric():
    img = np.zeros((7, 7, 3), dtype=np.uint8)
    img[3, 3] = 255
    out = gaussian_filter(img, 3, 1.0).astype(int)
    assert out[3, 3, 0] > out[2, 3, 0] > 0
    assert out[2, 3, 0] == out[4, 3, 0] == out[3, 2, 0] == out[3, 4, 0]
    assert out[2, 2, 0] == out[4, 4, 0] == out[2, 4, 0] == out[4, 2, 0]
    assert out[0, 0, 0] == 0


def test_gaussian_preserves_constant_regions():
    img = np.full((12, 12, 3), 140, dtype=np.uint8)
    out = gaussian_filter(img, 5, 1.0)
    assert np.array_equal(out, img)


# --- bilateral ---


def test_bilateral_constant_image_unchanged():
    img = np.full((8, 8, 3), 99, dtype=np.uint8)
    out = bilateral_filter(img, 5, 1.0, 20.0)
    assert np.array_equal(out, img)


def test_bilateral_large_sigma_color_approaches_gaussian():
    rng = np.random.default_rng(36)
    img = random_image(rng, 10, 10)
    got = bilateral_filter(img, 5, 1.2, 1e9)
    ref = gaussian_filter(img, 5, 1.2)
    diff = np.abs(got.astype(int) - ref.astype(int))
    assert diff.max() <= 1


def test_bilateral_preserves_step_edge_better_than_gaussian():
    img = np.zeros((10, 10, 3), dtype=np.uint8)
    img[:, 5:] = 200
    bil = bilateral_filter(img, 5, 2.0, 10.0)
    gau = gaussian_filter(img, 5, 2.0)
    bil_err = np.abs(bil.astype(int) - img.astype(int)).max()
    gau_err = np.abs(gau.astype(int) - img.astype(int)).max()
    assert bil_err <= 2
    assert gau_err >= 30


def test_bilateral_window_one_is_copy():
    rng = np.random.default_rng(37)
    img = random_image(rng, 4, 5)
    assert np.array_equal(bilateral_filter(img, 1, 0.5, 10.0), img)


# --- dispatcher ---


def test_apply_filter_dispatches_each_kind():
    rng = np.random.default_rng(38)
    img = random_image(rng, 9, 9)
    m = apply_filter(img, FilterSpec(kind="median", window=3))
    assert np.array_equal(m, median_filter(img, 3))
    g_spec = FilterSpec(kind="gaussian", window=5, sigma_space=1.1)
    assert np.array_equal(apply_filter(img, g_spec), gaussian_filter(img, 5, 1.1))
    b_spec = FilterSpec(kind="bilateral", window=5, sigma_space=1.1, sigma_color=30.0)
    assert np.array_equal(
        apply_filter(img, b_spec), bilateral_filter(img, 5, 1.1, 30.0)
    )
