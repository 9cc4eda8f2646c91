"""Noise-suppression filters applied ahead of segmentation.

All three filters share the same conventions: odd square windows, borders
handled by clamp-to-border replication, output dimensions equal to input,
channel values kept in 0..255. The pipeline default is the median filter
with a 15 pixel window.
"""

from dataclasses import dataclass
from typing import Optional

import cv2
import numpy as np
from scipy.ndimage import convolve1d

from .validation import check_odd_window, check_positive, check_rgb_image

FILTER_KINDS = ("gaussian", "median", "bilateral")
DEFAULT_MEDIAN_WINDOW = 15
DEFAULT_BILATERAL_SIGMA_COLOR = 25.0


@dataclass(frozen=True)
class FilterSpec:
    """A filter choice plus its parameters.

    sigma_space applies to gaussian and bilateral kinds (default window/6),
    sigma_color to bilateral only (default 25). Parameters a kind does not
    use must be left unset.
    """

    kind: str = "median"
    window: int = DEFAULT_MEDIAN_WINDOW
    sigma_space: Optional[float] = None
    sigma_color: Optional[float] = None

    def __post_init__(self):
        if self.kind not in FILTER_KINDS:
            raise ValueError(f"unknown filter kind {self.kind!r}, expected one of {FILTER_KINDS}")
        object.__setattr__(self, "window", check_odd_window(self.window))
        if self.kind == "median":
            if self.sigma_space is not None or self.sigma_color is not None:
                raise ValueError("median filter takes no sigma parameters")
            return
        sigma_space = self.window / 6.0 if self.sigma_space is None else self.sigma_space
        object.__setattr__(self, "sigma_space", check_positive("sigma_space", sigma_space))
        if self.kind == "gaussian":
            if self.sigma_color is not None:
                raise ValueError("gaussian filter takes no sigma_color")
            return
        sigma_color = (
            DEFAULT_BILATERAL_SIGMA_COLOR if self.sigma_color is None else self.sigma_color
        )
        object.__setattr__(self, "sigma_color", check_positive("sigma_color", sigma_color))


def _pad_replicate(arr, radius):
    return np.pad(arr, ((radius, radius), (radius, radius), (0, 0)), mode="edge")


def median_filter(img, window):
    """Per-channel median over a window x window clamped neighborhood."""
    arr = check_rgb_image(img)
    win = check_odd_window(window)
    if win == 1:
        return arr.copy()
    radius = win // 2
    # Padding with edge replication first makes the border semantics explicit
    # and independent of the library's internal border handling.
    padded = _pad_replicate(arr, radius)
    blurred = cv2.medianBlur(padded, win)
    return blurred[radius:-radius, radius:-radius].copy()


def _gaussian_kernel(window, sigma):
    offsets = np.arange(window, dtype=np.float64) - window // 2
    kernel = np.exp(-(offsets**2) / (2.0 * sigma * sigma))
    return kernel / kernel.sum()


def gaussian_filter(img, window, sigma_space):
    """Separable convolution with a normalized sampled Gaussian kernel.

    The image is edge-padded before both passes so every tap reads a
    clamped coordinate of the original raster, exactly like a dense 2-D
    convolution with clamp-to-border sampling.
    """
    arr = check_rgb_image(img)
    win = check_odd_window(window)
    sigma = check_positive("sigma_space", sigma_space)
    kernel = _gaussian_kernel(win, sigma)
    radius = win // 2
    height, width = arr.shape[:2]
    padded = _pad_replicate(arr, radius).astype(np.float64)
    out = convolve1d(padded, kernel, axis=0, mode="nearest")
    out = convolve1d(out, kernel, axis=1, mode="nearest")
    out = out[radius : radius + height, radius : radius + width]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def bilateral_filter(img, window, sigma_space, sigma_color):
    """Edge-preserving smoothing.

    Each neighbor is weighted by exp(-(dx^2+dy^2)/2*sigma_space^2) times
    exp(-|color difference|^2/2*sigma_color^2) where the color difference
    is the Euclidean distance in RGB space; the output is the normalized
    weighted mean, rounded to the nearest integer.
    """
    arr = check_rgb_image(img)
    win = check_odd_window(window)
    sigma_s = check_positive("sigma_space", sigma_space)
    sigma_c = check_positive("sigma_color", sigma_color)
    radius = win // 2
    if radius == 0:
        return arr.copy()
    height, width = arr.shape[:2]
    center = arr.astype(np.float64)
    padded = _pad_replicate(arr, radius).astype(np.float64)
    acc = np.zeros((height, width, 3))
    weight_sum = np.zeros((height, width))
    inv_2ss = 1.0 / (2.0 * sigma_s * sigma_s)
    inv_2sc = 1.0 / (2.0 * sigma_c * sigma_c)
    for dy in range(-radius, radius + 1):
        for dx in range(-radius, radius + 1):
            neighbor = padded[radius + dy : radius + dy + height, radius + dx : radius + dx + width]
            spatial = np.exp(-(dx * dx + dy * dy) * inv_2ss)
            color_sq = ((neighbor - center) ** 2).sum(axis=2)
            weight = spatial * np.exp(-color_sq * inv_2sc)
            acc += weight[..., None] * neighbor
            weight_sum += weight
    out = acc / weight_sum[..., None]
    return np.clip(np.rint(out), 0, 255).astype(np.uint8)


def apply_filter(img, spec: FilterSpec):
    """Run the filter described by `spec` on an RGB image."""
    if spec.kind == "median":
        return median_filter(img, spec.window)
    if spec.kind == "gaussian":
        return gaussian_filter(img, spec.window, spec.sigma_space)
    return bilateral_filter(img, spec.window, spec.sigma_space, spec.sigma_color)
