"""Input checks shared across the package.

Images are plain numpy arrays: RGB rasters are (height, width, 3) uint8,
HSV rasters are (height, width, 3) float64 with hue in degrees [0, 360)
and saturation/value as fractions in [0, 1]. Masks are (height, width)
bool. The helpers below normalize and validate those shapes so the rest
of the package can assume them.
"""

import numpy as np

MAX_DIMENSION = 16384


def check_rgb_image(img):
    """Validate an RGB raster and return it as a contiguous uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) RGB array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"RGB image must be uint8, got {arr.dtype}")
    h, w = arr.shape[:2]
    if h < 1 or w < 1:
        raise ValueError(f"image dimensions must be at least 1x1, got {w}x{h}")
    if h > MAX_DIMENSION or w > MAX_DIMENSION:
        raise ValueError(f"image dimensions {w}x{h} exceed the {MAX_DIMENSION} sanity bound")
    return np.ascontiguousarray(arr)


def check_hsv_image(hsv):
    """Validate an HSV raster (degrees/fraction/fraction) and return it."""
    arr = np.asarray(hsv, dtype=np.float64)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an (H, W, 3) HSV array, got shape {arr.shape}")
    h = arr[..., 0]
    s = arr[..., 1]
    v = arr[..., 2]
    if h.size and (h.min() < 0.0 or h.max() >= 360.0):
        raise ValueError("hue must lie in [0, 360) degrees")
    for name, chan in (("saturation", s), ("value", v)):
        if chan.size and (chan.min() < 0.0 or chan.max() > 1.0):
            raise ValueError(f"{name} must lie in [0, 1]")
    return arr


def check_mask(mask):
    """Validate a binary mask and return it as a bool array."""
    arr = np.asarray(mask)
    if arr.ndim != 2:
        raise ValueError(f"expected a 2-D mask, got shape {arr.shape}")
    if arr.dtype != np.bool_:
        if not np.isin(arr, (0, 1)).all():
            raise ValueError("mask values must be boolean or 0/1")
        arr = arr.astype(bool)
    return arr


def check_odd_window(window):
    win = int(window)
    if win != window or win < 1 or win % 2 == 0:
        raise ValueError(f"window must be a positive odd integer, got {window!r}")
    return win


def check_positive(name, value):
    if not np.isfinite(value) or value <= 0:
        raise ValueError(f"{name} must be positive and finite, got {value!r}")
    return float(value)
