"""HSV thresholding, connected component labeling with moments, and ring detection.

The detection step locates the landmark's red and blue rings: filter the
image, convert to HSV, threshold each color class, keep the largest blob
per class, and derive the feature pair the geometry needs, the centroid
separation L and the midpoint of the two centroids.
"""

from dataclasses import dataclass, field
from typing import NamedTuple

import numpy as np
from scipy import ndimage

from .filtering import FilterSpec, apply_filter
from .imaging import PixelCoord, rgb_to_hsv
from .validation import check_hsv_image, check_mask, check_rgb_image


class DetectionError(Exception):
    """Base class for ring detection failures."""


class NoRedRegion(DetectionError):
    pass


class NoBlueRegion(DetectionError):
    pass


class GeometryInverted(DetectionError):
    """The blue centroid sits above the red one; not the expected landmark."""


class DegenerateDetection(DetectionError):
    """The two centroids coincide (separation below one pixel)."""


@dataclass(frozen=True)
class HsvRange:
    """A hue band with saturation/value floors.

    The hue interval wraps around 0/360 when h_lo > h_hi, so a red class
    of [350, 10] covers 350..360 plus 0..10 degrees.
    """

    h_lo: float
    h_hi: float
    s_min: float = 0.5
    v_min: float = 0.3

    def __post_init__(self):
        for name in ("h_lo", "h_hi"):
            value = getattr(self, name)
            if not 0.0 <= value < 360.0:
                raise ValueError(f"{name} must lie in [0, 360), got {value!r}")
        for name in ("s_min", "v_min"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise ValueError(f"{name} must lie in [0, 1], got {value!r}")

    @property
    def wraps(self) -> bool:
        return self.h_lo > self.h_hi


DEFAULT_RED_RANGE = HsvRange(h_lo=350.0, h_hi=10.0, s_min=0.5, v_min=0.3)
DEFAULT_BLUE_RANGE = HsvRange(h_lo=200.0, h_hi=260.0, s_min=0.5, v_min=0.3)


class BBox(NamedTuple):
    """Inclusive pixel bounds of a region."""

    x_min: int
    y_min: int
    x_max: int
    y_max: int


@dataclass(frozen=True)
class Blob:
    """A connected pixel region with raw and central moments."""

    pixel_count: int
    m00: float
    m10: float
    m01: float
    mu20: float
    mu02: float
    mu11: float
    centroid: PixelCoord
    bbox: BBox


@dataclass(frozen=True)
class SegmentationConfig:
    red: HsvRange = DEFAULT_RED_RANGE
    blue: HsvRange = DEFAULT_BLUE_RANGE
    filter_spec: FilterSpec = field(default_factory=FilterSpec)
    min_blob_px: int = 20

    def __post_init__(self):
        if int(self.min_blob_px) != self.min_blob_px or self.min_blob_px < 1:
            raise ValueError(f"min_blob_px must be a positive integer, got {self.min_blob_px!r}")


@dataclass(frozen=True)
class RingDetection:
    """The measured image features of one landmark sighting."""

    red_centroid: PixelCoord
    blue_centroid: PixelCoord
    red_blob: Blob
    blue_blob: Blob
    L: float
    midpoint: PixelCoord
    image_width: int
    image_height: int


def threshold_hsv(hsv, hsv_range: HsvRange):
    """Binary mask of pixels inside the hue band with s and v above the floors."""
    arr = check_hsv_image(hsv)
    h = arr[..., 0]
    s = arr[..., 1]
    v = arr[..., 2]
    if hsv_range.wraps:
        in_hue = (h >= hsv_range.h_lo) | (h <= hsv_range.h_hi)
    else:
        in_hue = (h >= hsv_range.h_lo) & (h <= hsv_range.h_hi)
    return in_hue & (s >= hsv_range.s_min) & (v >= hsv_range.v_min)


_EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


def connected_components(mask):
    """Label a mask with 8-connectivity and compute per-component moments.

    Returns one Blob per component, sorted by pixel count descending; ties
    broken by the smaller (y, then x) bounding box origin. Moments are
    exact sums over pixel coordinates: m10 = sum(x), mu20 = sum((x - cx)^2)
    computed via the shift identity sum(x^2) - m10^2/m00, and so on.
    """
    arr = check_mask(mask)
    labels, count = ndimage.label(arr, structure=_EIGHT_CONNECTED)
    if count == 0:
        return []
    ys, xs = np.nonzero(labels)
    lab = labels[ys, xs]
    xs = xs.astype(np.float64)
    ys = ys.astype(np.float64)
    m00 = np.bincount(lab)[1:]
    m10 = np.bincount(lab, weights=xs)[1:]
    m01 = np.bincount(lab, weights=ys)[1:]
    sxx = np.bincount(lab, weights=xs * xs)[1:]
    syy = np.bincount(lab, weights=ys * ys)[1:]
    sxy = np.bincount(lab, weights=xs * ys)[1:]
    slices = ndimage.find_objects(labels)

    blobs = []
    for i in range(count):
        n = int(m00[i])
        cx = float(m10[i]) / n
        cy = float(m01[i]) / n
        ysl, xsl = slices[i]
        blobs.append(
            Blob(
                pixel_count=n,
                m00=float(n),
                m10=float(m10[i]),
                m01=float(m01[i]),
                mu20=float(sxx[i] - m10[i] * m10[i] / n),
                mu02=float(syy[i] - m01[i] * m01[i] / n),
                mu11=float(sxy[i] - m10[i] * m01[i] / n),
                centroid=PixelCoord(cx, cy),
                bbox=BBox(xsl.start, ysl.start, xsl.stop - 1, ysl.stop - 1),
            )
        )
    blobs.sort(key=lambda b: (-b.pixel_count, b.bbox.y_min, b.bbox.x_min))
    return blobs


def _largest_qualifying(mask, min_blob_px):
    blobs = connected_components(mask)
    if not blobs or blobs[0].pixel_count < min_blob_px:
        return None
    return blobs[0]


def detect_rings(img, cfg: SegmentationConfig = SegmentationConfig()):
    """Locate the red and blue ring centroids in one RGB frame.

    Raises NoRedRegion/NoBlueRegion when a color class has no blob of at
    least cfg.min_blob_px pixels, DegenerateDetection when the centroids
    are closer than one pixel, and GeometryInverted when the red centroid
    is not above the blue one.
    """
    arr = check_rgb_image(img)
    filtered = apply_filter(arr, cfg.filter_spec)
    hsv = rgb_to_hsv(filtered)

    red_blob = _largest_qualifying(threshold_hsv(hsv, cfg.red), cfg.min_blob_px)
    if red_blob is None:
        raise NoRedRegion(f"no red region of at least {cfg.min_blob_px} px")
    blue_blob = _largest_qualifying(threshold_hsv(hsv, cfg.blue), cfg.min_blob_px)
    if blue_blob is None:
        raise NoBlueRegion(f"no blue region of at least {cfg.min_blob_px} px")

    red_c = red_blob.centroid
    blue_c = blue_blob.centroid
    L = float(np.hypot(blue_c.x - red_c.x, blue_c.y - red_c.y))
    if L < 1.0:
        raise DegenerateDetection(f"ring centroids nearly coincide (L = {L:.3f} px)")
    if red_c.y >= blue_c.y:
        raise GeometryInverted(
            f"red centroid (y={red_c.y:.2f}) is not above blue (y={blue_c.y:.2f})"
        )
    midpoint = PixelCoord((red_c.x + blue_c.x) / 2.0, (red_c.y + blue_c.y) / 2.0)
    height, width = arr.shape[:2]
    return RingDetection(
        red_centroid=red_c,
        blue_centroid=blue_c,
        red_blob=red_blob,
        blue_blob=blue_blob,
        L=L,
        midpoint=midpoint,
        image_width=width,
        image_height=height,
    )
