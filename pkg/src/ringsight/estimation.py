"""Range and bearing geometry on top of a fitted calibration model.

The chain: the centroid separation L gives the forward distance
d_v = a_vert / L; the normalized centerline offset of the centroid
midpoint gives the lateral distance d_h = k_horiz * offset_ratio;
bearing is atan(d_h / d_v) and range is d_v / cos(bearing).

The horizontal image feature is the midpoint's offset from the image
centerline divided by L. Dividing by L removes the perspective scale,
so one constant k_horiz (roughly the physical ring separation in cm)
converts the feature to centimeters at every distance.
"""

import math
from dataclasses import dataclass
from typing import Optional

from .segmentation import RingDetection
from .validation import check_positive

DEFAULT_A_VERT = 3500.0
DEFAULT_D_V_MIN = 28.0
DEFAULT_D_V_MAX = 72.0
DEFAULT_BEARING_ABS_MAX = 25.0


class ModelMismatch(Exception):
    """The detection and the model do not belong to the same camera setup."""


@dataclass(frozen=True)
class CalibrationModel:
    """Fitted constants plus the envelope they are trusted in.

    k_horiz is None when no horizontal calibration data was available;
    bearing-dependent estimation is then disabled.
    """

    a_vert: float = DEFAULT_A_VERT
    k_horiz: Optional[float] = None
    image_width: int = 640
    image_height: int = 480
    d_v_min: float = DEFAULT_D_V_MIN
    d_v_max: float = DEFAULT_D_V_MAX
    bearing_abs_max: float = DEFAULT_BEARING_ABS_MAX

    def __post_init__(self):
        check_positive("a_vert", self.a_vert)
        if self.k_horiz is not None:
            check_positive("k_horiz", self.k_horiz)
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError("model image dimensions must be positive")
        if not 0.0 < self.d_v_min < self.d_v_max:
            raise ValueError(
                f"need 0 < d_v_min < d_v_max, got {self.d_v_min!r}, {self.d_v_max!r}"
            )
        if not 0.0 < self.bearing_abs_max < 90.0:
            raise ValueError(f"bearing_abs_max must be in (0, 90), got {self.bearing_abs_max!r}")


@dataclass(frozen=True)
class Estimate:
    """One range-and-bearing measurement with validity flags.

    Out-of-envelope inputs still produce numbers; in_range/in_bearing
    tell the caller whether the estimate sits inside the calibrated
    trust region.
    """

    d_v: float
    d_h: float
    theta: float
    d: float
    L: float
    in_range: bool
    in_bearing: bool

    def to_json(self):
        return {
            "d_v_cm": self.d_v,
            "d_h_cm": self.d_h,
            "theta_deg": self.theta,
            "d_cm": self.d,
            "L_px": self.L,
            "in_range": self.in_range,
            "in_bearing": self.in_bearing,
        }


def vertical_distance(L, model: CalibrationModel):
    """Forward distance in cm from the centroid separation in pixels."""
    if L <= 0:
        raise ValueError(f"L must be positive, got {L!r}")
    return model.a_vert / L


def horizontal_distance(d_h_px, model: CalibrationModel):
    """Lateral distance in cm from the (normalized) horizontal image feature."""
    if model.k_horiz is None:
        raise ModelMismatch("model has no horizontal calibration; bearing is disabled")
    return model.k_horiz * d_h_px


def bearing(d_h, d_v):
    """Signed bearing angle in degrees, positive to the viewer's right."""
    if d_v <= 0:
        raise ValueError(f"d_v must be positive, got {d_v!r}")
    return math.degrees(math.atan2(d_h, d_v))


def slant_range(d_v, theta):
    """Straight-line distance in cm from forward distance and bearing degrees."""
    if d_v <= 0:
        raise ValueError(f"d_v must be positive, got {d_v!r}")
    if abs(theta) >= 90.0:
        raise ValueError(f"|theta| must be below 90 degrees, got {theta!r}")
    return d_v / math.cos(math.radians(theta))


def estimate(detection: RingDetection, model: CalibrationModel):
    """Full chain from a ring detection to a flagged range/bearing estimate."""
    if (detection.image_width, detection.image_height) != (
        model.image_width,
        model.image_height,
    ):
        raise ModelMismatch(
            f"detection from a {detection.image_width}x{detection.image_height} image "
            f"but model calibrated for {model.image_width}x{model.image_height}"
        )
    offset_px = detection.midpoint.x - (model.image_width - 1) / 2.0
    offset_ratio = offset_px / detection.L
    d_v = vertical_distance(detection.L, model)
    d_h = horizontal_distance(offset_ratio, model)
    theta = bearing(d_h, d_v)
    d = slant_range(d_v, theta)
    return Estimate(
        d_v=d_v,
        d_h=d_h,
        theta=theta,
        d=d,
        L=detection.L,
        in_range=model.d_v_min <= d_v <= model.d_v_max,
        in_bearing=abs(theta) <= model.bearing_abs_max,
    )
