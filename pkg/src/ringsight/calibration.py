"""Least-squares fitting of the two model constants from measurement datasheets.

Both relationships are linear through the origin after the right change of
variable: d_v = a_vert * (1/L) and d_h_cm = k_horiz * feature. The fits are
the corresponding closed-form through-origin least squares.
"""

import csv
import json
import math
from dataclasses import dataclass
from pathlib import Path

from .estimation import CalibrationModel
from .segmentation import SegmentationConfig, detect_rings


class InsufficientData(Exception):
    """Fewer samples than the fit needs."""


class DegenerateFit(Exception):
    """The regressor column is identically zero; the constant is unidentifiable."""


class DatasheetFormatError(ValueError):
    pass


@dataclass(frozen=True)
class VerticalSample:
    """Hand-measured forward distance paired with the measured separation."""

    d_v: float
    L: float

    def __post_init__(self):
        if not (math.isfinite(self.d_v) and self.d_v > 0):
            raise ValueError(f"d_v must be positive, got {self.d_v!r}")
        if not (math.isfinite(self.L) and self.L > 0):
            raise ValueError(f"L must be positive, got {self.L!r}")


@dataclass(frozen=True)
class HorizontalSample:
    """Lateral distance in cm paired with the horizontal image feature."""

    d_h_cm: float
    d_h_px: float

    def __post_init__(self):
        if not (math.isfinite(self.d_h_cm) and math.isfinite(self.d_h_px)):
            raise ValueError("horizontal samples must be finite")


@dataclass(frozen=True)
class FitReport:
    constant: float
    rmse: float
    n: int
    max_abs_residual: float


@dataclass(frozen=True)
class Datasheet:
    """Parsed samples from one CSV file; one of the lists may be empty."""

    vertical: tuple
    horizontal: tuple


def _report(constant, residuals):
    n = len(residuals)
    rmse = math.sqrt(sum(r * r for r in residuals) / n)
    return FitReport(
        constant=constant,
        rmse=rmse,
        n=n,
        max_abs_residual=max(abs(r) for r in residuals),
    )


def fit_vertical(samples):
    """Fit a_vert in d_v = a_vert / L by least squares on the regressor 1/L.

    Returns (a_vert, FitReport); residuals are d_v - a_vert/L in cm.
    """
    samples = list(samples)
    if len(samples) < 2:
        raise InsufficientData(f"vertical fit needs at least 2 samples, got {len(samples)}")
    num = sum(s.d_v / s.L for s in samples)
    den = sum(1.0 / (s.L * s.L) for s in samples)
    a_vert = num / den
    residuals = [s.d_v - a_vert / s.L for s in samples]
    return a_vert, _report(a_vert, residuals)


def fit_horizontal(samples):
    """Fit k_horiz in d_h_cm = k_horiz * feature by through-origin least squares."""
    samples = list(samples)
    if len(samples) < 2:
        raise InsufficientData(f"horizontal fit needs at least 2 samples, got {len(samples)}")
    den = sum(s.d_h_px * s.d_h_px for s in samples)
    if den == 0.0:
        raise DegenerateFit("all horizontal features are zero")
    k = sum(s.d_h_cm * s.d_h_px for s in samples) / den
    residuals = [s.d_h_cm - k * s.d_h_px for s in samples]
    return k, _report(k, residuals)


VERTICAL_HEADER = ["d_v_cm", "L_px"]
HORIZONTAL_HEADER = ["d_h_cm", "d_h_px"]
MANIFEST_HEADER = ["filename", "d_v_cm", "d_h_cm", "theta_deg", "d_cm", "L_px", "d_h_px"]


def _cell(row_values, header, name, path, row_num):
    raw = row_values[header.index(name)]
    try:
        return float(raw)
    except ValueError:
        raise DatasheetFormatError(
            f"{path}: row {row_num}, column {name!r}: non-numeric value {raw!r}"
        ) from None


def load_datasheet(path):
    """Parse a calibration CSV into validated samples.

    Accepts three header forms: 'd_v_cm,L_px' (vertical samples),
    'd_h_cm,d_h_px' (horizontal samples), or a full dataset manifest
    ('filename,d_v_cm,d_h_cm,theta_deg,d_cm,L_px,d_h_px'), which yields
    both kinds. Manifest horizontal features are normalized on load:
    the stored feature is d_h_px / L_px, the offset per unit of ring
    separation that the estimation chain consumes.
    """
    path = Path(path)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise DatasheetFormatError(f"{path}: empty file") from None
        header = [h.strip() for h in header]
        if header not in (VERTICAL_HEADER, HORIZONTAL_HEADER, MANIFEST_HEADER):
            raise DatasheetFormatError(f"{path}: unknown datasheet header {header!r}")

        vertical = []
        horizontal = []
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != len(header):
                raise DatasheetFormatError(
                    f"{path}: row {row_num} has {len(row)} cells, expected {len(header)}"
                )
            try:
                if header == VERTICAL_HEADER:
                    vertical.append(
                        VerticalSample(
                            d_v=_cell(row, header, "d_v_cm", path, row_num),
                            L=_cell(row, header, "L_px", path, row_num),
                        )
                    )
                elif header == HORIZONTAL_HEADER:
                    horizontal.append(
                        HorizontalSample(
                            d_h_cm=_cell(row, header, "d_h_cm", path, row_num),
                            d_h_px=_cell(row, header, "d_h_px", path, row_num),
                        )
                    )
                else:
                    d_v = _cell(row, header, "d_v_cm", path, row_num)
                    L = _cell(row, header, "L_px", path, row_num)
                    d_h_cm = _cell(row, header, "d_h_cm", path, row_num)
                    d_h_px = _cell(row, header, "d_h_px", path, row_num)
                    vertical.append(VerticalSample(d_v=d_v, L=L))
                    horizontal.append(HorizontalSample(d_h_cm=d_h_cm, d_h_px=d_h_px / L))
            except ValueError as exc:
                raise DatasheetFormatError(f"{path}: row {row_num}: {exc}") from None
    return Datasheet(vertical=tuple(vertical), horizontal=tuple(horizontal))


def samples_from_images(manifest_path, images_dir, cfg: SegmentationConfig = None):
    """Rebuild calibration samples by running detection on a rendered dataset.

    Reads the manifest for ground truth (d_v_cm, d_h_cm) and measures L and
    the normalized centerline offset from the images themselves, so the fit
    absorbs whatever systematic offset the detector has on real rasters.
    Returns a Datasheet. Detection failures propagate with the filename.
    """
    from .imaging import load_image  # local import to keep module deps one-way

    cfg = cfg if cfg is not None else SegmentationConfig()
    manifest_path = Path(manifest_path)
    images_dir = Path(images_dir)
    vertical = []
    horizontal = []
    with open(manifest_path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != MANIFEST_HEADER:
            raise DatasheetFormatError(f"{manifest_path}: not a dataset manifest")
        for row_num, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            filename = row[header.index("filename")]
            d_v = _cell(row, header, "d_v_cm", manifest_path, row_num)
            d_h_cm = _cell(row, header, "d_h_cm", manifest_path, row_num)
            img = load_image(images_dir / filename)
            try:
                det = detect_rings(img, cfg)
            except Exception as exc:
                raise type(exc)(f"{filename}: {exc}") from exc
            offset_px = det.midpoint.x - (det.image_width - 1) / 2.0
            vertical.append(VerticalSample(d_v=d_v, L=det.L))
            horizontal.append(HorizontalSample(d_h_cm=d_h_cm, d_h_px=offset_px / det.L))
    return Datasheet(vertical=tuple(vertical), horizontal=tuple(horizontal))


MODEL_KEYS = [
    "a_vert",
    "k_horiz",
    "image_width",
    "image_height",
    "d_v_min",
    "d_v_max",
    "bearing_abs_max",
]


def save_model(model: CalibrationModel, path):
    payload = {
        "a_vert": model.a_vert,
        "k_horiz": model.k_horiz,
        "image_width": model.image_width,
        "image_height": model.image_height,
        "d_v_min": model.d_v_min,
        "d_v_max": model.d_v_max,
        "bearing_abs_max": model.bearing_abs_max,
    }
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2)
        fh.write("\n")


def load_model(path):
    with open(path) as fh:
        try:
            payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise DatasheetFormatError(f"{path}: invalid model JSON: {exc}") from None
    if not isinstance(payload, dict) or sorted(payload) != sorted(MODEL_KEYS):
        raise DatasheetFormatError(
            f"{path}: model JSON must contain exactly the keys {MODEL_KEYS}"
        )
    try:
        return CalibrationModel(
            a_vert=float(payload["a_vert"]),
            k_horiz=None if payload["k_horiz"] is None else float(payload["k_horiz"]),
            image_width=int(payload["image_width"]),
            image_height=int(payload["image_height"]),
            d_v_min=float(payload["d_v_min"]),
            d_v_max=float(payload["d_v_max"]),
            bearing_abs_max=float(payload["bearing_abs_max"]),
        )
    except (TypeError, ValueError) as exc:
        raise DatasheetFormatError(f"{path}: bad model value: {exc}") from None
