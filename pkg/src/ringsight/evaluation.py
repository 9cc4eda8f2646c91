"""Dataset-level accuracy evaluation: run the pipeline on every manifest row.

Produces one row per successfully processed image (truth vs estimate with
error columns) plus a summary. Bearing error is reported both in absolute
degrees and as a percentage of the full calibrated bearing span, since a
bare percentage for an angle is ambiguous without its denominator.
"""

import csv
from dataclasses import dataclass
from pathlib import Path

from .calibration import MANIFEST_HEADER, DatasheetFormatError
from .estimation import CalibrationModel, estimate
from .imaging import load_image
from .segmentation import DetectionError, SegmentationConfig, detect_rings

EVAL_HEADER = [
    "filename",
    "true_d_cm",
    "est_d_cm",
    "range_err_pct",
    "true_theta_deg",
    "est_theta_deg",
    "bearing_err_deg",
    "bearing_err_pct_span",
]


@dataclass(frozen=True)
class EvalRow:
    filename: str
    true_d_cm: float
    est_d_cm: float
    range_err_pct: float
    true_theta_deg: float
    est_theta_deg: float
    bearing_err_deg: float
    bearing_err_pct_span: float


@dataclass(frozen=True)
class EvalResult:
    rows: tuple
    n: int
    skipped: int
    detection_failures: int
    mean_range_err_pct: float
    mean_bearing_err_deg: float
    mean_bearing_err_pct_span: float
    missing_files: tuple
    failed_files: tuple

    def summary_line(self) -> str:
        return (
            f"n={self.n} skipped={self.skipped} detection_failures={self.detection_failures} "
            f"mean_range_err_pct={self.mean_range_err_pct:.6f} "
            f"mean_bearing_err_deg={self.mean_bearing_err_deg:.6f} "
            f"mean_bearing_err_pct_span={self.mean_bearing_err_pct_span:.6f}"
        )


def evaluate_dataset(
    manifest_path,
    images_dir,
    cfg: SegmentationConfig,
    model: CalibrationModel,
):
    """Estimate every image in a manifest and compare against its ground truth.

    Missing image files are skipped (listed in missing_files), detection
    failures are counted (listed in failed_files as 'name: error'); both
    are excluded from the error means. Rows keep manifest order.
    """
    manifest_path = Path(manifest_path)
    images_dir = Path(images_dir)
    span = 2.0 * model.bearing_abs_max
    rows = []
    missing = []
    failed = []
    with open(manifest_path, newline="") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        if header != MANIFEST_HEADER:
            raise DatasheetFormatError(f"{manifest_path}: not a dataset manifest")
        for row in reader:
            if not row or all(not c.strip() for c in row):
                continue
            filename = row[header.index("filename")]
            true_d = float(row[header.index("d_cm")])
            true_theta = float(row[header.index("theta_deg")])
            image_path = images_dir / filename
            if not image_path.exists():
                missing.append(filename)
                continue
            try:
                detection = detect_rings(load_image(image_path), cfg)
            except DetectionError as exc:
                failed.append(f"{filename}: {type(exc).__name__}: {exc}")
                continue
            est = estimate(detection, model)
            range_err_pct = 100.0 * abs(est.d - true_d) / true_d
            bearing_err = abs(est.theta - true_theta)
            rows.append(
                EvalRow(
                    filename=filename,
                    true_d_cm=true_d,
                    est_d_cm=est.d,
                    range_err_pct=range_err_pct,
                    true_theta_deg=true_theta,
                    est_theta_deg=est.theta,
                    bearing_err_deg=bearing_err,
                    bearing_err_pct_span=100.0 * bearing_err / span,
                )
            )
    n = len(rows)
    mean = lambda values: sum(values) / n if n else float("nan")
    return EvalResult(
        rows=tuple(rows),
        n=n,
        skipped=len(missing),
        detection_failures=len(failed),
        mean_range_err_pct=mean([r.range_err_pct for r in rows]),
        mean_bearing_err_deg=mean([r.bearing_err_deg for r in rows]),
        mean_bearing_err_pct_span=mean([r.bearing_err_pct_span for r in rows]),
        missing_files=tuple(missing),
        failed_files=tuple(failed),
    )


def write_eval_csv(result: EvalResult, stream):
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(EVAL_HEADER)
    for r in result.rows:
        writer.writerow(
            [
                r.filename,
                f"{r.true_d_cm:.6f}",
                f"{r.est_d_cm:.6f}",
                f"{r.range_err_pct:.6f}",
                f"{r.true_theta_deg:.6f}",
                f"{r.est_theta_deg:.6f}",
                f"{r.bearing_err_deg:.6f}",
                f"{r.bearing_err_pct_span:.6f}",
            ]
        )
