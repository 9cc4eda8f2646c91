"""Command-line surface: estimate, calibrate, render, generate, eval.

Conventions: machine-readable output (JSON, CSV, fit numbers) goes to
stdout, diagnostics go to stderr, and exit codes distinguish failure
classes: 1 for I/O, format, and parameter problems, 2 for detection
failures, 3 for model mismatches.
"""

import functools
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import click

from .calibration import (
    Datasheet,
    DegenerateFit,
    InsufficientData,
    fit_horizontal,
    fit_vertical,
    load_datasheet,
    load_model,
    samples_from_images,
    save_model,
)
from .estimation import CalibrationModel, ModelMismatch, estimate
from .evaluation import evaluate_dataset, write_eval_csv
from .filtering import FilterSpec
from .imaging import load_image, save_image
from .segmentation import DetectionError, HsvRange, SegmentationConfig, detect_rings
from .synthcam import CameraSpec, LandmarkSpec, OutOfView, Pose, generate_dataset, pose_grid, render


class ConfigError(ValueError):
    pass


CONFIG_KEYS = {
    "filter_kind",
    "filter_window",
    "filter_sigma_space",
    "filter_sigma_color",
    "red_h_lo",
    "red_h_hi",
    "red_s_min",
    "red_v_min",
    "blue_h_lo",
    "blue_h_hi",
    "blue_s_min",
    "blue_v_min",
    "min_blob_px",
    "model",
}


@dataclass(frozen=True)
class PipelineConfig:
    """Parsed pipeline configuration: segmentation settings plus a model reference."""

    segmentation: SegmentationConfig
    model_path: Optional[Path]


def load_pipeline_config(path=None):
    """Build a PipelineConfig from a flat JSON file.

    Every key is optional and falls back to the pipeline defaults
    (median-15 filter, the stock red/blue HSV ranges, min_blob_px 20).
    A relative "model" path is resolved against the config file's
    directory. With no path at all, the defaults apply and no model is
    referenced.
    """
    if path is None:
        return PipelineConfig(segmentation=SegmentationConfig(), model_path=None)
    path = Path(path)
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: config must be a JSON object")
    unknown = set(raw) - CONFIG_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown config keys {sorted(unknown)}")
    try:
        filter_spec = FilterSpec(
            kind=raw.get("filter_kind", "median"),
            window=raw.get("filter_window", 15),
            sigma_space=raw.get("filter_sigma_space"),
            sigma_color=raw.get("filter_sigma_color"),
        )
        seg = SegmentationConfig(
            red=HsvRange(
                h_lo=raw.get("red_h_lo", 350.0),
                h_hi=raw.get("red_h_hi", 10.0),
                s_min=raw.get("red_s_min", 0.5),
                v_min=raw.get("red_v_min", 0.3),
            ),
            blue=HsvRange(
                h_lo=raw.get("blue_h_lo", 200.0),
                h_hi=raw.get("blue_h_hi", 260.0),
                s_min=raw.get("blue_s_min", 0.5),
                v_min=raw.get("blue_v_min", 0.3),
            ),
            filter_spec=filter_spec,
            min_blob_px=raw.get("min_blob_px", 20),
        )
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{path}: {exc}") from None
    model_path = None
    if "model" in raw:
        model_path = Path(raw["model"])
        if not model_path.is_absolute():
            model_path = path.parent / model_path
    return PipelineConfig(segmentation=seg, model_path=model_path)


def _require_model(cfg: PipelineConfig):
    if cfg.model_path is None:
        raise ConfigError("config has no 'model' entry; calibrate first and point to it")
    return load_model(cfg.model_path)


def _fail(code, message):
    click.echo(message, err=True)
    sys.exit(code)


def pipeline_errors(fn):
    """Map pipeline exceptions to the documented exit codes."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except DetectionError as exc:
            _fail(2, f"{type(exc).__name__}: {exc}")
        except ModelMismatch as exc:
            _fail(3, f"ModelMismatch: {exc}")
        except (OSError, ValueError, InsufficientData, DegenerateFit, OutOfView) as exc:
            _fail(1, f"{type(exc).__name__}: {exc}")

    return wrapper


@click.group()
def main():
    """Monocular range and bearing estimation from a two-ring landmark."""


@main.command("estimate")
@click.argument("image", type=click.Path())
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Pipeline config JSON (must reference a calibrated model).")
@pipeline_errors
def cmd_estimate(image, config_path):
    """Estimate range and bearing for one image; prints an Estimate JSON object."""
    cfg = load_pipeline_config(config_path)
    model = _require_model(cfg)
    detection = detect_rings(load_image(image), cfg.segmentation)
    result = estimate(detection, model)
    click.echo(json.dumps(result.to_json()))


def _camera_options(fn):
    fn = click.option("--width", type=int, default=640, show_default=True,
                      help="Image width in pixels.")(fn)
    fn = click.option("--height", type=int, default=480, show_default=True,
                      help="Image height in pixels.")(fn)
    fn = click.option("--focal", type=float, default=700.0, show_default=True,
                      help="Focal length in pixels.")(fn)
    fn = click.option("--cam-height", type=float, default=None,
                      help="Camera height over ground in cm (default: landmark mid-height).")(fn)
    return fn


def _camera(width, height, focal, cam_height):
    return CameraSpec(
        focal_px=focal,
        image_width=width,
        image_height=height,
        camera_height_cm=cam_height,
    )


def _truth_csv(filename, truth):
    return ",".join(
        [
            filename,
            repr(truth.d_v_cm),
            repr(truth.d_h_cm),
            repr(truth.theta_deg),
            repr(truth.d_cm),
            repr(truth.L_px),
            repr(truth.d_h_px),
        ]
    )


@main.command("render")
@click.option("--dv", type=float, required=True, help="Forward distance, cm.")
@click.option("--dh", type=float, default=0.0, show_default=True,
              help="Signed lateral offset, cm (positive right).")
@click.option("--out", "out_path", type=click.Path(), default="landmark.ppm",
              show_default=True, help="Output PPM path.")
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="Additive Gaussian noise sigma (intensity units).")
@click.option("--seed", type=int, default=0, show_default=True, help="Noise seed.")
@_camera_options
@pipeline_errors
def cmd_render(dv, dh, out_path, noise, seed, width, height, focal, cam_height):
    """Render the landmark at one pose; prints the ground-truth record as CSV."""
    cam = _camera(width, height, focal, cam_height)
    img, truth = render(Pose(d_v=dv, d_h=dh), cam, LandmarkSpec(),
                        noise_sigma=noise, seed=seed)
    save_image(img, out_path)
    click.echo(_truth_csv(str(out_path), truth))


def _inclusive_range(lo, hi, step, what):
    if step <= 0:
        raise ValueError(f"{what} step must be positive, got {step!r}")
    if hi < lo:
        raise ValueError(f"{what} range is empty ({lo!r} to {hi!r})")
    count = int(round((hi - lo) / step)) + 1
    values = [lo + i * step for i in range(count)]
    return [v for v in values if v <= hi + 1e-9]


@main.command("generate")
@click.option("--out-dir", type=click.Path(), required=True, help="Dataset directory.")
@click.option("--dv-min", type=float, default=28.0, show_default=True)
@click.option("--dv-max", type=float, default=72.0, show_default=True)
@click.option("--dv-step", type=float, default=4.0, show_default=True)
@click.option("--theta-min", type=float, default=-25.0, show_default=True)
@click.option("--theta-max", type=float, default=25.0, show_default=True)
@click.option("--theta-step", type=float, default=5.0, show_default=True)
@click.option("--noise", type=float, default=0.0, show_default=True,
              help="Additive Gaussian noise sigma.")
@click.option("--seed", type=int, default=0, show_default=True,
              help="Base seed; each pose derives its own noise stream from it.")
@_camera_options
@pipeline_errors
def cmd_generate(out_dir, dv_min, dv_max, dv_step, theta_min, theta_max, theta_step,
                 noise, seed, width, height, focal, cam_height):
    """Render a pose grid with a ground-truth manifest; prints the manifest path."""
    cam = _camera(width, height, focal, cam_height)
    d_v_values = _inclusive_range(dv_min, dv_max, dv_step, "dv")
    theta_values = _inclusive_range(theta_min, theta_max, theta_step, "theta")
    poses = pose_grid(d_v_values, theta_values)
    manifest = generate_dataset(
        poses, cam, LandmarkSpec(), out_dir=out_dir, noise_sigma=noise, base_seed=seed
    )
    click.echo(str(manifest))


def _fit_line(label, report):
    return (
        f"{label}: constant={report.constant:.6f} rmse={report.rmse:.6f} "
        f"n={report.n} max_abs_residual={report.max_abs_residual:.6f}"
    )


@main.command("calibrate")
@click.option("--vertical", "vertical_path", type=click.Path(), required=True,
              help="Vertical datasheet CSV, or a dataset manifest (provides both fits).")
@click.option("--horizontal", "horizontal_path", type=click.Path(), default=None,
              help="Horizontal datasheet CSV (overrides manifest-derived samples).")
@click.option("--out", "out_path", type=click.Path(), required=True,
              help="Where to write the fitted model JSON.")
@click.option("--from-images", "images_dir", type=click.Path(), default=None,
              help="Re-measure features by running detection on the dataset images "
                   "in this directory (--vertical must then be a manifest).")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Pipeline config used with --from-images detection.")
@click.option("--image-width", type=int, default=640, show_default=True,
              help="Resolution the model is calibrated for (taken from the images "
                   "when --from-images is used).")
@click.option("--image-height", type=int, default=480, show_default=True)
@click.option("--d-v-min", type=float, default=28.0, show_default=True)
@click.option("--d-v-max", type=float, default=72.0, show_default=True)
@click.option("--bearing-abs-max", type=float, default=25.0, show_default=True)
@pipeline_errors
def cmd_calibrate(vertical_path, horizontal_path, out_path, images_dir, config_path,
                  image_width, image_height, d_v_min, d_v_max, bearing_abs_max):
    """Fit the model constants from datasheets and write the model JSON."""
    if images_dir is not None:
        cfg = load_pipeline_config(config_path)
        sheet = samples_from_images(vertical_path, images_dir, cfg.segmentation)
        first = _first_manifest_image(vertical_path, images_dir)
        image_height, image_width = first.shape[:2]
    else:
        sheet = load_datasheet(vertical_path)
    if not sheet.vertical:
        raise InsufficientData(f"{vertical_path}: no vertical samples")

    horizontal = sheet.horizontal
    horizontal_required = horizontal_path is not None
    if horizontal_path is not None:
        horizontal = load_datasheet(horizontal_path).horizontal
        if not horizontal:
            raise InsufficientData(f"{horizontal_path}: no horizontal samples")

    a_vert, vertical_report = fit_vertical(sheet.vertical)
    click.echo(_fit_line("vertical", vertical_report))

    k_horiz = None
    if horizontal:
        try:
            k_horiz, horizontal_report = fit_horizontal(horizontal)
            click.echo(_fit_line("horizontal", horizontal_report))
        except DegenerateFit:
            if horizontal_required:
                raise
            click.echo(
                "horizontal features are all zero (on-axis data); "
                "bearing estimation disabled in the written model",
                err=True,
            )
    else:
        click.echo(
            "no horizontal samples; bearing estimation disabled in the written model",
            err=True,
        )

    model = CalibrationModel(
        a_vert=a_vert,
        k_horiz=k_horiz,
        image_width=image_width,
        image_height=image_height,
        d_v_min=d_v_min,
        d_v_max=d_v_max,
        bearing_abs_max=bearing_abs_max,
    )
    save_model(model, out_path)


def _first_manifest_image(manifest_path, images_dir):
    import csv as _csv

    with open(manifest_path, newline="") as fh:
        reader = _csv.reader(fh)
        next(reader)
        for row in reader:
            if row and row[0].strip():
                return load_image(Path(images_dir) / row[0])
    raise InsufficientData(f"{manifest_path}: no rows")


@main.command("eval")
@click.option("--manifest", "manifest_path", type=click.Path(), required=True,
              help="Dataset manifest CSV with ground truth.")
@click.option("--images-dir", type=click.Path(), default=None,
              help="Directory holding the images (default: the manifest's directory).")
@click.option("--config", "config_path", type=click.Path(), default=None,
              help="Pipeline config JSON (must reference a calibrated model).")
@click.option("--out", "out_path", type=click.Path(), default=None,
              help="Write the per-image CSV here instead of stdout.")
@pipeline_errors
def cmd_eval(manifest_path, images_dir, config_path, out_path):
    """Evaluate estimation accuracy over a rendered dataset.

    Per-image CSV goes to stdout (or --out); the summary line goes to
    stderr, or to stdout when the CSV was redirected to a file. Exits 0
    however large the errors are; evaluation is a report, not a gate.
    """
    cfg = load_pipeline_config(config_path)
    model = _require_model(cfg)
    if images_dir is None:
        images_dir = Path(manifest_path).parent
    result = evaluate_dataset(manifest_path, images_dir, cfg.segmentation, model)
    for name in result.missing_files:
        click.echo(f"missing: {name}", err=True)
    for entry in result.failed_files:
        click.echo(f"detection failed: {entry}", err=True)
    if out_path is not None:
        with open(out_path, "w", newline="") as fh:
            write_eval_csv(result, fh)
        click.echo(result.summary_line())
    else:
        write_eval_csv(result, sys.stdout)
        click.echo(result.summary_line(), err=True)


if __name__ == "__main__":
    main()
