"""Dataset evaluation tests: per-row errors, bookkeeping, CSV output."""

import io

import numpy as np
import pytest

from ringsight.estimation import CalibrationModel
from ringsight.evaluation import EVAL_HEADER, evaluate_dataset, write_eval_csv
from ringsight.imaging import save_image
from ringsight.segmentation import SegmentationConfig
from ringsight.synthcam import Pose, generate_dataset


@pytest.fixture(scope="module")
def small_dataset(tmp_path_factory):
    out = tmp_path_factory.mktemp("eval_ds")
    poses = [Pose(d_v=d) for d in (40.0, 50.0, 60.0)] + [Pose(d_v=50.0, d_h=6.0)]
    manifest = generate_dataset(poses, out_dir=out)
    return manifest, out


MODEL = CalibrationModel(a_vert=3500.0, k_horiz=5.0)
CFG = SegmentationConfig()


def test_evaluate_clean_dataset(small_dataset):
    manifest, images = small_dataset
    result = evaluate_dataset(manifest, images, CFG, MODEL)
    assert result.n == 4
    assert result.skipped == 0
    assert result.detection_failures == 0
    assert result.missing_files == () and result.failed_files == ()
    assert [r.filename for r in result.rows] == [
        "pose_0000.ppm", "pose_0001.ppm", "pose_0002.ppm", "pose_0003.ppm",
    ]
    # uncalibrated constants still land within a few percent on clean frames
    assert result.mean_range_err_pct < 8.0
    assert result.mean_bearing_err_deg < 1.0
    for row in result.rows:
        assert row.range_err_pct >= 0.0
        assert row.bearing_err_deg >= 0.0
        assert row.bearing_err_pct_span == pytest.approx(
            100.0 * row.bearing_err_deg / 50.0, rel=1e-12
        )
    # means are plain averages of the row columns
    assert result.mean_range_err_pct == pytest.approx(
        sum(r.range_err_pct for r in result.rows) / 4.0, rel=1e-12
    )


def test_evaluate_reports_missing_files(small_dataset, tmp_path):
    manifest, images = small_dataset
    edited = tmp_path / "manifest.csv"
    text = manifest.read_text()
    edited.write_text(text.replace("pose_0002.ppm", "gone.ppm"))
    result = evaluate_dataset(edited, images, CFG, MODEL)
    assert result.n == 3
    assert result.skipped == 1
    assert result.missing_files == ("gone.ppm",)


def test_evaluate_counts_detection_failures(small_dataset, tmp_path):
    manifest, images = small_dataset
    blank = np.full((480, 640, 3), 160, dtype=np.uint8)
    save_image(blank, images / "blank.ppm")
    edited = tmp_path / "manifest.csv"
    edited.write_text(manifest.read_text().replace("pose_0001.ppm", "blank.ppm"))
    result = evaluate_dataset(edited, images, CFG, MODEL)
    assert result.n == 3
    assert result.detection_failures == 1
    assert len(result.failed_files) == 1
    assert result.failed_files[0].startswith("blank.ppm: NoRedRegion")


def test_evaluate_summary_line_format(small_dataset):
    manifest, images = small_dataset
    result = evaluate_dataset(manifest, images, CFG, MODEL)
    line = result.summary_line()
    assert line.startswith("n=4 skipped=0 detection_failures=0 ")
    assert f"mean_range_err_pct={result.mean_range_err_pct:.6f}" in line
    assert f"mean_bearing_err_deg={result.mean_bearing_err_deg:.6f}" in line
    assert f"mean_bearing_err_pct_span={result.mean_bearing_err_pct_span:.6f}" in line


def test_eval_csv_shape(small_dataset):
    manifest, images = small_dataset
    result = evaluate_dataset(manifest, images, CFG, MODEL)
    buf = io.StringIO()
    write_eval_csv(result, buf)
    lines = buf.getvalue().strip().split("\n")
    assert lines[0] == ",".join(EVAL_HEADER)
    assert lines[0] == (
        "filename,true_d_cm,est_d_cm,range_err_pct,"
        "true_theta_deg,est_theta_deg,bearing_err_deg,bearing_err_pct_span"
    )
    assert len(lines) == 5
    first = lines[1].split(",")
    assert first[0] == "pose_0000.ppm"
    assert first[1] == "40.000000"
    # every numeric cell is printed with six decimals
    for cell in first[1:]:
        assert len(cell.split(".")[1]) == 6


def test_evaluate_rejects_non_manifest(tmp_path):
    bad = tmp_path / "x.csv"
    bad.write_text("d_v_cm,L_px\n50,70\n")
    from ringsight.calibration import DatasheetFormatError

    with pytest.raises(DatasheetFormatError):
        evaluate_dataset(bad, tmp_path, CFG, MODEL)
