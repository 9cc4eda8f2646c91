"""Datasheet parsing, through-origin fits, and model serialization tests."""

import json
import math

import numpy as np
import pytest

from ringsight.calibration import (
    Datasheet,
    DatasheetFormatError,
    DegenerateFit,
    HorizontalSample,
    InsufficientData,
    VerticalSample,
    fit_horizontal,
    fit_vertical,
    load_datasheet,
    load_model,
    save_model,
)
from ringsight.estimation import CalibrationModel


def vertical_from_constant(a, L_values):
    return [VerticalSample(d_v=a / L, L=L) for L in L_values]


# --- fits ---


def test_fit_vertical_recovers_exact_constant():
    samples = vertical_from_constant(3500.0, [50.0, 70.0, 90.0, 110.0, 125.0])
    a, report = fit_vertical(samples)
    assert a == pytest.approx(3500.0, rel=1e-12)
    assert report.rmse == pytest.approx(0.0, abs=1e-9)
    assert report.max_abs_residual == pytest.approx(0.0, abs=1e-9)
    assert report.n == 5


def test_fit_horizontal_recovers_exact_constant():
    samples = [HorizontalSample(d_h_cm=5.0 * f, d_h_px=f) for f in (-2.0, -0.5, 0.3, 1.8)]
    k, report = fit_horizontal(samples)
    assert k == pytest.approx(5.0, rel=1e-12)
    assert report.rmse == pytest.approx(0.0, abs=1e-12)


def test_fit_vertical_is_least_squares_not_mean():
    # two samples with conflicting constants: the through-origin LS solution
    # weights by 1/L^2, so check against the closed form directly
    samples = [VerticalSample(d_v=50.0, L=70.0), VerticalSample(d_v=50.0, L=72.0)]
    a, report = fit_vertical(samples)
    num = 50.0 / 70.0 + 50.0 / 72.0
    den = 1.0 / 70.0**2 + 1.0 / 72.0**2
    assert a == pytest.approx(num / den, rel=1e-15)
    # normal equation: residuals are orthogonal to the regressor 1/L
    dot = sum((s.d_v - a / s.L) / s.L for s in samples)
    assert dot == pytest.approx(0.0, abs=1e-12)


def test_fit_residual_orthogonality_random():
    rng = np.random.default_rng(51)
    L = rng.uniform(40.0, 130.0, size=30)
    noise = rng.normal(0.0, 0.5, size=30)
    samples = [
        VerticalSample(d_v=3500.0 / Li + ni, L=Li)
        for Li, ni in zip(L, noise)
        if 3500.0 / Li + ni > 0
    ]
    a, _ = fit_vertical(samples)
    dot = sum((s.d_v - a / s.L) / s.L for s in samples)
    assert abs(dot) < 1e-9

    feat = rng.uniform(-3.0, 3.0, size=30)
    hs = [
        HorizontalSample(d_h_cm=5.0 * f + n, d_h_px=f)
        for f, n in zip(feat, rng.normal(0.0, 0.2, size=30))
    ]
    k, _ = fit_horizontal(hs)
    dot_h = sum((s.d_h_cm - k * s.d_h_px) * s.d_h_px for s in hs)
    assert abs(dot_h) < 1e-9


def test_fit_errors():
    with pytest.raises(InsufficientData):
        fit_vertical([VerticalSample(d_v=50.0, L=70.0)])
    with pytest.raises(InsufficientData):
        fit_horizontal([])
    with pytest.raises(DegenerateFit):
        fit_horizontal(
            [HorizontalSample(d_h_cm=1.0, d_h_px=0.0), HorizontalSample(d_h_cm=2.0, d_h_px=0.0)]
        )


def test_sample_validation():
    with pytest.raises(ValueError):
        VerticalSample(d_v=-5.0, L=70.0)
    with pytest.raises(ValueError):
        VerticalSample(d_v=50.0, L=0.0)
    with pytest.raises(ValueError):
        HorizontalSample(d_h_cm=math.nan, d_h_px=1.0)


# --- datasheet parsing ---


def test_load_vertical_datasheet(tmp_path):
    p = tmp_path / "vert.csv"
    p.write_text("d_v_cm,L_px\n50,70\n28,125.0\n\n70,50\n")
    sheet = load_datasheet(p)
    assert isinstance(sheet, Datasheet)
    assert sheet.horizontal == ()
    assert [s.d_v for s in sheet.vertical] == [50.0, 28.0, 70.0]
    assert [s.L for s in sheet.vertical] == [70.0, 125.0, 50.0]


def test_load_horizontal_datasheet(tmp_path):
    p = tmp_path / "horiz.csv"
    p.write_text("d_h_cm,d_h_px\n0.25,0.05\n-1.5,-0.31\n")
    sheet = load_datasheet(p)
    assert sheet.vertical == ()
    assert [s.d_h_cm for s in sheet.horizontal] == [0.25, -1.5]
    assert [s.d_h_px for s in sheet.horizontal] == [0.05, -0.31]


def test_load_manifest_normalizes_horizontal_feature(tmp_path):
    p = tmp_path / "manifest.csv"
    p.write_text(
        "filename,d_v_cm,d_h_cm,theta_deg,d_cm,L_px,d_h_px\n"
        "a.ppm,50.0,10.0,11.31,50.99,70.0,140.0\n"
        "b.ppm,70.0,0.0,0.0,70.0,50.0,0.0\n"
    )
    sheet = load_datasheet(p)
    assert len(sheet.vertical) == 2 and len(sheet.horizontal) == 2
    assert sheet.vertical[0].L == 70.0
    # stored feature is pixels divided by L: 140 / 70 = 2
    assert sheet.horizontal[0].d_h_px == pytest.approx(2.0, abs=1e-15)
    assert sheet.horizontal[0].d_h_cm == 10.0
    assert sheet.horizontal[1].d_h_px == 0.0


def test_load_datasheet_errors(tmp_path):
    empty = tmp_path / "empty.csv"
    empty.write_text("")
    with pytest.raises(DatasheetFormatError):
        load_datasheet(empty)

    bad_header = tmp_path / "bad.csv"
    bad_header.write_text("distance,pixels\n50,70\n")
    with pytest.raises(DatasheetFormatError):
        load_datasheet(bad_header)

    bad_cell = tmp_path / "cell.csv"
    bad_cell.write_text("d_v_cm,L_px\n50,seventy\n")
    with pytest.raises(DatasheetFormatError, match="row 2"):
        load_datasheet(bad_cell)

    ragged = tmp_path / "ragged.csv"
    ragged.write_text("d_v_cm,L_px\n50,70,9\n")
    with pytest.raises(DatasheetFormatError, match="row 2"):
        load_datasheet(ragged)

    negative = tmp_path / "neg.csv"
    negative.write_text("d_v_cm,L_px\n-4,70\n")
    with pytest.raises(DatasheetFormatError, match="row 2"):
        load_datasheet(negative)


def test_fit_from_worked_datasheet(tmp_path):
    # d_h 0.25 cm at feature 0.05 and proportional points: k = 5
    p = tmp_path / "h.csv"
    p.write_text("d_h_cm,d_h_px\n0.25,0.05\n0.5,0.1\n-0.25,-0.05\n")
    sheet = load_datasheet(p)
    k, _ = fit_horizontal(sheet.horizontal)
    assert k == pytest.approx(5.0, rel=1e-12)


# --- model serialization ---


def test_model_round_trip(tmp_path):
    model = CalibrationModel(
        a_vert=3592.918,
        k_horiz=5.11875,
        image_width=800,
        image_height=480,
        d_v_min=28.0,
        d_v_max=72.0,
        bearing_abs_max=25.0,
    )
    path = tmp_path / "model.json"
    save_model(model, path)
    assert load_model(path) == model
    payload = json.loads(path.read_text())
    assert set(payload) == {
        "a_vert", "k_horiz", "image_width", "image_height",
        "d_v_min", "d_v_max", "bearing_abs_max",
    }


def test_model_round_trip_without_k(tmp_path):
    model = CalibrationModel(a_vert=3500.0, k_horiz=None)
    path = tmp_path / "nok.json"
    save_model(model, path)
    back = load_model(path)
    assert back.k_horiz is None
    assert back == model
    assert json.loads(path.read_text())["k_horiz"] is None


def test_load_model_rejects_bad_payloads(tmp_path):
    missing = tmp_path / "m1.json"
    missing.write_text('{"a_vert": 3500.0}')
    with pytest.raises(DatasheetFormatError):
        load_model(missing)

    extra = tmp_path / "m2.json"
    good = {
        "a_vert": 3500.0, "k_horiz": 5.0, "image_width": 640, "image_height": 480,
        "d_v_min": 28.0, "d_v_max": 72.0, "bearing_abs_max": 25.0,
    }
    extra.write_text(json.dumps({**good, "surprise": 1}))
    with pytest.raises(DatasheetFormatError):
        load_model(extra)

    invalid = tmp_path / "m3.json"
    invalid.write_text("{not json")
    with pytest.raises(DatasheetFormatError):
        load_model(invalid)

    bad_value = tmp_path / "m4.json"
    bad_value.write_text(json.dumps({**good, "a_vert": -1.0}))
    with pytest.raises(DatasheetFormatError):
        load_model(bad_value)
