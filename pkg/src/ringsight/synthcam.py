"""Synthetic pinhole camera for the two-ring cylindrical landmark.

Serves as the ground-truth oracle for the rest of the pipeline: it renders
the landmark at a commanded pose by exact per-column ray/cylinder
intersection and also exposes the closed-form projection of the two ring
center axis points, so detection and geometry can be verified end to end
without hardware.

Camera frame: origin at the pinhole, x right, y down, z forward along the
optical axis. The landmark stands on flat ground with its axis vertical;
the camera's optical axis is horizontal at `camera_height_cm` above the
ground (default: landmark mid-height).
"""

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Optional, Tuple

import numpy as np

from .imaging import PixelCoord, save_image
from .validation import check_positive

DEFAULT_BACKGROUND = (160, 160, 160)


class OutOfView(Exception):
    """The landmark is not fully inside the view frustum."""


@dataclass(frozen=True)
class LandmarkSpec:
    """The physical beacon: a cylinder with colored rings at top and bottom.

    Dimensions are millimeters. The ring separation that drives the
    geometry is the distance between the two ring band centers,
    height - ring_height.
    """

    height: float = 70.0
    diameter: float = 35.0
    ring_height: float = 20.0
    top_ring_color: Tuple[int, int, int] = (255, 0, 0)
    bottom_ring_color: Tuple[int, int, int] = (0, 0, 255)
    body_color: Tuple[int, int, int] = (255, 255, 255)

    def __post_init__(self):
        check_positive("height", self.height)
        check_positive("diameter", self.diameter)
        check_positive("ring_height", self.ring_height)
        if 2 * self.ring_height > self.height:
            raise ValueError("two ring bands cannot exceed the landmark height")

    @property
    def ring_center_separation(self) -> float:
        """Distance between ring band centers, mm."""
        return self.height - self.ring_height

    # cm views of the geometry (poses and distances are cm throughout)
    @property
    def height_cm(self) -> float:
        return self.height / 10.0

    @property
    def radius_cm(self) -> float:
        return self.diameter / 20.0

    @property
    def ring_height_cm(self) -> float:
        return self.ring_height / 10.0

    @property
    def ring_center_separation_cm(self) -> float:
        return self.ring_center_separation / 10.0


@dataclass(frozen=True)
class CameraSpec:
    """Pinhole intrinsics; the principal point is the image center."""

    focal_px: float = 700.0
    image_width: int = 640
    image_height: int = 480
    camera_height_cm: Optional[float] = None

    def __post_init__(self):
        check_positive("focal_px", self.focal_px)
        if self.image_width < 1 or self.image_height < 1:
            raise ValueError("image dimensions must be positive")
        if self.camera_height_cm is not None:
            check_positive("camera_height_cm", self.camera_height_cm)

    @property
    def cx(self) -> float:
        return (self.image_width - 1) / 2.0

    @property
    def cy(self) -> float:
        return (self.image_height - 1) / 2.0

    def height_over_ground(self, lm: LandmarkSpec) -> float:
        if self.camera_height_cm is not None:
            return self.camera_height_cm
        return lm.height_cm / 2.0


@dataclass(frozen=True)
class Pose:
    """Landmark position relative to the camera, cm: forward and signed lateral."""

    d_v: float
    d_h: float = 0.0

    def __post_init__(self):
        check_positive("d_v", self.d_v)
        if not math.isfinite(self.d_h):
            raise ValueError(f"d_h must be finite, got {self.d_h!r}")


@dataclass(frozen=True)
class GroundTruth:
    """The analytic record paired with a rendered frame."""

    d_v_cm: float
    d_h_cm: float
    theta_deg: float
    d_cm: float
    L_px: float
    d_h_px: float


def _check_in_view(pose: Pose, cam: CameraSpec, lm: LandmarkSpec):
    """Raise OutOfView unless the whole silhouette fits in the frame.

    Horizontal extent is exact (tangent rays to the cylinder); vertical
    extent uses the conservative nearest-surface distance, which slightly
    over-rejects poses grazing the top/bottom edges but never under-rejects.
    """
    r = lm.radius_cm
    rho = math.hypot(pose.d_v, pose.d_h)
    if rho <= r:
        raise OutOfView("camera is inside the landmark cylinder")
    phi = math.atan2(pose.d_h, pose.d_v)
    alpha = math.asin(r / rho)
    if abs(phi) + alpha >= math.pi / 2:
        raise OutOfView("landmark extends behind the image plane")
    u_min = cam.cx + cam.focal_px * math.tan(phi - alpha)
    u_max = cam.cx + cam.focal_px * math.tan(phi + alpha)
    if u_min < 0 or u_max > cam.image_width - 1:
        raise OutOfView(
            f"silhouette spans columns [{u_min:.1f}, {u_max:.1f}] "
            f"outside 0..{cam.image_width - 1}"
        )
    cam_h = cam.height_over_ground(lm)
    y_top = cam_h - lm.height_cm  # camera-frame y of the landmark top (y grows down)
    y_bottom = cam_h
    z_near = rho - r
    v_min = cam.cy + cam.focal_px * y_top / z_near
    v_max = cam.cy + cam.focal_px * y_bottom / z_near
    if v_min < 0 or v_max > cam.image_height - 1:
        raise OutOfView(
            f"silhouette spans rows [{v_min:.1f}, {v_max:.1f}] "
            f"outside 0..{cam.image_height - 1}"
        )


def project_ring_centers(pose: Pose, cam: CameraSpec = CameraSpec(), lm: LandmarkSpec = LandmarkSpec()):
    """Pinhole projection of the two ring-center axis points.

    Returns (red: PixelCoord, blue: PixelCoord, L_analytic, d_h_px_analytic).
    On the optical axis L_analytic reduces to focal_px * separation_cm / d_v.
    """
    _check_in_view(pose, cam, lm)
    cam_h = cam.height_over_ground(lm)
    # Ring band centers on the cylinder axis, heights above ground in cm.
    red_h = lm.height_cm - lm.ring_height_cm / 2.0
    blue_h = lm.ring_height_cm / 2.0
    u = cam.focal_px * pose.d_h / pose.d_v + cam.cx
    red = PixelCoord(u, cam.focal_px * (cam_h - red_h) / pose.d_v + cam.cy)
    blue = PixelCoord(u, cam.focal_px * (cam_h - blue_h) / pose.d_v + cam.cy)
    L_analytic = float(np.hypot(blue.x - red.x, blue.y - red.y))
    d_h_px = (red.x + blue.x) / 2.0 - cam.cx
    return red, blue, L_analytic, d_h_px


def _ground_truth(pose: Pose, cam: CameraSpec, lm: LandmarkSpec):
    _, _, L_analytic, d_h_px = project_ring_centers(pose, cam, lm)
    return GroundTruth(
        d_v_cm=pose.d_v,
        d_h_cm=pose.d_h,
        theta_deg=math.degrees(math.atan2(pose.d_h, pose.d_v)),
        d_cm=math.hypot(pose.d_v, pose.d_h),
        L_px=L_analytic,
        d_h_px=d_h_px,
    )


def render(
    pose: Pose,
    cam: CameraSpec = CameraSpec(),
    lm: LandmarkSpec = LandmarkSpec(),
    background: Tuple[int, int, int] = DEFAULT_BACKGROUND,
    noise_sigma: float = 0.0,
    seed=None,
):
    """Rasterize the landmark; returns (image, GroundTruth).

    Each pixel's ray is intersected with the infinite cylinder (the
    quadratic depends only on the column, since the axis is vertical);
    the hit height selects body or ring color, no antialiasing and no
    end caps. Additive Gaussian noise of standard deviation noise_sigma
    is applied per channel when positive, seeded for reproducibility,
    and clamped to 0..255.
    """
    truth = _ground_truth(pose, cam, lm)
    w, h = cam.image_width, cam.image_height
    f = cam.focal_px
    r = lm.radius_cm

    dx = (np.arange(w, dtype=np.float64) - cam.cx) / f
    dy = (np.arange(h, dtype=np.float64) - cam.cy) / f
    # Ray p(t) = t*(dx, dy, 1); the cylinder axis passes through
    # (d_h, *, d_v), so hits satisfy (t*dx - d_h)^2 + (t - d_v)^2 = r^2.
    a = dx * dx + 1.0
    b = -2.0 * (dx * pose.d_h + pose.d_v)
    c = pose.d_h * pose.d_h + pose.d_v * pose.d_v - r * r
    disc = b * b - 4.0 * a * c
    hit = disc > 0.0
    t = np.full(w, np.inf)
    t[hit] = (-b[hit] - np.sqrt(disc[hit])) / (2.0 * a[hit])
    t[t <= 0.0] = np.inf

    # Camera-frame y of the hit point, per (row, column).
    y_hit = dy[:, None] * t[None, :]
    cam_h = cam.height_over_ground(lm)
    y_top = cam_h - lm.height_cm
    body = (y_hit >= y_top) & (y_hit <= cam_h)
    red_band = body & (y_hit <= y_top + lm.ring_height_cm)
    blue_band = body & (y_hit >= cam_h - lm.ring_height_cm)

    img = np.empty((h, w, 3), dtype=np.uint8)
    img[:] = np.asarray(background, dtype=np.uint8)
    img[body] = np.asarray(lm.body_color, dtype=np.uint8)
    img[red_band] = np.asarray(lm.top_ring_color, dtype=np.uint8)
    img[blue_band] = np.asarray(lm.bottom_ring_color, dtype=np.uint8)

    if noise_sigma > 0.0:
        rng = np.random.default_rng(seed)
        noisy = img.astype(np.float64) + rng.standard_normal(img.shape) * noise_sigma
        img = np.clip(np.rint(noisy), 0, 255).astype(np.uint8)
    return img, truth


MANIFEST_NAME = "manifest.csv"
MANIFEST_FIELDS = ["filename", "d_v_cm", "d_h_cm", "theta_deg", "d_cm", "L_px", "d_h_px"]


def pose_grid(d_v_values, theta_deg_values):
    """Poses for every (distance, bearing) pair; lateral offset d_h = d_v*tan(theta)."""
    return [
        Pose(d_v=float(d_v), d_h=float(d_v) * math.tan(math.radians(float(th))))
        for d_v in d_v_values
        for th in theta_deg_values
    ]


def generate_dataset(
    poses,
    cam: CameraSpec = CameraSpec(),
    lm: LandmarkSpec = LandmarkSpec(),
    out_dir=".",
    noise_sigma: float = 0.0,
    base_seed: int = 0,
    background: Tuple[int, int, int] = DEFAULT_BACKGROUND,
):
    """Render one PPM per pose and write a ground-truth manifest CSV.

    Per-pose noise is seeded with (base_seed, pose_index) so any pose can
    be re-rendered independently and runs are reproducible. Floats in the
    manifest are written with repr, which round-trips exactly. Returns the
    manifest path.
    """
    poses = list(poses)
    if not poses:
        raise ValueError("generate_dataset needs at least one pose")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    manifest_path = out_dir / MANIFEST_NAME
    with open(manifest_path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(MANIFEST_FIELDS)
        for index, pose in enumerate(poses):
            img, truth = render(
                pose, cam, lm, background=background, noise_sigma=noise_sigma,
                seed=(base_seed, index),
            )
            filename = f"pose_{index:04d}.ppm"
            save_image(img, out_dir / filename)
            writer.writerow(
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
    return manifest_path
