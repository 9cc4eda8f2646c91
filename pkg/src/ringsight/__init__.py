"""Monocular range and bearing estimation from a two-ring cylindrical landmark.

The pipeline: denoise an RGB frame, segment the landmark's red and blue
rings in HSV space, take the blob centroids via image moments, and convert
the centroid separation and centerline offset into range and bearing
through a calibrated pinhole model. A built-in synthetic camera renders
the landmark with exact ground truth so the whole chain is verifiable
without hardware.
"""

from .calibration import (
    Datasheet,
    DatasheetFormatError,
    DegenerateFit,
    FitReport,
    HorizontalSample,
    InsufficientData,
    VerticalSample,
    fit_horizontal,
    fit_vertical,
    load_datasheet,
    load_model,
    samples_from_images,
    save_model,
)
from .estimation import (
    CalibrationModel,
    Estimate,
    ModelMismatch,
    bearing,
    estimate,
    horizontal_distance,
    slant_range,
    vertical_distance,
)
from .estimators import (
    BilateralDenoiser,
    GaussianDenoiser,
    MedianDenoiser,
    RangeBearingEstimator,
    RingDetector,
)
from .evaluation import EvalResult, EvalRow, evaluate_dataset
from .filtering import (
    FilterSpec,
    apply_filter,
    bilateral_filter,
    gaussian_filter,
    median_filter,
)
from .imaging import ImageFormatError, PixelCoord, load_image, rgb_to_hsv, save_image
from .segmentation import (
    BBox,
    Blob,
    DegenerateDetection,
    DetectionError,
    GeometryInverted,
    HsvRange,
    NoBlueRegion,
    NoRedRegion,
    RingDetection,
    SegmentationConfig,
    connected_components,
    detect_rings,
    threshold_hsv,
)
from .synthcam import (
    CameraSpec,
    GroundTruth,
    LandmarkSpec,
    OutOfView,
    Pose,
    generate_dataset,
    pose_grid,
    project_ring_centers,
    render,
)

__version__ = "0.1.0"
