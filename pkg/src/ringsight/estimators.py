"""scikit-learn style wrappers around the functional pipeline.

RangeBearingEstimator follows the fit/predict convention: fit() calibrates
the two model constants from images with known ground truth, predict()
maps images to (range_cm, bearing_deg) rows. The denoiser transformers
wrap the filters for use in sklearn Pipelines. All estimators keep their
constructor parameters verbatim so clone()/get_params()/set_params() work.
"""

import numpy as np
from sklearn.base import BaseEstimator, TransformerMixin
from sklearn.utils.validation import check_is_fitted

from .calibration import HorizontalSample, VerticalSample, fit_horizontal, fit_vertical
from .estimation import CalibrationModel, estimate
from .filtering import FilterSpec, bilateral_filter, gaussian_filter, median_filter
from .segmentation import HsvRange, SegmentationConfig, detect_rings


def _as_image_list(X):
    if isinstance(X, np.ndarray) and X.ndim == 3:
        return [X]
    return list(X)


class MedianDenoiser(TransformerMixin, BaseEstimator):
    """Stateless median filter transformer (per-channel, clamped borders)."""

    def __init__(self, window=15):
        self.window = window

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        return [median_filter(img, self.window) for img in _as_image_list(X)]


class GaussianDenoiser(TransformerMixin, BaseEstimator):
    def __init__(self, window=15, sigma_space=None):
        self.window = window
        self.sigma_space = sigma_space

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        sigma = self.window / 6.0 if self.sigma_space is None else self.sigma_space
        return [gaussian_filter(img, self.window, sigma) for img in _as_image_list(X)]


class BilateralDenoiser(TransformerMixin, BaseEstimator):
    def __init__(self, window=15, sigma_space=None, sigma_color=25.0):
        self.window = window
        self.sigma_space = sigma_space
        self.sigma_color = sigma_color

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        sigma = self.window / 6.0 if self.sigma_space is None else self.sigma_space
        return [
            bilateral_filter(img, self.window, sigma, self.sigma_color)
            for img in _as_image_list(X)
        ]


class RingDetector(TransformerMixin, BaseEstimator):
    """Images to raw detection features: columns [L_px, offset_ratio].

    offset_ratio is the centroid midpoint's offset from the image
    centerline divided by L, the scale-free lateral feature the
    geometry consumes.
    """

    def __init__(self, red=None, blue=None, filter_spec=None, min_blob_px=20):
        self.red = red
        self.blue = blue
        self.filter_spec = filter_spec
        self.min_blob_px = min_blob_px

    def _config(self):
        return SegmentationConfig(
            red=self.red if self.red is not None else HsvRange(350.0, 10.0),
            blue=self.blue if self.blue is not None else HsvRange(200.0, 260.0),
            filter_spec=self.filter_spec if self.filter_spec is not None else FilterSpec(),
            min_blob_px=self.min_blob_px,
        )

    def fit(self, X, y=None):
        return self

    def transform(self, X):
        cfg = self._config()
        features = []
        for img in _as_image_list(X):
            det = detect_rings(img, cfg)
            offset_px = det.midpoint.x - (det.image_width - 1) / 2.0
            features.append([det.L, offset_px / det.L])
        return np.asarray(features, dtype=np.float64)


class RangeBearingEstimator(BaseEstimator):
    """Monocular landmark localizer with a fit/predict interface.

    fit(X, y): X is a sequence of RGB images of the landmark, y is an
    (n, 2) array of ground-truth [d_v_cm, d_h_cm] per image. Fitting runs
    ring detection on every image and least-squares fits the vertical
    constant a_vert_ and horizontal constant k_horiz_.

    predict(X): (n, 2) array of [range_cm, bearing_deg].
    """

    def __init__(
        self,
        filter_kind="median",
        filter_window=15,
        sigma_space=None,
        sigma_color=None,
        red_h_lo=350.0,
        red_h_hi=10.0,
        red_s_min=0.5,
        red_v_min=0.3,
        blue_h_lo=200.0,
        blue_h_hi=260.0,
        blue_s_min=0.5,
        blue_v_min=0.3,
        min_blob_px=20,
        d_v_min=28.0,
        d_v_max=72.0,
        bearing_abs_max=25.0,
    ):
        self.filter_kind = filter_kind
        self.filter_window = filter_window
        self.sigma_space = sigma_space
        self.sigma_color = sigma_color
        self.red_h_lo = red_h_lo
        self.red_h_hi = red_h_hi
        self.red_s_min = red_s_min
        self.red_v_min = red_v_min
        self.blue_h_lo = blue_h_lo
        self.blue_h_hi = blue_h_hi
        self.blue_s_min = blue_s_min
        self.blue_v_min = blue_v_min
        self.min_blob_px = min_blob_px
        self.d_v_min = d_v_min
        self.d_v_max = d_v_max
        self.bearing_abs_max = bearing_abs_max

    def _segmentation_config(self):
        return SegmentationConfig(
            red=HsvRange(self.red_h_lo, self.red_h_hi, self.red_s_min, self.red_v_min),
            blue=HsvRange(self.blue_h_lo, self.blue_h_hi, self.blue_s_min, self.blue_v_min),
            filter_spec=FilterSpec(
                kind=self.filter_kind,
                window=self.filter_window,
                sigma_space=self.sigma_space,
                sigma_color=self.sigma_color,
            ),
            min_blob_px=self.min_blob_px,
        )

    def _detect(self, img, cfg):
        det = detect_rings(img, cfg)
        offset_px = det.midpoint.x - (det.image_width - 1) / 2.0
        return det, offset_px / det.L

    def fit(self, X, y):
        images = _as_image_list(X)
        truth = np.asarray(y, dtype=np.float64)
        if truth.ndim != 2 or truth.shape[1] != 2 or truth.shape[0] != len(images):
            raise ValueError(
                "y must be an (n_images, 2) array of [d_v_cm, d_h_cm] ground truth"
            )
        cfg = self._segmentation_config()
        vertical = []
        horizontal = []
        dims = None
        for img, (d_v, d_h) in zip(images, truth):
            det, offset_ratio = self._detect(img, cfg)
            if dims is None:
                dims = (det.image_width, det.image_height)
            elif dims != (det.image_width, det.image_height):
                raise ValueError("all calibration images must share one resolution")
            vertical.append(VerticalSample(d_v=d_v, L=det.L))
            horizontal.append(HorizontalSample(d_h_cm=d_h, d_h_px=offset_ratio))
        a_vert, self.vertical_report_ = fit_vertical(vertical)
        k_horiz, self.horizontal_report_ = fit_horizontal(horizontal)
        self.a_vert_ = a_vert
        self.k_horiz_ = k_horiz
        self.model_ = CalibrationModel(
            a_vert=a_vert,
            k_horiz=k_horiz,
            image_width=dims[0],
            image_height=dims[1],
            d_v_min=self.d_v_min,
            d_v_max=self.d_v_max,
            bearing_abs_max=self.bearing_abs_max,
        )
        return self

    @classmethod
    def from_model(cls, model: CalibrationModel, **params):
        """Wrap an already-fitted CalibrationModel in a ready estimator."""
        est = cls(
            d_v_min=model.d_v_min,
            d_v_max=model.d_v_max,
            bearing_abs_max=model.bearing_abs_max,
            **params,
        )
        est.model_ = model
        est.a_vert_ = model.a_vert
        est.k_horiz_ = model.k_horiz
        return est

    def predict_estimates(self, X):
        """Full Estimate objects (intermediates and validity flags included)."""
        check_is_fitted(self, "model_")
        cfg = self._segmentation_config()
        results = []
        for img in _as_image_list(X):
            det, _ = self._detect(img, cfg)
            results.append(estimate(det, self.model_))
        return results

    def predict(self, X):
        return np.asarray(
            [[e.d, e.theta] for e in self.predict_estimates(X)], dtype=np.float64
        )
