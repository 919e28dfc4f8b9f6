"""No-reference quality via distance from a pristine natural-image model.

Pipeline: locally normalize luminance (MSCN coefficients), fit generalized
Gaussian statistics per 96x96 patch at two scales (18 features per scale),
keep the sharpest patches, then measure the Mahalanobis-style distance
between the pooled patch statistics and a fitted pristine model.

The pristine model ships as a versioned data file and can be refitted from
any corpus of undistorted images.  Absolute scores are only comparable
between runs using the same pristine model; cross-tool comparisons are
ordering-only.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Sequence

import numpy as np
from scipy import ndimage
from scipy.special import gamma as gamma_fn

from ..errors import MetricError
from ..image import ColorSpace, PlanarImage, extract_y
from ..resample import BICUBIC, resize_planes
from .base import MetricResult

__all__ = [
    "NiqePristineModel",
    "fit_ggd",
    "fit_aggd",
    "mscn_transform",
    "image_feature_rows",
    "fit_pristine_model",
    "niqe",
    "default_pristine_model",
]

FEATURES_PER_SCALE = 18
FEATURE_DIM = 2 * FEATURES_PER_SCALE

# Shape-parameter lookup grids (moment matching): precomputed once.
_SHAPE_GRID = np.arange(0.2, 10.0, 0.001)
_GAMMA_1 = gamma_fn(1.0 / _SHAPE_GRID)
_GAMMA_2 = gamma_fn(2.0 / _SHAPE_GRID)
_GAMMA_3 = gamma_fn(3.0 / _SHAPE_GRID)
# AGGD target: gamma(2/a)^2 / (gamma(1/a) * gamma(3/a)) matched against rhat_norm
_R_AGGD = (_GAMMA_2 * _GAMMA_2) / (_GAMMA_1 * _GAMMA_3)
# GGD target: E[x^2] / E[|x|]^2 = gamma(1/a) * gamma(3/a) / gamma(2/a)^2
_R_GGD = 1.0 / _R_AGGD

# 7x7 Gaussian used for the local MSCN statistics.
_MSCN_SIGMA = 7.0 / 6.0
_MSCN_HALF = 3

# Paired-product neighbor shifts: horizontal, vertical, main and anti diagonal.
_PAIR_SHIFTS = ((0, 1), (1, 0), (1, 1), (-1, 1))


def _gauss_taps(half: int, sigma: float) -> np.ndarray:
    x = np.arange(-half, half + 1, dtype=np.float64)
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


_MSCN_TAPS = _gauss_taps(_MSCN_HALF, _MSCN_SIGMA)


def mscn_transform(plane: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Mean-subtracted contrast-normalized coefficients and the local sigma field.

    Local mean/std come from a 7x7 Gaussian (sigma 7/6) with replicated
    edges; the stabilizing constant is 1.0 on the [0,255] scale.
    """
    plane = np.asarray(plane, dtype=np.float64)
    mu = ndimage.correlate1d(plane, _MSCN_TAPS, axis=0, mode="nearest")
    mu = ndimage.correlate1d(mu, _MSCN_TAPS, axis=1, mode="nearest")
    second = ndimage.correlate1d(plane * plane, _MSCN_TAPS, axis=0, mode="nearest")
    second = ndimage.correlate1d(second, _MSCN_TAPS, axis=1, mode="nearest")
    sigma = np.sqrt(np.abs(second - mu * mu))
    return (plane - mu) / (sigma + 1.0), sigma


def fit_ggd(samples: np.ndarray) -> tuple[float, float]:
    """Moment-matching fit of a zero-mean generalized Gaussian: (shape, scale)."""
    x = np.asarray(samples, dtype=np.float64).ravel()
    m2 = float(np.mean(x * x))
    e1 = float(np.mean(np.abs(x)))
    if m2 == 0.0 or e1 == 0.0:
        return np.nan, np.nan
    rho = m2 / (e1 * e1)
    pos = int(np.argmin((_R_GGD - rho) ** 2))
    alpha = float(_SHAPE_GRID[pos])
    beta = float(np.sqrt(m2 * _GAMMA_1[pos] / _GAMMA_3[pos]))
    return alpha, beta


def fit_aggd(samples: np.ndarray) -> tuple[float, float, float, float]:
    """Moment-matching fit of an asymmetric GGD.

    Returns (shape, mean, left scale, right scale).  Uses the r-hat /
    gamma-hat lookup inversion over the precomputed shape grid.
    """
    x = np.asarray(samples, dtype=np.float64).ravel()
    m2 = float(np.mean(x * x))
    if m2 == 0.0:
        return np.nan, np.nan, np.nan, np.nan
    left = x[x < 0.0]
    right = x[x > 0.0]
    left_std = float(np.sqrt(np.mean(left * left))) if left.size else 0.0
    right_std = float(np.sqrt(np.mean(right * right))) if right.size else 0.0
    gamma_hat = left_std / right_std if right_std > 0.0 else np.inf
    rhat = float(np.mean(np.abs(x))) ** 2 / m2
    if np.isinf(gamma_hat):
        rhat_norm = rhat * gamma_hat
    else:
        rhat_norm = rhat * ((gamma_hat**3 + 1.0) * (gamma_hat + 1.0)) / ((gamma_hat**2 + 1.0) ** 2)
    pos = int(np.argmin((_R_AGGD - rhat_norm) ** 2))
    alpha = float(_SHAPE_GRID[pos])
    ratio = np.sqrt(_GAMMA_1[pos] / _GAMMA_3[pos])
    beta_left = float(left_std * ratio)
    beta_right = float(right_std * ratio)
    mean = (beta_right - beta_left) * (_GAMMA_2[pos] / _GAMMA_1[pos])
    return alpha, float(mean), beta_left, beta_right


def _patch_features(mscn_patch: np.ndarray) -> list[float]:
    feats = list(fit_ggd(mscn_patch))
    for shift in _PAIR_SHIFTS:
        paired = mscn_patch * np.roll(mscn_patch, shift, axis=(0, 1))
        feats.extend(fit_aggd(paired))
    return feats


@dataclass(frozen=True)
class NiqePristineModel:
    """Mean and covariance of pristine patch features, plus fit settings."""

    mean: np.ndarray
    cov: np.ndarray
    patch_size: int = 96
    sharpness_fraction: float = 0.75

    def __post_init__(self):
        mean = np.asarray(self.mean, dtype=np.float64)
        cov = np.asarray(self.cov, dtype=np.float64)
        if mean.ndim != 1 or mean.shape[0] != FEATURE_DIM:
            raise MetricError(f"pristine mean must have dimension {FEATURE_DIM}, got {mean.shape}")
        if cov.shape != (FEATURE_DIM, FEATURE_DIM):
            raise MetricError(f"pristine covariance must be {FEATURE_DIM}x{FEATURE_DIM}, got {cov.shape}")
        if not np.allclose(cov, cov.T, atol=1e-8):
            raise MetricError("pristine covariance must be symmetric")
        scale = max(float(np.trace(cov)) / FEATURE_DIM, 1.0)
        if float(np.min(np.linalg.eigvalsh(cov))) < -1e-6 * scale:
            raise MetricError("pristine covariance must be positive semi-definite")
        if self.patch_size < 16 or self.patch_size % 2 != 0:
            raise MetricError("patch size must be an even integer >= 16")
        if not 0.0 < self.sharpness_fraction <= 1.0:
            raise MetricError("sharpness fraction must be in (0, 1]")
        mean.setflags(write=False)
        cov.setflags(write=False)
        object.__setattr__(self, "mean", mean)
        object.__setattr__(self, "cov", cov)

    def to_json_obj(self) -> dict:
        return {
            "format": "srbench-niqe-pristine",
            "format_version": 1,
            "feature_dim": FEATURE_DIM,
            "patch_size": self.patch_size,
            "sharpness_fraction": self.sharpness_fraction,
            "mean": self.mean.tolist(),
            "cov_rows": self.cov.tolist(),
        }

    def save(self, path) -> None:
        Path(path).write_text(json.dumps(self.to_json_obj()) + "\n", encoding="utf-8")

    @staticmethod
    def from_json_obj(obj: dict) -> "NiqePristineModel":
        if obj.get("format") != "srbench-niqe-pristine":
            raise MetricError("not a pristine-model file (missing format marker)")
        if obj.get("format_version") != 1:
            raise MetricError(f"unsupported pristine-model version {obj.get('format_version')!r}")
        if obj.get("feature_dim") != FEATURE_DIM:
            raise MetricError(
                f"pristine model dimension {obj.get('feature_dim')!r} does not match expected {FEATURE_DIM}"
            )
        return NiqePristineModel(
            mean=np.array(obj["mean"], dtype=np.float64),
            cov=np.array(obj["cov_rows"], dtype=np.float64),
            patch_size=int(obj["patch_size"]),
            sharpness_fraction=float(obj["sharpness_fraction"]),
        )

    @staticmethod
    def load(path) -> "NiqePristineModel":
        try:
            obj = json.loads(Path(path).read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise MetricError(f"cannot read pristine model {path}: {exc}") from exc
        return NiqePristineModel.from_json_obj(obj)


def _to_luma_plane(img: PlanarImage) -> np.ndarray:
    if img.colorspace is ColorSpace.GRAY:
        return img.data[0]
    return extract_y(img).data[0]


def image_feature_rows(
    plane: np.ndarray, patch_size: int = 96, sharpness_fraction: float = 0.75
) -> np.ndarray:
    """Per-patch 36-feature rows for one luma plane, sharpest patches only.

    The plane is cropped to whole patches, features are extracted per patch
    at full resolution and at a bicubic x0.5 downscale (same patch grid),
    and only the patches whose mean local sigma exceeds
    sharpness_fraction * max are kept.  Rows with degenerate fits are NaN.
    """
    plane = np.asarray(plane, dtype=np.float64)
    h, w = plane.shape
    blocks_y = h // patch_size
    blocks_x = w // patch_size
    if blocks_y < 1 or blocks_x < 1:
        raise MetricError(
            f"image {w}x{h} is smaller than one {patch_size}x{patch_size} patch"
        )
    plane = plane[: blocks_y * patch_size, : blocks_x * patch_size]

    mscn_full, sigma = mscn_transform(plane)
    half_plane = resize_planes(
        plane[np.newaxis], plane.shape[1] // 2, plane.shape[0] // 2, BICUBIC, antialias=True
    )[0]
    mscn_half, _ = mscn_transform(half_plane)

    half_patch = patch_size // 2
    rows = []
    sharpness = []
    for by in range(blocks_y):
        for bx in range(blocks_x):
            y0, x0 = by * patch_size, bx * patch_size
            full = mscn_full[y0 : y0 + patch_size, x0 : x0 + patch_size]
            halved = mscn_half[
                by * half_patch : (by + 1) * half_patch, bx * half_patch : (bx + 1) * half_patch
            ]
            rows.append(_patch_features(full) + _patch_features(halved))
            sharpness.append(float(np.mean(sigma[y0 : y0 + patch_size, x0 : x0 + patch_size])))

    rows = np.array(rows, dtype=np.float64)
    sharpness = np.array(sharpness)
    keep = sharpness > sharpness_fraction * float(np.max(sharpness))
    return rows[keep]


def _drop_nan_rows(rows: np.ndarray) -> np.ndarray:
    return rows[~np.isnan(rows).any(axis=1)]


def mahalanobis_distance(
    mean_a: np.ndarray, cov_a: np.ndarray, mean_b: np.ndarray, cov_b: np.ndarray
) -> float:
    """sqrt(d^T ((cov_a+cov_b)/2)^+ d); pseudo-inverse guards singular pools."""
    diff = np.asarray(mean_a, dtype=np.float64) - np.asarray(mean_b, dtype=np.float64)
    pooled = (np.asarray(cov_a, dtype=np.float64) + np.asarray(cov_b, dtype=np.float64)) / 2.0
    inv = np.linalg.pinv(pooled, rcond=1e-10)
    quad = float(diff @ inv @ diff)
    return float(np.sqrt(max(quad, 0.0)))


def niqe(img: PlanarImage, model: NiqePristineModel) -> MetricResult:
    """NIQE score of a single-channel image against a pristine model. Lower is better."""
    if img.channels != 1:
        raise MetricError("niqe expects a single-channel (luma) image")
    min_dim = 2 * model.patch_size
    if img.width < min_dim or img.height < min_dim:
        raise MetricError(
            f"image {img.width}x{img.height} too small for niqe; needs at least {min_dim}x{min_dim}"
        )
    rows = _drop_nan_rows(
        image_feature_rows(img.data[0], model.patch_size, model.sharpness_fraction)
    )
    if rows.shape[0] < 2:
        raise MetricError("fewer than 2 qualifying patches for niqe")
    sample_mean = rows.mean(axis=0)
    sample_cov = np.cov(rows, rowvar=False)
    return MetricResult("niqe", mahalanobis_distance(model.mean, model.cov, sample_mean, sample_cov))


def fit_pristine_model(
    corpus: Sequence[PlanarImage],
    patch_size: int = 96,
    sharpness_fraction: float = 0.75,
    min_images: int = 25,
) -> NiqePristineModel:
    """Fit a pristine model by pooling qualifying patch features over a corpus."""
    if len(corpus) < min_images:
        raise MetricError(f"pristine corpus too small: {len(corpus)} images, need >= {min_images}")
    min_dim = 2 * patch_size
    pooled = []
    for i, img in enumerate(corpus):
        if img.width < min_dim or img.height < min_dim:
            raise MetricError(
                f"corpus image {i} is {img.width}x{img.height}; needs at least {min_dim}x{min_dim}"
            )
        pooled.append(image_feature_rows(_to_luma_plane(img), patch_size, sharpness_fraction))
    rows = _drop_nan_rows(np.vstack(pooled))
    if rows.shape[0] <= FEATURE_DIM:
        raise MetricError(
            f"only {rows.shape[0]} usable patches pooled; need more than {FEATURE_DIM}"
        )
    mean = rows.mean(axis=0)
    cov = np.cov(rows, rowvar=False)
    cov = (cov + cov.T) / 2.0
    return NiqePristineModel(mean, cov, patch_size, sharpness_fraction)


@lru_cache(maxsize=1)
def default_pristine_model() -> NiqePristineModel:
    """The pristine model shipped with the package."""
    text = resources.files("srbench").joinpath("data", "niqe_pristine_v1.json").read_text("utf-8")
    return NiqePristineModel.from_json_obj(json.loads(text))
