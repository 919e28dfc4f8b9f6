"""Structural similarity, following the original authors' single-scale variant.

11x11 Gaussian window (sigma 1.5), valid-region statistics (no padded
windows contribute), and automatic low-pass downsampling by
f = max(1, round(min(h, w) / 256)) before comparison.  SSIM variants differ
enough to shift reported numbers, so the exact variant is fixed here and
the downsampling step can be disabled explicitly.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from ..errors import MetricError
from ..image import PlanarImage
from .base import MetricResult

__all__ = ["SsimParams", "DEFAULT_SSIM_PARAMS", "ssim", "gaussian_window"]


@dataclass(frozen=True)
class SsimParams:
    window_size: int = 11
    sigma: float = 1.5
    k1: float = 0.01
    k2: float = 0.03
    dynamic_range: float = 255.0
    auto_downsample: bool = True

    @property
    def c1(self) -> float:
        return (self.k1 * self.dynamic_range) ** 2

    @property
    def c2(self) -> float:
        return (self.k2 * self.dynamic_range) ** 2


DEFAULT_SSIM_PARAMS = SsimParams()


def gaussian_window(size: int = 11, sigma: float = 1.5) -> np.ndarray:
    """1-D Gaussian taps normalized to sum to 1 (2-D window is their outer product)."""
    half = (size - 1) / 2.0
    x = np.arange(size, dtype=np.float64) - half
    w = np.exp(-(x * x) / (2.0 * sigma * sigma))
    return w / w.sum()


def _windowed_mean(plane: np.ndarray, taps: np.ndarray) -> np.ndarray:
    """Separable Gaussian-weighted local mean, cropped to the valid region."""
    half = len(taps) // 2
    out = ndimage.correlate1d(plane, taps, axis=0, mode="constant")
    out = ndimage.correlate1d(out, taps, axis=1, mode="constant")
    return out[half:-half, half:-half]


def _auto_downsample(a: np.ndarray, b: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    h, w = a.shape
    f = int(np.floor(min(h, w) / 256.0 + 0.5))
    if f <= 1:
        return a, b
    a = ndimage.uniform_filter(a, size=f, mode="reflect")[::f, ::f]
    b = ndimage.uniform_filter(b, size=f, mode="reflect")[::f, ::f]
    return a, b


def ssim(ref: PlanarImage, out: PlanarImage, params: SsimParams = DEFAULT_SSIM_PARAMS) -> MetricResult:
    """Mean SSIM between two single-channel images on the [0,255] scale."""
    if ref.channels != 1 or out.channels != 1:
        raise MetricError("ssim expects single-channel images (use the Y channel)")
    if ref.data.shape != out.data.shape:
        raise MetricError(
            f"ssim inputs differ in shape: {ref.data.shape} vs {out.data.shape}"
        )
    a = ref.data[0]
    b = out.data[0]
    if params.auto_downsample:
        a, b = _auto_downsample(a, b)
    if min(a.shape) < params.window_size:
        raise MetricError(
            f"image {a.shape[1]}x{a.shape[0]} is smaller than the {params.window_size}-pixel SSIM window"
        )
    taps = gaussian_window(params.window_size, params.sigma)
    mu_a = _windowed_mean(a, taps)
    mu_b = _windowed_mean(b, taps)
    var_a = _windowed_mean(a * a, taps) - mu_a * mu_a
    var_b = _windowed_mean(b * b, taps) - mu_b * mu_b
    cov_ab = _windowed_mean(a * b, taps) - mu_a * mu_b
    c1, c2 = params.c1, params.c2
    ssim_map = ((2.0 * mu_a * mu_b + c1) * (2.0 * cov_ab + c2)) / (
        (mu_a * mu_a + mu_b * mu_b + c1) * (var_a + var_b + c2)
    )
    return MetricResult("ssim", float(np.mean(ssim_map)))
