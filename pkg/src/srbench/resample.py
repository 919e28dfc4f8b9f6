"""Antialiased separable resampling (nearest / bilinear / bicubic).

Follows the MATLAB ``imresize`` conventions wherever they matter for
super-resolution benchmarks: Keys bicubic kernel with a = -0.5, half-pixel
coordinate mapping, and kernel stretching by 1/scale when antialiasing a
downscale.  Edges are handled by clamping source indices to the image, and
the weights of every output coordinate are normalized to sum to 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import ImageError
from .image import ColorSpace, PlanarImage, quantize

__all__ = [
    "KernelKind",
    "ResampleKernel",
    "NEAREST",
    "BILINEAR",
    "BICUBIC",
    "resize",
    "resize_planes",
    "downscale_hr",
    "center_crop_to_multiple",
]

SUPPORTED_SCALES = (2, 3, 4, 8)


class KernelKind(str, Enum):
    NEAREST = "nearest"
    BILINEAR = "bilinear"
    BICUBIC = "bicubic"


def _cubic(x: np.ndarray) -> np.ndarray:
    """Keys cubic convolution kernel with a = -0.5 (support 2)."""
    ax = np.abs(x)
    ax2 = ax * ax
    ax3 = ax2 * ax
    inner = 1.5 * ax3 - 2.5 * ax2 + 1.0
    outer = -0.5 * ax3 + 2.5 * ax2 - 4.0 * ax + 2.0
    return np.where(ax <= 1.0, inner, np.where(ax <= 2.0, outer, 0.0))


def _triangle(x: np.ndarray) -> np.ndarray:
    ax = np.abs(x)
    return np.where(ax <= 1.0, 1.0 - ax, 0.0)


def _box(x: np.ndarray) -> np.ndarray:
    return np.where((x >= -0.5) & (x < 0.5), 1.0, 0.0)


@dataclass(frozen=True)
class ResampleKernel:
    """Resampling kernel with its half-width support in source pixels."""

    kind: KernelKind
    support: float

    def __call__(self, x: np.ndarray) -> np.ndarray:
        if self.kind is KernelKind.BICUBIC:
            return _cubic(x)
        if self.kind is KernelKind.BILINEAR:
            return _triangle(x)
        return _box(x)


NEAREST = ResampleKernel(KernelKind.NEAREST, 0.5)
BILINEAR = ResampleKernel(KernelKind.BILINEAR, 1.0)
BICUBIC = ResampleKernel(KernelKind.BICUBIC, 2.0)

_BY_KIND = {k.kind: k for k in (NEAREST, BILINEAR, BICUBIC)}


def kernel_for(kind: KernelKind | str) -> ResampleKernel:
    return _BY_KIND[KernelKind(kind)]


def _contributions(in_size: int, out_size: int, kernel: ResampleKernel, antialias: bool):
    """Per-output-coordinate source indices and normalized weights.

    Returns (indices, weights), both shaped (out_size, taps).  Indices are
    clamped to the valid range after the weights are normalized, which
    realizes clamp-to-edge while keeping each row's weight sum exactly 1.
    """
    scale = out_size / in_size
    u = (np.arange(out_size, dtype=np.float64) + 0.5) / scale - 0.5
    if antialias and scale < 1.0:
        kscale = scale
        half_width = kernel.support / scale
    else:
        kscale = 1.0
        half_width = kernel.support
    left = np.floor(u - half_width).astype(np.int64)
    taps = int(np.ceil(2.0 * half_width)) + 2
    indices = left[:, np.newaxis] + np.arange(taps, dtype=np.int64)[np.newaxis, :]
    weights = kscale * kernel(kscale * (u[:, np.newaxis] - indices))
    weights /= weights.sum(axis=1, keepdims=True)
    indices = np.clip(indices, 0, in_size - 1)
    return indices, weights


def resize_planes(
    data: np.ndarray,
    out_w: int,
    out_h: int,
    kernel: ResampleKernel = BICUBIC,
    antialias: bool = True,
) -> np.ndarray:
    """Resample a (C,H,W) float array to (C,out_h,out_w), width pass first."""
    if out_w < 1 or out_h < 1:
        raise ImageError(f"output size must be >= 1, got {out_w}x{out_h}")
    data = np.asarray(data, dtype=np.float64)
    _, in_h, in_w = data.shape

    idx_w, w_w = _contributions(in_w, out_w, kernel, antialias)
    data = np.einsum("chwt,wt->chw", data[:, :, idx_w], w_w)

    idx_h, w_h = _contributions(in_h, out_h, kernel, antialias)
    data = np.einsum("chtw,ht->chw", data[:, idx_h, :], w_h)
    return data


def resize(
    img: PlanarImage,
    out_w: int,
    out_h: int,
    kernel: ResampleKernel = BICUBIC,
    antialias: bool = True,
) -> PlanarImage:
    """Separable resampling of a PlanarImage to out_w x out_h."""
    return PlanarImage(resize_planes(img.data, out_w, out_h, kernel, antialias), img.colorspace)


def center_crop_to_multiple(img: PlanarImage, multiple: int) -> PlanarImage:
    """Center-crop so both dimensions are multiples of `multiple`."""
    if multiple < 1:
        raise ImageError(f"crop multiple must be >= 1, got {multiple}")
    new_w = (img.width // multiple) * multiple
    new_h = (img.height // multiple) * multiple
    if new_w < 1 or new_h < 1:
        raise ImageError(
            f"image {img.width}x{img.height} is smaller than the required multiple {multiple}"
        )
    left = (img.width - new_w) // 2
    top = (img.height - new_h) // 2
    if new_w == img.width and new_h == img.height:
        return img
    return PlanarImage(img.data[:, top : top + new_h, left : left + new_w], img.colorspace)


def downscale_hr(img: PlanarImage, scale: int) -> PlanarImage:
    """Generate the LR counterpart of an HR image: center-crop to a multiple
    of `scale`, bicubic-downscale with antialiasing, quantize to 8-bit levels."""
    if scale not in SUPPORTED_SCALES:
        raise ImageError(f"unsupported downscale factor {scale}; expected one of {SUPPORTED_SCALES}")
    if img.width < scale or img.height < scale:
        raise ImageError(
            f"image {img.width}x{img.height} is smaller than the downscale factor {scale}"
        )
    cropped = center_crop_to_multiple(img, scale)
    lr = resize(cropped, cropped.width // scale, cropped.height // scale, BICUBIC, antialias=True)
    return quantize(lr)
