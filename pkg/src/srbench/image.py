"""Planar floating-point pixel buffers, 8-bit PNG I/O, and BT.601 color conversion.

All pixel data in srbench is carried as 64-bit floats in the nominal range
[0, 255], stored planar (one contiguous plane per channel).  Quantization to
8-bit is an explicit operation, never a side effect.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import ImageError

__all__ = [
    "ColorSpace",
    "PrecisionMode",
    "PlanarImage",
    "load_png",
    "save_png",
    "rgb_to_ycbcr",
    "extract_y",
    "quantize",
]

_PNG_SIGNATURE = b"\x89PNG\r\n\x1a\n"

# ITU-R BT.601 studio-swing coefficients (the MATLAB rgb2ycbcr convention),
# applied to R,G,B in [0, 255].
_YCBCR_MATRIX = np.array(
    [
        [65.481, 128.553, 24.966],
        [-37.797, -74.203, 112.0],
        [112.0, -93.786, -18.214],
    ],
    dtype=np.float64,
)
_YCBCR_OFFSET = np.array([16.0, 128.0, 128.0], dtype=np.float64)


class ColorSpace(str, Enum):
    RGB = "rgb"
    YCBCR = "ycbcr"
    GRAY = "gray"


class PrecisionMode(str, Enum):
    """Pixel precision used before metric computation.

    INTEGER8 quantizes samples to integers in {0..255}; FLOAT leaves the
    floating-point samples untouched.
    """

    INTEGER8 = "int8"
    FLOAT = "float"


@dataclass(frozen=True)
class PlanarImage:
    """Immutable planar image: float64 samples, shape (channels, height, width)."""

    data: np.ndarray
    colorspace: ColorSpace = ColorSpace.RGB

    def __post_init__(self):
        data = np.asarray(self.data, dtype=np.float64)
        if data.ndim != 3:
            raise ImageError(f"planar data must be 3-dimensional (C,H,W), got shape {data.shape}")
        channels, height, width = data.shape
        if channels not in (1, 3):
            raise ImageError(f"channel count must be 1 or 3, got {channels}")
        if height < 1 or width < 1:
            raise ImageError(f"image dimensions must be >= 1, got {width}x{height}")
        if channels == 1 and self.colorspace is not ColorSpace.GRAY:
            raise ImageError("single-channel images must use the gray colorspace")
        if channels == 3 and self.colorspace is ColorSpace.GRAY:
            raise ImageError("gray colorspace requires a single channel")
        data = np.ascontiguousarray(data)
        data.setflags(write=False)
        object.__setattr__(self, "data", data)

    @property
    def channels(self) -> int:
        return self.data.shape[0]

    @property
    def height(self) -> int:
        return self.data.shape[1]

    @property
    def width(self) -> int:
        return self.data.shape[2]

    def plane(self, index: int) -> np.ndarray:
        return self.data[index]

    @staticmethod
    def from_planes(planes: np.ndarray, colorspace: ColorSpace) -> "PlanarImage":
        return PlanarImage(np.asarray(planes, dtype=np.float64), colorspace)

    @staticmethod
    def from_interleaved(pixels: np.ndarray, colorspace: ColorSpace) -> "PlanarImage":
        """Build from an (H,W) or (H,W,C) array."""
        arr = np.asarray(pixels, dtype=np.float64)
        if arr.ndim == 2:
            arr = arr[np.newaxis, :, :]
        elif arr.ndim == 3:
            arr = np.moveaxis(arr, 2, 0)
        else:
            raise ImageError(f"expected 2-D or 3-D pixel array, got shape {arr.shape}")
        return PlanarImage(arr, colorspace)

    def to_interleaved(self) -> np.ndarray:
        """Return an (H,W) array for gray images, (H,W,C) otherwise."""
        if self.channels == 1:
            return np.array(self.data[0])
        return np.moveaxis(np.array(self.data), 0, 2)


def _quantize_array(values: np.ndarray) -> np.ndarray:
    # Clip to [0,255] first; the remaining values are non-negative, so
    # half-away-from-zero rounding reduces to floor(x + 0.5).
    return np.floor(np.clip(values, 0.0, 255.0) + 0.5)


def quantize(img: PlanarImage) -> PlanarImage:
    """Clip samples to [0,255] and round half-away-from-zero. Idempotent."""
    return PlanarImage(_quantize_array(img.data), img.colorspace)


def _check_png_header(path: Path) -> None:
    try:
        with open(path, "rb") as fh:
            header = fh.read(25)
    except OSError as exc:
        raise ImageError(f"cannot read {path}: {exc}") from exc
    if len(header) < 25 or not header.startswith(_PNG_SIGNATURE):
        raise ImageError(f"{path} is not a PNG file (only 8-bit PNG is supported)")
    bit_depth = struct.unpack("B", header[24:25])[0]
    if bit_depth == 16:
        raise ImageError(f"{path} is a 16-bit PNG; only 8-bit PNG is supported")
    if bit_depth != 8:
        raise ImageError(f"{path} has unsupported PNG bit depth {bit_depth}; only 8-bit is supported")


def load_png(path) -> PlanarImage:
    """Load an 8-bit gray or RGB PNG. Alpha channels are dropped; palettes expanded."""
    path = Path(path)
    _check_png_header(path)
    try:
        with Image.open(path) as im:
            im.load()
            mode = im.mode
            if mode == "L":
                arr = np.asarray(im, dtype=np.float64)
                return PlanarImage.from_interleaved(arr, ColorSpace.GRAY)
            if mode == "LA":
                arr = np.asarray(im, dtype=np.float64)[:, :, 0]
                return PlanarImage.from_interleaved(arr, ColorSpace.GRAY)
            if mode in ("RGB", "RGBA", "P"):
                if mode != "RGB":
                    # convert() drops alpha / expands the palette without blending
                    im = im.convert("RGB")
                arr = np.asarray(im, dtype=np.float64)
                return PlanarImage.from_interleaved(arr, ColorSpace.RGB)
    except ImageError:
        raise
    except OSError as exc:
        raise ImageError(f"cannot decode {path}: {exc}") from exc
    raise ImageError(f"{path}: unsupported PNG pixel mode {mode!r}")


def save_png(img: PlanarImage, path) -> None:
    """Quantize and write as 8-bit PNG (gray or RGB)."""
    path = Path(path)
    bytes_ = _quantize_array(img.data).astype(np.uint8)
    if img.channels == 1:
        pil = Image.fromarray(bytes_[0], mode="L")
    else:
        pil = Image.fromarray(np.moveaxis(bytes_, 0, 2), mode="RGB")
    try:
        pil.save(path, format="PNG")
    except OSError as exc:
        raise ImageError(f"cannot write {path}: {exc}") from exc


def rgb_to_ycbcr(img: PlanarImage) -> PlanarImage:
    """BT.601 studio-swing RGB -> YCbCr on [0,255] samples. No quantization."""
    if img.colorspace is not ColorSpace.RGB:
        raise ImageError(f"rgb_to_ycbcr expects an RGB image, got {img.colorspace.value}")
    rgb = img.data
    planes = np.einsum("ij,jhw->ihw", _YCBCR_MATRIX, rgb) / 255.0
    planes += _YCBCR_OFFSET[:, np.newaxis, np.newaxis]
    return PlanarImage(planes, ColorSpace.YCBCR)


def extract_y(img: PlanarImage) -> PlanarImage:
    """Return the luma plane as a single-channel gray image.

    RGB inputs are converted first; gray inputs pass through (their only
    plane already is the luma).
    """
    if img.colorspace is ColorSpace.GRAY:
        return img
    if img.colorspace is ColorSpace.RGB:
        img = rgb_to_ycbcr(img)
    return PlanarImage(img.data[0:1], ColorSpace.GRAY)
