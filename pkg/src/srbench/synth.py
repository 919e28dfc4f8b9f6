"""Deterministic synthetic images for fitting, testing, and smoke runs.

`texture_image` produces natural-looking grayscale content (multi-octave
filtered noise, sharp elliptical structures, mild sharpening) suitable for
fitting the pristine no-reference model.  `gradient_image` produces smooth
color ramps where interpolation quality differences show up clearly.
"""

from __future__ import annotations

import numpy as np
from scipy import ndimage

from .image import ColorSpace, PlanarImage

__all__ = ["texture_image", "make_pristine_corpus", "gradient_image"]


def texture_image(rng: np.random.Generator, size: int = 384) -> PlanarImage:
    """One sharp, textured grayscale image drawn from the given generator."""
    img = np.zeros((size, size))
    amp = 1.0
    for sigma in (1, 2, 4, 8, 16, 32):
        img += amp * ndimage.gaussian_filter(rng.standard_normal((size, size)), sigma)
        amp *= 1.6
    lo, hi = img.min(), img.max()
    img = 40.0 + (img - lo) / (hi - lo) * 175.0

    yy, xx = np.mgrid[0:size, 0:size].astype(np.float64)
    for _ in range(int(rng.integers(8, 14))):
        cx, cy = rng.uniform(0, size, 2)
        ax, bx = rng.uniform(size * 0.03, size * 0.25, 2)
        theta = rng.uniform(0, np.pi)
        ct, st = np.cos(theta), np.sin(theta)
        u = (xx - cx) * ct + (yy - cy) * st
        v = -(xx - cx) * st + (yy - cy) * ct
        mask = (u / ax) ** 2 + (v / bx) ** 2 <= 1.0
        level = rng.uniform(-60, 60)
        img = np.where(mask, np.clip(img + level, 5.0, 250.0), img)

    blur = ndimage.gaussian_filter(img, 1.2)
    img = np.clip(img + 0.6 * (img - blur), 0.0, 255.0)
    return PlanarImage(img[np.newaxis], ColorSpace.GRAY)


def make_pristine_corpus(count: int = 30, size: int = 384, seed: int = 20240601) -> list[PlanarImage]:
    """The fixed corpus recipe behind the shipped pristine model."""
    rng = np.random.default_rng(seed)
    return [texture_image(rng, size) for _ in range(count)]


def gradient_image(rng: np.random.Generator, width: int = 64, height: int = 48) -> PlanarImage:
    """Smooth RGB ramps with slow sinusoidal modulation."""
    yy, xx = np.mgrid[0:height, 0:width].astype(np.float64)
    planes = []
    for _ in range(3):
        a, b = rng.uniform(-1.5, 1.5, 2)
        phase = rng.uniform(0, 2 * np.pi)
        freq = rng.uniform(0.5, 2.0)
        plane = (
            128.0
            + a * (xx - width / 2)
            + b * (yy - height / 2)
            + 40.0 * np.sin(freq * 2 * np.pi * (xx / width + yy / height) + phase)
        )
        planes.append(np.clip(plane, 0.0, 255.0))
    return PlanarImage(np.stack(planes), ColorSpace.RGB)
