"""Geometric self-ensemble: average the model over the 8 dihedral transforms.

Transform t in 0..7 decomposes as (flip = t >= 4, k = t % 4): an optional
horizontal (left-right) flip applied first, then k counter-clockwise
quarter turns.  The ensemble output is the per-pixel float mean of the 8
inverse-transformed model outputs; any quantization happens strictly after
averaging.
"""

from __future__ import annotations

import time
from typing import Callable

import numpy as np

from ..errors import RunnerError
from ..image import PlanarImage

__all__ = ["TRANSFORM_COUNT", "transform_forward", "transform_inverse", "ensemble_mean"]

TRANSFORM_COUNT = 8


def transform_forward(data: np.ndarray, index: int) -> np.ndarray:
    """Apply dihedral transform `index` to a planar (C, H, W) array."""
    if not 0 <= index < TRANSFORM_COUNT:
        raise ValueError(f"transform index must be in 0..7, got {index}")
    out = data[:, :, ::-1] if index >= 4 else data
    return np.rot90(out, index % 4, axes=(1, 2))


def transform_inverse(data: np.ndarray, index: int) -> np.ndarray:
    """Invert `transform_forward` for the same index."""
    if not 0 <= index < TRANSFORM_COUNT:
        raise ValueError(f"transform index must be in 0..7, got {index}")
    out = np.rot90(data, -(index % 4), axes=(1, 2))
    return out[:, :, ::-1] if index >= 4 else out


BranchFn = Callable[[PlanarImage, int], tuple[PlanarImage, float]]


def ensemble_mean(branch_fn: BranchFn, lr: PlanarImage, scale: int) -> tuple[PlanarImage, float]:
    """Mean of branch_fn over all 8 transforms; returns (image, wall seconds).

    The reported wall time is the sum of branch wall times plus the time
    spent applying transforms and averaging, so it reflects the full
    ensemble cost without harness PNG encode/decode.
    """
    acc = None
    colorspace = None
    total = 0.0
    for index in range(TRANSFORM_COUNT):
        t0 = time.perf_counter()
        tdata = np.ascontiguousarray(transform_forward(lr.data, index))
        total += time.perf_counter() - t0
        out, wall = branch_fn(PlanarImage(tdata, lr.colorspace), scale)
        total += wall
        t0 = time.perf_counter()
        inv = transform_inverse(out.data, index)
        if acc is None:
            acc = inv.astype(np.float64)
            colorspace = out.colorspace
        else:
            if out.channels != acc.shape[0] or out.colorspace is not colorspace:
                raise RunnerError(
                    "self-ensemble branches disagree on output channels or colorspace"
                )
            acc = acc + inv
        total += time.perf_counter() - t0
    t0 = time.perf_counter()
    mean = acc / TRANSFORM_COUNT
    total += time.perf_counter() - t0
    return PlanarImage(mean, colorspace), total
