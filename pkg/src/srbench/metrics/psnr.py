"""Peak signal-to-noise ratio against a 255 peak."""

from __future__ import annotations

import numpy as np

from ..errors import MetricError
from ..image import PlanarImage
from .base import MetricResult

__all__ = ["psnr"]

_PEAK = 255.0


def psnr(ref: PlanarImage, out: PlanarImage) -> MetricResult:
    """10*log10(255^2 / MSE), MSE taken over all samples and channels.

    The peak stays 255 in float-precision pipelines (samples live in the
    nominal [0, 255] range either way).  Identical inputs yield an INFINITE
    result rather than a value.
    """
    if ref.data.shape != out.data.shape:
        raise MetricError(
            f"psnr inputs differ in shape: {ref.data.shape} vs {out.data.shape}"
        )
    diff = ref.data - out.data
    mse = float(np.mean(diff * diff))
    if mse == 0.0:
        return MetricResult.infinite("psnr")
    return MetricResult("psnr", 10.0 * np.log10(_PEAK * _PEAK / mse))
