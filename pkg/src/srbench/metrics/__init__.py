"""Quality metrics, evaluation criteria, and the evaluator registry."""

from __future__ import annotations

import numpy as np

from ..image import ColorSpace, PlanarImage
from .base import (
    EvalContext,
    EvaluatorEntry,
    MetricResult,
    MetricStatus,
    get_evaluator,
    is_registered,
    list_evaluators,
    register_evaluator,
)
from .criteria import (
    ColorChannels,
    EvalCriteria,
    PrecisionMode,
    ShaveMode,
    ShaveRule,
    apply_criteria,
    list_presets,
    load_criteria,
    parse_criteria,
    preset_info,
    shave,
)
from .niqe import NiqePristineModel, default_pristine_model, fit_pristine_model
from .niqe import niqe as _niqe_score
from .psnr import psnr as _psnr_score
from .ssim import DEFAULT_SSIM_PARAMS, SsimParams
from .ssim import ssim as _ssim_score

__all__ = [
    "EvalContext",
    "EvaluatorEntry",
    "MetricResult",
    "MetricStatus",
    "register_evaluator",
    "get_evaluator",
    "is_registered",
    "list_evaluators",
    "ColorChannels",
    "PrecisionMode",
    "ShaveMode",
    "ShaveRule",
    "EvalCriteria",
    "apply_criteria",
    "shave",
    "parse_criteria",
    "load_criteria",
    "list_presets",
    "preset_info",
    "SsimParams",
    "DEFAULT_SSIM_PARAMS",
    "NiqePristineModel",
    "fit_pristine_model",
    "default_pristine_model",
]


def _psnr_evaluator(ref: PlanarImage, out: PlanarImage, ctx: EvalContext) -> MetricResult:
    return _psnr_score(ref, out)


def _ssim_evaluator(ref: PlanarImage, out: PlanarImage, ctx: EvalContext) -> MetricResult:
    if ref.channels == 1:
        return _ssim_score(ref, out)
    per_channel = [
        _ssim_score(
            PlanarImage(ref.data[c : c + 1], ColorSpace.GRAY),
            PlanarImage(out.data[c : c + 1], ColorSpace.GRAY),
        ).value
        for c in range(ref.channels)
    ]
    return MetricResult("ssim", float(np.mean(per_channel)))


def _niqe_evaluator(ref: PlanarImage, out: PlanarImage, ctx: EvalContext) -> MetricResult:
    model = ctx.niqe_model if ctx.niqe_model is not None else default_pristine_model()
    target = out
    if target.channels != 1:
        from ..image import extract_y

        target = extract_y(target)
    return _niqe_score(target, model)


register_evaluator(
    "psnr",
    _psnr_evaluator,
    needs_reference=True,
    description="Peak signal-to-noise ratio in dB over all channels (peak 255).",
)
register_evaluator(
    "ssim",
    _ssim_evaluator,
    needs_reference=True,
    description="Structural similarity (11x11 Gaussian windows, channel mean for color).",
)
register_evaluator(
    "niqe",
    _niqe_evaluator,
    needs_reference=False,
    description="No-reference quality vs. a pristine natural-image model; lower is better.",
)
register_evaluator(
    "runtime",
    None,
    needs_reference=False,
    description="Mean wall-clock seconds per image, measured by the harness.",
    kind="harness",
)
