"""Model configs, built-in and external-process runners, self-ensemble, timing."""

from .config import (
    EXTERNAL_KINDS,
    InputRange,
    ModelConfig,
    RunnerKind,
    RunnerSpec,
    load_model_config,
    parse_model_config,
    validate_config_file,
)
from .ensemble import TRANSFORM_COUNT, ensemble_mean, transform_forward, transform_inverse
from .runners import ModelHandle, open_model
from .timing import ImageTiming, TimingReport, TimingSample, benchmark_timing

__all__ = [
    "RunnerKind",
    "RunnerSpec",
    "InputRange",
    "ModelConfig",
    "EXTERNAL_KINDS",
    "parse_model_config",
    "load_model_config",
    "validate_config_file",
    "ModelHandle",
    "open_model",
    "TRANSFORM_COUNT",
    "transform_forward",
    "transform_inverse",
    "ensemble_mean",
    "TimingSample",
    "ImageTiming",
    "TimingReport",
    "benchmark_timing",
]
