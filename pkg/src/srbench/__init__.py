"""srbench: a super-resolution benchmark harness with explicit evaluation criteria.

Core pieces: deterministic image/resampling primitives, PSNR/SSIM/NIQE
evaluators behind a registry, criteria presets that make every measurement
convention explicit, config-driven model runners (built-in kernels or
external processes over a documented wire protocol), geometric
self-ensemble, dataset preparation, and table/scatter reporting.  A FastAPI
service wraps the whole pipeline; the CLI is a thin client over it.
"""

from ._version import __version__
from .errors import (
    ConfigError,
    DatasetError,
    ImageError,
    MetricError,
    ProtocolError,
    RunnerError,
    SrbenchError,
)
from .image import ColorSpace, PlanarImage, PrecisionMode, load_png, quantize, save_png

__all__ = [
    "__version__",
    "SrbenchError",
    "ImageError",
    "ConfigError",
    "DatasetError",
    "MetricError",
    "RunnerError",
    "ProtocolError",
    "ColorSpace",
    "PrecisionMode",
    "PlanarImage",
    "load_png",
    "save_png",
    "quantize",
]
