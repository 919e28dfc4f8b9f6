"""Wall-clock timing types and the warmup/repeat benchmark loop."""

from __future__ import annotations

from dataclasses import dataclass
from statistics import fmean
from typing import TYPE_CHECKING, Sequence

from ..errors import ConfigError, RunnerError
from ..image import PlanarImage
from .config import RunnerKind

if TYPE_CHECKING:
    from .runners import ModelHandle

__all__ = ["TimingSample", "ImageTiming", "TimingReport", "benchmark_timing"]


@dataclass(frozen=True)
class TimingSample:
    """One measured model invocation.

    `wall_seconds` is the raw request wall time; `adjusted_seconds`, when
    present, has the per-request serialization baseline (measured via echo
    requests against server runners) subtracted out.
    """

    wall_seconds: float
    device_label: str = ""
    adjusted_seconds: float | None = None

    def __post_init__(self):
        if not self.wall_seconds > 0:
            raise RunnerError("wall_seconds must be > 0")
        if self.adjusted_seconds is not None and self.adjusted_seconds < 0:
            raise RunnerError("adjusted_seconds must be >= 0")


@dataclass(frozen=True)
class ImageTiming:
    index: int
    mean_seconds: float
    samples: tuple[float, ...]
    adjusted_mean_seconds: float | None = None


@dataclass(frozen=True)
class TimingReport:
    per_image: tuple[ImageTiming, ...]
    warmup: int
    repeats: int
    echo_baseline_seconds: float | None
    device_label: str
    valid: bool
    error: str = ""


def benchmark_timing(
    handle: "ModelHandle",
    images: Sequence[PlanarImage],
    scale: int,
    warmup: int = 1,
    repeats: int = 1,
    use_ensemble: bool | None = None,
) -> TimingReport:
    """Per-image mean wall time over `repeats` passes, after untimed warmup.

    All warmup passes run first (every image, `warmup` times), then the echo
    baseline is sampled for server runners, then the timed passes run
    strictly one at a time.  A runner failure mid-benchmark returns the
    partial report flagged invalid.
    """
    if repeats < 1:
        raise ConfigError("repeats must be >= 1")
    if warmup < 0:
        raise ConfigError("warmup must be >= 0")
    if handle.config.runner.kind is RunnerKind.SERVER and warmup < 1:
        raise ConfigError("server runners require warmup >= 1")
    if not images:
        raise ConfigError("timing needs at least one image")

    per_image: list[ImageTiming] = []
    baseline = None
    try:
        for img in images:
            for _ in range(warmup):
                handle.upscale(img, scale, use_ensemble=use_ensemble)
        baseline = handle.echo_baseline()
        for index, img in enumerate(images):
            samples = []
            for _ in range(repeats):
                _, sample = handle.upscale(img, scale, use_ensemble=use_ensemble)
                samples.append(sample.wall_seconds)
            mean = fmean(samples)
            adjusted = max(mean - baseline, 0.0) if baseline is not None else None
            per_image.append(ImageTiming(index, mean, tuple(samples), adjusted))
    except RunnerError as exc:
        return TimingReport(
            per_image=tuple(per_image),
            warmup=warmup,
            repeats=repeats,
            echo_baseline_seconds=baseline,
            device_label=handle.device_label,
            valid=False,
            error=str(exc),
        )
    return TimingReport(
        per_image=tuple(per_image),
        warmup=warmup,
        repeats=repeats,
        echo_baseline_seconds=baseline,
        device_label=handle.device_label,
        valid=True,
    )
