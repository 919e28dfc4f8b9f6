"""Benchmark orchestration: models x images under one set of criteria.

Record ordering is deterministic (model order as given, then sorted image
stems).  A failure confined to one model or one image becomes an errored
record and the run continues; only missing dataset inputs abort the run
before any model executes.
"""

from __future__ import annotations

from typing import Callable

from .._version import __version__
from ..errors import DatasetError, ImageError, MetricError, ProtocolError, RunnerError, SrbenchError
from ..image import load_png
from ..metrics.base import EvalContext, MetricResult
from ..metrics.criteria import EvalCriteria, apply_criteria
from ..metrics import get_evaluator
from ..models.config import ModelConfig, RunnerKind
from ..models.runners import open_model
from ..models.timing import TimingSample
from ..resample import center_crop_to_multiple
from .dataset import DatasetSpec, hr_dir, lr_dir
from .records import BenchRecord, RunManifest

__all__ = ["run_benchmark"]

_ROW_ERRORS = (RunnerError, ProtocolError, MetricError, ImageError, DatasetError, OSError)


def _resolve_ensemble(mode: str, model: ModelConfig) -> bool:
    if mode == "force":
        return True
    if mode == "off":
        return False
    if mode == "config":
        return model.self_ensemble
    raise SrbenchError(f"ensemble mode must be force, config, or off, got {mode!r}")


def run_benchmark(
    models: list[ModelConfig],
    dataset: DatasetSpec,
    scale: int,
    criteria: EvalCriteria,
    timing: bool = False,
    ensemble_mode: str = "config",
    device_label: str = "",
    niqe_model=None,
    record_sink: Callable[[BenchRecord], None] | None = None,
) -> tuple[list[BenchRecord], RunManifest]:
    """Evaluate every model on every LR image of `dataset` at `scale`.

    Returns the record list (one per model x image) and the run manifest.
    `record_sink`, when given, receives each record as soon as it exists.
    """
    if not models:
        raise SrbenchError("at least one model is required")
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        dupes = sorted({n for n in names if names.count(n) > 1})
        raise SrbenchError(f"model names must be unique; duplicated: {', '.join(dupes)}")
    for model in models:
        if scale not in model.scales:
            raise SrbenchError(
                f"model {model.name!r} does not support scale {scale}; "
                f"supported: {sorted(model.scales)}"
            )
    lr_root = lr_dir(dataset.root, scale)
    if not lr_root.is_dir():
        raise DatasetError(f"dataset {dataset.name!r} has no LR/x{scale} directory")
    stems = dataset.lr_stems(scale)
    if not stems:
        raise DatasetError(f"{lr_root} contains no PNG images")
    missing_hr = [s for s in stems if not (hr_dir(dataset.root) / f"{s}.png").exists()]
    if missing_hr:
        raise DatasetError(
            f"dataset {dataset.name!r}: LR images without HR pair: {', '.join(missing_hr[:5])}"
        )

    fingerprint = criteria.fingerprint()
    manifest = RunManifest.create(
        criteria_obj=criteria.to_json_obj(),
        fingerprint=fingerprint,
        models=tuple(names),
        dataset=dataset.name,
        scale=scale,
        timing=timing,
        ensemble_mode=ensemble_mode,
        device_label=device_label,
        harness_version=__version__,
    )
    ctx = EvalContext(scale=scale, niqe_model=niqe_model)
    records: list[BenchRecord] = []

    def emit(record: BenchRecord) -> None:
        records.append(record)
        if record_sink is not None:
            record_sink(record)

    for model in models:
        use_ensemble = _resolve_ensemble(ensemble_mode, model)
        eff_criteria = (
            criteria.with_shave(model.shave_override) if model.shave_override is not None else criteria
        )
        reported = model.reported_dict
        try:
            handle = open_model(model, device_label)
        except _ROW_ERRORS as exc:
            for stem in stems:
                emit(
                    BenchRecord(
                        model=model.name,
                        dataset=dataset.name,
                        scale=scale,
                        stem=stem,
                        fingerprint=fingerprint,
                        reported=reported,
                        error=f"model failed to start: {exc}",
                    )
                )
            continue
        try:
            baseline = None
            if timing and model.runner.kind is RunnerKind.SERVER:
                try:
                    # one untimed warm pass keeps lazy server init out of the baseline
                    warm = load_png(lr_root / f"{stems[0]}.png")
                    handle.upscale(warm, scale, use_ensemble=use_ensemble)
                    baseline = handle.echo_baseline()
                except _ROW_ERRORS:
                    baseline = None
            for stem in stems:
                try:
                    emit(
                        _run_one(
                            handle,
                            model,
                            dataset,
                            scale,
                            stem,
                            eff_criteria,
                            fingerprint,
                            timing,
                            use_ensemble,
                            baseline,
                            ctx,
                            reported,
                        )
                    )
                except _ROW_ERRORS as exc:
                    emit(
                        BenchRecord(
                            model=model.name,
                            dataset=dataset.name,
                            scale=scale,
                            stem=stem,
                            fingerprint=fingerprint,
                            reported=reported,
                            error=str(exc),
                        )
                    )
        finally:
            handle.close()
    return records, manifest


def _run_one(
    handle,
    model: ModelConfig,
    dataset: DatasetSpec,
    scale: int,
    stem: str,
    criteria: EvalCriteria,
    fingerprint: str,
    timing: bool,
    use_ensemble: bool,
    baseline: float | None,
    ctx: EvalContext,
    reported: dict[str, float],
) -> BenchRecord:
    lr = load_png(lr_dir(dataset.root, scale) / f"{stem}.png")
    hr = load_png(hr_dir(dataset.root) / f"{stem}.png")
    out, sample = handle.upscale(lr, scale, use_ensemble=use_ensemble)
    # the reference is center-cropped exactly as dataset preparation did
    ref = center_crop_to_multiple(hr, scale)
    prepared_ref, prepared_out = apply_criteria(ref, out, criteria, scale)

    timing_sample = None
    if timing:
        adjusted = max(sample.wall_seconds - baseline, 0.0) if baseline is not None else None
        timing_sample = TimingSample(
            wall_seconds=sample.wall_seconds,
            device_label=sample.device_label,
            adjusted_seconds=adjusted,
        )

    results: dict[str, MetricResult] = {}
    for metric_id in criteria.metrics:
        entry = get_evaluator(metric_id)
        if entry.kind == "harness":
            if metric_id == "runtime":
                if timing_sample is None:
                    results[metric_id] = MetricResult.undefined(metric_id, "timing disabled")
                else:
                    value = (
                        timing_sample.adjusted_seconds
                        if timing_sample.adjusted_seconds is not None
                        else timing_sample.wall_seconds
                    )
                    results[metric_id] = MetricResult(metric_id, value)
            else:
                results[metric_id] = MetricResult.undefined(metric_id, "not produced by this run")
            continue
        try:
            results[metric_id] = entry.fn(prepared_ref, prepared_out, ctx)
        except MetricError as exc:
            results[metric_id] = MetricResult.undefined(metric_id, str(exc))

    return BenchRecord(
        model=model.name,
        dataset=dataset.name,
        scale=scale,
        stem=stem,
        fingerprint=fingerprint,
        metrics=results,
        reported=reported,
        timing=timing_sample,
        error="",
    )
