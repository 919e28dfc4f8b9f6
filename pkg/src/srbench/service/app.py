"""Benchmark service: every pipeline operation behind an HTTP endpoint.

Error mapping: problems a caller can fix (bad configs, bad criteria, bad
dataset paths, undersized corpora) answer 400; runner crashes and protocol
violations that escape the per-record fault isolation answer 500.
"""

from __future__ import annotations

from pathlib import Path

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from .._version import __version__
from ..bench.dataset import load_dataset, prepare_dataset
from ..bench.records import record_from_json_obj, record_to_json_obj
from ..bench.report import emit_scatter, emit_table
from ..bench.run import run_benchmark
from ..errors import (
    ConfigError,
    DatasetError,
    ImageError,
    MetricError,
    SrbenchError,
)
from ..image import load_png
from ..metrics import list_evaluators, list_presets, load_criteria, parse_criteria, preset_info
from ..metrics.niqe import NiqePristineModel, fit_pristine_model
from ..models.config import parse_model_config
from . import schemas

_USER_ERRORS = (ConfigError, DatasetError, ImageError, MetricError)


def _parse_criteria_field(criteria, scale: int):
    if isinstance(criteria, str):
        return load_criteria(criteria, scale)
    return parse_criteria(criteria, scale)


def _parse_models(objs: list[dict]):
    models = []
    diagnostics: list[str] = []
    for index, obj in enumerate(objs):
        config, diags = parse_model_config(obj, where=f"models[{index}]")
        if config is None:
            diagnostics.extend(diags)
        else:
            models.append(config)
    if diagnostics:
        raise ConfigError("invalid model config:\n" + "\n".join(diagnostics))
    return models


def create_app() -> FastAPI:
    app = FastAPI(title="srbench", version=__version__)

    @app.exception_handler(SrbenchError)
    async def _srbench_error(request: Request, exc: SrbenchError):
        status = 400 if isinstance(exc, _USER_ERRORS) else 500
        return JSONResponse(
            status_code=status, content={"error": str(exc), "kind": type(exc).__name__}
        )

    @app.get("/health", response_model=schemas.HealthResponse)
    def health():
        return schemas.HealthResponse(status="ok", version=__version__)

    @app.get("/evaluators", response_model=list[schemas.EvaluatorInfo])
    def evaluators():
        return [
            schemas.EvaluatorInfo(
                id=e.id, needs_reference=e.needs_reference, description=e.description, kind=e.kind
            )
            for e in list_evaluators()
        ]

    @app.get("/criteria/presets", response_model=schemas.PresetListResponse)
    def criteria_presets():
        return schemas.PresetListResponse(presets={name: preset_info(name) for name in list_presets()})

    @app.post("/criteria/resolve", response_model=schemas.CriteriaResolveResponse)
    def criteria_resolve(req: schemas.CriteriaResolveRequest):
        criteria = _parse_criteria_field(req.criteria, req.scale)
        return schemas.CriteriaResolveResponse(
            criteria=criteria.to_json_obj(), fingerprint=criteria.fingerprint()
        )

    @app.post("/configs/validate", response_model=schemas.ValidateConfigResponse)
    def validate_config(req: schemas.ValidateConfigRequest):
        _, diags = parse_model_config(req.config, where=req.where)
        return schemas.ValidateConfigResponse(valid=not diags, diagnostics=diags)

    @app.post("/datasets/prepare", response_model=schemas.PrepareResponse)
    def datasets_prepare(req: schemas.PrepareRequest):
        spec, notes = prepare_dataset(
            req.hr_dir, req.out_root, req.scales, force=req.force, name=req.name
        )
        return schemas.PrepareResponse(
            name=spec.name,
            root=str(spec.root),
            scales=list(spec.scales),
            stems=list(spec.stems),
            notes=notes,
        )

    @app.post("/benchmark/runs", response_model=schemas.RunResponse)
    def benchmark_runs(req: schemas.RunRequest):
        models = _parse_models(req.models)
        criteria = _parse_criteria_field(req.criteria, req.scale)
        dataset = load_dataset(req.dataset_root)
        niqe_model = (
            NiqePristineModel.from_json_obj(req.niqe_model) if req.niqe_model is not None else None
        )
        if req.ensemble_mode not in ("force", "config", "off"):
            raise ConfigError(
                f"ensemble_mode must be force, config, or off, got {req.ensemble_mode!r}"
            )
        records, manifest = run_benchmark(
            models,
            dataset,
            req.scale,
            criteria,
            timing=req.timing,
            ensemble_mode=req.ensemble_mode,
            device_label=req.device_label,
            niqe_model=niqe_model,
        )
        return schemas.RunResponse(
            records=[record_to_json_obj(r) for r in records],
            manifest=manifest.to_json_obj(),
            error_count=sum(1 for r in records if not r.ok),
        )

    @app.post("/reports/table", response_model=schemas.TableResponse)
    def reports_table(req: schemas.TableRequest):
        records = [record_from_json_obj(obj) for obj in req.records]
        return schemas.TableResponse(document=emit_table(records, req.format))

    @app.post("/reports/scatter", response_model=schemas.ScatterResponse)
    def reports_scatter(req: schemas.ScatterRequest):
        records = [record_from_json_obj(obj) for obj in req.records]
        svg, csv_text = emit_scatter(records, req.x, req.y, exclude=tuple(req.exclude))
        return schemas.ScatterResponse(svg=svg, csv=csv_text)

    @app.post("/niqe/fit", response_model=schemas.FitNiqeResponse)
    def niqe_fit(req: schemas.FitNiqeRequest):
        corpus_dir = Path(req.corpus_dir)
        paths = sorted(corpus_dir.glob("*.png"))
        if not paths:
            raise DatasetError(f"no PNG images found in {corpus_dir}")
        corpus = [load_png(p) for p in paths]
        model = fit_pristine_model(
            corpus,
            patch_size=req.patch_size,
            sharpness_fraction=req.sharpness_fraction,
            min_images=req.min_images,
        )
        return schemas.FitNiqeResponse(model=model.to_json_obj(), images=len(corpus))

    return app
