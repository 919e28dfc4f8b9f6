"""Request/response bodies for the benchmark service."""

from __future__ import annotations

from typing import Union

from pydantic import BaseModel, Field

__all__ = [
    "HealthResponse",
    "EvaluatorInfo",
    "PresetListResponse",
    "CriteriaResolveRequest",
    "CriteriaResolveResponse",
    "ValidateConfigRequest",
    "ValidateConfigResponse",
    "PrepareRequest",
    "PrepareResponse",
    "RunRequest",
    "RunResponse",
    "TableRequest",
    "TableResponse",
    "ScatterRequest",
    "ScatterResponse",
    "FitNiqeRequest",
    "FitNiqeResponse",
]


class HealthResponse(BaseModel):
    status: str
    version: str


class EvaluatorInfo(BaseModel):
    id: str
    needs_reference: bool
    description: str
    kind: str


class PresetListResponse(BaseModel):
    presets: dict[str, dict]


class CriteriaResolveRequest(BaseModel):
    criteria: Union[str, dict]
    scale: int = Field(ge=1)


class CriteriaResolveResponse(BaseModel):
    criteria: dict
    fingerprint: str


class ValidateConfigRequest(BaseModel):
    config: dict
    where: str = "config"


class ValidateConfigResponse(BaseModel):
    valid: bool
    diagnostics: list[str]


class PrepareRequest(BaseModel):
    hr_dir: str
    out_root: str
    scales: list[int] = Field(min_length=1)
    force: bool = False
    name: Union[str, None] = None


class PrepareResponse(BaseModel):
    name: str
    root: str
    scales: list[int]
    stems: list[str]
    notes: list[str]


class RunRequest(BaseModel):
    models: list[dict] = Field(min_length=1)
    dataset_root: str
    scale: int = Field(ge=1)
    criteria: Union[str, dict] = "y-float-shave-scale"
    timing: bool = False
    ensemble_mode: str = "config"
    device_label: str = ""
    niqe_model: Union[dict, None] = None


class RunResponse(BaseModel):
    records: list[dict]
    manifest: dict
    error_count: int


class TableRequest(BaseModel):
    records: list[dict] = Field(min_length=1)
    format: str = "markdown"


class TableResponse(BaseModel):
    document: str


class ScatterRequest(BaseModel):
    records: list[dict] = Field(min_length=1)
    x: str
    y: str
    exclude: list[str] = []


class ScatterResponse(BaseModel):
    svg: str
    csv: str


class FitNiqeRequest(BaseModel):
    corpus_dir: str
    patch_size: int = 96
    sharpness_fraction: float = 0.75
    min_images: int = 25


class FitNiqeResponse(BaseModel):
    model: dict
    images: int
