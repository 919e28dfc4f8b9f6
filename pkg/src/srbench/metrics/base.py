"""Metric result types and the evaluator registry."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Optional

from ..errors import MetricError
from ..image import PlanarImage

__all__ = [
    "MetricStatus",
    "MetricResult",
    "EvalContext",
    "EvaluatorEntry",
    "register_evaluator",
    "get_evaluator",
    "list_evaluators",
]


class MetricStatus(str, Enum):
    OK = "ok"
    INFINITE = "infinite"
    UNDEFINED = "undefined"


@dataclass(frozen=True)
class MetricResult:
    """One computed metric value.

    `value` is +inf for INFINITE (identical images under PSNR) and NaN for
    UNDEFINED (metric not computable on the given inputs).
    """

    metric: str
    value: float
    status: MetricStatus = MetricStatus.OK
    detail: str = ""

    def __post_init__(self):
        if self.status is MetricStatus.INFINITE and self.metric != "psnr":
            raise MetricError("infinite results are only legal for psnr")

    @staticmethod
    def infinite(metric: str) -> "MetricResult":
        return MetricResult(metric, math.inf, MetricStatus.INFINITE)

    @staticmethod
    def undefined(metric: str, detail: str) -> "MetricResult":
        return MetricResult(metric, math.nan, MetricStatus.UNDEFINED, detail)


@dataclass
class EvalContext:
    """Per-run context handed to evaluators alongside the prepared image pair."""

    scale: int = 1
    niqe_model: object | None = None


EvaluatorFn = Callable[[Optional[PlanarImage], PlanarImage, EvalContext], MetricResult]


@dataclass(frozen=True)
class EvaluatorEntry:
    id: str
    fn: EvaluatorFn | None
    needs_reference: bool
    description: str
    kind: str = "pair"  # "pair" evaluators are called per image; "harness" values are filled by the run loop


_REGISTRY: dict[str, EvaluatorEntry] = {}


def register_evaluator(
    metric_id: str,
    fn: EvaluatorFn | None,
    *,
    needs_reference: bool = True,
    description: str = "",
    kind: str = "pair",
) -> None:
    """Register a metric evaluator. The registry is write-once: duplicate ids fail."""
    if not metric_id or not metric_id.replace("-", "").replace("_", "").isalnum():
        raise MetricError(f"invalid metric id {metric_id!r}")
    if metric_id in _REGISTRY:
        raise MetricError(f"evaluator {metric_id!r} is already registered")
    if kind not in ("pair", "harness"):
        raise MetricError(f"unknown evaluator kind {kind!r}")
    _REGISTRY[metric_id] = EvaluatorEntry(metric_id, fn, needs_reference, description, kind)


def get_evaluator(metric_id: str) -> EvaluatorEntry:
    try:
        return _REGISTRY[metric_id]
    except KeyError:
        raise MetricError(f"unknown metric {metric_id!r}; registered: {sorted(_REGISTRY)}") from None


def is_registered(metric_id: str) -> bool:
    return metric_id in _REGISTRY


def list_evaluators() -> list[EvaluatorEntry]:
    return [_REGISTRY[k] for k in sorted(_REGISTRY)]
