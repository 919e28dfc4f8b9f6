"""Benchmark records and their newline-delimited JSON persistence.

One line per record, sorted keys, compact separators: append-safe and
crash-tolerant.  With timing disabled a record contains no timing fields at
all, so repeated runs serialize byte-identically.  Run metadata that cannot
be deterministic (run id, timestamp) lives in a separate manifest file.
"""

from __future__ import annotations

import json
import math
import uuid
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

from ..errors import ConfigError
from ..metrics.base import MetricResult, MetricStatus
from ..models.timing import TimingSample

RECORD_VERSION = 1

__all__ = [
    "RECORD_VERSION",
    "BenchRecord",
    "RunManifest",
    "record_to_json_obj",
    "record_from_json_obj",
    "write_records",
    "append_record",
    "read_records",
    "write_manifest",
]


@dataclass(frozen=True)
class BenchRecord:
    model: str
    dataset: str
    scale: int
    stem: str
    fingerprint: str
    metrics: dict[str, MetricResult] = field(default_factory=dict)
    reported: dict[str, float] = field(default_factory=dict)
    timing: TimingSample | None = None
    error: str = ""

    @property
    def ok(self) -> bool:
        return not self.error


def _metric_to_obj(result: MetricResult) -> dict:
    obj: dict = {"status": result.status.value}
    obj["value"] = result.value if math.isfinite(result.value) else None
    if result.detail:
        obj["detail"] = result.detail
    return obj


def _metric_from_obj(metric_id: str, obj: dict) -> MetricResult:
    status = MetricStatus(obj.get("status", "ok"))
    value = obj.get("value")
    if value is None:
        value = math.inf if status is MetricStatus.INFINITE else math.nan
    return MetricResult(metric_id, float(value), status, obj.get("detail", ""))


def record_to_json_obj(record: BenchRecord) -> dict:
    obj: dict = {
        "record_version": RECORD_VERSION,
        "model": record.model,
        "dataset": record.dataset,
        "scale": record.scale,
        "stem": record.stem,
        "fingerprint": record.fingerprint,
        "metrics": {mid: _metric_to_obj(r) for mid, r in sorted(record.metrics.items())},
        "error": record.error,
    }
    if record.reported:
        obj["reported"] = dict(sorted(record.reported.items()))
    if record.timing is not None:
        timing: dict = {"wall_seconds": record.timing.wall_seconds}
        if record.timing.device_label:
            timing["device_label"] = record.timing.device_label
        if record.timing.adjusted_seconds is not None:
            timing["adjusted_seconds"] = record.timing.adjusted_seconds
        obj["timing"] = timing
    return obj


def record_from_json_obj(obj: dict) -> BenchRecord:
    if obj.get("record_version") != RECORD_VERSION:
        raise ConfigError(f"unsupported record version {obj.get('record_version')!r}")
    timing = None
    if "timing" in obj:
        t = obj["timing"]
        timing = TimingSample(
            wall_seconds=float(t["wall_seconds"]),
            device_label=t.get("device_label", ""),
            adjusted_seconds=(
                float(t["adjusted_seconds"]) if t.get("adjusted_seconds") is not None else None
            ),
        )
    return BenchRecord(
        model=obj["model"],
        dataset=obj["dataset"],
        scale=int(obj["scale"]),
        stem=obj["stem"],
        fingerprint=obj["fingerprint"],
        metrics={mid: _metric_from_obj(mid, m) for mid, m in obj.get("metrics", {}).items()},
        reported={k: float(v) for k, v in obj.get("reported", {}).items()},
        timing=timing,
        error=obj.get("error", ""),
    )


def _dump_line(obj: dict) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=False)


def write_records(path, records, append: bool = False) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    mode = "a" if append else "w"
    with open(path, mode, encoding="utf-8") as fh:
        for record in records:
            fh.write(_dump_line(record_to_json_obj(record)) + "\n")


def append_record(fh, record: BenchRecord) -> None:
    """Append one record line to an open text file and flush it."""
    fh.write(_dump_line(record_to_json_obj(record)) + "\n")
    fh.flush()


def read_records(path) -> list[BenchRecord]:
    path = Path(path)
    records = []
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise ConfigError(f"cannot read record file {path}: {exc}") from exc
    for number, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            records.append(record_from_json_obj(json.loads(line)))
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"{path}:{number}: bad record line: {exc}") from exc
    return records


@dataclass(frozen=True)
class RunManifest:
    """Non-deterministic run metadata, kept out of the record file."""

    run_id: str
    timestamp: str
    criteria: dict
    fingerprint: str
    models: tuple[str, ...]
    dataset: str
    scale: int
    timing: bool
    ensemble_mode: str
    device_label: str
    harness_version: str

    @staticmethod
    def create(
        criteria_obj: dict,
        fingerprint: str,
        models: tuple[str, ...],
        dataset: str,
        scale: int,
        timing: bool,
        ensemble_mode: str,
        device_label: str,
        harness_version: str,
    ) -> "RunManifest":
        return RunManifest(
            run_id=uuid.uuid4().hex[:12],
            timestamp=datetime.now(timezone.utc).isoformat(timespec="seconds"),
            criteria=criteria_obj,
            fingerprint=fingerprint,
            models=models,
            dataset=dataset,
            scale=scale,
            timing=timing,
            ensemble_mode=ensemble_mode,
            device_label=device_label,
            harness_version=harness_version,
        )

    def to_json_obj(self) -> dict:
        return {
            "run_id": self.run_id,
            "timestamp": self.timestamp,
            "criteria": self.criteria,
            "fingerprint": self.fingerprint,
            "models": list(self.models),
            "dataset": self.dataset,
            "scale": self.scale,
            "timing": self.timing,
            "ensemble_mode": self.ensemble_mode,
            "device_label": self.device_label,
            "harness_version": self.harness_version,
        }


def write_manifest(path, manifest: RunManifest) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(manifest.to_json_obj(), sort_keys=True, indent=2) + "\n", encoding="utf-8"
    )
