"""Dataset preparation, benchmark orchestration, records, and reports."""

from .dataset import DatasetSpec, hr_dir, load_dataset, lr_dir, prepare_dataset
from .records import (
    RECORD_VERSION,
    BenchRecord,
    RunManifest,
    append_record,
    read_records,
    record_to_json_obj,
    write_manifest,
    write_records,
)
from .report import ModelAggregate, aggregate, emit_scatter, emit_table
from .run import run_benchmark

__all__ = [
    "DatasetSpec",
    "prepare_dataset",
    "load_dataset",
    "hr_dir",
    "lr_dir",
    "RECORD_VERSION",
    "BenchRecord",
    "RunManifest",
    "record_to_json_obj",
    "write_records",
    "append_record",
    "read_records",
    "write_manifest",
    "run_benchmark",
    "ModelAggregate",
    "aggregate",
    "emit_table",
    "emit_scatter",
]
