import json
import math

import numpy as np
import pytest

from srbench.bench.dataset import prepare_dataset
from srbench.bench.records import (
    BenchRecord,
    RunManifest,
    append_record,
    read_records,
    record_from_json_obj,
    record_to_json_obj,
    write_manifest,
    write_records,
)
from srbench.bench.report import aggregate
from srbench.bench.run import run_benchmark
from srbench.errors import ConfigError, SrbenchError
from srbench.metrics import MetricResult, MetricStatus, load_criteria
from srbench.models import parse_model_config
from srbench.models.timing import TimingSample

from conftest import builtin_config_obj, server_config_obj, stub_argv


def _parse(obj):
    config, diags = parse_model_config(obj)
    assert not diags, diags
    return config


@pytest.fixture
def dataset(hr_dir, tmp_path):
    spec, _ = prepare_dataset(hr_dir, tmp_path / "ds", scales=[2])
    return spec


@pytest.fixture
def criteria():
    return load_criteria("y-float-shave-scale", 2)


class TestRunBenchmark:
    def test_two_models_full_grid(self, dataset, criteria):
        models = [
            _parse(builtin_config_obj("nearest", kind="builtin-nearest")),
            _parse(builtin_config_obj("bicubic")),
        ]
        records, manifest = run_benchmark(models, dataset, 2, criteria)
        assert len(records) == 10
        assert {r.model for r in records} == {"nearest", "bicubic"}
        assert all(r.ok for r in records)
        fingerprints = {r.fingerprint for r in records}
        assert fingerprints == {criteria.fingerprint()}
        assert manifest.fingerprint == criteria.fingerprint()
        assert manifest.models == ("nearest", "bicubic")
        assert manifest.dataset == dataset.name
        assert manifest.scale == 2

    def test_bicubic_beats_nearest(self, dataset, criteria):
        models = [
            _parse(builtin_config_obj("nearest", kind="builtin-nearest")),
            _parse(builtin_config_obj("bicubic")),
        ]
        records, _ = run_benchmark(models, dataset, 2, criteria)
        means = {
            agg.model: agg.means["psnr"] for agg in aggregate(records)
        }
        assert means["bicubic"] > means["nearest"]

    def test_reported_values_attached(self, dataset, criteria):
        obj = builtin_config_obj("b", reported={"psnr": 30.25})
        records, _ = run_benchmark([_parse(obj)], dataset, 2, criteria)
        assert all(r.reported == {"psnr": 30.25} for r in records)

    def test_timing_fields_only_when_enabled(self, dataset, criteria):
        model = _parse(builtin_config_obj("b"))
        without, _ = run_benchmark([model], dataset, 2, criteria, timing=False)
        assert all(r.timing is None for r in without)
        with_timing, _ = run_benchmark(
            [model], dataset, 2, criteria, timing=True, device_label="cpu"
        )
        assert all(r.timing is not None for r in with_timing)
        assert all(r.timing.device_label == "cpu" for r in with_timing)

    def test_determinism_without_timing(self, dataset, criteria):
        model = _parse(builtin_config_obj("b"))
        first, _ = run_benchmark([model], dataset, 2, criteria)
        second, _ = run_benchmark([model], dataset, 2, criteria)
        first_lines = [json.dumps(record_to_json_obj(r), sort_keys=True) for r in first]
        second_lines = [json.dumps(record_to_json_obj(r), sort_keys=True) for r in second]
        assert first_lines == second_lines

    def test_fault_isolation_between_models(self, dataset, criteria):
        crasher = _parse(
            server_config_obj("crashy", stub_argv("stub_server.py", "--crash-on", "2"))
        )
        solid = _parse(builtin_config_obj("solid"))
        records, _ = run_benchmark([crasher, solid], dataset, 2, criteria)
        by_model = {}
        for r in records:
            by_model.setdefault(r.model, []).append(r)
        assert len(by_model["crashy"]) == 5
        crashed = [r for r in by_model["crashy"] if not r.ok]
        assert crashed, "expected at least one failed record"
        assert all(r.ok for r in by_model["solid"])
        assert len(by_model["solid"]) == 5

    def test_error_record_keeps_context(self, dataset, criteria):
        crasher = _parse(
            server_config_obj("crashy", stub_argv("stub_server.py", "--crash-on", "1"))
        )
        records, _ = run_benchmark([crasher], dataset, 2, criteria)
        bad = [r for r in records if not r.ok]
        assert bad
        for r in bad:
            assert r.model == "crashy"
            assert r.stem
            assert r.error
            assert r.metrics == {}

    def test_rejects_duplicate_names(self, dataset, criteria):
        models = [_parse(builtin_config_obj("same")), _parse(builtin_config_obj("same"))]
        with pytest.raises(SrbenchError, match="unique"):
            run_benchmark(models, dataset, 2, criteria)

    def test_rejects_unsupported_scale(self, dataset, criteria):
        obj = builtin_config_obj("b")
        obj["scales"] = [4]
        with pytest.raises(SrbenchError, match="does not support scale"):
            run_benchmark([_parse(obj)], dataset, 2, criteria)

    def test_rejects_missing_lr_tree(self, dataset, criteria):
        model = _parse(builtin_config_obj("b"))
        with pytest.raises(Exception, match="LR"):
            run_benchmark([model], dataset, 4, criteria)

    def test_record_sink_streams(self, dataset, criteria):
        seen = []
        model = _parse(builtin_config_obj("b"))
        records, _ = run_benchmark(
            [model], dataset, 2, criteria, record_sink=seen.append
        )
        assert seen == records

    def test_ensemble_mode_force_and_off(self, dataset, criteria):
        obj = builtin_config_obj("b", self_ensemble=True)
        model = _parse(obj)
        forced_off, _ = run_benchmark([model], dataset, 2, criteria, ensemble_mode="off")
        forced_on, _ = run_benchmark([model], dataset, 2, criteria, ensemble_mode="force")
        config_mode, _ = run_benchmark([model], dataset, 2, criteria, ensemble_mode="config")
        for a, b in zip(forced_on, config_mode):
            assert a.metrics["psnr"].value == b.metrics["psnr"].value
        # bicubic is equivariant, so values agree within float error either way
        for a, b in zip(forced_on, forced_off):
            assert a.metrics["psnr"].value == pytest.approx(
                b.metrics["psnr"].value, abs=1e-6
            )

    def test_bad_ensemble_mode(self, dataset, criteria):
        model = _parse(builtin_config_obj("b"))
        with pytest.raises((ConfigError, SrbenchError)):
            run_benchmark([model], dataset, 2, criteria, ensemble_mode="sometimes")


class TestRecords:
    def _sample_record(self, **overrides):
        fields = dict(
            model="m",
            dataset="d",
            scale=2,
            stem="img0",
            fingerprint="abcd" * 4,
            metrics={
                "psnr": MetricResult("psnr", 31.5),
                "ssim": MetricResult("ssim", 0.91),
            },
        )
        fields.update(overrides)
        return BenchRecord(**fields)

    def test_json_roundtrip(self):
        record = self._sample_record(
            reported={"psnr": 30.0},
            timing=TimingSample(wall_seconds=0.5, device_label="gpu", adjusted_seconds=0.4),
        )
        obj = record_to_json_obj(record)
        back = record_from_json_obj(obj)
        assert back == record

    def test_infinite_value_serializes_as_null(self):
        record = self._sample_record(metrics={"psnr": MetricResult.infinite("psnr")})
        obj = record_to_json_obj(record)
        assert obj["metrics"]["psnr"]["value"] is None
        assert obj["metrics"]["psnr"]["status"] == "infinite"
        back = record_from_json_obj(obj)
        assert math.isinf(back.metrics["psnr"].value)

    def test_undefined_value_roundtrip(self):
        record = self._sample_record(
            metrics={"niqe": MetricResult.undefined("niqe", "too small")}
        )
        back = record_from_json_obj(record_to_json_obj(record))
        assert back.metrics["niqe"].status is MetricStatus.UNDEFINED
        assert math.isnan(back.metrics["niqe"].value)
        assert back.metrics["niqe"].detail == "too small"

    def test_line_is_compact_and_sorted(self):
        record = self._sample_record()
        obj = record_to_json_obj(record)
        line = json.dumps(obj, sort_keys=True, separators=(",", ":"))
        assert ": " not in line
        keys = list(json.loads(line))
        assert keys == sorted(keys)

    def test_wrong_version_rejected(self):
        obj = record_to_json_obj(self._sample_record())
        obj["record_version"] = 99
        with pytest.raises(ConfigError, match="record version"):
            record_from_json_obj(obj)

    def test_file_roundtrip(self, tmp_path):
        records = [self._sample_record(stem=f"img{i}") for i in range(3)]
        path = tmp_path / "r.ndjson"
        write_records(path, records)
        assert read_records(path) == records
        with open(path, "a", encoding="utf-8") as fh:
            append_record(fh, self._sample_record(stem="img9"))
        assert len(read_records(path)) == 4

    def test_manifest_roundtrip(self, tmp_path):
        manifest = RunManifest.create(
            criteria_obj={"color": "y"},
            fingerprint="f" * 16,
            models=("a", "b"),
            dataset="d",
            scale=2,
            timing=False,
            ensemble_mode="config",
            device_label="",
            harness_version="0.1.0",
        )
        path = tmp_path / "m.json"
        write_manifest(path, manifest)
        obj = json.loads(path.read_text())
        assert obj["fingerprint"] == "f" * 16
        assert obj["models"] == ["a", "b"]
        assert obj["run_id"]
        assert obj["timestamp"]
