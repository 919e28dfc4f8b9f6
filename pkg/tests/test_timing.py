import numpy as np
import pytest

from srbench.errors import ConfigError, RunnerError
from srbench.image import ColorSpace, PlanarImage
from srbench.models import open_model, parse_model_config
from srbench.models.timing import TimingSample, benchmark_timing

from conftest import builtin_config_obj, random_image, server_config_obj, stub_argv


def _parse(obj):
    config, diags = parse_model_config(obj)
    assert not diags, diags
    return config


def _images(count=2, size=6):
    rng = np.random.default_rng(71)
    return [random_image(rng, height=size, width=size) for _ in range(count)]


class TestTimingSample:
    def test_requires_positive_wall(self):
        with pytest.raises(RunnerError):
            TimingSample(wall_seconds=0.0)
        with pytest.raises(RunnerError):
            TimingSample(wall_seconds=-0.1)

    def test_adjusted_nonnegative(self):
        with pytest.raises(RunnerError):
            TimingSample(wall_seconds=0.1, adjusted_seconds=-0.01)
        sample = TimingSample(wall_seconds=0.1, adjusted_seconds=0.0)
        assert sample.adjusted_seconds == 0.0


class TestArgumentChecks:
    def test_rejects_bad_repeats_and_warmup(self):
        with open_model(_parse(builtin_config_obj("b"))) as handle:
            with pytest.raises(ConfigError, match="repeats"):
                benchmark_timing(handle, _images(), 2, repeats=0)
            with pytest.raises(ConfigError, match="warmup"):
                benchmark_timing(handle, _images(), 2, warmup=-1)
            with pytest.raises(ConfigError, match="at least one image"):
                benchmark_timing(handle, [], 2)

    def test_server_requires_warmup(self):
        obj = server_config_obj("s", stub_argv("stub_server.py"))
        with open_model(_parse(obj)) as handle:
            with pytest.raises(ConfigError, match="warmup"):
                benchmark_timing(handle, _images(1), 2, warmup=0)


class TestBuiltinTiming:
    def test_report_shape(self):
        with open_model(_parse(builtin_config_obj("b")), device_label="cpu") as handle:
            report = benchmark_timing(handle, _images(3), 2, warmup=1, repeats=2)
        assert report.valid
        assert report.error == ""
        assert report.warmup == 1 and report.repeats == 2
        assert report.device_label == "cpu"
        assert report.echo_baseline_seconds is None
        assert len(report.per_image) == 3
        for timing in report.per_image:
            assert len(timing.samples) == 2
            assert timing.mean_seconds == pytest.approx(
                sum(timing.samples) / len(timing.samples)
            )
            assert timing.mean_seconds > 0
            assert timing.adjusted_mean_seconds is None


class TestServerTiming:
    def test_sleep_floor_and_echo_adjustment(self):
        obj = server_config_obj("s", stub_argv("stub_server.py", "--sleep", "0.05"))
        with open_model(_parse(obj)) as handle:
            report = benchmark_timing(handle, _images(2, size=4), 2, warmup=1, repeats=2)
        assert report.valid
        assert report.echo_baseline_seconds is not None
        assert report.echo_baseline_seconds < 0.05
        for timing in report.per_image:
            assert timing.mean_seconds >= 0.05
            assert timing.mean_seconds < 0.2
            assert timing.adjusted_mean_seconds is not None
            assert 0 <= timing.adjusted_mean_seconds <= timing.mean_seconds

    def test_warmup_excluded_from_means(self):
        # first request is slow; with one warmup pass the timed means stay fast
        obj = server_config_obj(
            "s", stub_argv("stub_server.py", "--first-sleep", "0.8", "--sleep", "0.01")
        )
        with open_model(_parse(obj)) as handle:
            report = benchmark_timing(handle, _images(1, size=4), 2, warmup=1, repeats=3)
        assert report.valid
        assert report.per_image[0].mean_seconds < 0.4

    def test_crash_yields_partial_invalid(self):
        # warmup pass takes requests 1-3; the timed pass dies on request 5
        obj = server_config_obj("s", stub_argv("stub_server.py", "--crash-on", "5"))
        with open_model(_parse(obj)) as handle:
            report = benchmark_timing(handle, _images(3, size=4), 2, warmup=1, repeats=1)
        assert not report.valid
        assert report.error
        assert len(report.per_image) < 3
