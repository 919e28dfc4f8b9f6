import json

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from srbench.errors import ConfigError, ProtocolError, RunnerError
from srbench.image import ColorSpace, PlanarImage, quantize
from srbench.models import (
    InputRange,
    ModelConfig,
    RunnerKind,
    load_model_config,
    open_model,
    parse_model_config,
    transform_forward,
    transform_inverse,
    validate_config_file,
)
from srbench.models.ensemble import ensemble_mean
from srbench.resample import resize

from conftest import (
    builtin_config_obj,
    command_config_obj,
    random_image,
    server_config_obj,
    stub_argv,
)


def _parse(obj):
    config, diags = parse_model_config(obj, where="cfg")
    assert not diags, diags
    return config


class TestConfigParsing:
    def test_minimal_builtin(self):
        config = _parse(builtin_config_obj("m1"))
        assert config.name == "m1"
        assert config.scales == frozenset({2, 3, 4, 8})
        assert config.runner.kind is RunnerKind.BUILTIN_BICUBIC
        assert config.input_range is InputRange.BYTE255
        assert config.self_ensemble is False

    def test_full_command_config(self):
        obj = command_config_obj(
            "m2",
            ["python3", "run.py", "{input}", "{output}", "{scale}"],
            self_ensemble=True,
            input_range="unit01",
            reported={"psnr": 28.3, "ssim": 0.77},
            notes="whatever",
        )
        obj["runner"]["env"] = {"CUDA_VISIBLE_DEVICES": ""}
        obj["runner"]["working_dir"] = "/tmp"
        config = _parse(obj)
        assert config.self_ensemble is True
        assert config.input_range is InputRange.UNIT01
        assert config.reported_dict == {"psnr": 28.3, "ssim": 0.77}
        assert config.runner.env_dict == {"CUDA_VISIBLE_DEVICES": ""}
        assert config.runner.working_dir == "/tmp"

    def test_roundtrip_through_json_obj(self):
        obj = server_config_obj("m3", ["srv", "--flag"], self_ensemble=True)
        config = _parse(obj)
        again = _parse(config.to_json_obj())
        assert again == config

    def test_diagnostics_carry_field_paths(self):
        _, diags = parse_model_config(
            {
                "schema_version": 1,
                "name": "has space",
                "scales": [],
                "runner": {"kind": "command", "argv": ["tool", "{output}", "{scale}"]},
            },
            where="bad.json",
        )
        text = "\n".join(diags)
        assert "bad.json.name" in text
        assert "bad.json.scales" in text and "non-empty" in text
        assert "bad.json.runner.argv" in text and "{input}" in text

    def test_all_violations_collected(self):
        _, diags = parse_model_config(
            {
                "schema_version": 99,
                "name": "",
                "scales": ["two"],
                "runner": {"kind": "teleport"},
                "input_range": "percent",
                "extra_key": 1,
            },
            where="x",
        )
        assert len(diags) >= 5

    @pytest.mark.parametrize(
        "mutate,needle",
        [
            (lambda o: o.__setitem__("schema_version", 2), "schema_version"),
            (lambda o: o.pop("name"), "name"),
            (lambda o: o.__setitem__("name", "a/b"), "name"),
            (lambda o: o.__setitem__("scales", [0]), "scales"),
            (lambda o: o.__setitem__("scales", 4), "scales"),
            (lambda o: o.pop("runner"), "runner"),
            (lambda o: o.__setitem__("self_ensemble", "yes"), "self_ensemble"),
            (lambda o: o.__setitem__("reported", {"psnr": "high"}), "reported"),
            (lambda o: o.__setitem__("unknown_field", 1), "unknown"),
        ],
    )
    def test_single_violations(self, mutate, needle):
        obj = builtin_config_obj("m")
        mutate(obj)
        config, diags = parse_model_config(obj, where="f")
        assert any(needle in d for d in diags), diags

    def test_builtin_rejects_argv(self):
        obj = builtin_config_obj("m")
        obj["runner"]["argv"] = ["echo"]
        _, diags = parse_model_config(obj)
        assert any("argv" in d for d in diags)

    def test_command_requires_placeholders(self):
        obj = command_config_obj("m", ["tool", "{input}"])
        _, diags = parse_model_config(obj)
        assert any("{output}" in d for d in diags)

    def test_server_requires_argv(self):
        obj = {
            "schema_version": 1,
            "name": "m",
            "scales": [2],
            "runner": {"kind": "server"},
        }
        _, diags = parse_model_config(obj)
        assert any("argv" in d for d in diags)

    def test_startup_timeout_positive(self):
        obj = server_config_obj("m", ["srv"])
        obj["runner"]["startup_timeout"] = 0
        _, diags = parse_model_config(obj)
        assert any("startup_timeout" in d for d in diags)

    def test_shave_override_forms(self):
        for value, expected_amount in [("scale", None), (6, 6), (0, 0)]:
            obj = builtin_config_obj("m", shave_override=value)
            config = _parse(obj)
            if expected_amount is None:
                assert config.shave_override.amount_for(3) == 3
            else:
                assert config.shave_override.amount_for(3) == expected_amount

    def test_validate_config_file(self, tmp_path):
        good = tmp_path / "good.json"
        good.write_text(json.dumps(builtin_config_obj("ok")))
        assert validate_config_file(good) == []
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema_version": 1}))
        diags = validate_config_file(bad)
        assert diags and all(str(bad) in d for d in diags)

    def test_load_model_config_raises_joined(self, tmp_path):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"schema_version": 1, "name": "x y", "scales": []}))
        with pytest.raises(ConfigError, match="scales"):
            load_model_config(bad)


class TestBuiltinRunners:
    def test_bicubic_matches_resize(self):
        rng = np.random.default_rng(61)
        lr = random_image(rng, height=12, width=16)
        with open_model(_parse(builtin_config_obj("b"))) as handle:
            out, sample = handle.upscale(lr, 2)
        expected = resize(lr, 32, 24)
        np.testing.assert_allclose(
            out.data, np.clip(expected.data, 0, 255), atol=1e-12
        )
        assert sample.wall_seconds > 0

    def test_nearest_is_pixel_replication(self):
        rng = np.random.default_rng(62)
        lr = random_image(rng, height=6, width=7)
        with open_model(_parse(builtin_config_obj("n", kind="builtin-nearest"))) as handle:
            out, _ = handle.upscale(lr, 3)
        expected = np.repeat(np.repeat(lr.data, 3, axis=1), 3, axis=2)
        np.testing.assert_array_equal(out.data, expected)

    def test_rejects_unsupported_scale(self):
        with open_model(_parse(builtin_config_obj("b"))) as handle:
            lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
            with pytest.raises(RunnerError, match="does not support scale"):
                handle.upscale(lr, 5)

    def test_scale_one_identity(self):
        obj = builtin_config_obj("b")
        obj["scales"] = [1, 2]
        rng = np.random.default_rng(63)
        lr = random_image(rng, height=9, width=11)
        with open_model(_parse(obj)) as handle:
            out, _ = handle.upscale(lr, 1)
        np.testing.assert_array_equal(quantize(out).data, lr.data)

    @given(
        scale=st.sampled_from([1, 2, 3, 4, 8]),
        height=st.integers(min_value=1, max_value=24),
        width=st.integers(min_value=1, max_value=24),
    )
    @settings(max_examples=30, deadline=None)
    def test_dimension_contract(self, scale, height, width):
        obj = builtin_config_obj("n", kind="builtin-nearest")
        obj["scales"] = [1, 2, 3, 4, 8]
        lr = PlanarImage(np.zeros((1, height, width)), ColorSpace.GRAY)
        with open_model(_parse(obj)) as handle:
            out, _ = handle.upscale(lr, scale)
        assert (out.width, out.height) == (width * scale, height * scale)

    def test_dimension_violation_detected(self):
        class ShrinkingRunner:
            def upscale_raw(self, lr, scale):
                return PlanarImage(lr.data, lr.colorspace), 0.001

            def close(self):
                pass

        handle = open_model(_parse(builtin_config_obj("b")))
        handle._runner = ShrinkingRunner()
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        with pytest.raises(RunnerError, match="dimension contract"):
            handle.upscale(lr, 2)

    def test_output_clipped(self):
        class WildRunner:
            def upscale_raw(self, lr, scale):
                data = np.full((1, lr.height * scale, lr.width * scale), 400.0)
                data[0, 0, 0] = -50.0
                return PlanarImage(data, ColorSpace.GRAY), 0.001

            def close(self):
                pass

        handle = open_model(_parse(builtin_config_obj("b")))
        handle._runner = WildRunner()
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        out, _ = handle.upscale(lr, 2)
        assert out.data.max() == 255.0
        assert out.data.min() == 0.0


class TestCommandRunner:
    def test_upscales_via_subprocess(self):
        rng = np.random.default_rng(64)
        lr = random_image(rng, height=5, width=6)
        obj = command_config_obj(
            "c", stub_argv("stub_command.py", "{input}", "{output}", "{scale}")
        )
        with open_model(_parse(obj)) as handle:
            out, sample = handle.upscale(lr, 2)
        expected = np.repeat(np.repeat(lr.data, 2, axis=1), 2, axis=2)
        np.testing.assert_array_equal(out.data, expected)
        assert sample.wall_seconds > 0

    def test_nonzero_exit_reports_stderr(self):
        obj = command_config_obj(
            "c", stub_argv("stub_command.py", "{input}", "{output}", "{scale}", "--fail")
        )
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        with open_model(_parse(obj)) as handle:
            with pytest.raises(RunnerError, match="injected failure"):
                handle.upscale(lr, 2)

    def test_missing_output_detected(self):
        obj = command_config_obj(
            "c", ["python3", "-c", "pass", "{input}", "{output}", "{scale}"]
        )
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        with open_model(_parse(obj)) as handle:
            with pytest.raises(RunnerError, match="output"):
                handle.upscale(lr, 2)

    def test_env_passed_to_child(self):
        script = (
            "import os, sys; from PIL import Image; "
            "assert os.environ.get('STUB_MARKER') == 'yes'; "
            "im = Image.open(sys.argv[1]); s = int(sys.argv[3]); "
            "im.resize((im.width*s, im.height*s)).save(sys.argv[2])"
        )
        obj = command_config_obj(
            "c", ["python3", "-c", script, "{input}", "{output}", "{scale}"]
        )
        obj["runner"]["env"] = {"STUB_MARKER": "yes"}
        rng = np.random.default_rng(65)
        lr = random_image(rng, height=4, width=4)
        with open_model(_parse(obj)) as handle:
            out, _ = handle.upscale(lr, 2)
        assert (out.width, out.height) == (8, 8)


class TestServerRunner:
    def test_sequential_requests(self):
        rng = np.random.default_rng(66)
        obj = server_config_obj("s", stub_argv("stub_server.py"))
        with open_model(_parse(obj)) as handle:
            for _ in range(3):
                lr = random_image(rng, height=4, width=5)
                out, _ = handle.upscale(lr, 2)
                expected = np.repeat(np.repeat(lr.data, 2, axis=1), 2, axis=2)
                np.testing.assert_array_equal(out.data, expected)

    def test_error_reply_is_per_request(self):
        rng = np.random.default_rng(67)
        obj = server_config_obj("s", stub_argv("stub_server.py", "--error-on", "2"))
        with open_model(_parse(obj)) as handle:
            lr = random_image(rng, height=4, width=4)
            handle.upscale(lr, 2)
            with pytest.raises(RunnerError, match="injected failure"):
                handle.upscale(lr, 2)
            # the child is still alive and must serve later requests
            out, _ = handle.upscale(lr, 2)
            assert (out.width, out.height) == (8, 8)

    def test_crash_reports_stderr(self):
        obj = server_config_obj("s", stub_argv("stub_server.py", "--crash-on", "1"))
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        with open_model(_parse(obj)) as handle:
            with pytest.raises(RunnerError, match="boom"):
                handle.upscale(lr, 2)

    def test_garbage_reply_is_protocol_error(self):
        obj = server_config_obj("s", stub_argv("stub_server.py", "--garbage-on", "1"))
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        with open_model(_parse(obj)) as handle:
            with pytest.raises(ProtocolError, match="not valid JSON"):
                handle.upscale(lr, 2)

    def test_echo_baseline(self):
        obj = server_config_obj("s", stub_argv("stub_server.py"))
        with open_model(_parse(obj)) as handle:
            baseline = handle.echo_baseline(samples=3)
        assert baseline is not None
        assert 0 < baseline < 1.0

    def test_echo_baseline_none_for_builtin(self):
        with open_model(_parse(builtin_config_obj("b"))) as handle:
            assert handle.echo_baseline() is None

    def test_close_idempotent(self):
        obj = server_config_obj("s", stub_argv("stub_server.py"))
        handle = open_model(_parse(obj))
        handle.close()
        handle.close()


class TestEnsembleTransforms:
    def test_inverse_closure_all_eight(self):
        rng = np.random.default_rng(68)
        data = rng.uniform(0, 255, size=(3, 5, 7))
        for t in range(8):
            back = transform_inverse(transform_forward(data, t), t)
            np.testing.assert_array_equal(back, data)

    def test_eight_distinct_orientations(self):
        data = np.arange(24.0).reshape(1, 4, 6)
        seen = {transform_forward(data, t).tobytes() for t in range(8)}
        assert len(seen) == 8

    def test_rotation_branches_transpose_dims(self):
        data = np.zeros((1, 4, 6))
        for t in (1, 3, 5, 7):
            assert transform_forward(data, t).shape == (1, 6, 4)
        for t in (0, 2, 4, 6):
            assert transform_forward(data, t).shape == (1, 4, 6)


class TestEnsembleMean:
    def test_identity_fixpoint(self):
        rng = np.random.default_rng(69)
        lr = random_image(rng, height=6, width=8)

        def identity(img, scale):
            return img, 0.001

        out, wall = ensemble_mean(identity, lr, 1)
        np.testing.assert_array_equal(out.data, lr.data)
        assert wall > 0

    def test_equivariant_model_unchanged(self):
        # bicubic resampling commutes with the dihedral group, so the
        # ensemble average must reproduce the plain output
        rng = np.random.default_rng(70)
        lr = random_image(rng, height=10, width=10)
        obj = builtin_config_obj("b")
        with open_model(_parse(obj)) as handle:
            plain, _ = handle.upscale(lr, 2, use_ensemble=False)
            fused, _ = handle.upscale(lr, 2, use_ensemble=True)
        np.testing.assert_allclose(fused.data, plain.data, atol=1e-9)

    def test_wall_sums_branches(self):
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)

        def slowish(img, scale):
            return img, 0.25

        _, wall = ensemble_mean(slowish, lr, 1)
        assert wall >= 8 * 0.25

    def test_mean_of_branches(self):
        # a runner that returns a constant regardless of orientation:
        # the ensemble mean must equal that constant
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)

        def constant(img, scale):
            return PlanarImage(np.full((1, img.height, img.width), 40.0), ColorSpace.GRAY), 0.01

        out, _ = ensemble_mean(constant, lr, 1)
        np.testing.assert_allclose(out.data, 40.0, atol=1e-12)

    def test_inconsistent_branches_rejected(self):
        lr = PlanarImage(np.zeros((1, 4, 4)), ColorSpace.GRAY)
        calls = {"n": 0}

        def flaky(img, scale):
            calls["n"] += 1
            channels = 1 if calls["n"] == 1 else 3
            space = ColorSpace.GRAY if channels == 1 else ColorSpace.RGB
            return PlanarImage(np.zeros((channels, img.height, img.width)), space), 0.01

        with pytest.raises(RunnerError):
            ensemble_mean(flaky, lr, 1)
