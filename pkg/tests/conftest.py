import sys
from pathlib import Path

import numpy as np
import pytest

from srbench.image import ColorSpace, PlanarImage, quantize, save_png
from srbench.synth import gradient_image

STUB_DIR = Path(__file__).parent / "stubs"


def stub_argv(stub: str, *extra: str) -> list[str]:
    """argv for one of the subprocess stubs in tests/stubs."""
    return [sys.executable, str(STUB_DIR / stub), *extra]


def random_image(rng, channels=3, height=24, width=32, colorspace=ColorSpace.RGB):
    """Random 8-bit-valued image as a float planar image."""
    data = rng.uniform(0.0, 255.0, size=(channels, height, width))
    return quantize(PlanarImage(data, colorspace))


def builtin_config_obj(name: str, kind: str = "builtin-bicubic", **extra) -> dict:
    obj = {
        "schema_version": 1,
        "name": name,
        "scales": [2, 3, 4, 8],
        "runner": {"kind": kind},
    }
    obj.update(extra)
    return obj


def command_config_obj(name: str, argv: list[str], **extra) -> dict:
    obj = {
        "schema_version": 1,
        "name": name,
        "scales": [2, 3, 4],
        "runner": {"kind": "command", "argv": argv},
    }
    obj.update(extra)
    return obj


def server_config_obj(name: str, argv: list[str], **extra) -> dict:
    obj = {
        "schema_version": 1,
        "name": name,
        "scales": [2, 3, 4],
        "runner": {"kind": "server", "argv": argv, "startup_timeout": 30},
    }
    obj.update(extra)
    return obj


@pytest.fixture
def hr_dir(tmp_path):
    """Five small HR gradient images on disk."""
    rng = np.random.default_rng(7)
    root = tmp_path / "hr"
    root.mkdir()
    for i in range(5):
        save_png(gradient_image(rng, width=64, height=48), root / f"img{i}.png")
    return root
