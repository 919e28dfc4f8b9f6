"""Evaluation criteria: color channels, shaving, precision, and metric set.

A criteria record makes the evaluation conditions explicit so two benchmark
runs are comparable exactly when their criteria fingerprints match.  Presets
shipped under ``srbench/data/criteria`` capture the conventions used by the
popular super-resolution methods (including the ``y-float-shave-scale``
condition used for headline numbers: metrics on the Y channel, float
precision, shave amount equal to the upscaling factor).
"""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, replace
from enum import Enum
from importlib import resources
from pathlib import Path

from .._version import __version__
from ..errors import ConfigError, ImageError
from ..image import ColorSpace, PlanarImage, PrecisionMode, extract_y, quantize
from .base import is_registered

__all__ = [
    "ColorChannels",
    "ShaveMode",
    "ShaveRule",
    "EvalCriteria",
    "shave",
    "apply_criteria",
    "parse_criteria",
    "load_criteria",
    "list_presets",
    "preset_info",
]


class ColorChannels(str, Enum):
    Y = "y"
    RGB = "rgb"


class ShaveMode(str, Enum):
    SCALE_EQUAL = "scale"
    FIXED = "fixed"


@dataclass(frozen=True)
class ShaveRule:
    """Border shave rule: equal to the upscaling factor, or a fixed pixel count."""

    mode: ShaveMode
    fixed_amount: int = 0

    def __post_init__(self):
        if self.fixed_amount < 0:
            raise ConfigError("shave amount must be >= 0")

    def amount_for(self, scale: int) -> int:
        return scale if self.mode is ShaveMode.SCALE_EQUAL else self.fixed_amount


@dataclass(frozen=True)
class EvalCriteria:
    color: ColorChannels
    shave: ShaveRule
    precision: PrecisionMode
    metrics: tuple[str, ...] = ("psnr", "ssim")

    def __post_init__(self):
        if not self.metrics:
            raise ConfigError("criteria must name at least one metric")
        for metric_id in self.metrics:
            if not is_registered(metric_id):
                raise ConfigError(f"criteria names unregistered metric {metric_id!r}")

    def with_shave(self, rule: ShaveRule) -> "EvalCriteria":
        return replace(self, shave=rule)

    def to_json_obj(self) -> dict:
        return {
            "color": self.color.value,
            "shave_mode": self.shave.mode.value,
            "shave_fixed_amount": self.shave.fixed_amount,
            "precision": self.precision.value,
            "metrics": list(self.metrics),
        }

    def fingerprint(self) -> str:
        """Hash of every criteria field plus the harness version."""
        payload = dict(self.to_json_obj(), harness_version=__version__)
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode("utf-8"))
        return digest.hexdigest()[:16]


def shave(img: PlanarImage, amount: int) -> PlanarImage:
    """Remove `amount` pixels from all four borders."""
    if amount < 0:
        raise ImageError("shave amount must be >= 0")
    if amount == 0:
        return img
    if 2 * amount >= min(img.width, img.height):
        raise ImageError(
            f"cannot shave {amount} pixels from a {img.width}x{img.height} image"
        )
    return PlanarImage(img.data[:, amount:-amount, amount:-amount], img.colorspace)


def apply_criteria(
    ref: PlanarImage, out: PlanarImage, criteria: EvalCriteria, scale: int
) -> tuple[PlanarImage, PlanarImage]:
    """Prepare a (reference, output) pair for full-reference metrics.

    Applies, in this fixed order: precision quantization, color extraction,
    border shaving.  The order is part of the evaluation contract.
    """
    if (ref.width, ref.height, ref.channels) != (out.width, out.height, out.channels):
        raise ImageError(
            f"image pair differs: reference {ref.width}x{ref.height}x{ref.channels} vs "
            f"output {out.width}x{out.height}x{out.channels}"
        )
    pair = (ref, out)
    if criteria.precision is PrecisionMode.INTEGER8:
        pair = tuple(quantize(im) for im in pair)
    if criteria.color is ColorChannels.Y:
        pair = tuple(extract_y(im) for im in pair)
    amount = criteria.shave.amount_for(scale)
    pair = tuple(shave(im, amount) for im in pair)
    return pair


def _parse_shave(value, scale: int, where: str) -> ShaveRule:
    if value == "scale":
        return ShaveRule(ShaveMode.SCALE_EQUAL)
    if isinstance(value, bool):
        raise ConfigError(f"{where}: shave must be 'scale', '<n>+scale', or an integer")
    if isinstance(value, int):
        return ShaveRule(ShaveMode.FIXED, value)
    if isinstance(value, str) and value.endswith("+scale"):
        base = value[: -len("+scale")]
        if not base.isdigit():
            raise ConfigError(f"{where}: malformed shave rule {value!r}")
        return ShaveRule(ShaveMode.FIXED, int(base) + scale)
    raise ConfigError(f"{where}: shave must be 'scale', '<n>+scale', or an integer, got {value!r}")


_CRITERIA_KEYS = {"color", "precision", "shave", "metrics"}
# metadata carried by preset files, not part of the evaluation contract
_CRITERIA_META_KEYS = {"description", "self_ensemble"}


def parse_criteria(obj: dict, scale: int, where: str = "criteria") -> EvalCriteria:
    """Build EvalCriteria from its JSON form, resolving scale-dependent shaving."""
    if not isinstance(obj, dict):
        raise ConfigError(f"{where}: expected an object, got {type(obj).__name__}")
    unknown = sorted(set(obj) - _CRITERIA_KEYS - _CRITERIA_META_KEYS)
    if unknown:
        raise ConfigError(f"{where}: unknown criteria fields: {', '.join(unknown)}")
    try:
        color = ColorChannels(obj.get("color", "y"))
    except ValueError:
        raise ConfigError(f"{where}: color must be 'y' or 'rgb', got {obj.get('color')!r}") from None
    try:
        precision = PrecisionMode(obj.get("precision", "float"))
    except ValueError:
        raise ConfigError(
            f"{where}: precision must be 'int8' or 'float', got {obj.get('precision')!r}"
        ) from None
    rule = _parse_shave(obj.get("shave", "scale"), scale, where)
    metrics = obj.get("metrics", ["psnr", "ssim"])
    if not isinstance(metrics, list) or not all(isinstance(m, str) for m in metrics):
        raise ConfigError(f"{where}: metrics must be a list of metric ids")
    return EvalCriteria(color=color, shave=rule, precision=precision, metrics=tuple(metrics))


def _preset_dir():
    return resources.files("srbench").joinpath("data", "criteria")


def list_presets() -> list[str]:
    names = [p.name[: -len(".json")] for p in _preset_dir().iterdir() if p.name.endswith(".json")]
    return sorted(names)


def preset_info(name: str) -> dict:
    """Raw preset file contents (including the self-ensemble convention flag)."""
    path = _preset_dir().joinpath(f"{name}.json")
    try:
        text = path.read_text(encoding="utf-8")
    except (FileNotFoundError, KeyError):
        raise ConfigError(f"unknown criteria preset {name!r}; available: {list_presets()}") from None
    return json.loads(text)


def load_criteria(source: str | Path, scale: int) -> EvalCriteria:
    """Load criteria from a preset name or a JSON file path."""
    source_str = str(source)
    path = Path(source_str)
    if path.suffix == ".json" and path.exists():
        try:
            obj = json.loads(path.read_text(encoding="utf-8"))
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read criteria file {path}: {exc}") from exc
        return parse_criteria(obj, scale, where=str(path))
    if "/" not in source_str and "\\" not in source_str and not source_str.endswith(".json"):
        return parse_criteria(preset_info(source_str), scale, where=f"preset {source_str}")
    raise ConfigError(f"criteria source {source_str!r} is neither a preset name nor a readable .json file")
