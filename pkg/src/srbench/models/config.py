"""Model configuration schema (version 1): parsing and full-file validation.

A model config declares everything the harness needs to run one model:
which scales it supports, how to invoke it (built-in kernel or external
process), the input range its adapter expects, whether geometric
self-ensemble applies, an optional per-model border-shave override, and
optional externally reported metric values for reported-vs-measured tables.

Validation is exhaustive: every violation is reported with its field path
rather than stopping at the first problem.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from ..errors import ConfigError
from ..metrics.criteria import ShaveMode, ShaveRule

__all__ = [
    "SCHEMA_VERSION",
    "RunnerKind",
    "InputRange",
    "RunnerSpec",
    "ModelConfig",
    "EXTERNAL_KINDS",
    "BUILTIN_KERNELS",
    "parse_model_config",
    "load_model_config",
    "validate_config_file",
]

SCHEMA_VERSION = 1


class RunnerKind(str, Enum):
    BUILTIN_NEAREST = "builtin-nearest"
    BUILTIN_BILINEAR = "builtin-bilinear"
    BUILTIN_BICUBIC = "builtin-bicubic"
    COMMAND = "command"
    SERVER = "server"


EXTERNAL_KINDS = frozenset({RunnerKind.COMMAND, RunnerKind.SERVER})
BUILTIN_KERNELS = {
    RunnerKind.BUILTIN_NEAREST: "nearest",
    RunnerKind.BUILTIN_BILINEAR: "bilinear",
    RunnerKind.BUILTIN_BICUBIC: "bicubic",
}


class InputRange(str, Enum):
    """Range the model's adapter expects; byte PNGs cross the wire either way."""

    BYTE255 = "byte255"
    UNIT01 = "unit01"


@dataclass(frozen=True)
class RunnerSpec:
    kind: RunnerKind
    argv: tuple[str, ...] = ()
    working_dir: str | None = None
    env: tuple[tuple[str, str], ...] = ()
    startup_timeout: float = 30.0

    def __post_init__(self):
        if self.kind in EXTERNAL_KINDS:
            if not self.argv:
                raise ConfigError(f"runner kind {self.kind.value!r} requires argv")
        elif self.argv:
            raise ConfigError(f"built-in runner {self.kind.value!r} takes no argv")
        if self.kind is RunnerKind.COMMAND:
            joined = " ".join(self.argv)
            for placeholder in ("{input}", "{output}"):
                if placeholder not in joined:
                    raise ConfigError(f"command argv must contain the {placeholder} placeholder")
        if self.startup_timeout <= 0:
            raise ConfigError("startup_timeout must be > 0")

    @property
    def env_dict(self) -> dict[str, str]:
        return dict(self.env)


@dataclass(frozen=True)
class ModelConfig:
    name: str
    scales: frozenset[int]
    runner: RunnerSpec
    input_range: InputRange = InputRange.BYTE255
    self_ensemble: bool = False
    shave_override: ShaveRule | None = None
    reported: tuple[tuple[str, float], ...] = ()
    notes: str = ""

    def __post_init__(self):
        if not self.name or any(ch.isspace() for ch in self.name) or "/" in self.name or "\\" in self.name:
            raise ConfigError(f"model name {self.name!r} must be non-empty without spaces or path separators")
        if not self.scales:
            raise ConfigError("scales must be non-empty")
        if any((not isinstance(s, int)) or isinstance(s, bool) or s < 1 for s in self.scales):
            raise ConfigError("scales must be integers >= 1")

    @property
    def reported_dict(self) -> dict[str, float]:
        return dict(self.reported)

    def to_json_obj(self) -> dict:
        obj: dict = {
            "schema_version": SCHEMA_VERSION,
            "name": self.name,
            "scales": sorted(self.scales),
            "runner": {"kind": self.runner.kind.value},
        }
        if self.runner.argv:
            obj["runner"]["argv"] = list(self.runner.argv)
        if self.runner.working_dir is not None:
            obj["runner"]["working_dir"] = self.runner.working_dir
        if self.runner.env:
            obj["runner"]["env"] = dict(self.runner.env)
        if self.runner.kind in EXTERNAL_KINDS:
            obj["runner"]["startup_timeout"] = self.runner.startup_timeout
        obj["input_range"] = self.input_range.value
        obj["self_ensemble"] = self.self_ensemble
        if self.shave_override is not None:
            if self.shave_override.mode is ShaveMode.SCALE_EQUAL:
                obj["shave_override"] = "scale"
            else:
                obj["shave_override"] = self.shave_override.fixed_amount
        if self.reported:
            obj["reported"] = dict(self.reported)
        if self.notes:
            obj["notes"] = self.notes
        return obj


_KNOWN_KEYS = {
    "schema_version",
    "name",
    "scales",
    "runner",
    "input_range",
    "self_ensemble",
    "shave_override",
    "reported",
    "notes",
}
_KNOWN_RUNNER_KEYS = {"kind", "argv", "working_dir", "env", "startup_timeout"}


def _parse_runner(obj, where: str, outer_diags: list[str]) -> RunnerSpec | None:
    diags: list[str] = []
    if not isinstance(obj, dict):
        outer_diags.append(f"{where}: runner must be an object")
        return None
    for key in sorted(set(obj) - _KNOWN_RUNNER_KEYS):
        diags.append(f"{where}.{key}: unknown field")
    kind_raw = obj.get("kind")
    kind = None
    if kind_raw is None:
        diags.append(f"{where}.kind: required")
    else:
        try:
            kind = RunnerKind(kind_raw)
        except ValueError:
            diags.append(
                f"{where}.kind: unknown runner kind {kind_raw!r}; expected one of "
                + ", ".join(k.value for k in RunnerKind)
            )
    argv_raw = obj.get("argv", [])
    argv: tuple[str, ...] = ()
    if not isinstance(argv_raw, list) or not all(isinstance(a, str) for a in argv_raw):
        diags.append(f"{where}.argv: must be a list of strings")
    else:
        argv = tuple(argv_raw)
        if kind in EXTERNAL_KINDS and not argv:
            diags.append(f"{where}.argv: required for {kind.value!r} runners")
        if kind is not None and kind not in EXTERNAL_KINDS and argv:
            diags.append(f"{where}.argv: not allowed for built-in runner {kind.value!r}")
        if kind is RunnerKind.COMMAND and argv:
            joined = " ".join(argv)
            for placeholder in ("{input}", "{output}"):
                if placeholder not in joined:
                    diags.append(f"{where}.argv: missing the {placeholder} placeholder")
    working_dir = obj.get("working_dir")
    if working_dir is not None and not isinstance(working_dir, str):
        diags.append(f"{where}.working_dir: must be a string")
        working_dir = None
    env_raw = obj.get("env", {})
    env: tuple[tuple[str, str], ...] = ()
    if not isinstance(env_raw, dict) or not all(
        isinstance(k, str) and isinstance(v, str) for k, v in env_raw.items()
    ):
        diags.append(f"{where}.env: must be an object of string values")
    else:
        env = tuple(sorted(env_raw.items()))
    timeout_raw = obj.get("startup_timeout", 30.0)
    timeout = 30.0
    if isinstance(timeout_raw, bool) or not isinstance(timeout_raw, (int, float)):
        diags.append(f"{where}.startup_timeout: must be a number of seconds")
    elif timeout_raw <= 0:
        diags.append(f"{where}.startup_timeout: must be > 0")
    else:
        timeout = float(timeout_raw)
    outer_diags.extend(diags)
    if diags or kind is None:
        return None
    return RunnerSpec(kind=kind, argv=argv, working_dir=working_dir, env=env, startup_timeout=timeout)


def parse_model_config(obj, where: str = "config") -> tuple[ModelConfig | None, list[str]]:
    """Parse one config object, collecting every violation with its field path."""
    diags: list[str] = []
    if not isinstance(obj, dict):
        return None, [f"{where}: must be an object"]
    for key in sorted(set(obj) - _KNOWN_KEYS):
        diags.append(f"{where}.{key}: unknown field")

    version = obj.get("schema_version", SCHEMA_VERSION)
    if version != SCHEMA_VERSION:
        diags.append(f"{where}.schema_version: unsupported version {version!r}; expected {SCHEMA_VERSION}")

    name = obj.get("name")
    if not isinstance(name, str) or not name:
        diags.append(f"{where}.name: required non-empty string")
        name = None
    elif any(ch.isspace() for ch in name) or "/" in name or "\\" in name:
        diags.append(f"{where}.name: must not contain whitespace or path separators")
        name = None

    scales_raw = obj.get("scales")
    scales: frozenset[int] = frozenset()
    if not isinstance(scales_raw, list):
        diags.append(f"{where}.scales: required list of integers")
    elif not scales_raw:
        diags.append(f"{where}.scales: scales must be non-empty")
    elif any(isinstance(s, bool) or not isinstance(s, int) for s in scales_raw):
        diags.append(f"{where}.scales: every scale must be an integer")
    elif any(s < 1 for s in scales_raw):
        diags.append(f"{where}.scales: scales must be >= 1")
    else:
        scales = frozenset(scales_raw)

    runner = None
    if "runner" not in obj:
        diags.append(f"{where}.runner: required")
    else:
        runner = _parse_runner(obj["runner"], f"{where}.runner", diags)

    input_range = InputRange.BYTE255
    if "input_range" in obj:
        try:
            input_range = InputRange(obj["input_range"])
        except ValueError:
            diags.append(
                f"{where}.input_range: must be 'byte255' or 'unit01', got {obj['input_range']!r}"
            )

    self_ensemble = obj.get("self_ensemble", False)
    if not isinstance(self_ensemble, bool):
        diags.append(f"{where}.self_ensemble: must be a boolean")
        self_ensemble = False

    shave_override = None
    if "shave_override" in obj and obj["shave_override"] is not None:
        raw = obj["shave_override"]
        if raw == "scale":
            shave_override = ShaveRule(ShaveMode.SCALE_EQUAL)
        elif isinstance(raw, int) and not isinstance(raw, bool) and raw >= 0:
            shave_override = ShaveRule(ShaveMode.FIXED, raw)
        else:
            diags.append(f"{where}.shave_override: must be 'scale' or an integer >= 0, got {raw!r}")

    reported: tuple[tuple[str, float], ...] = ()
    if "reported" in obj:
        raw = obj["reported"]
        if not isinstance(raw, dict):
            diags.append(f"{where}.reported: must be an object of metric values")
        else:
            pairs = []
            for key in sorted(raw):
                value = raw[key]
                if isinstance(value, bool) or not isinstance(value, (int, float)):
                    diags.append(f"{where}.reported.{key}: must be a number")
                else:
                    pairs.append((key, float(value)))
            reported = tuple(pairs)

    notes = obj.get("notes", "")
    if not isinstance(notes, str):
        diags.append(f"{where}.notes: must be a string")
        notes = ""

    if diags or name is None or runner is None or not scales:
        return None, diags
    return (
        ModelConfig(
            name=name,
            scales=scales,
            runner=runner,
            input_range=input_range,
            self_ensemble=self_ensemble,
            shave_override=shave_override,
            reported=reported,
            notes=notes,
        ),
        [],
    )


def validate_config_file(path) -> list[str]:
    """All violations in one config file; empty list means valid."""
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except OSError as exc:
        return [f"{path}: cannot read file: {exc}"]
    except json.JSONDecodeError as exc:
        return [f"{path}: not valid JSON: {exc}"]
    _, diags = parse_model_config(obj, where=str(path))
    return diags


def load_model_config(path) -> ModelConfig:
    path = Path(path)
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot load model config {path}: {exc}") from exc
    config, diags = parse_model_config(obj, where=str(path))
    if config is None:
        raise ConfigError("invalid model config:\n" + "\n".join(diags))
    return config
