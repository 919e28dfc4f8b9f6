"""Built-in upscalers and external-process runners behind one interface.

External models attach across a process boundary and exchange 8-bit PNG
files on disk (see docs/runner-protocol.md for the normative wire format):

- command runners are invoked once per image with {input}/{output}/{scale}
  placeholders substituted into argv; exit code 0 means success.
- server runners are persistent children driven by one JSON request line on
  stdin per image, answering one JSON reply line on stdout per request.

Timing covers the model invocation only: PNG encode/decode performed by the
harness is excluded, server startup is excluded, and per-invocation process
startup in command mode is included (startup-inclusive by construction).
"""

from __future__ import annotations

import json
import os
import queue
import subprocess
import tempfile
import threading
import time
from abc import ABC, abstractmethod
from collections import deque
from pathlib import Path

import numpy as np

from ..errors import ProtocolError, RunnerError
from ..image import PlanarImage, load_png, save_png
from ..resample import kernel_for, resize_planes
from .config import BUILTIN_KERNELS, ModelConfig, RunnerKind, RunnerSpec
from .ensemble import ensemble_mean
from .timing import TimingSample

__all__ = ["Runner", "make_runner", "ModelHandle", "open_model"]

_MIN_WALL = 1e-9


def _temp_dir() -> tempfile.TemporaryDirectory:
    base = os.environ.get("SRBENCH_TMPDIR") or None
    if base is not None:
        Path(base).mkdir(parents=True, exist_ok=True)
    return tempfile.TemporaryDirectory(prefix="srbench-", dir=base)


class Runner(ABC):
    """Executes one model: PlanarImage in, (PlanarImage, wall seconds) out."""

    @abstractmethod
    def upscale_raw(self, lr: PlanarImage, scale: int) -> tuple[PlanarImage, float]: ...

    def close(self) -> None:
        pass


class BuiltinRunner(Runner):
    """Interpolation baseline; stays float end-to-end (no PNG round trip)."""

    def __init__(self, kernel_name: str):
        self._kernel = kernel_for(kernel_name)

    def upscale_raw(self, lr: PlanarImage, scale: int) -> tuple[PlanarImage, float]:
        t0 = time.perf_counter()
        out = resize_planes(lr.data, lr.width * scale, lr.height * scale, self._kernel, antialias=False)
        wall = max(time.perf_counter() - t0, _MIN_WALL)
        return PlanarImage(out, lr.colorspace), wall


def _substitute(argv: tuple[str, ...], mapping: dict[str, str]) -> list[str]:
    out = []
    for arg in argv:
        for key, value in mapping.items():
            arg = arg.replace(key, value)
        out.append(arg)
    return out


def _child_env(spec: RunnerSpec) -> dict[str, str]:
    env = dict(os.environ)
    env.update(spec.env_dict)
    return env


class CommandRunner(Runner):
    """One subprocess per image; wall time includes process startup."""

    def __init__(self, spec: RunnerSpec, model_name: str):
        self._spec = spec
        self._name = model_name

    def upscale_raw(self, lr: PlanarImage, scale: int) -> tuple[PlanarImage, float]:
        with _temp_dir() as tmp:
            in_path = os.path.join(tmp, "in.png")
            out_path = os.path.join(tmp, "out.png")
            save_png(lr, in_path)
            argv = _substitute(
                self._spec.argv,
                {"{input}": in_path, "{output}": out_path, "{scale}": str(scale)},
            )
            t0 = time.perf_counter()
            try:
                proc = subprocess.run(
                    argv,
                    cwd=self._spec.working_dir,
                    env=_child_env(self._spec),
                    capture_output=True,
                    text=True,
                )
            except OSError as exc:
                raise RunnerError(f"model {self._name!r}: cannot execute {argv[0]!r}: {exc}") from exc
            wall = max(time.perf_counter() - t0, _MIN_WALL)
            if proc.returncode != 0:
                tail = proc.stderr.strip().splitlines()[-5:]
                raise RunnerError(
                    f"model {self._name!r}: command exited with status {proc.returncode}"
                    + (": " + " | ".join(tail) if tail else "")
                )
            if not os.path.exists(out_path):
                raise RunnerError(f"model {self._name!r}: command succeeded but wrote no output image")
            return load_png(out_path), wall


class ServerRunner(Runner):
    """Persistent child process speaking line-delimited JSON, one request at a time."""

    def __init__(self, spec: RunnerSpec, model_name: str):
        self._spec = spec
        self._name = model_name
        self._lock = threading.Lock()
        self._next_id = 1
        self._dead = False
        self._lines: queue.Queue = queue.Queue()
        self._stderr_tail: deque[str] = deque(maxlen=50)
        try:
            self._proc = subprocess.Popen(
                list(spec.argv),
                cwd=spec.working_dir,
                env=_child_env(spec),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                stderr=subprocess.PIPE,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise RunnerError(f"model {model_name!r}: cannot start server {spec.argv[0]!r}: {exc}") from exc
        self._stdout_thread = threading.Thread(target=self._drain_stdout, daemon=True)
        self._stderr_thread = threading.Thread(target=self._drain_stderr, daemon=True)
        self._stdout_thread.start()
        self._stderr_thread.start()
        self._timeout = spec.startup_timeout + 600.0

    def _drain_stdout(self):
        for line in self._proc.stdout:
            self._lines.put(line)
        self._lines.put(None)

    def _drain_stderr(self):
        for line in self._proc.stderr:
            self._stderr_tail.append(line.rstrip("\n"))

    def _fail(self, reason: str) -> RunnerError:
        self._dead = True
        detail = ""
        if self._stderr_tail:
            detail = " | stderr: " + " | ".join(list(self._stderr_tail)[-5:])
        return RunnerError(f"model {self._name!r}: {reason}{detail}")

    def request(self, payload: dict) -> dict:
        """Send one request line, wait for its reply line; strictly sequential."""
        with self._lock:
            if self._dead:
                raise self._fail("server process is not running")
            request_id = self._next_id
            self._next_id += 1
            payload = dict(payload, id=request_id)
            try:
                self._proc.stdin.write(json.dumps(payload) + "\n")
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError):
                raise self._fail("server closed its input (process exited?)") from None
            try:
                line = self._lines.get(timeout=self._timeout)
            except queue.Empty:
                raise self._fail(f"no reply within {self._timeout:.0f}s") from None
            if line is None:
                code = self._proc.poll()
                raise self._fail(f"server exited (status {code}) before replying")
            try:
                reply = json.loads(line)
            except json.JSONDecodeError:
                self._dead = True
                raise ProtocolError(
                    f"model {self._name!r}: reply is not valid JSON: {line.strip()[:200]!r}"
                ) from None
            if not isinstance(reply, dict) or reply.get("id") != request_id:
                self._dead = True
                raise ProtocolError(
                    f"model {self._name!r}: reply id {reply.get('id')!r} does not match request id {request_id}"
                )
            status = reply.get("status")
            if status == "ok":
                return reply
            if status == "error":
                raise RunnerError(
                    f"model {self._name!r}: server reported error: {reply.get('message', '(no message)')}"
                )
            self._dead = True
            raise ProtocolError(f"model {self._name!r}: reply status must be 'ok' or 'error', got {status!r}")

    def upscale_raw(self, lr: PlanarImage, scale: int) -> tuple[PlanarImage, float]:
        with _temp_dir() as tmp:
            in_path = os.path.join(tmp, "in.png")
            out_path = os.path.join(tmp, "out.png")
            save_png(lr, in_path)
            t0 = time.perf_counter()
            self.request({"input": in_path, "output": out_path, "scale": scale})
            wall = max(time.perf_counter() - t0, _MIN_WALL)
            if not os.path.exists(out_path):
                raise RunnerError(f"model {self._name!r}: server replied ok but wrote no output image")
            return load_png(out_path), wall

    def echo_seconds(self) -> float:
        """Wall time of one no-op echo request (serialization overhead probe)."""
        t0 = time.perf_counter()
        self.request({"echo": True})
        return max(time.perf_counter() - t0, _MIN_WALL)

    def close(self) -> None:
        if self._proc.poll() is None:
            try:
                self._proc.stdin.close()
            except OSError:
                pass
            try:
                self._proc.wait(timeout=2.0)
            except subprocess.TimeoutExpired:
                self._proc.terminate()
                try:
                    self._proc.wait(timeout=2.0)
                except subprocess.TimeoutExpired:
                    self._proc.kill()
                    self._proc.wait()
        self._dead = True


def make_runner(config: ModelConfig) -> Runner:
    kind = config.runner.kind
    if kind in BUILTIN_KERNELS:
        return BuiltinRunner(BUILTIN_KERNELS[kind])
    if kind is RunnerKind.COMMAND:
        return CommandRunner(config.runner, config.name)
    if kind is RunnerKind.SERVER:
        return ServerRunner(config.runner, config.name)
    raise RunnerError(f"unknown runner kind {kind!r}")


class ModelHandle:
    """An opened model: enforces the scale and dimension contracts around the runner."""

    def __init__(self, config: ModelConfig, device_label: str = ""):
        self.config = config
        self.device_label = device_label
        self._runner = make_runner(config)

    def _checked_raw(self, lr: PlanarImage, scale: int) -> tuple[PlanarImage, float]:
        out, wall = self._runner.upscale_raw(lr, scale)
        expected = (lr.width * scale, lr.height * scale)
        if (out.width, out.height) != expected:
            raise RunnerError(
                f"model {self.config.name!r} violated the dimension contract: "
                f"expected {expected[0]}x{expected[1]}, got {out.width}x{out.height}"
            )
        return out, wall

    def upscale(
        self, lr: PlanarImage, scale: int, use_ensemble: bool | None = None
    ) -> tuple[PlanarImage, TimingSample]:
        """Upscale one image; returns the [0,255] float output and its timing."""
        if scale not in self.config.scales:
            raise RunnerError(
                f"model {self.config.name!r} does not support scale {scale}; "
                f"supported: {sorted(self.config.scales)}"
            )
        ensemble = self.config.self_ensemble if use_ensemble is None else use_ensemble
        if ensemble:
            out, wall = ensemble_mean(self._checked_raw, lr, scale)
        else:
            out, wall = self._checked_raw(lr, scale)
        clipped = PlanarImage(np.clip(out.data, 0.0, 255.0), out.colorspace)
        return clipped, TimingSample(wall_seconds=wall, device_label=self.device_label)

    def echo_baseline(self, samples: int = 5) -> float | None:
        """Mean echo round-trip for server runners; None for other kinds."""
        if not isinstance(self._runner, ServerRunner):
            return None
        return float(np.mean([self._runner.echo_seconds() for _ in range(samples)]))

    def close(self) -> None:
        self._runner.close()

    def __enter__(self) -> "ModelHandle":
        return self

    def __exit__(self, *exc) -> None:
        self.close()


def open_model(config: ModelConfig, device_label: str = "") -> ModelHandle:
    return ModelHandle(config, device_label)
