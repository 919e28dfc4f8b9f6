"""Thin client for the benchmark service.

By default the service runs in-process over an ASGI transport, so the CLI
works with no server running; pointing `base_url` at a remote instance
switches to real HTTP without changing any call site.
"""

from __future__ import annotations

import asyncio

import httpx

__all__ = ["ServiceError", "ServiceClient"]


class _BlockingASGITransport(httpx.BaseTransport):
    """Drives an ASGI app from synchronous code on a private event loop."""

    def __init__(self, app):
        self._transport = httpx.ASGITransport(app=app)
        self._loop = asyncio.new_event_loop()

    def handle_request(self, request: httpx.Request) -> httpx.Response:
        async def roundtrip():
            response = await self._transport.handle_async_request(request)
            body = b"".join([part async for part in response.stream])
            return httpx.Response(
                status_code=response.status_code,
                headers=response.headers,
                content=body,
                request=request,
                extensions=response.extensions,
            )

        return self._loop.run_until_complete(roundtrip())

    def close(self) -> None:
        self._loop.run_until_complete(self._transport.aclose())
        self._loop.close()


class ServiceError(Exception):
    """Service-reported failure, carrying the CLI exit code for its class."""

    def __init__(self, message: str, exit_code: int):
        super().__init__(message)
        self.exit_code = exit_code


def _raise_for(response: httpx.Response) -> None:
    if response.status_code < 400:
        return
    try:
        body = response.json()
    except ValueError:
        body = {}
    message = body.get("error") or body.get("detail") or response.text or "request failed"
    if not isinstance(message, str):
        message = str(message)
    exit_code = 1 if response.status_code < 500 else 2
    raise ServiceError(message, exit_code)


class ServiceClient:
    def __init__(self, base_url: str | None = None):
        timeout = httpx.Timeout(connect=10.0, read=None, write=60.0, pool=None)
        if base_url:
            self._client = httpx.Client(base_url=base_url.rstrip("/"), timeout=timeout)
        else:
            from .service import create_app

            transport = _BlockingASGITransport(app=create_app())
            self._client = httpx.Client(
                transport=transport, base_url="http://srbench.internal", timeout=timeout
            )

    def close(self) -> None:
        self._client.close()

    def __enter__(self) -> "ServiceClient":
        return self

    def __exit__(self, *exc) -> None:
        self.close()

    def _get(self, path: str) -> dict | list:
        try:
            response = self._client.get(path)
        except httpx.HTTPError as exc:
            raise ServiceError(f"cannot reach service: {exc}", 2) from exc
        _raise_for(response)
        return response.json()

    def _post(self, path: str, payload: dict) -> dict:
        try:
            response = self._client.post(path, json=payload)
        except httpx.HTTPError as exc:
            raise ServiceError(f"cannot reach service: {exc}", 2) from exc
        _raise_for(response)
        return response.json()

    def health(self) -> dict:
        return self._get("/health")

    def evaluators(self) -> list:
        return self._get("/evaluators")

    def criteria_presets(self) -> dict:
        return self._get("/criteria/presets")

    def resolve_criteria(self, criteria, scale: int) -> dict:
        return self._post("/criteria/resolve", {"criteria": criteria, "scale": scale})

    def validate_config(self, config: dict, where: str = "config") -> dict:
        return self._post("/configs/validate", {"config": config, "where": where})

    def prepare_dataset(
        self, hr_dir: str, out_root: str, scales: list[int], force: bool = False, name: str | None = None
    ) -> dict:
        return self._post(
            "/datasets/prepare",
            {"hr_dir": hr_dir, "out_root": out_root, "scales": scales, "force": force, "name": name},
        )

    def run_benchmark(self, **payload) -> dict:
        return self._post("/benchmark/runs", payload)

    def table(self, records: list[dict], format: str = "markdown") -> str:
        return self._post("/reports/table", {"records": records, "format": format})["document"]

    def scatter(self, records: list[dict], x: str, y: str, exclude: list[str]) -> dict:
        return self._post(
            "/reports/scatter", {"records": records, "x": x, "y": y, "exclude": exclude}
        )

    def fit_niqe(
        self, corpus_dir: str, patch_size: int, sharpness_fraction: float, min_images: int
    ) -> dict:
        return self._post(
            "/niqe/fit",
            {
                "corpus_dir": corpus_dir,
                "patch_size": patch_size,
                "sharpness_fraction": sharpness_fraction,
                "min_images": min_images,
            },
        )
