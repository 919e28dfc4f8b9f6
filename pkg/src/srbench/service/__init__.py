"""HTTP service wrapping the benchmark pipeline."""

from .app import create_app

__all__ = ["create_app"]
