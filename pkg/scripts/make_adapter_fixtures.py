#!/usr/bin/env python3
"""Regenerate the adapters' bicubic cross-check fixtures.

Writes pairs of PNGs (input + expected bicubic upscale, quantized to 8-bit)
plus a manifest into adapters/test/fixtures/.  The expected images come from
this package's own resampler, so the TypeScript port can be validated against
the native implementation through nothing but image files.

Run from the repository root:

    python3 scripts/make_adapter_fixtures.py
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from srbench.image import PlanarImage, quantize, save_png
from srbench.resample import resize

FIXTURE_DIR = Path(__file__).resolve().parent.parent / "adapters" / "test" / "fixtures"

# Mixed sizes (odd ones included) and every supported scale.
CASES = [
    ("noise-16x12-x2", 16, 12, 2),
    ("noise-17x13-x2", 17, 13, 2),
    ("noise-24x24-x2", 24, 24, 2),
    ("noise-16x12-x3", 16, 12, 3),
    ("noise-21x15-x3", 21, 15, 3),
    ("noise-16x12-x4", 16, 12, 4),
    ("noise-19x11-x4", 19, 11, 4),
    ("noise-32x20-x4", 32, 20, 4),
    ("noise-12x9-x8", 12, 9, 8),
    ("gradient-20x14-x3", 20, 14, 3),
]


def make_image(name: str, width: int, height: int, rng: np.random.Generator) -> PlanarImage:
    if name.startswith("gradient"):
        x = np.linspace(0.0, 255.0, width)
        y = np.linspace(0.0, 255.0, height)
        base = np.add.outer(y, x) / 2.0
        data = np.stack([base, base[::-1, :], base[:, ::-1]])
    else:
        data = rng.uniform(0.0, 255.0, size=(3, height, width))
    return PlanarImage(np.floor(data + 0.5))


def main() -> None:
    FIXTURE_DIR.mkdir(parents=True, exist_ok=True)
    rng = np.random.default_rng(20240817)
    manifest = []
    for name, width, height, scale in CASES:
        lr = make_image(name, width, height, rng)
        sr = quantize(resize(lr, width * scale, height * scale))
        lr_path = FIXTURE_DIR / f"{name}-lr.png"
        sr_path = FIXTURE_DIR / f"{name}-sr.png"
        save_png(lr, lr_path)
        save_png(sr, sr_path)
        manifest.append(
            {
                "name": name,
                "scale": scale,
                "lr": lr_path.name,
                "sr": sr_path.name,
                "width": width,
                "height": height,
            }
        )
    (FIXTURE_DIR / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    print(f"wrote {len(manifest)} fixture pairs to {FIXTURE_DIR}")


if __name__ == "__main__":
    main()
