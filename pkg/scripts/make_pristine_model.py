"""Regenerate the shipped pristine model for the no-reference metric.

The corpus recipe is deterministic (fixed seed), so the output file only
changes when the feature definition or the recipe changes.  Bump the data
file's name suffix when that happens; scores are only comparable between
runs that used the same pristine model.

Usage: python3 scripts/make_pristine_model.py [out_path]
"""

import sys
from pathlib import Path

import numpy as np
from scipy import ndimage

from srbench.image import ColorSpace, PlanarImage
from srbench.metrics.niqe import fit_pristine_model, niqe
from srbench.synth import make_pristine_corpus


def main() -> int:
    out = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "src" / "srbench" / "data" / "niqe_pristine_v1.json"
    )
    corpus = make_pristine_corpus()
    model = fit_pristine_model(corpus)
    out.parent.mkdir(parents=True, exist_ok=True)
    model.save(out)
    print(f"wrote {out}")

    # sanity: blurring should move images away from the pristine cloud
    worse = 0
    checked = corpus[:20]
    for img in checked:
        blurred = PlanarImage(ndimage.gaussian_filter(img.data[0], 2.0)[np.newaxis], ColorSpace.GRAY)
        if niqe(blurred, model).value > niqe(img, model).value:
            worse += 1
    print(f"blur ordering holds for {worse}/{len(checked)} corpus images")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
