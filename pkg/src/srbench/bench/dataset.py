"""Benchmark dataset layout and preparation.

Layout: `<root>/HR/*.png`, `<root>/LR/x{scale}/*.png`, `<root>/manifest.json`.
Pairing is by identical file stems.  LR images are generated from HR via the
reference bicubic downscaler (center-cropping HR to a scale multiple first;
the crop is noted in the manifest).  Preparation is idempotent: files whose
checksum matches the manifest are skipped, and mismatching files are refused
unless forced.
"""

from __future__ import annotations

import hashlib
import json
import shutil
from dataclasses import dataclass
from pathlib import Path

from ..errors import DatasetError
from ..image import load_png, save_png
from ..resample import SUPPORTED_SCALES, downscale_hr

MANIFEST_VERSION = 1

__all__ = ["DatasetSpec", "prepare_dataset", "load_dataset", "hr_dir", "lr_dir"]


@dataclass(frozen=True)
class DatasetSpec:
    name: str
    root: Path
    scales: tuple[int, ...]
    stems: tuple[str, ...]

    def lr_stems(self, scale: int) -> tuple[str, ...]:
        d = lr_dir(self.root, scale)
        if not d.is_dir():
            return ()
        return tuple(sorted(p.stem for p in d.glob("*.png")))


def hr_dir(root) -> Path:
    return Path(root) / "HR"


def lr_dir(root, scale: int) -> Path:
    return Path(root) / "LR" / f"x{scale}"


def _sha256_file(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _read_manifest(root: Path) -> dict:
    path = Path(root) / "manifest.json"
    if not path.exists():
        return {}
    try:
        return json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DatasetError(f"unreadable dataset manifest {path}: {exc}") from exc


def prepare_dataset(
    hr_source, out_root, scales, force: bool = False, name: str | None = None
) -> tuple[DatasetSpec, list[str]]:
    """Build `<out_root>` from the PNGs in `hr_source` for the given scales.

    Returns the dataset spec plus human-readable notes (crops, overwrites).
    """
    hr_source = Path(hr_source)
    out_root = Path(out_root)
    scales = sorted(set(int(s) for s in scales))
    if not scales:
        raise DatasetError("at least one scale is required")
    unsupported = [s for s in scales if s not in SUPPORTED_SCALES]
    if unsupported:
        raise DatasetError(
            f"unsupported scales {unsupported}; supported: {list(SUPPORTED_SCALES)}"
        )
    if not hr_source.is_dir():
        raise DatasetError(f"HR source directory {hr_source} does not exist")
    hr_files = sorted(hr_source.glob("*.png"))
    if not hr_files:
        raise DatasetError(f"no PNG images found in {hr_source}")

    manifest = _read_manifest(out_root)
    known = dict(manifest.get("files", {}))
    notes: list[str] = []
    # entries for files still on disk carry forward (untouched scales keep their records)
    files: dict[str, str] = {k: v for k, v in known.items() if (out_root / k).exists()}
    crops: dict[str, dict] = {
        k: v for k, v in manifest.get("crops", {}).items() if k in files
    }

    hr_out = hr_dir(out_root)
    hr_out.mkdir(parents=True, exist_ok=True)

    def rel_key(path: Path) -> str:
        return path.relative_to(out_root).as_posix()

    for src in hr_files:
        target = hr_out / src.name
        key = rel_key(target)
        source_sum = _sha256_file(src)
        if target.exists():
            if src.resolve() == target.resolve():
                files[key] = source_sum
                continue
            actual = _sha256_file(target)
            if actual == source_sum:
                files[key] = actual
                continue
            if not force:
                raise DatasetError(
                    f"{target} already exists with a different checksum; pass force to overwrite"
                )
            notes.append(f"overwrote {key}")
        shutil.copyfile(src, target)
        files[key] = source_sum

    # HR content that changed invalidates remembered LR checksums for that stem,
    # so the LR files get regenerated instead of silently kept stale.
    for key in [k for k in files if k.startswith("HR/")]:
        if known.get(key) is not None and known[key] != files[key]:
            stem_name = Path(key).name
            for lr_key in [k for k in known if k.startswith("LR/") and Path(k).name == stem_name]:
                del known[lr_key]
                files.pop(lr_key, None)
                crops.pop(lr_key, None)

    for scale in scales:
        out_dir = lr_dir(out_root, scale)
        out_dir.mkdir(parents=True, exist_ok=True)
        for src in hr_files:
            target = out_dir / src.name
            key = rel_key(target)
            if target.exists():
                actual = _sha256_file(target)
                if known.get(key) == actual:
                    files[key] = actual
                    crop = manifest.get("crops", {}).get(key)
                    if crop:
                        crops[key] = crop
                    continue
                if not force:
                    raise DatasetError(
                        f"{target} already exists with an unexpected checksum; pass force to overwrite"
                    )
                notes.append(f"overwrote {key}")
            hr_img = load_png(hr_out / src.name)
            if hr_img.width < scale or hr_img.height < scale:
                raise DatasetError(
                    f"{src.name} is {hr_img.width}x{hr_img.height}, smaller than scale {scale}"
                )
            lr_img = downscale_hr(hr_img, scale)
            cropped_w, cropped_h = lr_img.width * scale, lr_img.height * scale
            if (cropped_w, cropped_h) != (hr_img.width, hr_img.height):
                crops[key] = {
                    "hr_size": [hr_img.width, hr_img.height],
                    "cropped_to": [cropped_w, cropped_h],
                }
                notes.append(
                    f"{key}: HR {hr_img.width}x{hr_img.height} center-cropped to "
                    f"{cropped_w}x{cropped_h} before downscale"
                )
            save_png(lr_img, target)
            files[key] = _sha256_file(target)

    stems = tuple(sorted(p.stem for p in hr_out.glob("*.png")))
    all_scales = sorted(set(scales) | {int(s) for s in manifest.get("scales", []) if lr_dir(out_root, int(s)).is_dir()})
    dataset_name = name or manifest.get("name") or out_root.name
    new_manifest = {
        "manifest_version": MANIFEST_VERSION,
        "name": dataset_name,
        "scales": all_scales,
        "stems": list(stems),
        "files": dict(sorted(files.items())),
        "crops": dict(sorted(crops.items())),
    }
    manifest_text = json.dumps(new_manifest, indent=2, sort_keys=True) + "\n"
    manifest_path = out_root / "manifest.json"
    if not manifest_path.exists() or manifest_path.read_text(encoding="utf-8") != manifest_text:
        manifest_path.write_text(manifest_text, encoding="utf-8")
    return DatasetSpec(dataset_name, out_root, tuple(all_scales), stems), notes


def load_dataset(root) -> DatasetSpec:
    """Open an existing dataset directory, validating layout and pairing."""
    root = Path(root)
    hr = hr_dir(root)
    if not hr.is_dir():
        raise DatasetError(f"{root} has no HR/ directory")
    hr_stems = {p.stem for p in hr.glob("*.png")}
    if not hr_stems:
        raise DatasetError(f"{hr} contains no PNG images")
    manifest = _read_manifest(root)
    scales = []
    lr_root = root / "LR"
    if lr_root.is_dir():
        for sub in sorted(lr_root.iterdir()):
            if sub.is_dir() and sub.name.startswith("x") and sub.name[1:].isdigit():
                scale = int(sub.name[1:])
                scales.append(scale)
                missing = sorted(p.stem for p in sub.glob("*.png") if p.stem not in hr_stems)
                if missing:
                    raise DatasetError(
                        f"{sub} has LR images with no matching HR stem: {', '.join(missing[:5])}"
                    )
    name = manifest.get("name", root.name)
    return DatasetSpec(name, root, tuple(scales), tuple(sorted(hr_stems)))
