"""Frame directory -> candidate manifest."""

from __future__ import annotations

import json
import shutil
from pathlib import Path

import numpy as np
from PIL import Image

from . import emit
from .config import AdapterConfig, AdapterError
from .models import load_model


def _list_frames(directory: Path) -> list[Path]:
    frames = sorted(p for p in directory.iterdir() if p.suffix.lower() == ".png")
    if not frames:
        raise AdapterError(f"no PNG frames found in {directory}")
    return frames


def segment_frames(config: AdapterConfig) -> Path:
    """Run the configured backend over every frame and emit the manifest.

    The output directory is self-contained: frame images are copied in,
    candidate masks written next to them, and ``adapter_log.json`` records
    any per-frame inference failures (such frames keep an empty candidate
    list rather than aborting the run).
    """
    frames_dir = Path(config.frames_dir)
    if not frames_dir.is_dir():
        raise AdapterError(f"frames directory not found: {frames_dir}")
    frame_paths = _list_frames(frames_dir)
    model = load_model(config.model, config.mode, config.device)

    out = Path(config.out_dir)
    (out / "frames").mkdir(parents=True, exist_ok=True)
    (out / "masks").mkdir(parents=True, exist_ok=True)

    width = height = None
    frames_payload = []
    errors = []
    for t, src in enumerate(frame_paths):
        with Image.open(src) as img:
            rgb = np.asarray(img.convert("RGB"), dtype=np.uint8)
        if width is None:
            height, width = rgb.shape[:2]
        elif rgb.shape[:2] != (height, width):
            raise AdapterError(
                f"frame {t} is {rgb.shape[1]}x{rgb.shape[0]}, expected {width}x{height}"
            )
        image_rel = f"frames/{t:06d}.png"
        shutil.copyfile(src, out / image_rel)

        try:
            results = model.segment(rgb)
        except Exception as exc:  # inference failure: log, emit empty frame
            errors.append({"frame": t, "error": str(exc)})
            results = []

        candidates = []
        for j, result in enumerate(results):
            if not result.mask.any():
                continue
            mask_rel = f"masks/{t:06d}_{j:03d}.png"
            emit.write_mask(result.mask, out / mask_rel)
            candidates.append(emit.candidate_record(result, mask_rel, width, height))
        frames_payload.append(
            {"frame_index": t, "image_path": image_rel, "candidates": candidates}
        )

    manifest_path = emit.write_manifest(out, width, height, frames_payload)
    log = {"model": config.model, "mode": config.mode, "frames": len(frame_paths), "errors": errors}
    (out / "adapter_log.json").write_text(
        json.dumps(log, indent=2) + "\n", encoding="utf-8"
    )
    return manifest_path
