"""Write the version-1 candidate manifest.

This module re-implements the documented file format rather than
importing the consumer package: the JSON schema and the 0/255 grayscale
mask images ARE the interface between the two sides. Keys are emitted in
the documented order and floats keep full repr precision so output is
deterministic and round-trip safe.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .models import SegmentResult

MANIFEST_VERSION = 1


def write_mask(mask: np.ndarray, path: Path) -> None:
    Image.fromarray(np.where(mask, 255, 0).astype(np.uint8), "L").save(path, format="PNG")


def candidate_record(result: SegmentResult, mask_rel: str, width: int, height: int) -> dict:
    mask = result.mask
    ys, xs = np.nonzero(mask)
    record: dict = {"mask_path": mask_rel}
    if result.label is not None:
        record["label"] = result.label
    record["area"] = int(mask.sum())
    record["bbox"] = [
        int(xs.min()),
        int(ys.min()),
        int(xs.max()) - int(xs.min()) + 1,
        int(ys.max()) - int(ys.min()) + 1,
    ]
    if "predicted_iou" in result.scores:
        record["predicted_iou"] = result.scores["predicted_iou"]
    if "stability_score" in result.scores:
        record["stability_score"] = result.scores["stability_score"]
    if "point_coords" in result.scores:
        record["point_coords"] = result.scores["point_coords"]
    if result.scores:
        record["crop_box"] = [0, 0, width, height]
    return record


def write_manifest(out_dir: Path, width: int, height: int, frames: list[dict]) -> Path:
    payload = {
        "version": MANIFEST_VERSION,
        "width": width,
        "height": height,
        "frame_count": len(frames),
        "frames": frames,
    }
    path = out_dir / "manifest.json"
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n", encoding="utf-8")
    return path
