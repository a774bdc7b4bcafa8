"""Segmentation backends.

Two families:

* ``builtin:*``: deterministic, dependency-light segmenters meant for
  fixtures, CI and offline use. ``builtin:color`` labels flat-color
  regions with the nearest name from a small color table (semantic);
  ``builtin:blob`` emits one proposal per connected same-color component
  with proposal-style metadata (proposals).
* ``hf:<model id>``: pretrained models through the transformers
  pipelines: ``image-segmentation`` for semantic mode, ``mask-generation``
  for proposals mode. Loaded lazily; load failures surface as
  :class:`AdapterError`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import ndimage

from .config import AdapterError

# reference colors for the builtin semantic labeler
COLOR_TABLE: dict[str, tuple[int, int, int]] = {
    "sky": (135, 206, 235),
    "road": (90, 90, 90),
    "elephant": (170, 170, 180),
    "earth": (130, 90, 50),
    "rock": (112, 128, 144),
    "animal": (160, 120, 90),
    "grass": (60, 160, 60),
    "water": (30, 90, 180),
    "person": (230, 190, 160),
    "building": (180, 100, 100),
}


@dataclass(frozen=True)
class SegmentResult:
    """One candidate produced by a backend."""

    mask: np.ndarray  # boolean (h, w)
    label: Optional[str] = None
    scores: dict = field(default_factory=dict)


def nearest_color_name(color: tuple[int, int, int]) -> str:
    """Closest entry of the color table by squared RGB distance."""
    best_name = None
    best = None
    for name in sorted(COLOR_TABLE):
        ref = COLOR_TABLE[name]
        d = sum((int(a) - int(b)) ** 2 for a, b in zip(color, ref))
        if best is None or d < best:
            best = d
            best_name = name
    return best_name


def _distinct_colors(rgb: np.ndarray) -> list[tuple[int, int, int]]:
    """Distinct exact colors, largest region first (ties by color value)."""
    flat = rgb.reshape(-1, 3)
    colors, counts = np.unique(flat, axis=0, return_counts=True)
    order = sorted(range(len(colors)), key=lambda i: (-int(counts[i]), tuple(colors[i])))
    return [tuple(int(v) for v in colors[i]) for i in order]


class ColorSemanticModel:
    """Flat-color semantic labeling: one candidate per distinct color."""

    mode = "semantic"

    def __init__(self, min_area: int = 1) -> None:
        self.min_area = min_area

    def segment(self, rgb: np.ndarray) -> list[SegmentResult]:
        out = []
        for color in _distinct_colors(rgb):
            mask = np.all(rgb == np.array(color, dtype=np.uint8), axis=2)
            if int(mask.sum()) < self.min_area:
                continue
            out.append(SegmentResult(mask=mask, label=nearest_color_name(color)))
        return out


class BlobProposalModel:
    """Connected-component proposals with deterministic metadata.

    Every maximal 4-connected region of uniform color becomes one
    proposal. ``predicted_iou`` is the interior ratio (pixels surviving a
    one-pixel erosion) and ``stability_score`` the bbox fill ratio; both
    are smoothness/compactness proxies in [0, 1], not learned scores.
    """

    mode = "proposals"

    def __init__(self, min_area: int = 1) -> None:
        self.min_area = min_area

    def segment(self, rgb: np.ndarray) -> list[SegmentResult]:
        results = []
        for color in _distinct_colors(rgb):
            color_mask = np.all(rgb == np.array(color, dtype=np.uint8), axis=2)
            labeled, n = ndimage.label(color_mask)
            for i in range(1, n + 1):
                mask = labeled == i
                area = int(mask.sum())
                if area < self.min_area:
                    continue
                ys, xs = np.nonzero(mask)
                bbox_area = (int(xs.max()) - int(xs.min()) + 1) * (int(ys.max()) - int(ys.min()) + 1)
                interior = int(ndimage.binary_erosion(mask).sum())
                results.append(
                    SegmentResult(
                        mask=mask,
                        scores={
                            "predicted_iou": round(interior / area, 6),
                            "stability_score": round(area / bbox_area, 6),
                            "point_coords": [[round(float(xs.mean()), 6),
                                              round(float(ys.mean()), 6)]],
                        },
                    )
                )
        results.sort(key=lambda r: -int(r.mask.sum()))
        return results


class HfSemanticModel:
    """transformers image-segmentation pipeline (DETR/SegFormer style)."""

    mode = "semantic"

    def __init__(self, model_id: str, device: Optional[str] = None) -> None:
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise AdapterError(
                "transformers is not installed; install the [hf] extra to use hf:* models"
            ) from exc
        try:
            kwargs = {"device": device} if device else {}
            self._pipe = pipeline("image-segmentation", model=model_id, **kwargs)
        except Exception as exc:
            raise AdapterError(f"failed to load model {model_id!r}: {exc}") from exc

    def segment(self, rgb: np.ndarray) -> list[SegmentResult]:
        from PIL import Image

        out = []
        for item in self._pipe(Image.fromarray(rgb, "RGB")):
            mask = np.asarray(item["mask"].convert("L")) != 0
            if mask.any():
                out.append(SegmentResult(mask=mask, label=item.get("label")))
        return out


class HfProposalModel:
    """transformers mask-generation pipeline (promptable-proposal style)."""

    mode = "proposals"

    def __init__(self, model_id: str, device: Optional[str] = None) -> None:
        try:
            from transformers import pipeline
        except ImportError as exc:
            raise AdapterError(
                "transformers is not installed; install the [hf] extra to use hf:* models"
            ) from exc
        try:
            kwargs = {"device": device} if device else {}
            self._pipe = pipeline("mask-generation", model=model_id, **kwargs)
        except Exception as exc:
            raise AdapterError(f"failed to load model {model_id!r}: {exc}") from exc

    def segment(self, rgb: np.ndarray) -> list[SegmentResult]:
        from PIL import Image

        result = self._pipe(Image.fromarray(rgb, "RGB"))
        masks = result.get("masks", [])
        scores = result.get("scores", [None] * len(masks))
        out = []
        for mask, score in zip(masks, scores):
            arr = np.asarray(mask).astype(bool)
            if not arr.any():
                continue
            meta = {}
            if score is not None:
                meta["predicted_iou"] = float(score)
            out.append(SegmentResult(mask=arr, scores=meta))
        return out


def load_model(model_id: str, mode: str, device: Optional[str] = None):
    """Resolve a model id, checking it supports the requested mode."""
    if model_id == "builtin:color":
        model = ColorSemanticModel()
    elif model_id == "builtin:blob":
        model = BlobProposalModel()
    elif model_id.startswith("hf:"):
        name = model_id[3:]
        model = HfSemanticModel(name, device) if mode == "semantic" else HfProposalModel(name, device)
    else:
        raise AdapterError(
            f"unknown model {model_id!r}; use builtin:color, builtin:blob or hf:<model id>"
        )
    if model.mode != mode:
        raise AdapterError(f"model {model_id!r} supports mode {model.mode!r}, not {mode!r}")
    return model
