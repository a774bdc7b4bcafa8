"""Candidate visualization: tint a frame inside a mask with a palette color.

The blend is an exact 50/50 mix per channel with round-half-up, applied
only inside the mask; pixels outside are copied unchanged. Twelve fixed
palette colors cycle by candidate index so neighboring tiles stay
distinguishable.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, FormatError
from .mask import BinaryMask

PALETTE: tuple[tuple[int, int, int], ...] = (
    (230, 25, 75),
    (60, 180, 75),
    (255, 225, 25),
    (0, 130, 200),
    (245, 130, 48),
    (145, 30, 180),
    (70, 240, 240),
    (240, 50, 230),
    (210, 245, 60),
    (0, 128, 128),
    (220, 190, 255),
    (128, 128, 0),
)


def palette_color(index: int) -> tuple[int, int, int]:
    return PALETTE[index % len(PALETTE)]


def blend_mask(frame: np.ndarray, mask: BinaryMask, color: tuple[int, int, int]) -> np.ndarray:
    """Half frame, half color inside the mask; untouched outside.

    round(0.5*a + 0.5*b) with halves rounding up, computed as (a+b+1)//2
    in integer arithmetic so the result is exact and deterministic.
    """
    arr = np.asarray(frame, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FormatError(f"blend_mask needs an RGB raster, got shape {arr.shape}")
    if (mask.height, mask.width) != arr.shape[:2]:
        raise DimensionMismatch(
            f"mask is {mask.width}x{mask.height}, frame is {arr.shape[1]}x{arr.shape[0]}"
        )
    tint = np.array(color, dtype=np.uint16)
    blended = ((arr.astype(np.uint16) + tint + 1) // 2).astype(np.uint8)
    out = arr.copy()
    inside = mask.to_array()
    out[inside] = blended[inside]
    return out


def render_overlay(frame: np.ndarray, mask: BinaryMask, color_index: int) -> np.ndarray:
    """Palette-colored overlay preview for one candidate."""
    return blend_mask(frame, mask, palette_color(color_index))


def render_mask_raw(mask: BinaryMask) -> np.ndarray:
    """Plain black/white RGB rendering of a mask (no source frame)."""
    level = np.where(mask.to_array(), 255, 0).astype(np.uint8)
    return np.dstack([level, level, level])
