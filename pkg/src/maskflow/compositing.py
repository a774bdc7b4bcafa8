"""Cut the tracked object out with a transparent background and paste it
onto another frame sequence.

The cutout is a hard alpha select, not a blend: alpha is 255 exactly where
the mask is 1 and 0 elsewhere, and the paste picks either the foreground
or the background pixel, never a mixture. Resampling (mask to frame,
cutout to background) is nearest-neighbor so alpha stays binary and the
whole operation is deterministic.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Optional, Sequence, Union

import numpy as np

from .errors import DimensionMismatch, FormatError, ValidationError
from .manifest import Manifest, dump_json, frame_filename, load_frame, write_frame
from .mask import BinaryMask, area, invert, nearest_indices, resize_nearest
from .tracking import TrackingTrace

MISMATCH_POLICIES = ("truncate", "loop", "hold")


def cutout(frame: np.ndarray, mask: BinaryMask) -> np.ndarray:
    """RGB frame -> RGBA with alpha 255 inside the mask, 0 outside."""
    arr = np.asarray(frame, dtype=np.uint8)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise FormatError(f"cutout needs an RGB raster, got shape {arr.shape}")
    if (mask.height, mask.width) != arr.shape[:2]:
        raise DimensionMismatch(
            f"mask is {mask.width}x{mask.height}, frame is {arr.shape[1]}x{arr.shape[0]}"
        )
    alpha = np.where(mask.to_array(), 255, 0).astype(np.uint8)
    return np.dstack([arr, alpha])


def resize_raster_nearest(raster: np.ndarray, width: int, height: int) -> np.ndarray:
    """Nearest-neighbor resize of an interleaved raster, all channels alike."""
    arr = np.asarray(raster)
    if (arr.shape[0], arr.shape[1]) == (height, width):
        return arr
    rows = nearest_indices(arr.shape[0], height)
    cols = nearest_indices(arr.shape[1], width)
    return arr[np.ix_(rows, cols)]


def overlay(background: np.ndarray, fg: np.ndarray) -> np.ndarray:
    """Paste an RGBA cutout over an RGB background.

    The cutout is first resized to the background dimensions (nearest
    neighbor, alpha included). Output pixels come from the foreground
    wherever its alpha is nonzero, otherwise from the background.
    """
    bg = np.asarray(background, dtype=np.uint8)
    if bg.ndim != 3 or bg.shape[2] != 3:
        raise FormatError(f"background must be RGB, got shape {bg.shape}")
    fga = np.asarray(fg, dtype=np.uint8)
    if fga.ndim != 3 or fga.shape[2] != 4:
        raise FormatError(f"foreground must be RGBA, got shape {fga.shape}")
    fga = resize_raster_nearest(fga, bg.shape[1], bg.shape[0])
    select = fga[:, :, 3:4] > 0
    return np.where(select, fga[:, :, :3], bg).astype(np.uint8)


def union_labels(
    candidates: Sequence[BinaryMask],
    labels: Iterable[int],
    width: int,
    height: int,
) -> BinaryMask:
    """OR of the retained candidates present in this frame.

    Indices that do not exist in this frame contribute nothing; an empty
    selection yields an empty mask of the given size.
    """
    acc = np.zeros((height, width), dtype=bool)
    for i in sorted(set(labels)):
        if 0 <= i < len(candidates):
            m = candidates[i]
            if (m.width, m.height) != (width, height):
                m = resize_nearest(m, width, height)
            acc |= m.to_array()
    return BinaryMask(acc)


def background_mask_for_inpainting(m: BinaryMask) -> BinaryMask:
    """Complement of an object mask: marks the background as the region
    to fill (1 where content should be synthesized)."""
    return invert(m)


# ---------------------------------------------------------------------------
# Sequence composition
# ---------------------------------------------------------------------------

def output_length(n_fg: int, n_bg: int, mismatch: str) -> int:
    """How many frames a job emits for given input lengths."""
    if mismatch not in MISMATCH_POLICIES:
        raise ValidationError(f"unknown mismatch policy {mismatch!r}, expected one of {MISMATCH_POLICIES}")
    if mismatch == "truncate":
        return min(n_fg, n_bg)
    return n_fg


def background_index(t: int, n_bg: int, mismatch: str) -> int:
    """Which background frame pairs with output frame t."""
    if mismatch == "loop":
        return t % n_bg
    if mismatch == "hold":
        return min(t, n_bg - 1)
    return t  # truncate: t < min(n_fg, n_bg) by construction


@dataclass(frozen=True)
class TrackedMode:
    trace: TrackingTrace


@dataclass(frozen=True)
class LabelSetMode:
    labels: frozenset[int]


CompositeMode = Union[TrackedMode, LabelSetMode]


@dataclass
class CompositeJob:
    foreground: Manifest
    background: Sequence[Path]
    mode: CompositeMode
    mismatch: str = "loop"
    output: Optional[Path] = None


def _frame_mask(job: CompositeJob, t: int) -> Optional[BinaryMask]:
    m = job.foreground
    if isinstance(job.mode, TrackedMode):
        entry = job.mode.trace.entries[t]
        if entry.chosen_index is None:
            return None
        return m.candidate_mask(t, entry.chosen_index)
    mask = union_labels(m.candidate_masks(t), job.mode.labels, m.width, m.height)
    return mask if area(mask) > 0 else None


def _fingerprint(paths: Iterable[Path]) -> str:
    digest = hashlib.sha256()
    for p in paths:
        digest.update(Path(p).read_bytes())
    return "sha256:" + digest.hexdigest()


def composite_sequence(job: CompositeJob) -> int:
    """Run a full job: per-frame cutout + paste, written to the output dir.

    Returns the number of frames written. Frames with nothing to paste
    (no chosen mask, or an empty retained set) emit the background frame
    untouched. Alongside the frames an ``output_manifest.json`` records
    the result dimensions and input fingerprints.
    """
    m = job.foreground
    n_fg = m.frame_count
    n_bg = len(job.background)
    if n_bg == 0:
        raise ValidationError("empty background sequence")
    if isinstance(job.mode, TrackedMode) and len(job.mode.trace.entries) != n_fg:
        raise ValidationError(
            f"trace covers {len(job.mode.trace.entries)} frames, manifest has {n_fg}"
        )
    if isinstance(job.mode, LabelSetMode) and job.mode.labels:
        n_first = len(m.frame(0).candidates)
        bad = [i for i in job.mode.labels if not 0 <= i < n_first]
        if bad:
            raise ValidationError(f"label indices {sorted(bad)} invalid for frame 0 ({n_first} candidates)")
    if job.output is None:
        raise ValidationError("composite job needs an output directory")

    out_dir = Path(job.output)
    out_dir.mkdir(parents=True, exist_ok=True)
    n_out = output_length(n_fg, n_bg, job.mismatch)

    out_w = out_h = None
    for t in range(n_out):
        bg = load_frame(job.background[background_index(t, n_bg, job.mismatch)])
        mask = _frame_mask(job, t)
        if mask is None:
            out = bg
        else:
            fg = m.frame_image(t)
            if fg.shape[:2] != (m.height, m.width):
                raise ValidationError(
                    f"frame {t} image is {fg.shape[1]}x{fg.shape[0]}, "
                    f"manifest declares {m.width}x{m.height}"
                )
            if (mask.width, mask.height) != (m.width, m.height):
                mask = resize_nearest(mask, m.width, m.height)
            out = overlay(bg, cutout(fg, mask))
        write_frame(out, out_dir / frame_filename(t))
        out_h, out_w = out.shape[:2]

    summary = {
        "version": 1,
        "frame_count": n_out,
        "width": out_w,
        "height": out_h,
        "mismatch": job.mismatch,
        "sources": {
            "foreground_frames": n_fg,
            "background_frames": n_bg,
            "background": _fingerprint(job.background),
        },
    }
    (out_dir / "output_manifest.json").write_text(dump_json(summary), encoding="utf-8")
    return n_out
